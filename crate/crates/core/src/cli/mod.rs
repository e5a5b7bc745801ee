//! Command-line front end.
//!
//! `surface-euler <subcommand> --config file.json [--out dir] [--verbose] [--dump-operators]`
//!
//! Every run writes `{experiment}_{meshtag}_{timestamp}_*` files: a JSON summary,
//! CSV time series where applicable and raw cochains. The summary is also
//! printed on stdout. Exit status is 0 on success, 2 for invalid input and 3
//! for numerical failure; errors are reported on stderr as a single
//! `error[kind]: message` line.

mod config;
mod field_spec;
mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

pub use config::{CheckTolerances, Experiment, ExperimentConfig, ExperimentParams, MeshSource};
pub use field_spec::{parse_field_spec, FieldContext};
pub use output::{read_cochain, write_cochain, write_matrix_market, RunFiles};

use crate::dec::{Cochain, OperatorSet};
use crate::dynamics::{integrate, recover_pressure, FlowState, Forcing};
use crate::error::{Error, Result};
use crate::hodge::{harmonic_basis, hodge_decompose, lambda_min, HarmonicBasis};
use crate::mesh::SurfaceMesh;
use crate::stability::{
    enstrophy_conservation_check, linear_growth_check, linearize_thm1, run_thm2, stream_bound_check,
};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SURFACE_EULER_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "surface-euler",
    version,
    about = "Incompressible Euler flows on closed triangulated surfaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertex, edge and face counts, Euler characteristic and genus
    MeshInfo(RunArgs),
    /// Hodge-Helmholtz split of a 1-form
    Decompose(RunArgs),
    /// Nonlinear vorticity-harmonic flow
    Flow(RunArgs),
    /// Linearization around a steady harmonic flow
    StabilityThm1(RunArgs),
    /// Harmonic perturbations of an arbitrary flow
    StabilityThm2(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON experiment configuration
    #[arg(long)]
    pub config: PathBuf,
    /// output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(short, long)]
    pub verbose: bool,
    /// also write the operator matrices in Matrix Market format
    #[arg(long)]
    pub dump_operators: bool,
}

impl Command {
    fn split(&self) -> (Experiment, &RunArgs) {
        match self {
            Command::MeshInfo(a) => (Experiment::MeshInfo, a),
            Command::Decompose(a) => (Experiment::Decompose, a),
            Command::Flow(a) => (Experiment::Flow, a),
            Command::StabilityThm1(a) => (Experiment::StabilityThm1, a),
            Command::StabilityThm2(a) => (Experiment::StabilityThm2, a),
        }
    }
}

/// Result of a successful run.
#[derive(Debug)]
pub struct RunOutcome {
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

/// Exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Parses `args` (program name first), runs and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (experiment, args) = cli.command.split();
    let level = if args.verbose {
        log::LevelFilter::Info
    } else {
        log::LevelFilter::Warn
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match run_from_args(experiment, args) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            0
        }
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {msg}", e.kind());
            exit_code(&e)
        }
    }
}

fn run_from_args(requested: Experiment, args: &RunArgs) -> Result<RunOutcome> {
    let config = ExperimentConfig::load(&args.config)?;
    let experiment = config.select(requested)?;
    let base = args.config.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out = match (&args.out, &config.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => base.join(o),
        (None, None) => {
            std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from)
        }
    };
    run(&config, experiment, &base, &out, args.dump_operators)
}

/// Executes `experiment` as described by `config`; relative paths inside the
/// config resolve against `base_dir`.
pub fn run(
    config: &ExperimentConfig,
    experiment: Experiment,
    base_dir: &Path,
    out_dir: &Path,
    dump_operators: bool,
) -> Result<RunOutcome> {
    config.validate()?;
    let experiment = config.select(experiment)?;
    let mesh = config.mesh.build(base_dir)?;
    let topology = mesh.topology();
    log::info!(
        "mesh {}: V={} E={} F={} genus={}",
        config.mesh.tag(),
        topology.vertices,
        topology.edges,
        topology.faces,
        topology.genus
    );
    let mut files = RunFiles::create(out_dir, experiment.name(), &config.mesh.tag())?;

    let needs_ops = dump_operators || experiment != Experiment::MeshInfo;
    let ops = if needs_ops {
        Some(OperatorSet::assemble_with(&mesh, config.operators)?)
    } else {
        None
    };
    if let (true, Some(ops)) = (dump_operators, &ops) {
        dump(ops, &mut files)?;
    }

    let summary = match (experiment, &ops) {
        (Experiment::MeshInfo, _) => serde_json::to_value(&topology)?,
        (_, None) => unreachable!("operators are assembled for every experiment but mesh-info"),
        (e, Some(ops)) => {
            let basis = basis_for(ops, &mesh)?;
            log::info!("harmonic basis of dimension {}", basis.dim());
            let ctx = FieldContext {
                ops,
                basis: &basis,
                base_dir,
                seed: config.seed,
            };
            let mut body = match e {
                Experiment::Decompose => decompose(&ctx, &config.params, &mut files)?,
                Experiment::Flow => flow(&ctx, &config.params, &mut files)?,
                Experiment::StabilityThm1 => thm1(&ctx, &config.params, &mut files)?,
                Experiment::StabilityThm2 => thm2(&ctx, &config.params, &mut files)?,
                Experiment::MeshInfo => unreachable!(),
            };
            body["experiment"] = json!(e.name());
            body["mesh"] = json!(config.mesh.tag());
            body["topology"] = serde_json::to_value(&topology)?;
            body
        }
    };
    let path = files.path("summary.json");
    output::write_json(&path, &summary)?;
    Ok(RunOutcome {
        summary,
        files: files.written().to_vec(),
    })
}

fn basis_for(ops: &OperatorSet, mesh: &SurfaceMesh) -> Result<HarmonicBasis> {
    match usize::try_from(mesh.topology().genus) {
        Ok(0) => Ok(HarmonicBasis::trivial()),
        Ok(g) => harmonic_basis(ops, g, ops.options().harmonic_tol),
        Err(_) => Err(Error::InvalidMesh("negative genus".into())),
    }
}

fn dump(ops: &OperatorSet, files: &mut RunFiles) -> Result<()> {
    for (name, m) in [
        ("d0", ops.d0()),
        ("d1", ops.d1()),
        ("m0", ops.m0()),
        ("m1", ops.m1()),
        ("m2", ops.m2()),
        ("w1", ops.w1()),
        ("stiffness", ops.stiffness()),
    ] {
        write_matrix_market(&files.path(&format!("{name}.mtx")), m)?;
    }
    Ok(())
}

fn zero_mean_field(ctx: &FieldContext, spec: &str) -> Result<Cochain> {
    let mut w = parse_field_spec(spec, 0, ctx)?;
    ctx.ops.remove_mean(w.values_mut());
    Ok(w)
}

fn coefficient_header(prefix: &[&str], k: usize) -> Vec<String> {
    prefix
        .iter()
        .map(|s| s.to_string())
        .chain((1..=k).map(|i| format!("c_{i}")))
        .collect()
}

fn decompose(ctx: &FieldContext, p: &ExperimentParams, files: &mut RunFiles) -> Result<Value> {
    let ops = ctx.ops;
    let v = parse_field_spec(&p.field, 1, ctx)?;
    let d = hodge_decompose(ops, ctx.basis, &v)?;
    for (name, c) in [
        ("psi", &d.psi),
        ("coexact", &d.coexact),
        ("gamma", &d.gamma),
        ("remainder", &d.remainder),
    ] {
        write_cochain(&files.path(&format!("{name}.bin")), c)?;
        files.path(&format!("{name}.json"));
    }
    Ok(json!({
        "field": p.field,
        "norm_field": ops.norm(&v)?,
        "norm_coexact": ops.norm(&d.coexact)?,
        "norm_harmonic": ops.norm(&d.gamma)?,
        "norm_remainder": ops.norm(&d.remainder)?,
        "coefficients": d.coefficients,
        "orthogonality_defect": d.orthogonality_defect(ops)?,
        "iterations": d.iterations,
        "basis": ctx.basis,
    }))
}

fn flow(ctx: &FieldContext, p: &ExperimentParams, files: &mut RunFiles) -> Result<Value> {
    let (ops, basis) = (ctx.ops, ctx.basis);
    let omega = zero_mean_field(ctx, &p.omega0)?;
    let c0 = p.c0.clone().unwrap_or_else(|| vec![0.0; basis.dim()]);
    let state = FlowState::new(ops, basis, 0.0, omega, c0)?;
    let forcing = match &p.forcing {
        Some(spec) => Some(Forcing::new(ops, basis, parse_field_spec(spec, 1, ctx)?)?),
        None => None,
    };
    let tr = integrate(
        &state,
        p.t_end,
        p.dt,
        p.sample_every,
        forcing.as_ref(),
        ops,
        basis,
    )?;
    let rows: Vec<Vec<f64>> = tr
        .diagnostics
        .iter()
        .map(|d| {
            let mut r = vec![d.t, d.energy, d.enstrophy, d.total_vorticity, d.c_norm];
            r.extend(&d.c);
            r
        })
        .collect();
    let header = coefficient_header(
        &["t", "energy", "enstrophy", "total_vorticity", "c_norm"],
        basis.dim(),
    );
    output::write_series(&files.path("series.csv"), &header, &rows)?;
    let last = tr.last().expect("a trajectory holds its initial state");
    write_cochain(&files.path("omega.bin"), &last.omega)?;
    files.path("omega.json");
    if p.pressure {
        let pressure = recover_pressure(last, forcing.as_ref(), ops, basis)?;
        write_cochain(&files.path("pressure.bin"), &pressure)?;
        files.path("pressure.json");
    }
    let max_tv = tr
        .diagnostics
        .iter()
        .map(|d| d.total_vorticity.abs())
        .fold(0.0, f64::max);
    Ok(json!({
        "omega0": p.omega0,
        "t_end": last.t,
        "dt": p.dt,
        "samples": tr.diagnostics.len(),
        "energy_drift": tr.relative_drift(|d| d.energy),
        "enstrophy_drift": tr.relative_drift(|d| d.enstrophy),
        "max_abs_total_vorticity": max_tv,
        "final_c": last.c,
    }))
}

fn thm1(ctx: &FieldContext, p: &ExperimentParams, files: &mut RunFiles) -> Result<Value> {
    let ops = ctx.ops;
    let gamma0 = parse_field_spec(&p.gamma0, 1, ctx)?;
    let omega = zero_mean_field(ctx, &p.omega0)?;
    let report = linearize_thm1(
        ops,
        ctx.basis,
        &gamma0,
        &omega,
        p.t_end,
        p.dt,
        p.sample_every,
    )?;
    let spectral = lambda_min(ops)?;
    let bound = report.stream_bound(&spectral);
    let rows: Vec<Vec<f64>> = (0..report.times.len())
        .map(|i| {
            let mut r = vec![
                report.times[i],
                report.enstrophy[i],
                report.stream[i],
                bound[i],
            ];
            r.extend(&report.c[i]);
            r
        })
        .collect();
    let header = coefficient_header(
        &["t", "enstrophy", "stream", "stream_bound"],
        ctx.basis.dim(),
    );
    output::write_series(&files.path("series.csv"), &header, &rows)?;
    if let Some(w) = report.omega.last() {
        write_cochain(&files.path("omega.bin"), w)?;
        files.path("omega.json");
    }
    let tol = &p.checks;
    Ok(json!({
        "gamma0": p.gamma0,
        "omega0": p.omega0,
        "lambda_min": spectral.lambda_min,
        "gamma0_residual": report.gamma0_residual,
        "bound_slopes": report.bound_slopes,
        "constancy": report.constancy,
        "enstrophy_drift": report.enstrophy_drift(),
        "growth_ratio": report.growth_ratio(),
        "checks": {
            "enstrophy_conserved": enstrophy_conservation_check(&report, tol.enstrophy),
            "linear_growth": linear_growth_check(&report, tol.growth),
            "stream_bound": stream_bound_check(&report, &spectral, tol.stream),
        },
        "tolerances": tol,
    }))
}

fn thm2(ctx: &FieldContext, p: &ExperimentParams, files: &mut RunFiles) -> Result<Value> {
    let k = ctx.basis.dim();
    if k == 0 {
        return Err(Error::NoHarmonicForms);
    }
    let omega = zero_mean_field(ctx, &p.omega0)?;
    let c0 = p.c0.clone().unwrap_or_else(|| {
        let mut e = vec![0.0; k];
        e[0] = 1.0;
        e
    });
    if c0.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            found: c0.len(),
        });
    }
    let report = run_thm2(ctx.ops, ctx.basis, &omega, &c0, p.t_end, p.n_steps)?;
    let s = &report.series;
    let rows: Vec<Vec<f64>> = (0..s.times.len())
        .map(|i| {
            let mut r = vec![s.times[i], s.norms[i]];
            r.extend(&s.c[i]);
            r
        })
        .collect();
    output::write_series(
        &files.path("series.csv"),
        &coefficient_header(&["t", "norm"], k),
        &rows,
    )?;
    Ok(json!({
        "omega0": p.omega0,
        "a": report.a,
        "skew_defect": report.skew_defect,
        "norm_drift": report.norm_drift,
        "final_c": s.c.last(),
    }))
}
