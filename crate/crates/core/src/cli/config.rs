use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dec::OperatorOptions;
use crate::error::{Error, Result};
use crate::mesh::{self, SurfaceMesh};

/// Pipeline selected by a subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    MeshInfo,
    Decompose,
    Flow,
    StabilityThm1,
    StabilityThm2,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::MeshInfo => "mesh-info",
            Experiment::Decompose => "decompose",
            Experiment::Flow => "flow",
            Experiment::StabilityThm1 => "stability-thm1",
            Experiment::StabilityThm2 => "stability-thm2",
        }
    }
}

fn one() -> f64 {
    1.0
}

/// Where the surface comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    FlatTorus {
        nx: usize,
        ny: usize,
        #[serde(default = "one")]
        lx: f64,
        #[serde(default = "one")]
        ly: f64,
    },
    EmbeddedTorus {
        nu: usize,
        nv: usize,
        major: f64,
        minor: f64,
    },
    Genus2 {
        #[serde(default)]
        subdivision: usize,
    },
    Icosahedron,
    Tetrahedron,
    Off {
        path: PathBuf,
    },
}

impl MeshSource {
    pub fn build(&self, base: &Path) -> Result<SurfaceMesh> {
        match self {
            MeshSource::FlatTorus { nx, ny, lx, ly } => {
                mesh::generate_flat_torus(*nx, *ny, *lx, *ly)
            }
            MeshSource::EmbeddedTorus {
                nu,
                nv,
                major,
                minor,
            } => mesh::generate_embedded_torus(*nu, *nv, *major, *minor),
            MeshSource::Genus2 { subdivision } => mesh::generate_genus2(*subdivision),
            MeshSource::Icosahedron => Ok(mesh::icosahedron()),
            MeshSource::Tetrahedron => Ok(mesh::tetrahedron()),
            MeshSource::Off { path } => mesh::load_off(base.join(path)),
        }
    }

    /// Short tag used in output file names.
    pub fn tag(&self) -> String {
        match self {
            MeshSource::FlatTorus { nx, ny, .. } => format!("torus{nx}x{ny}"),
            MeshSource::EmbeddedTorus { nu, nv, .. } => format!("ringtorus{nu}x{nv}"),
            MeshSource::Genus2 { subdivision } => format!("genus2s{subdivision}"),
            MeshSource::Icosahedron => "icosahedron".into(),
            MeshSource::Tetrahedron => "tetrahedron".into(),
            MeshSource::Off { path } => {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("mesh");
                let clean: String = stem
                    .chars()
                    .map(|c| {
                        if c.is_ascii_alphanumeric() || c == '-' {
                            c
                        } else {
                            '-'
                        }
                    })
                    .collect();
                format!("off-{clean}")
            }
        }
    }
}

/// Check thresholds reported as pass/fail flags in summaries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckTolerances {
    pub enstrophy: f64,
    pub growth: f64,
    pub stream: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            enstrophy: 1e-3,
            growth: 0.05,
            stream: 0.05,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    /// Cayley steps for `stability-thm2`
    pub n_steps: usize,
    /// vorticity field spec (`ω`, `ω̃₀` or `ω₀` depending on the experiment)
    pub omega0: String,
    /// harmonic coefficients; zeros for `flow` and `e₁` for `stability-thm2` when absent
    pub c0: Option<Vec<f64>>,
    /// steady harmonic flow of `stability-thm1`
    pub gamma0: String,
    /// 1-form decomposed by `decompose`
    pub field: String,
    /// constant body force of `flow`
    pub forcing: Option<String>,
    /// write the pressure of the final `flow` state
    pub pressure: bool,
    pub checks: CheckTolerances,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            t_end: 1.0,
            dt: 1e-3,
            sample_every: 10,
            n_steps: 1000,
            omega0: "zero".into(),
            c0: None,
            gamma0: "harmonic:1".into(),
            field: "random".into(),
            forcing: None,
            pressure: false,
            checks: CheckTolerances::default(),
        }
    }
}

/// A complete, self-contained experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mesh: MeshSource,
    #[serde(default)]
    pub operators: OperatorOptions,
    /// must agree with the subcommand when present
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default)]
    pub params: ExperimentParams,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// seed of `random` field specs without an explicit seed
    #[serde(default)]
    pub seed: u64,
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.operators.validate()?;
        let p = &self.params;
        positive("t_end", p.t_end)?;
        positive("dt", p.dt)?;
        positive("checks.enstrophy", p.checks.enstrophy)?;
        positive("checks.growth", p.checks.growth)?;
        positive("checks.stream", p.checks.stream)?;
        if p.sample_every == 0 {
            return Err(Error::Config("sample_every must be at least 1".into()));
        }
        if p.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Resolves the experiment against the subcommand.
    pub fn select(&self, requested: Experiment) -> Result<Experiment> {
        match self.experiment {
            Some(e) if e != requested => Err(Error::Config(format!(
                "config selects '{}' but subcommand is '{}'",
                e.name(),
                requested.name()
            ))),
            _ => Ok(requested),
        }
    }
}
