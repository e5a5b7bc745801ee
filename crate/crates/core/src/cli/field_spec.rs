//! Named fields and cochain files.
//!
//! A spec is a sum of terms `[coef*]atom`, e.g. `star_d:cos_x + 0.5*harmonic:1`.
//!
//! 0-form atoms: `zero`, `const`, `cos_x`, `sin_x`, `cos_y`, `sin_y`,
//! `cos_x_cos_y`, `sin_x_sin_y`, `cos:kx,ky`, `sin:kx,ky` (`cos(kx x + ky y)`),
//! `gauss:x,y,z,sigma`, `random[:seed]`, `eigen` (an eigenfunction of the
//! smallest positive eigenvalue of the Laplacian).
//!
//! 1-form atoms: `zero`, `dx`, `dy`, `harmonic:i` (1-based), `random[:seed]`,
//! `smooth:seed[,kmax]` (low Fourier modes, flat tori only), `d:<0-form atom>`,
//! `star_d:<0-form atom>`.
//!
//! Any atom ending in `.bin` or starting with `file:` is read as a cochain file.

use std::path::Path;

use crate::dec::{fields, Cochain, OperatorSet};
use crate::error::{Error, Result};
use crate::hodge::{lambda_min, HarmonicBasis};

use super::output::read_cochain;

/// What a spec is resolved against.
pub struct FieldContext<'a> {
    pub ops: &'a OperatorSet,
    pub basis: &'a HarmonicBasis,
    pub base_dir: &'a Path,
    pub seed: u64,
}

/// Builds the cochain of the given degree described by `spec`.
pub fn parse_field_spec(spec: &str, degree: u8, ctx: &FieldContext) -> Result<Cochain> {
    if degree > 1 {
        return Err(Error::InvalidArgument(format!(
            "field specs describe 0- or 1-forms, not {degree}-forms"
        )));
    }
    let n = ctx.ops.n_cells(degree);
    let mut total = Cochain::zeros(degree, n);
    let terms = split_terms(spec);
    if terms.is_empty() {
        return Err(Error::UnknownFieldSpec(spec.to_string()));
    }
    for term in terms {
        let (coef, atom) = split_coefficient(&term);
        let value = if is_file(atom) {
            load(atom, degree, ctx)?
        } else if degree == 0 {
            zero_form(atom, ctx)?
        } else {
            one_form(atom, ctx)?
        };
        total.axpy(coef, &value);
    }
    Ok(total)
}

/// Splits on `+` except inside exponents like `1e+3`.
fn split_terms(spec: &str) -> Vec<String> {
    let chars: Vec<char> = spec.chars().collect();
    let mut out = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let exponent = i >= 2
            && matches!(chars[i - 1], 'e' | 'E')
            && (chars[i - 2].is_ascii_digit() || chars[i - 2] == '.');
        if c == '+' && !exponent {
            out.push(current.trim().to_string());
            current.clear();
        } else {
            current.push(c);
        }
    }
    out.push(current.trim().to_string());
    out.retain(|t| !t.is_empty());
    out
}

fn split_coefficient(term: &str) -> (f64, &str) {
    if let Some((head, tail)) = term.split_once('*') {
        if let Ok(c) = head.trim().parse::<f64>() {
            return (c, tail.trim());
        }
    }
    if let Some(rest) = term.strip_prefix('-') {
        return (-1.0, rest.trim());
    }
    (1.0, term)
}

fn is_file(atom: &str) -> bool {
    atom.starts_with("file:") || atom.ends_with(".bin")
}

fn load(atom: &str, degree: u8, ctx: &FieldContext) -> Result<Cochain> {
    let path = ctx
        .base_dir
        .join(atom.strip_prefix("file:").unwrap_or(atom));
    let c = read_cochain(&path)?;
    if c.degree() != degree {
        return Err(Error::DegreeMismatch {
            expected: degree,
            found: c.degree(),
        });
    }
    let n = ctx.ops.n_cells(degree);
    if c.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: c.len(),
        });
    }
    Ok(c)
}

fn numbers<const N: usize>(atom: &str, args: &str) -> Result<[f64; N]> {
    let parsed: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::UnknownFieldSpec(atom.to_string()))?;
    parsed
        .try_into()
        .map_err(|_| Error::UnknownFieldSpec(atom.to_string()))
}

fn seed_of(atom: &str, arg: Option<&str>, ctx: &FieldContext) -> Result<u64> {
    match arg {
        None => Ok(ctx.seed),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::UnknownFieldSpec(atom.to_string())),
    }
}

fn zero_form(atom: &str, ctx: &FieldContext) -> Result<Cochain> {
    let mesh = ctx.ops.mesh();
    let sample =
        |f: &dyn Fn(f64, f64, f64) -> f64| fields::sample_function(mesh, |p| f(p[0], p[1], p[2]));
    let (name, arg) = match atom.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (atom, None),
    };
    Ok(match (name, arg) {
        ("zero", None) => Cochain::zeros(0, mesh.n_vertices()),
        ("const", None) => Cochain::new(0, vec![1.0; mesh.n_vertices()]),
        ("cos_x", None) => sample(&|x, _, _| x.cos()),
        ("sin_x", None) => sample(&|x, _, _| x.sin()),
        ("cos_y", None) => sample(&|_, y, _| y.cos()),
        ("sin_y", None) => sample(&|_, y, _| y.sin()),
        ("cos_x_cos_y", None) => sample(&|x, y, _| x.cos() * y.cos()),
        ("sin_x_sin_y", None) => sample(&|x, y, _| x.sin() * y.sin()),
        ("cos", Some(a)) => {
            let [kx, ky] = numbers(atom, a)?;
            sample(&|x, y, _| (kx * x + ky * y).cos())
        }
        ("sin", Some(a)) => {
            let [kx, ky] = numbers(atom, a)?;
            sample(&|x, y, _| (kx * x + ky * y).sin())
        }
        ("gauss", Some(a)) => {
            let [cx, cy, cz, s] = numbers(atom, a)?;
            if s.is_nan() || s <= 0.0 {
                return Err(Error::UnknownFieldSpec(atom.to_string()));
            }
            sample(&|x, y, z| {
                let r2 = (x - cx).powi(2) + (y - cy).powi(2) + (z - cz).powi(2);
                (-r2 / (2.0 * s * s)).exp()
            })
        }
        ("random", arg) => fields::random_function(mesh, seed_of(atom, arg, ctx)?),
        ("eigen", None) => lambda_min(ctx.ops)?.eigenfunction,
        _ => return Err(Error::UnknownFieldSpec(atom.to_string())),
    })
}

fn one_form(atom: &str, ctx: &FieldContext) -> Result<Cochain> {
    let ops = ctx.ops;
    let mesh = ops.mesh();
    let (name, arg) = match atom.split_once(':') {
        Some((a, b)) => (a, Some(b)),
        None => (atom, None),
    };
    Ok(match (name, arg) {
        ("zero", None) => Cochain::zeros(1, mesh.n_edges()),
        ("dx", None) => fields::flat_dx(mesh)?,
        ("dy", None) => fields::flat_dy(mesh)?,
        ("harmonic", Some(i)) => {
            let i: usize = i
                .trim()
                .parse()
                .map_err(|_| Error::UnknownFieldSpec(atom.to_string()))?;
            if i == 0 || i > ctx.basis.dim() {
                return Err(Error::InvalidArgument(format!(
                    "harmonic index {i} outside 1..={}",
                    ctx.basis.dim()
                )));
            }
            ctx.basis.forms[i - 1].clone()
        }
        ("random", arg) => fields::random_one_form(mesh, seed_of(atom, arg, ctx)?),
        ("smooth", Some(a)) => {
            let mut parts = a.splitn(2, ',');
            let seed = seed_of(atom, parts.next(), ctx)?;
            let kmax = match parts.next() {
                Some(k) => k
                    .trim()
                    .parse()
                    .map_err(|_| Error::UnknownFieldSpec(atom.to_string()))?,
                None => 3,
            };
            fields::random_fourier_one_form(mesh, seed, kmax)?
        }
        ("d", Some(inner)) => ops.d(&zero_form(inner, ctx)?)?,
        ("star_d", Some(inner)) => ops.star1(&ops.d(&zero_form(inner, ctx)?)?)?,
        _ => return Err(Error::UnknownFieldSpec(atom.to_string())),
    })
}
