use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by mesh construction, operator assembly, solvers and the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-triangle face: face {face} has {count} vertices")]
    NonTriangleFace { face: usize, count: usize },

    #[error("open surface: edge ({0}, {1}) has a single incident triangle")]
    OpenSurface(usize, usize),

    #[error("non-manifold edge ({0}, {1}) has {2} incident triangles")]
    NonManifoldEdge(usize, usize, usize),

    #[error("non-manifold vertex {0}: its star is not a single disk")]
    NonManifoldVertex(usize),

    #[error("non-orientable gluing detected at edge ({0}, {1})")]
    NonOrientable(usize, usize),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("degenerate triangle {triangle}: area {area:e} below threshold {threshold:e}")]
    DegenerateTriangle {
        triangle: usize,
        area: f64,
        threshold: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cochain degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: u8, found: u8 },

    #[error("cochain length mismatch: expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("incompatible right-hand side: mean {mean:e} exceeds tolerance {tolerance:e}")]
    IncompatibleRhs { mean: f64, tolerance: f64 },

    #[error("no harmonic forms exist on a genus-0 surface")]
    NoHarmonicForms,

    #[error(
        "harmonic space not resolved (spectral gap {gap:.3e} <= {threshold}) - refine mesh or loosen tol"
    )]
    HarmonicSpaceUnresolved { gap: f64, threshold: f64 },

    #[error("gamma0 is not harmonic: relative residual {0:e}")]
    NotHarmonic(f64),

    #[error("matrix is not skew-symmetric: defect {0:e}")]
    NotSkew(f64),

    #[error("linear solver failure: {0}")]
    Solver(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("blow-up detected at t = {0}")]
    BlowUp(f64),

    #[error("unknown field spec '{0}'")]
    UnknownFieldSpec(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable snake_case tag of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::NonTriangleFace { .. } => "non_triangle_face",
            Error::OpenSurface(..) => "open_surface",
            Error::NonManifoldEdge(..) => "non_manifold_edge",
            Error::NonManifoldVertex(_) => "non_manifold_vertex",
            Error::NonOrientable(..) => "non_orientable",
            Error::InvalidMesh(_) => "invalid_mesh",
            Error::DegenerateTriangle { .. } => "degenerate_triangle",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DegreeMismatch { .. } => "degree_mismatch",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::IncompatibleRhs { .. } => "incompatible_rhs",
            Error::NoHarmonicForms => "no_harmonic_forms",
            Error::HarmonicSpaceUnresolved { .. } => "harmonic_space_unresolved",
            Error::NotHarmonic(_) => "not_harmonic",
            Error::NotSkew(_) => "not_skew",
            Error::Solver(_) => "solver",
            Error::NoConvergence { .. } => "no_convergence",
            Error::BlowUp(_) => "blow_up",
            Error::UnknownFieldSpec(_) => "unknown_field_spec",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    /// True for failures of the numerics (blow-up, non-convergence, solver breakdown)
    /// as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver(_)
                | Error::NoConvergence { .. }
                | Error::BlowUp(_)
                | Error::HarmonicSpaceUnresolved { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
