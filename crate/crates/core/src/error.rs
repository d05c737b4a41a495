use thiserror::Error;

use crate::surface::GeometryError;
use crate::topo::Resolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("surface {0} is not compact: a truncation T > 0 is required")]
    MissingTruncation(String),
    #[error("truncation must be finite and positive, got {0}")]
    InvalidTruncation(f64),
    #[error("grid resolution {0} is below the minimum of 16 per direction")]
    ResolutionTooSmall(Resolution),
    #[error("unsuitable quadrature rule: {0}")]
    UnsuitableRule(String),
    #[error("non-finite density at node (u={u}, v={v})")]
    NonFiniteDensity { u: f64, v: f64 },
    #[error("{what} Gauss-map degree of {surface} is indeterminate (rounding residual {residual:e}); increase truncation or resolution")]
    DegreeIndeterminate {
        what: &'static str,
        residual: f64,
        surface: String,
    },
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("invalid study: {0}")]
    InvalidStudy(String),
    #[error("surface {0} is not periodic in u; the channel decomposition needs rotational symmetry")]
    NotAxisymmetric(String),
    #[error("chart of {0} is not orthogonal; the 2D operator assumes F = 0")]
    NonOrthogonalChart(String),
    #[error("invalid spectral discretization: {0}")]
    SpectralResolution(String),
    #[error("step {step:e} resolves the deepest well with {points} points; at least {required} are required")]
    StepTooCoarse {
        step: f64,
        points: usize,
        required: usize,
    },
    #[error("non-finite potential at arclength s={s}")]
    NonFinitePotential { s: f64 },
    #[error("requested {requested} eigenvalues of a {dim}-dimensional operator")]
    TooManyEigenvalues { requested: usize, dim: usize },
    #[error("eigensolver failure: {0}")]
    SolverBreakdown(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code: 1 bad input, 2 non-converged or indeterminate, 3 invariant violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegreeIndeterminate { .. } | Error::StepTooCoarse { .. } | Error::SolverBreakdown(_) => 2,
            Error::InvariantViolation(_) | Error::NonFiniteDensity { .. } | Error::NonFinitePotential { .. } => 3,
            _ => 1,
        }
    }
}
