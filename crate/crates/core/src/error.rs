use thiserror::Error;

/// Errors produced by the numerical and model layers.
///
/// `is_numerical` distinguishes failures of an algorithm on valid input
/// (iteration did not converge, a certified bound was violated) from plain
/// misuse of an interface; the CLI maps the former to exit code 2 and the
/// latter to exit code 1.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: symmetrization residual {residual:.3e}")]
    NotHermitian { residual: f64 },

    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal {off:.3e})")]
    EigenFailure { sweeps: usize, off: f64 },

    #[error("invalid step or duration: {0}")]
    InvalidStep(String),

    #[error("site index {site} outside chain of length {n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("environment level {level} outside 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("chain state would need {required} amplitudes, cap is {cap}")]
    StateTooLarge { required: usize, cap: usize },

    #[error("discretized functions carry different time steps: {0} vs {1}")]
    MismatchedTimestep(f64, f64),

    #[error("invalid time step: {0}")]
    InvalidTimestep(f64),

    #[error("input norms too large for the series step: alpha*max(1,h) = {0:.3} >= 20")]
    NormTooLarge(f64),

    #[error("Kraus family is not an isometry column: residual {residual:.3e}")]
    NotAnIsometry { residual: f64 },

    #[error("unitary completion failed: {0}")]
    CompletionFailure(String),

    #[error("operator is not self-adjoint: defect {defect:.3e}")]
    NotSelfAdjoint { defect: f64 },

    #[error("invalid projection family: {0}")]
    InvalidProjectionFamily(String),

    #[error("order fit needs at least 3 points, got {0}")]
    InsufficientPoints(usize),

    #[error("order fit requires positive values: {0}")]
    NonPositiveValue(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("malformed configuration document: {0}")]
    ParseError(String),

    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },

    #[error("validation error at {path}: {message}")]
    ValidationError { path: String, message: String },
}

impl Error {
    /// True for failures of a numerical procedure on structurally valid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure { .. }
                | Error::NormTooLarge(_)
                | Error::NotAnIsometry { .. }
                | Error::CompletionFailure(_)
                | Error::NotSelfAdjoint { .. }
                | Error::NonPositiveValue(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
