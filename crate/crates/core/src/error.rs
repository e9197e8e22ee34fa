use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("contexts do not cover the measurement set; uncovered: {missing:?}")]
    CoverViolation { missing: Vec<String> },

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("context #{0} is empty")]
    EmptyContext(usize),

    #[error("context #{context} mentions unknown measurement `{label}`")]
    UnknownMeasurementInContext { context: usize, label: String },

    #[error("invalid label `{0}`: labels must be non-empty and may not contain ','")]
    InvalidLabel(String),

    #[error("measurement `{0}` has no outcome list")]
    MissingOutcomes(String),

    #[error("incidence matrix would have {entries} entries, above the cap of {cap}")]
    SizeCapExceeded { entries: u128, cap: usize },

    #[error("negative probability {value} in context #{context}, entry {entry}")]
    NegativeProbability { context: usize, entry: usize, value: f64 },

    #[error("context #{context} sums to {sum}, not 1")]
    NormalizationViolation { context: usize, sum: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("measurement set is not a subset of context #{context}")]
    NotASubset { context: usize },

    #[error("models live on different scenarios")]
    ScenarioMismatch,

    #[error("mixing weight {0} outside [0, 1]")]
    LambdaOutOfRange(f64),

    #[error("LP solver failure: {0}")]
    NumericalFailure(String),

    #[error("realised CF {cf} exceeds eta {eta} although 2*eta + sigma < 1")]
    CfBoundViolation { cf: f64, eta: f64 },

    #[error("alpha {0} outside [1/2, 1]")]
    AlphaOutOfRange(String),

    #[error("n-cycle needs n >= 3, got {0}")]
    NTooSmall(usize),

    #[error("bad outcome choice: {0}")]
    BadOutcomeChoice(String),

    #[error("boundary construction check failed: {0}")]
    BoundaryCheckFailed(String),

    #[error("estimator input `{0}` is missing")]
    MissingField(&'static str),

    #[error("{field} = {value} is outside [0, 1]")]
    OutOfRange { field: &'static str, value: f64 },

    #[error("manual sigma policy requires a value")]
    ManualValueMissing,

    #[error("beta_max {beta_max} is below beta_cl {beta_cl}")]
    BoundsInverted { beta_cl: f64, beta_max: f64 },

    #[error("inconsistent input: {0}")]
    InvalidInput(String),

    #[error("document error: {0}")]
    Document(String),
}

/// Coarse error classes; the CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Validation,
    Solver,
    Estimator,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Document(_) => ErrorKind::Parse,
            Error::NumericalFailure(_)
            | Error::CfBoundViolation { .. }
            | Error::BoundaryCheckFailed(_) => ErrorKind::Solver,
            Error::MissingField(_)
            | Error::OutOfRange { .. }
            | Error::ManualValueMissing
            | Error::BoundsInverted { .. } => ErrorKind::Estimator,
            _ => ErrorKind::Validation,
        }
    }
}
