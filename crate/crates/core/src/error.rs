use thiserror::Error;

/// Every failure the library can report.
///
/// `code()` gives a stable, machine-parsable identifier used by the command
/// line front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("tau must lie strictly between 0 and 1, got {0}")]
    InvalidTau(f64),
    #[error("invalid interval: inf {inf} exceeds sup {sup}")]
    InvalidEndpoints { inf: f64, sup: f64 },
    #[error("invalid interval: negative or non-finite spread {0}")]
    InvalidSpread(f64),
    #[error("Hukuhara difference does not exist: subtrahend spread {subtrahend} exceeds minuend spread {minuend}")]
    NotHukuharaDecomposable { minuend: f64, subtrahend: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate sample: need at least 2 observations, got {0}")]
    DegenerateSample(usize),
    #[error("inconsistent sample: {0}")]
    InconsistentSample(String),
    #[error("quadratic term is numerically singular")]
    SingularQ,
    #[error("Lemke pivoting exceeded {0} pivots")]
    PivotLimitExceeded(usize),
    #[error("quadratic program is infeasible")]
    InfeasibleQp,
    #[error("Lemke terminated on a secondary ray but the feasibility probe found a feasible point")]
    RayTermination,
    #[error("fold too small: {0}")]
    FoldTooSmall(String),
    #[error("invalid truth for simulation: {0}")]
    InvalidTruth(String),
    #[error("problem too large for brute-force enumeration: {0}")]
    TooLarge(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("non-numeric cell at row {row}, column {col}")]
    NonNumericCell { row: usize, col: usize },
    #[error("inverted interval at row {row}, variable {var}")]
    InvertedInterval { row: usize, var: String },
    #[error("empty file")]
    EmptyFile,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidTau(_) => "InvalidTau",
            Error::InvalidEndpoints { .. } => "InvalidEndpoints",
            Error::InvalidSpread(_) => "InvalidSpread",
            Error::NotHukuharaDecomposable { .. } => "NotHukuharaDecomposable",
            Error::EmptySample => "EmptySample",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::DegenerateSample(_) => "DegenerateSample",
            Error::InconsistentSample(_) => "InconsistentSample",
            Error::SingularQ => "SingularQ",
            Error::PivotLimitExceeded(_) => "PivotLimitExceeded",
            Error::InfeasibleQp => "InfeasibleQp",
            Error::RayTermination => "RayTermination",
            Error::FoldTooSmall(_) => "FoldTooSmall",
            Error::InvalidTruth(_) => "InvalidTruth",
            Error::TooLarge(_) => "TooLarge",
            Error::MalformedHeader(_) => "MalformedHeader",
            Error::NonNumericCell { .. } => "NonNumericCell",
            Error::InvertedInterval { .. } => "InvertedInterval",
            Error::EmptyFile => "EmptyFile",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
