use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    ZeroVector,
    DimensionMismatch { expected: usize, found: usize },
    /// Operands live in different Hilbert spaces.
    SpaceMismatch,
    DimensionCeiling { dim: usize },
    InvalidSpace(String),
    NonFinite,
    BadWeights(String),
    NotProductSpace,
    NotInSpan { residual: f64 },
    NotOrthogonal { first: usize, second: usize, overlap: f64 },
    NotProjector(String),
    NotUnitary(String),
    NotHermitian,
    NotDensityMatrix(String),
    DuplicateName(String),
    UnknownName(String),
    DisallowedOperation(String),
    DepthCeiling { steps: usize },
    PreconditionFailed(String),
    UnknownScenario(String),
    InvalidTransition(String),
    InvalidArgument(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroVector => write!(f, "ZeroVector: amplitude vector has zero norm"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "DimensionMismatch: expected dimension {expected}, found {found}")
            }
            Error::SpaceMismatch => write!(f, "DimensionMismatch: operands live in different Hilbert spaces"),
            Error::DimensionCeiling { dim } => {
                write!(f, "DimensionCeiling: dimension {dim} exceeds the ceiling of {}", crate::MAX_DIM)
            }
            Error::InvalidSpace(why) => write!(f, "InvalidSpace: {why}"),
            Error::NonFinite => write!(f, "NonFinite: NaN or infinite amplitude"),
            Error::BadWeights(why) => write!(f, "BadWeights: {why}"),
            Error::NotProductSpace => write!(f, "NotProductSpace: space has no tensor factorization"),
            Error::NotInSpan { residual } => {
                write!(f, "NotInSpan: state leaves the span (residual {residual:e})")
            }
            Error::NotOrthogonal { first, second, overlap } => write!(
                f,
                "NotOrthogonal: states {first} and {second} have overlap {overlap:e}"
            ),
            Error::NotProjector(why) => write!(f, "NotProjector: {why}"),
            Error::NotUnitary(why) => write!(f, "NotUnitary: {why}"),
            Error::NotHermitian => write!(f, "NotHermitian: matrix is not Hermitian"),
            Error::NotDensityMatrix(why) => write!(f, "NotDensityMatrix: {why}"),
            Error::DuplicateName(name) => write!(f, "DuplicateName: `{name}` declared twice"),
            Error::UnknownName(name) => write!(f, "UnknownName: `{name}` is not declared"),
            Error::DisallowedOperation(name) => {
                write!(f, "DisallowedOperation: `{name}` is not available in this laboratory")
            }
            Error::DepthCeiling { steps } => {
                write!(f, "DepthCeiling: protocol unrolls to {steps} steps (limit 64)")
            }
            Error::PreconditionFailed(why) => write!(f, "PreconditionFailed: {why}"),
            Error::UnknownScenario(name) => write!(f, "UnknownScenario: `{name}`"),
            Error::InvalidTransition(why) => write!(f, "InvalidTransition: {why}"),
            Error::InvalidArgument(why) => write!(f, "InvalidArgument: {why}"),
        }
    }
}

impl core::error::Error for Error {}
