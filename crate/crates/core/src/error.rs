use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Markoff relation violated: relative residual {residual:e} exceeds {rtol:e}")]
    MarkoffViolation { residual: f64, rtol: f64 },

    #[error("trace {value} is not hyperbolic (every trace coordinate must exceed 2)")]
    NonHyperbolicTrace { value: f64 },

    #[error("trace {value} is below the parabolic threshold 2")]
    TraceTooSmall { value: f64 },

    #[error("matrix lift is degenerate (tr A = 2)")]
    DegenerateLift,

    #[error("matrix determinant {det} differs from 1")]
    NotUnimodular { det: f64 },

    #[error("({p}, {q}) is not a primitive class")]
    NotPrimitive { p: i64, q: i64 },

    #[error("({p}, {q}) has no Farey parents inside the open first quadrant")]
    NotInTree { p: i64, q: i64 },

    #[error("tree descent exceeded the depth cap of {cap}")]
    DepthExceeded { cap: usize },

    #[error("the zero class has no length")]
    ZeroClass,

    #[error("{what} did not converge within {steps} steps")]
    NonConvergence { what: &'static str, steps: usize },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("matrix with trace {trace} is not hyperbolic")]
    NotHyperbolic { trace: f64 },

    #[error("axes do not cross (ideal endpoints are not interleaved)")]
    DisjointAxes,

    #[error("cap {cap} is too small; classes up to height {required} can have norm <= L")]
    CapTooSmall { cap: i64, required: i64 },

    #[error("systole reduction did not terminate within {steps} steps")]
    ReductionDiverged { steps: usize },

    #[error("slope is rational; flatness is only defined at irrational slopes")]
    RationalSlope,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable name of the variant, used by the CLI in error messages.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::MarkoffViolation { .. } => "MarkoffViolation",
            Error::NonHyperbolicTrace { .. } => "NonHyperbolicTrace",
            Error::TraceTooSmall { .. } => "TraceTooSmall",
            Error::DegenerateLift => "DegenerateLift",
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::NotPrimitive { .. } => "NotPrimitive",
            Error::NotInTree { .. } => "NotInTree",
            Error::DepthExceeded { .. } => "DepthExceeded",
            Error::ZeroClass => "ZeroClass",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::NotHyperbolic { .. } => "NotHyperbolic",
            Error::DisjointAxes => "DisjointAxes",
            Error::CapTooSmall { .. } => "CapTooSmall",
            Error::ReductionDiverged { .. } => "ReductionDiverged",
            Error::RationalSlope => "RationalSlope",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}
