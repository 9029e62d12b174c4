use thiserror::Error;

/// Errors raised by the laboratory.
///
/// Variants split into two groups: validation failures (bad parameters,
/// unsupported inputs) and numerical-contract violations (an invariant that
/// must hold for the computation to be trusted did not). The CLI maps them to
/// distinct exit codes through [`Error::is_contract_violation`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("infinite moment: {0}")]
    InfiniteMoment(String),

    #[error("infinite Fisher information for {0}")]
    InfiniteFisher(String),

    #[error("domain [{lo}, {hi}] too small: captures mass {captured}")]
    DomainTooSmall { lo: f64, hi: f64, captured: f64 },

    #[error("grid step mismatch: {0} vs {1}")]
    StepMismatch(f64, f64),

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("convolution does not fit the working domain: {0}")]
    DomainOverflow(String),

    #[error("absolute continuity violated on [{x_lo}, {x_hi}]: p = {p_max:e} where q vanishes")]
    AbsoluteContinuity { x_lo: f64, x_hi: f64, p_max: f64 },

    #[error("nonzero mean {0:e}")]
    NonZeroMean(f64),

    #[error("unsupported order {0}")]
    UnsupportedOrder(u32),

    #[error("|w| = {0} beyond the stable range 30")]
    Overflow(f64),

    #[error("unbounded derivative: {0}")]
    UnboundedDerivative(String),

    #[error("spec is not minorizable: {0}")]
    NotMinorizable(String),

    #[error("n = {n} too small: min over B(u) of phi - r is {min_gap:e} < 1/n")]
    NTooSmall { n: usize, min_gap: f64 },

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("variance mismatch: {0} vs {1}")]
    VarianceMismatch(f64, f64),

    #[error("numerical contract violated: {0}")]
    Contract(String),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical invariant rather than of input validation.
    pub fn is_contract_violation(&self) -> bool {
        matches!(
            self,
            Error::Contract(_) | Error::AbsoluteContinuity { .. } | Error::SupportViolation(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
