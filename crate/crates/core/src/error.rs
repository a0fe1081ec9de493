use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// State of a fixed-point iteration that ran out of sweeps.
#[derive(Debug, Clone)]
pub struct NonConvergence {
    pub control_id: Option<u64>,
    pub iterations: usize,
    /// Last successive-iterate L2 gap.
    pub gap: f64,
    /// Required gap for acceptance.
    pub threshold: f64,
    pub last_iterate: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("invalid input: {0}")]
    Validation(String),

    /// A hypothesis of a bound calculator is violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// Constants that should follow from the contraction condition do not.
    #[error("inconsistent constants: {0}")]
    Inconsistent(String),

    #[error(
        "fixed-point iteration did not converge after {} sweeps (gap {:e} > {:e})",
        .0.iterations, .0.gap, .0.threshold
    )]
    NonConvergence(Box<NonConvergence>),

    #[error(
        "finite control family has more than {cap} members; use sampled family members instead of enumeration"
    )]
    EnumerationTooLarge { cap: usize },

    #[error("sphere net for m={dim}, sigma={sigma} failed coverage after {attempts} refinements")]
    NetCoverage { dim: usize, sigma: f64, attempts: usize },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
