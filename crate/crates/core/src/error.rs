use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A constructor argument violates its precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The state or point lies outside the domain of the time operator.
    #[error("outside the operator domain: {0}")]
    Domain(String),

    /// Arguments are individually valid but cannot be combined.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// The time window does not capture enough of the distribution.
    #[error("time window truncates the distribution (captured mass {mass:.6e}): {detail}")]
    Truncation { mass: f64, detail: String },

    #[error("numerical inconsistency: {0}")]
    Numerical(String),
}
