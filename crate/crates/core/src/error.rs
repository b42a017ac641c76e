use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mean parameter {mu:?} lies outside the parameter set {set}")]
    OutsideParameterSet { mu: Vec<f64>, set: String },

    #[error("eta with squared norm {norm_sq} lies outside the ball of squared radius {delta}")]
    EtaOutsideBall { norm_sq: f64, delta: f64 },

    #[error("unknown {kind} id `{id}` (valid: {valid})")]
    UnknownId {
        kind: &'static str,
        id: String,
        valid: String,
    },

    #[error("estimator `{0}` needs at least one observation")]
    EmptyPrefix(String),

    #[error("`{what}` is not available for the {family} family")]
    UnsupportedFamily { what: String, family: String },

    #[error("stopping rule `{0}` needs the true mean but it was withheld")]
    TrueMeanWithheld(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
