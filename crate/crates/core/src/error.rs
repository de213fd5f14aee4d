use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    /// The feedforward coupling cannot reach the cancellation condition.
    #[error(
        "feedforward gain infeasible: required attenuation {required:.6} exceeds 1; \
         OPA2 gain must be at least {min_gain_db:.3} dB"
    )]
    InfeasibleGain { required: f64, min_gain_db: f64 },

    #[error("degenerate measurement: {0}")]
    Degenerate(String),

    #[error("inconsistent measurement: {0}")]
    InconsistentMeasurement(String),

    #[error("empty frequency band: {0}")]
    EmptyBand(String),
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
