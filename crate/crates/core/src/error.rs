use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tedium coefficient must satisfy m > 0 and be finite (got {0})")]
    NonPositiveRate(f64),

    #[error("initial interest must be finite and >= 0 (got {0})")]
    InvalidInterest(f64),

    #[error("elapsed time must be finite and >= 0 (got {0} s)")]
    NegativeDuration(f64),

    #[error("step size too large for stable forward integration; use at least {min_steps} steps")]
    StepSize { min_steps: u64 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate abscissa: all points share one timestamp")]
    DegenerateAbscissa,

    #[error("non-finite residuals during fitting; last stable iterate x0={x0}, m={m}")]
    NumericalFailure { x0: f64, m: f64 },

    #[error("event at {event} is newer than the profile reference time {at}")]
    TemporalOrder { event: String, at: String },

    #[error("{malformed} of {total} lines are malformed; is the declared format correct?")]
    CorpusRejected { malformed: usize, total: usize },

    #[error("invalid timestamp {0:?}")]
    Timestamp(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
