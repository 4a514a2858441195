//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("matrix is not Hermitian within tolerance: {0}")]
    NotHermitian(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty sample after applying the elevation mask")]
    EmptySample,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("input not normalized: {0}")]
    NotNormalized(String),

    /// No transmit power satisfies both the rate floor and the INR cap.
    /// Carries the closed-form bounds so the caller can apply its policy.
    #[error("infeasible link: rate floor requires {p_rate_dbm:.3} dBm but INR cap allows at most {p_inr_dbm:.3} dBm")]
    InfeasibleLink { p_rate_dbm: f64, p_inr_dbm: f64 },

    #[error("empty run: no slot records to summarize")]
    EmptyRun,

    #[error("config error: {0}")]
    Config(String),

    #[error("slot {slot} failed: {source}")]
    SlotFailure {
        slot: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
