use thiserror::Error;

/// Errors produced while building models, propagating states or analysing series.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate geometry: atoms {0} and {1} occupy the same position")]
    DegenerateGeometry(usize, usize),

    #[error("exchange coupling diverges at xi = {xi:e} (near field); set f directly in matrix mode")]
    NearFieldDivergence { xi: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("integration failure at t = {time}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("correlation undefined: zero variance in window")]
    UndefinedCorrelation,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown parameter path `{0}`")]
    UnknownPath(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
