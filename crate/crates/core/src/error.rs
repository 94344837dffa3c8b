use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("{what} is outside its domain: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error("branch state has no branches")]
    EmptyState,

    #[error("particle count mismatch: expected {expected}, got {got}")]
    ParticleMismatch { expected: usize, got: usize },

    #[error("unknown measurement setting `{0}`")]
    UnknownSetting(String),

    #[error("density vanishes at the evaluation point (log-density {log_density})")]
    NodeProximity { log_density: f64 },

    /// Step size fell below the floor; carries the last accepted point.
    #[error("step size underflow at t = {t:e} s")]
    Stiffness { t: f64, coords: Vec<f64> },

    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
