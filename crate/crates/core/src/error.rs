use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("quadrature construction failed: {0}")]
    Quadrature(String),

    #[error("no convergence after {iterations} iterations (last change {last_change:e})")]
    Convergence {
        iterations: usize,
        last_change: f64,
        energy_trace: Vec<f64>,
    },

    #[error("step size error: {0}")]
    StepSize(String),

    #[error("spectral cutoff annihilated the state (retained norm {0:e})")]
    DegenerateCutoff(f64),

    #[error("focusing collapse signal: sup norm {sup:e} exceeded ceiling {ceiling:e} at t = {time}")]
    BlowUp { sup: f64, ceiling: f64, time: f64 },

    #[error("insufficient samples: {0}")]
    Sampling(String),

    #[error("(N, omega) = ({n}, {omega}) lies outside the scaling window [{lower}, {upper}]")]
    OutOfWindow {
        n: usize,
        omega: f64,
        lower: f64,
        upper: f64,
    },

    #[error("problem too large for desk scale: {0}")]
    TooLarge(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incompatible snapshot: {0}")]
    Incompatible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
