use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Solver(#[from] pcsbl::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot place {k} nonzeros in {t} separated runs within length {n}")]
    InfeasiblePlacement { n: usize, k: usize, t: usize },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("cannot add noise at finite SNR to an all-zero signal")]
    ZeroSignal,

    #[error("reference signal has zero norm")]
    ZeroReference,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;
