use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent or unsupported model setup (dimensions, grids, kernels).
    #[error("configuration error: {0}")]
    Config(String),

    /// Input outside the parameter domain of a closed-form result.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate game: {0}")]
    DegenerateGame(String),

    /// Pairwise imitation probabilities could sum past one.
    #[error("payoff-scale error: worst-case imitation mass {bound} exceeds 1 (rescale by at most {max_scale})")]
    PayoffScale { bound: f64, max_scale: f64 },

    /// Initial history that no sequence of single imitations could produce.
    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("frozen state: {0}")]
    FrozenState(String),

    #[error("numerical instability at t={t}: {detail}; reduce dt")]
    Instability { t: f64, detail: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
