use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("nome magnitude must be < 1 (got |p| = {0})")]
    InvalidNome(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("truncation did not converge within {n_max} factors")]
    TruncationOverflow { n_max: usize },

    #[error("series has no terminating q^-n parameter")]
    NonTerminating,

    #[error("degenerate nodes: {0}")]
    DegenerateNodes(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Errors a randomized sampler should treat as "draw again" rather than
    /// as a failure of the identity under test.
    pub fn is_rejection(&self) -> bool {
        matches!(
            self,
            Error::Pole(_)
                | Error::DegenerateNodes(_)
                | Error::IllConditioned(_)
                | Error::Inadmissible(_)
                | Error::Domain(_)
        )
    }
}
