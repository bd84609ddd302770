use thiserror::Error;

use crate::types::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A tail certificate or user threshold could not certify a cut.
    #[error("certification failed: {0}")]
    Certification(String),

    /// A finite alphabet, hull or reduced subshift could not be built.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("search budget {budget} exhausted while connecting {from} to {to}")]
    Budget { from: Symbol, to: Symbol, budget: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("word is not allowable: {0}")]
    Domain(String),

    #[error("graph has no directed cycle")]
    NoCycle,

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
