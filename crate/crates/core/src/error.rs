use thiserror::Error;

/// Errors raised anywhere in the workbench.
///
/// Variants that name a theorem or lemma failure (`ProcedureFailure`,
/// `StructureError`) carry enough context to replay the failing input.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("relation closure contains a cycle through element {0}")]
    Cycle(usize),
    #[error("element index {index} out of range for a poset with {n} elements")]
    Index { index: usize, n: usize },
    #[error("operation requires a nonempty element set")]
    EmptySet,
    #[error("size mismatch: {0}")]
    Size(String),
    #[error("inexact division in deck counting: {0}")]
    Arithmetic(String),
    #[error("inconsistent deck: {0}")]
    InconsistentDeck(String),
    #[error("poset is not coconnected")]
    NotCoconnected,
    #[error("poset is not connected")]
    NotConnected,
    #[error("poset is not decomposable")]
    NotDecomposable,
    #[error("invalid pseudo-similar pair: {0}")]
    InvalidPair(String),
    #[error("orbit iteration left the domain: {0}")]
    Orbit(String),
    #[error("structure construction failed: {0}")]
    Structure(String),
    #[error("element {0} is not maximal")]
    NotMaximal(usize),
    #[error("parameter `{name}` differs across deck witnesses")]
    AmbiguousParameter { name: String },
    #[error("procedure failure in {procedure}: {detail}")]
    ProcedureFailure { procedure: String, detail: String },
    #[error("requested size {n} exceeds the configured cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("cache file corrupt: {0}")]
    CacheCorrupt(String),
    #[error("unknown property id `{0}`")]
    UnknownProperty(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn procedure(procedure: &str, detail: impl Into<String>) -> Self {
        Error::ProcedureFailure {
            procedure: procedure.to_string(),
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
