use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown base station {0}")]
    UnknownBs(usize),

    #[error("unknown user {0}")]
    UnknownUser(usize),

    #[error("maximal independent set enumeration over {vertices} vertices exceeds the cap of {cap}; use the iterative MWIS path")]
    TooManyVertices { vertices: usize, cap: usize },

    #[error("negative vertex weight {weight} at vertex {vertex}")]
    NegativeWeight { vertex: usize, weight: f64 },

    #[error("vertex set is not independent in the interference graph")]
    NotIndependent,

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("negative rate {0}")]
    NegativeRate(f64),

    #[error("degenerate objective: {0}")]
    Degenerate(String),

    #[error("ABRB profile holds {len} patterns but there are only {max} Type B users")]
    ProfileTooLarge { len: usize, max: usize },

    #[error("fixture line {line}: {msg}")]
    Fixture { line: usize, msg: String },

    #[error("invariant `{name}` violated: {detail}")]
    Invariant { name: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invariant(name: &'static str, detail: impl Into<String>) -> Error {
    Error::Invariant {
        name,
        detail: detail.into(),
    }
}
