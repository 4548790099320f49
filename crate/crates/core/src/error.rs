use std::path::PathBuf;

/// Errors produced by the decoding engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("duplicate doc_id {doc_id:?} (line {line})")]
    DuplicateDocId { doc_id: String, line: usize },

    #[error("invalid world spec: {0}")]
    InvalidWorld(String),

    #[error("token {0:?} is outside the vocabulary")]
    OutOfVocabulary(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("window size must be at least 1")]
    ZeroWindow,

    #[error("lexicon too small: {0}")]
    LexiconTooSmall(String),

    #[error(
        "exhaustive search over {vocab}^{max_len} sequences exceeds the limit of {limit}; use beam search"
    )]
    SearchSpaceTooLarge {
        vocab: usize,
        max_len: usize,
        limit: u64,
    },

    #[error("strategy {strategy} requires references for every sentence of document {doc_id:?}")]
    MissingReferences { strategy: String, doc_id: String },

    #[error("perplexity is undefined over zero tokens")]
    NoTokens,

    #[error("length mismatch: {what} ({left} vs {right})")]
    LengthMismatch {
        what: &'static str,
        left: usize,
        right: usize,
    },

    #[error("contrastive evaluation needs at least one item")]
    NoItems,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
