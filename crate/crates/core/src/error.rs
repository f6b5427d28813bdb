use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("template {id}: {reason}")]
    TemplateParse { id: String, reason: String },

    #[error("duplicate template id {0}")]
    DuplicateTemplateId(String),

    #[error("span out of bounds for sentence of length {len}")]
    SpanOutOfBounds { len: usize },

    #[error("span does not match template literal {expected:?}")]
    SpanMismatch { expected: String },

    #[error("template {0} has no corrective action and no force override was given")]
    UnresolvedAction(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty sample list")]
    EmptySamples,

    #[error("malformed model file: {0}")]
    ModelFormat(String),

    #[error("external scorer: {0}")]
    Scorer(String),

    #[error("external command failed: {0}")]
    ExternalCommand(String),

    #[error("line count mismatch: expected {expected}, got {got}")]
    LineCountMismatch { expected: usize, got: usize },

    #[error("aligned inputs have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("edits overlap or are out of bounds")]
    BadEdits,

    #[error("malformed template file at line {line}: {source}")]
    TemplateJson {
        line: usize,
        source: serde_json::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
