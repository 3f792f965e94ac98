use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the analysis library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("duplicate document id `{0}`")]
    DuplicateId(String),

    #[error("self-citation edge ({0}, {0})")]
    SelfLoop(String),

    #[error("edge ({citing}, {cited}) references unknown document `{missing}`")]
    UnknownEndpoint {
        citing: String,
        cited: String,
        missing: String,
    },

    #[error("corpus contains no documents")]
    EmptyCorpus,

    #[error("term `{0}` appears in both the basic and the clinical lexicon")]
    LexiconOverlap(String),

    #[error("document `{0}` has no external citation count")]
    MissingExternalCitations(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all values are identical; a power law cannot be fitted")]
    DegenerateDistribution,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("node `{0}` is isolated")]
    IsolatedNode(String),

    #[error("no scorable edges (both endpoints scored) in the network")]
    NoScorableEdges,

    #[error("partition and scores cover different node sets ({partition} vs {scores})")]
    Mismatch { partition: usize, scores: usize },

    #[error("unknown export format `{0}` (supported: graphml, dot)")]
    UnknownFormat(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// True for errors caused by the input data rather than by the caller or the program.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::Config(_) | Error::UnknownFormat(_))
    }
}
