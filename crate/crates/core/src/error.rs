use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine reports. `code()` gives the stable machine-readable
/// name used in service error envelopes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown node type `{0}`")]
    UnknownType(String),

    #[error("unknown edge type `{0}`")]
    UnknownEdgeType(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("invalid predicate: {0}")]
    Predicate(String),

    #[error("unknown occurrence `{0}`")]
    UnknownOccurrence(u32),

    #[error("history error: {0}")]
    History(String),

    #[error("graph relation attribute error: {0}")]
    Attribute(String),

    #[error("invalid query pattern: {0}")]
    Pattern(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("cannot pivot on base attribute column `{0}`")]
    InvalidPivot(String),

    #[error("invalid column `{0}` for this action")]
    InvalidColumn(String),

    #[error("row `{0}` is not in the current table")]
    UnknownRow(String),

    #[error("step {step} out of range 1..={len}")]
    OutOfRange { step: usize, len: usize },

    #[error("no table open in this session")]
    NoTable,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    #[error("no edge type for join condition: {0}")]
    NoEdgeType(String),

    #[error("relation `{relation}` cannot be classified: {reason}")]
    UnclassifiableRelation { relation: String, reason: String },

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("label override error: {0}")]
    Override(String),

    #[error("dangling reference: {0}")]
    DanglingReference(String),

    #[error("coercion error: {0}")]
    Coercion(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownType(_) => "unknown_type",
            Error::UnknownEdgeType(_) => "unknown_edge_type",
            Error::UnknownNode(_) => "unknown_node",
            Error::TypeMismatch(_) => "type_mismatch",
            Error::Predicate(_) => "predicate_error",
            Error::UnknownOccurrence(_) => "unknown_occurrence",
            Error::History(_) => "history_error",
            Error::Attribute(_) => "attribute_error",
            Error::Pattern(_) => "pattern_error",
            Error::UnknownColumn(_) => "unknown_column",
            Error::InvalidPivot(_) => "invalid_pivot",
            Error::InvalidColumn(_) => "invalid_column",
            Error::UnknownRow(_) => "unknown_row",
            Error::OutOfRange { .. } => "out_of_range",
            Error::NoTable => "no_table",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::UnknownRelation(_) => "unknown_relation",
            Error::NoEdgeType(_) => "no_edge_type",
            Error::UnclassifiableRelation { .. } => "unclassifiable_relation",
            Error::Manifest(_) => "manifest_error",
            Error::Override(_) => "override_error",
            Error::DanglingReference(_) => "dangling_reference",
            Error::Coercion(_) => "coercion_error",
            Error::InvalidGraph(_) => "invalid_graph",
            Error::Io(_) => "io_error",
            Error::Serde(_) => "serialization_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Serde(err.to_string())
    }
}
