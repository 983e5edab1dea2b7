use thiserror::Error;

use crate::dataflow::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the engine can report.
///
/// Variants are grouped loosely by the stage that produces them; the service
/// layer folds them into the coarser `ErrorCategory` taxonomy.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    // data model
    #[error("malformed data: {0}")]
    MalformedData(String),
    #[error("name already in use: {0}")]
    NameConflict(String),
    #[error("edge would create a cycle")]
    CycleError,
    #[error("port error: {0}")]
    PortError(String),
    #[error("column not found: {0}")]
    ColumnNotFound(String),
    #[error("set operation over different tables: {0} vs {1}")]
    TableMismatch(String, String),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error("out of range: {0}")]
    RangeError(String),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    // grammar
    #[error("grammar syntax error on line {line}: {message}")]
    GrammarSyntax { line: usize, message: String },
    #[error("undefined variable: {0}")]
    UndefinedVariable(String),

    // parsing and training
    #[error("query rejected by the grammar")]
    ParseRejected,
    #[error("training data error for query {query:?}: {reason}")]
    TrainingData { query: String, reason: String },

    // completion and execution
    #[error("node not found: {0}")]
    NodeNotFound(String),
    #[error("dataset not found: {0}")]
    DatasetNotFound(String),
    #[error("function needs {needed} source node(s) but only {available} are eligible")]
    InsufficientSources { needed: usize, available: usize },
    #[error("invalid options: {0}")]
    OptionsError(String),
    #[error("not implemented: {0}")]
    NotImplemented(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl Error {
    /// The variant name, e.g. `"MalformedData"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MalformedData(_) => "MalformedData",
            Error::NameConflict(_) => "NameConflict",
            Error::CycleError => "CycleError",
            Error::PortError(_) => "PortError",
            Error::ColumnNotFound(_) => "ColumnNotFound",
            Error::TableMismatch(..) => "TableMismatch",
            Error::NothingToUndo => "NothingToUndo",
            Error::NothingToRedo => "NothingToRedo",
            Error::RangeError(_) => "RangeError",
            Error::UnknownNode(_) => "UnknownNode",
            Error::GrammarSyntax { .. } => "GrammarSyntax",
            Error::UndefinedVariable(_) => "UndefinedVariable",
            Error::ParseRejected => "ParseRejected",
            Error::TrainingData { .. } => "TrainingData",
            Error::NodeNotFound(_) => "NodeNotFound",
            Error::DatasetNotFound(_) => "DatasetNotFound",
            Error::InsufficientSources { .. } => "InsufficientSources",
            Error::OptionsError(_) => "OptionsError",
            Error::NotImplemented(_) => "NotImplemented",
            Error::Io(_) => "Io",
        }
    }
}
