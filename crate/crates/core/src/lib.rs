pub mod autocomplete;
pub mod completion;
pub mod dataflow;
pub mod demo;
pub mod engine;
pub mod error;
pub mod executor;
pub mod grammar;
pub mod parser;
pub mod suite;
pub mod tagger;

pub use engine::{Engine, ErrorCategory, ErrorReport, QueryOptions, QueryResult, ResourcePaths, Session, TagOverride};
pub use error::{Error, Result};
