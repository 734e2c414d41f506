use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("cycle in the {hierarchy} hierarchy through <{entity}>")]
    Cycle {
        hierarchy: &'static str,
        entity: String,
    },

    #[error("line {line}: {message}")]
    InvalidTriple { line: usize, message: String },

    #[error("unknown {kind} <{iri}>")]
    UnknownEntity { kind: &'static str, iri: String },

    #[error("<{predicate}> is not applicable to <{key}>")]
    NotApplicable { key: String, predicate: String },

    #[error("ontology has no individuals")]
    EmptyOntology,

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("dataset needs both d and nd labels")]
    SingleClass,

    #[error("class {label} has {size} records, fewer than k = {k}")]
    ClassTooSmall { label: String, size: usize, k: usize },

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("{0}")]
    InvalidInput(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    /// True for failures of an internal consistency check rather than bad input.
    pub fn is_invariant(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}
