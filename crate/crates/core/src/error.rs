use alloc::string::String;

use thiserror::Error;

use crate::registry::Role;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Call-time guard failures on registered partitions and models.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GuardError {
    #[error("{verb} rejects test data: test tag is not in {{train, valid, dev}}; test data is reserved for assess")]
    TestReserved { verb: &'static str },
    #[error("assess requires a test partition, got a {role} partition")]
    NotTestPartition { role: Role },
    #[error("model was already assessed: assessment is terminal, once per holdout")]
    AlreadyAssessedModel,
    #[error("holdout {holdout} was already assessed: a test holdout yields evidence once, regardless of model")]
    HoldoutSpent { holdout: String },
    #[error("test partition belongs to split {test_split}, model was fitted on split {model_split}")]
    LineageMismatch { model_split: String, test_split: String },
}

impl GuardError {
    pub fn name(&self) -> &'static str {
        match self {
            GuardError::TestReserved { .. } => "TestReserved",
            GuardError::NotTestPartition { .. } => "NotTestPartition",
            GuardError::AlreadyAssessedModel => "AlreadyAssessedModel",
            GuardError::HoldoutSpent { .. } => "HoldoutSpent",
            GuardError::LineageMismatch { .. } => "LineageMismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    /// Missing split provenance, or a split precondition on the input frame.
    #[error("partition error: {0}")]
    Partition(String),
    #[error(transparent)]
    Guard(#[from] GuardError),
    #[error("registry error: {0}")]
    Registry(String),
    #[error("ambiguous provenance: frame is a column subset of {0} registered partitions with different roles")]
    AmbiguousProvenance(usize),
    #[error("stratify error: {0}")]
    Stratify(String),
    #[error("temporal tie: time value {value} straddles the {boundary} boundary")]
    TemporalTie { boundary: &'static str, value: String },
    #[error("group error: {0}")]
    Group(String),
    #[error("cv error: {0}")]
    Cv(String),
    #[error("config error: {0}")]
    Config(String),
    /// A verb received a value of the wrong grammar type (e.g. evaluate with no Model).
    #[error("type continuity: {verb} expects {expected}, found {found}")]
    TypeContinuity { verb: String, expected: String, found: String },
    #[error("data error: {0}")]
    Data(String),
}

impl Error {
    /// Stable error name, used by the CLI and the conformance report.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "ParseError",
            Error::Schema(_) => "SchemaError",
            Error::Partition(_) => "PartitionError",
            Error::Guard(g) => g.name(),
            Error::Registry(_) => "RegistryError",
            Error::AmbiguousProvenance(_) => "AmbiguousProvenance",
            Error::Stratify(_) => "StratifyError",
            Error::TemporalTie { .. } => "TemporalTieError",
            Error::Group(_) => "GroupError",
            Error::Cv(_) => "CVError",
            Error::Config(_) => "ConfigError",
            Error::TypeContinuity { .. } => "TypeContinuity",
            Error::Data(_) => "DataError",
        }
    }

    /// True for rejections by the grammar itself (guards, provenance, type
    /// continuity) as opposed to malformed input or configuration.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            Error::Guard(_)
                | Error::Partition(_)
                | Error::AmbiguousProvenance(_)
                | Error::TemporalTie { .. }
                | Error::Cv(_)
                | Error::TypeContinuity { .. }
        )
    }

    pub(crate) fn unregistered(verb: &str) -> Self {
        Error::Partition(alloc::format!(
            "{verb} requires data registered by split; this frame has no split provenance (call split first)"
        ))
    }
}
