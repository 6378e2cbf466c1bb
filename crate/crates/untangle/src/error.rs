//! Error types for each pipeline stage.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VcsError {
    #[error("not a repository: {0}")]
    NotARepository(String),
    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),
    #[error("unknown commit: {0}")]
    UnknownCommit(String),
    #[error("unknown path {path} at commit {commit}")]
    UnknownPathAtCommit { commit: String, path: String },
    #[error("line {line} out of range for {path} at commit {commit}")]
    LineOutOfRange {
        commit: String,
        path: String,
        line: usize,
    },
    #[error("git invocation failed: {0}")]
    GitCommand(String),
    #[error("synthetic descriptor: {0}")]
    Descriptor(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum DiffError {
    #[error("malformed diff at byte {offset}: {reason}")]
    MalformedDiff { offset: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("schema error at {path}: {reason}")]
    SchemaError { path: String, reason: String },
    #[error("line {line} of {path} does not intersect the instance on that side")]
    NoIntersection { path: String, line: usize },
}

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("line {line} out of range (file has {line_count} lines)")]
    LineOutOfRange { line: usize, line_count: usize },
}

#[derive(Debug, Error)]
pub enum CategorizeError {
    #[error("inconsistent inputs: {0}")]
    InconsistentInputs(String),
    #[error("commit has no changed lines")]
    EmptyCommit,
}

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("no structure supplied for touched file {0}")]
    MissingStructure(String),
    #[error("line {line} of {path} outside the supplied structure")]
    LineOutsideStructure { path: String, line: usize },
    #[error("no metric row for commit {0}")]
    MissingCommitRow(String),
    #[error("missing field {0}")]
    MissingField(String),
    #[error("non-numeric value {value:?} in field {field}")]
    NonNumericField { field: String, value: String },
}

#[derive(Debug, Error)]
pub enum SzzError {
    #[error("fix line {path}:{line} not found in the diff of commit {commit}")]
    UnknownFixLine {
        commit: String,
        path: String,
        line: usize,
    },
    #[error("trace exceeded {0} hops")]
    TraceDepthExceeded(usize),
    #[error("origin unavailable for {path}:{line} traced from {commit}: {reason}")]
    LineOriginUnavailable {
        commit: String,
        path: String,
        line: usize,
        reason: String,
    },
    #[error(transparent)]
    Vcs(#[from] VcsError),
    #[error(transparent)]
    Pipeline(#[from] Box<PipelineError>),
}

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("training requires both classes to be present")]
    SingleClassTraining,
    #[error("non-finite feature value at row {row}, column {col}")]
    NonFiniteFeature { row: usize, col: usize },
    #[error("total churn is zero")]
    ZeroTotalChurn,
    #[error("input length mismatch: {0}")]
    ShapeMismatch(String),
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Vcs(#[from] VcsError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Categorize(#[from] CategorizeError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
