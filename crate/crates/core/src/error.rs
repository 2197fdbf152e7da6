//! Error types. Every pipeline failure is attributable to exactly one
//! stage so batch reports can name where a question fell over.

use thiserror::Error;

/// Pipeline stage tags used in error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Score decoding and structure generation.
    Parse,
    /// Entity/type linking.
    Link,
    /// Relation extraction (predicate binding).
    Re,
    /// Query execution against the store.
    Exec,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Parse => "parse",
            Stage::Link => "link",
            Stage::Re => "re",
            Stage::Exec => "exec",
        };
        f.write_str(s)
    }
}

/// Errors raised by the triple store loader and executor.
#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: malformed triple: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("line {line}: malformed prefix declaration")]
    MalformedPrefix { line: usize },
    #[error("SELECT/COUNT query has no target node")]
    MissingTarget,
    #[error("edge {0} has no predicate binding")]
    UnboundEdge(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Contract violations in the numeric core.
#[derive(Debug, Error, PartialEq)]
pub enum NumericError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("gold label index {index} out of range for {labels} labels")]
    LabelOutOfRange { index: usize, labels: usize },
    #[error("gold table is not symmetric at ({i}, {j})")]
    AsymmetricGold { i: usize, j: usize },
    #[error("temperature must be positive, got {0}")]
    NonPositiveTemperature(f64),
    #[error("score table cell ({i}, {j}) is not a probability pair")]
    InvalidProbabilityPair { i: usize, j: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

/// Errors from structure decoding.
#[derive(Debug, Error, PartialEq)]
pub enum DecodeError {
    #[error("SELECT/COUNT question decoded zero nodes; no target can be chosen")]
    NoNodes,
    #[error("span ({start}, {end}) out of range for {n} tokens")]
    SpanOutOfRange { start: usize, end: usize, n: usize },
}

/// Errors from entity/type linking.
#[derive(Debug, Error)]
pub enum LinkError {
    #[error("lookup transport failure for {mention:?}: {reason}")]
    Transport { mention: String, reason: String },
    #[error("target node {0} could not be linked and was discarded")]
    TargetDiscarded(String),
}

/// Errors from relation extraction.
#[derive(Debug, Error, PartialEq)]
pub enum SearchError {
    #[error("no pending edge touches a grounded node; structure is disconnected")]
    DisconnectedStructure,
    #[error("edge ({0}, {1}) endpoints missing from structure")]
    UnknownEndpoint(u32, u32),
    #[error("assignment space {size} exceeds the exhaustive-search guard {guard}")]
    SpaceExceeded { size: u64, guard: u64 },
    #[error("gold edge ({0}, {1}) has no same-direction candidates in the store")]
    UnsatisfiableGold(u32, u32),
    #[error("baseline hop depth {depth} exceeds the configured cap {cap}")]
    HopDepthExceeded { depth: usize, cap: usize },
}

/// Errors from SPARQL serialization and the round-trip reader.
#[derive(Debug, Error, PartialEq)]
pub enum SparqlError {
    #[error("SELECT/COUNT graph has no target node")]
    MissingTarget,
    #[error("edge ({0}, {1}) has no predicate binding")]
    UnboundEdge(u32, u32),
    #[error("cannot parse query: {0}")]
    Parse(String),
}

/// Top-level engine error with stage attribution.
#[derive(Debug, Error)]
pub enum EngineError {
    #[error("[{stage}] {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("bad input: {0}")]
    Input(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EngineError {
    pub fn at<E>(stage: Stage, source: E) -> Self
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        EngineError::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Stage tag, when the error is stage-attributed.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            EngineError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }
}
