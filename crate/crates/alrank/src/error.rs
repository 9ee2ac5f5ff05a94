use thiserror::Error;

/// Errors surfaced by dataset handling, training, acquisition scoring, and
/// the simulation loop.
#[derive(Debug, Error)]
pub enum Error {
    /// A data file line could not be parsed. `line` is 1-based.
    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    /// A document's feature vector length disagrees with the corpus.
    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// Input held no documents at all.
    #[error("input contains no documents")]
    EmptyInput,

    /// A configuration value is out of its documented range.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The labeled set produced no trainable pairs (all labels tied).
    #[error("no valid training pairs: every candidate pair has tied labels")]
    EmptyPairSet,

    /// A score lookup referenced a document that was never scored.
    #[error("missing score for query {query_id}, doc {doc_id}")]
    MissingScore { query_id: u32, doc_id: u32 },

    /// An operation received inputs whose shapes disagree.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Statistic undefined on constant input (e.g. Pearson correlation).
    #[error("statistic undefined: {0} is constant")]
    ConstantInput(&'static str),

    /// An operation that needs data got an empty slice.
    #[error("empty input: {0}")]
    EmptySlice(&'static str),

    /// Batch selection asked for more queries than the pool holds.
    #[error("batch size {requested} exceeds pool size {available}")]
    BatchTooLarge { requested: usize, available: usize },

    /// An annotation request referenced an unknown or already-labeled query.
    #[error("cannot annotate query {query_id}: {reason}")]
    BadAnnotation { query_id: u32, reason: String },

    /// Pool and validation corpora share query ids.
    #[error("pool and validation corpora overlap on query id {query_id}")]
    CorpusOverlap { query_id: u32 },
}
