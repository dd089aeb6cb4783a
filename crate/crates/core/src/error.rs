use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{message} at line {line}")]
    Format { line: usize, message: String },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("similarity undefined for a zero-norm vector")]
    UndefinedSimilarity,

    #[error("none of the seed keywords for cause `{0}` is in the embedding table")]
    NoResolvableSeeds(String),

    #[error("degenerate labels: training data needs both classes")]
    DegenerateLabels,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("feature layout mismatch: model expects {expected} columns, vector has {found}")]
    LayoutMismatch { expected: usize, found: usize },

    #[error("class `{class}` has {count} members, fewer than the {folds} folds requested")]
    Stratification { class: String, count: usize, folds: usize },

    #[error("design matrix is rank deficient: column `{column}` is collinear with {others:?}")]
    RankDeficient { column: String, others: Vec<String> },

    #[error("too few samples: {n} rows for {columns} columns")]
    TooFewSamples { n: usize, columns: usize },

    #[error("classifications for entity `{expected}` include entity `{found}`")]
    MixedEntities { expected: String, found: String },

    #[error("missing rating for entities: {0:?}")]
    MissingRatings(Vec<String>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
