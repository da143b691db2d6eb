use thiserror::Error;

/// Error type shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("attribute budget exhausted: all {budget} reveals already used")]
    BudgetExceeded { budget: usize },
    #[error("attribute index {index} out of bounds for dimension {d}")]
    IndexOutOfBounds { index: usize, d: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot sample {size} items from a population of {n}")]
    InvalidSize { size: usize, n: usize },
    #[error("weighted sampling requires a vector with nonzero L1 norm")]
    ZeroVector,
    #[error("attribute budget must be even and >= 2, got {0}")]
    OddBudget(usize),
    #[error("value out of range: {0}")]
    OutOfRange(String),
    #[error("operation requires a nonempty dataset")]
    EmptyDataset,
    #[error("ball radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid task spec: {0}")]
    InvalidSpec(String),
    #[error("bad magic number: expected {expected:#010x}, got {got:#010x}")]
    BadMagic { expected: u32, got: u32 },
    #[error("truncated file: {0}")]
    TruncatedFile(String),
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("no examples selected for digits {a} and {b}")]
    EmptySelection { a: u8, b: u8 },
    #[error("classification error requires labels in {{-1,+1}}")]
    NonBinaryLabels,
    #[error("{m} examples are too few for {folds} folds")]
    TooFewExamples { m: usize, folds: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
