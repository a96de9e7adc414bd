use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid block shape: {0}")]
    InvalidShape(String),
    #[error("shape mismatch: expected {expected} coordinates, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("grid too large: {cells} cells exceeds the limit of {limit}")]
    GridTooLarge { cells: usize, limit: usize },
    #[error("region is not bounded inside its bounding box: {0}")]
    Unbounded(String),
    #[error("point is not in the region")]
    NotInRegion,
    #[error("block index {index} out of range for {blocks} blocks")]
    BlockOutOfRange { index: usize, blocks: usize },
    #[error("value is off the block grid")]
    OffGrid,
    #[error("region is empty")]
    EmptyRegion,
    #[error("slice is empty")]
    EmptySlice,
    #[error("invalid recipe parameters: {0}")]
    InvalidRecipe(String),
    #[error("recipe is not declared {0}")]
    RecipeFlag(&'static str),
    #[error("logarithm undefined: {0}")]
    LogUndefined(String),
    #[error("leaf node unresolvable at the query point")]
    UnresolvableLeaf,
    #[error("pole at {0} lies in the closure of the block projection")]
    PoleInside(String),
    #[error("function family is empty")]
    EmptyFamily,
    #[error("compact sample is empty")]
    EmptySample,
    #[error("no family member separates the point from the compact set")]
    NoSeparator,
    #[error("separation ratio too close to 1: power {0} exceeds the cap")]
    ResolutionTooFine(u64),
    #[error("exhaustion stalled at m = {m}: no admissible point at grid resolution")]
    ExhaustionStalled { m: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
