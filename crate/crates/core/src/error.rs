use thiserror::Error;

/// Errors shared by every module of the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid dimension must be 1 or 2, got {0}")]
    GridDimension(usize),
    #[error("points per axis must be a power of two >= 16, got {0}")]
    GridResolution(usize),
    #[error("box half-width must be positive, got {0}")]
    GridHalfWidth(f64),
    #[error("value count {got} does not match grid size {expected}")]
    ValueCount { expected: usize, got: usize },
    #[error("non-finite value at sample {0}")]
    NonFiniteValue(usize),
    #[error("ball misses grid")]
    BallMissesGrid,
    #[error("ball radius must be positive, got {0}")]
    BallRadius(f64),
    #[error("radius set must be nonempty, positive and sorted")]
    BadRadii,
    #[error("stride must divide the points per axis ({g}), got {stride}")]
    BadStride { stride: usize, g: usize },
    #[error("invalid mask index {0}")]
    BadMaskIndex(usize),
    #[error("exponent must be positive, got {0}")]
    NonPositiveExponent(f64),
    #[error("exponent must lie in [1, inf), got {0}")]
    ExponentBelowOne(f64),
    #[error("divergent quantity")]
    DivergentQuantity,
    #[error("need at least {need} distinct radii, got {got}")]
    TooFewRadii { need: usize, got: usize },
    #[error("weight must be strictly positive (min {0})")]
    NonPositiveWeight(f64),
    #[error("weight recipe invalid: {0}")]
    BadRecipe(String),
    #[error("weight vectors must share one grid")]
    GridMismatch,
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("ball family too sparse: {uncovered} grid points have no admissible ball")]
    FamilyTooSparse { uncovered: usize },
    #[error("maximal parameters invalid: {0}")]
    BadMaximalParams(String),
    #[error("kernel linearity must be 1 or 2, got {0}")]
    KernelArity(usize),
    #[error("cost guard exceeded: estimated {estimated} kernel evaluations (cap {cap})")]
    CostGuard { estimated: u128, cap: u128 },
    #[error("symbol order mismatch: {0}")]
    BadSymbol(String),
    #[error("invalid campaign config: {0}")]
    BadConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
