use thiserror::Error;

/// Errors raised by walk construction, spectral analysis and dynamics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("unitarity violated at jump difference {q:?}: max entry error {max_err:e}")]
    UnitarityViolation { q: Vec<i64>, max_err: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("size limit: {0}")]
    SizeLimit(String),
    #[error("eigensolver did not converge within {0} sweeps")]
    ConvergenceFailure(usize),
    #[error("branch matching stayed ambiguous up to grid size {0}")]
    RefineExhausted(usize),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("measures live on different boxes ({0} vs {1})")]
    BoxMismatch(String, String),
    #[error("box size {n} is not congruent to {k} mod {m}")]
    ModulusMismatch { n: usize, k: usize, m: usize },
    #[error("phase relation with shift {p}/{q} is present in the spectrum but missing from the relation list")]
    RelationMissing { p: i64, q: i64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("expression error: {0}")]
    Expr(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, WalkError>;
