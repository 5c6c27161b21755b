use thiserror::Error;

/// Errors surfaced by the verification types. Numerical tolerance decisions are
/// not errors; these are structural misuses (wrong context, empty domains,
/// violated preconditions) or genuine internal inconsistencies.
#[derive(Debug, Error)]
pub enum Error {
    #[error("context mismatch: {0}")]
    ContextMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("weights must be strictly positive and finite: {0}")]
    InvalidWeights(String),

    #[error("scale factor must be nonzero")]
    ZeroScale,

    #[error("relation is not single-valued on its domain")]
    NotSingleValued,

    #[error("relation is not full-domain: domain rank {rank} < dimension {dim}")]
    NotFullDomain { rank: usize, dim: usize },

    #[error("sequence must sum to zero, got sum {0}")]
    NonzeroSum(String),

    #[error("quadratic is not convex: eigenvalue {0} is negative beyond tolerance")]
    Nonconvex(f64),

    #[error("maximality criteria disagree: {0}")]
    CriterionDisagreement(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
