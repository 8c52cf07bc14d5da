//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("element does not induce an involution: {0}")]
    NotInvolutive(String),

    #[error("element does not normalize the algebra: re-expansion residual {0:.3e}")]
    NotNormalizing(f64),

    #[error("eigenspace degeneracy: {0}")]
    Degenerate(String),

    #[error("loss of rank during orthogonalization at vector {0}")]
    RankLoss(usize),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("catalog violation: {0}")]
    CatalogViolation(String),

    #[error("metric is not positive definite")]
    NotPositiveDefinite,

    #[error("flow left the positive-definite domain at step {step}: min eigenvalue {min_eig:.3e}")]
    DomainExit { step: usize, min_eig: f64 },

    #[error("numerical blowup at step {0}: non-finite values")]
    NumericalBlowup(usize),

    #[error("pair id parse error: {0}")]
    PairParse(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
