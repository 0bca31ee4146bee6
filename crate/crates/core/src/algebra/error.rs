use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("negative power of a non-monomial polynomial")]
    NegativePowerOfNonMonomial,
    #[error("weighted degree of the zero polynomial is undefined")]
    ZeroPolynomialDegree,
    #[error("parameter symbol `{0}` would carry a negative exponent")]
    ParameterNegativeExponent(String),
    #[error("exponent {exponent} of `{var}` is not divisible by {divisor}")]
    FractionalExponent { var: String, exponent: i64, divisor: i64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: matrix has {rows} rows, right-hand side has {rhs}")]
    DimensionMismatch { rows: usize, rhs: usize },
    #[error("inconsistent singular system: rank {rank}, augmented rank {augmented_rank}")]
    Inconsistent { rank: usize, augmented_rank: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, AlgebraError>;
