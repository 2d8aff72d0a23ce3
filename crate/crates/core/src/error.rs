use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a supported prime modulus")]
    NotPrime(u64),

    #[error("characteristic mismatch: {0} vs {1}")]
    CharacteristicMismatch(u64, u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error at byte {pos} in {input:?}: {msg}")]
    Parse { input: String, pos: usize, msg: String },

    #[error("series variables differ: {0}")]
    VariableMismatch(String),

    #[error("substitution for `{0}` has a nonzero constant term")]
    NonZeroConstantTerm(String),

    #[error("substitution for truncated variable `{var}` is not nilpotent of order {order}")]
    NotNilpotent { var: String, order: usize },

    #[error("series constant term is not a unit")]
    NonUnit,

    #[error("inseparable point: the formal derivative is not a unit at the seed")]
    InseparablePoint,

    #[error("seed is not a root at order 0")]
    NoRootAtOrderZero,

    #[error("Hensel step budget of {0} iterations exhausted")]
    StepBudgetExhausted(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} is outside precision {precision}")]
    PrecisionExceeded { index: usize, precision: usize },

    #[error("truncation level must be positive")]
    ZeroLevel,

    #[error("[p]_F has a term of exponent {0}, which is not a multiple of p")]
    VerschiebungExponent(usize),

    #[error("cannot deflate: coefficient at index {0} is nonzero")]
    DeflateNonzero(usize),

    #[error("d_{n} is not linear over the constants (fails on basis element t^{j})")]
    NotConstantLinear { n: usize, j: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("internal consistency violated: {0}")]
    Inconsistent(String),

    #[error("no suitable multiplier found among polynomials of degree <= {0}")]
    SearchExhausted(usize),

    #[error("{0} is not a p-basis element")]
    NotPBasis(String),

    #[error("input is not iterative for the stated law (first failure at ({i}, {j}))")]
    NotIterative { i: usize, j: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("audit failed: {0}")]
    Audit(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}
