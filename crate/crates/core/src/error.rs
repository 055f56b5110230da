use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("diagonal component {component} of block {block} is {value}; expected +1 or -1")]
    InvalidDiagonal {
        block: usize,
        component: usize,
        value: i64,
    },

    #[error("operation requires {expected} coefficients")]
    ModeMismatch { expected: &'static str },

    #[error("matrix is not sign-normalized (some diagonal component is not 1)")]
    NotNormalized,

    #[error("matrix is not a valid characteristic matrix")]
    NotValid,

    #[error("matrix is not conjugate to a unipotent upper triangular form")]
    NotUnipotent,

    #[error("permutation search over {m}! orderings exceeds the limit m <= {limit}")]
    PermutationSearchExceeded { m: usize, limit: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("elements belong to different rings")]
    MixedRings,

    #[error("facial restriction needs at least two factors")]
    SingleFactor,

    #[error("degree {degree}: quotient rank {found}, expected {expected}")]
    RankMismatch {
        degree: usize,
        expected: usize,
        found: usize,
    },

    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

impl Error {
    /// Errors that indicate an arithmetic bug or a broken mathematical invariant rather
    /// than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(self, Error::RankMismatch { .. } | Error::InvariantViolation(_))
    }
}
