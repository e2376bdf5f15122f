use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("configuration has no vectors")]
    EmptyConfiguration,

    #[error("ambient dimension must be positive")]
    ZeroDimension,

    #[error("vector {index} has {found} entries, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    /// No linear form takes the value 1 on every vector. `witness` holds
    /// multipliers y with sum_j y_j a_j = 0 and sum_j y_j != 0.
    #[error("no linear form h with h(a_j) = 1 for all j (witness multipliers {witness:?})")]
    NoUnitForm { witness: Vec<String> },

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{0:?} is not a relation of the configuration")]
    NotARelation(Vec<i64>),

    #[error("lattice search exceeded the node cap of {cap}")]
    BudgetExceeded { cap: u64 },

    #[error("series gradings, bounds or variable counts differ")]
    GradingMismatch,

    #[error("exponent {exponent:?} has level {level}, outside the pointed cone of the grading")]
    OutsideCone { exponent: Vec<i64>, level: String },

    #[error("exponential requires a series without a level-0 term")]
    NonzeroConstantTerm,

    #[error("series has no invertible constant term")]
    NotInvertible,

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("no common pointed grading for the supports involved{}", witness_suffix(.witness))]
    NotPointed { witness: Option<Vec<i64>> },

    #[error("series is known up to level {have}, level {need} requested")]
    InsufficientTruncation { have: String, need: String },

    #[error("integer overflow while {0}")]
    Overflow(&'static str),

    #[error("malformed input: {0}")]
    Parse(String),
}

fn witness_suffix(w: &Option<Vec<i64>>) -> String {
    match w {
        Some(c) => {
            let used = c.iter().filter(|&&x| x != 0).count();
            format!(" (nonnegative dependency among {used} generators)")
        }
        None => String::new(),
    }
}
