use num_bigint::BigInt;

/// Errors surfaced by series and φ-polynomial operations.
///
/// Reading a coefficient at or beyond a series' precision bound is a contract
/// violation and panics instead; these variants cover conditions a caller can
/// meaningfully react to.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot invert a series with no known nonzero term")]
    InvertZeroSeries,

    #[error(
        "leading coefficient {lead} is not a unit; the inverse would not have integer coefficients"
    )]
    NonUnitLeadingCoefficient { lead: BigInt },

    #[error("series is not a polynomial in phi at this precision: unresolved coefficient at q^{exponent}")]
    NotInPhiRing { exponent: i64 },

    #[error("insufficient precision for {context}: need {needed}, have {available}")]
    InsufficientPrecision {
        context: &'static str,
        needed: i64,
        available: i64,
    },

    #[error("direct strategy needs {required} series terms, over the budget of {budget}; use the algebraic strategy")]
    TermBudgetExceeded { required: i128, budget: i64 },

    #[error("coefficient at exponent {exponent} is not divisible by {divisor}")]
    NonDivisibleCoefficient { exponent: i64, divisor: BigInt },

    #[error("eta quotient q-offset {numerator}/24 is not an integer")]
    FractionalEtaOffset { numerator: i64 },

    #[error("modular-equation constants are inconsistent: {detail}")]
    InconsistentConstants { detail: String },

    #[error("invalid grid: {detail}")]
    InvalidGrid { detail: String },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
