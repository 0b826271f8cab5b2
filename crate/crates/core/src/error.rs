//! Error type shared by every module of the toolkit.

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Two operands live in different algebras.
    #[error("descriptor mismatch: {left} vs {right}")]
    DescriptorMismatch { left: String, right: String },

    /// Input data violates a structural invariant (shape, finiteness, emptiness).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An iterative numerical kernel did not reach its tolerance.
    /// `lower`/`upper` bracket the quantity that was being computed.
    #[error("numerical failure: {message} (bracket [{lower}, {upper}])")]
    NumericalFailure {
        message: String,
        lower: f64,
        upper: f64,
    },

    /// A checked mathematical identity failed; this indicates a kernel bug.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// The submultiplicative hull construction hit its product cap.
    /// `decay_profile[l]` is the largest product norm seen at length `l + 1`.
    #[error("product cap of {cap} reached before norms decayed; raise r")]
    CapExceeded { cap: usize, decay_profile: Vec<f64> },

    /// A finite-rank approximation needs more rank than the budget allows.
    #[error("rank budget {budget} insufficient, rank {required} required")]
    RankBudget { budget: usize, required: usize },

    /// The operator class has no closed-form supremum over a box.
    #[error("unsupported operator: {0}")]
    UnsupportedOperator(String),

    /// A linear map was used outside the span of its declared basis.
    #[error("element outside the declared domain (residual {residual:e})")]
    OutsideDomain { residual: f64 },

    /// A map declared bounded fails its gauge-to-gauge bound.
    #[error("unbounded map: {0}")]
    Unbounded(String),

    /// A representative sequence handed to the completion is not Cauchy.
    #[error("not a Cauchy sequence: {0}")]
    NotCauchy(String),

    /// A precondition stated by the caller does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
