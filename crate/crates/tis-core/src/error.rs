use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested computation has no exact law for this population model.
    #[error("unsupported model: {0}")]
    UnsupportedModel(&'static str),

    /// The sample stream is shorter than the plan's maximum sample size.
    #[error("insufficient samples: stopping rule needs {needed} values, got {got}")]
    InsufficientSamples { needed: u64, got: usize },

    /// A theorem's side condition on the precision spec does not hold.
    #[error("side condition violated: {0}")]
    SideCondition(String),

    /// An iterative search ran out of budget without finding a passing value.
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    /// An observed (n, k) pair is impossible under the given plan.
    #[error("inconsistent outcome: {0}")]
    InconsistentOutcome(String),
}

pub type Result<T> = std::result::Result<T, Error>;
