//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Unified error for the laboratory's fallible operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A monomial exponent list is longer than the ambient dimension.
    #[error("monomial has {len} exponents but the simplex dimension is {k}")]
    MonomialTooLong { len: usize, k: u32 },

    /// A basis family tag that none of the supported families recognize.
    #[error("unknown basis family tag `{0}`")]
    UnknownFamily(String),

    /// Matrix/basis dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The I-form Gram matrix admitted no positive-definite factorization:
    /// the supplied basis is (numerically) linearly dependent.
    #[error("form factorization failed at pivot {pivot}: basis is linearly dependent")]
    IndefiniteForm { pivot: usize },

    /// The eigensolver did not meet its tolerance within the iteration budget.
    #[error("eigensolve did not converge within {iterations} iterations (last residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// A search over k exhausted its range without certifying the target.
    #[error("no k in [{lo}, {hi}] certified the target ratio")]
    SearchExhausted { lo: u32, hi: u32 },

    /// A configurable work budget ran out before the operation finished.
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    /// Monte Carlo returned a degenerate denominator estimate.
    #[error("degenerate sampling: {0}")]
    DegenerateSampling(String),

    /// A parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A sieve or scan range exceeds the configured budget.
    #[error("range too large: {0}")]
    RangeTooLarge(String),

    /// A covering plan failed verification where a verified plan is required.
    #[error("covering plan does not cover {{1,…,y}}: {uncovered} element(s) uncovered")]
    UnverifiedPlan { uncovered: usize },

    /// A shift tuple occupies every residue class modulo some small prime.
    #[error("tuple is inadmissible: shifts cover every residue class modulo {prime}")]
    InadmissibleTuple { prime: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
