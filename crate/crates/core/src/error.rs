//! Crate-wide error type.

use crate::charfn::ClassLabel;

/// Errors raised by the engines in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    /// A parameter tuple that only describes a signed measure was used where
    /// a probability distribution is required. `index` is the position within
    /// the problem (0 for single-distribution operations).
    #[error("distribution {index} is not a probability measure (classified {label})")]
    NotProbability { index: usize, label: ClassLabel },

    /// A fiber carries an atom (sigma or sigma' is zero), so it has no
    /// Lebesgue density to evaluate.
    #[error("atomic fiber: sigma or sigma' is zero, the fiber has no Lebesgue density")]
    AtomicFiber,

    /// The characteristic function of a component vanishes (kappa = 0), which
    /// the non-vanishing classification path does not admit.
    #[error("characteristic function of distribution {index} vanishes (kappa = 0)")]
    VanishingCf { index: usize },

    /// The two random vectors are not identically distributed, so no class
    /// guarantee can be emitted.
    #[error("vectors not identically distributed: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotIdenticallyDistributed { residual: f64, tol: f64 },

    /// The pivot does not satisfy the coefficient condition
    /// a'_p d'_j - b'_p c'_j != 0 at `failing_index`.
    #[error("pivot {pivot}: coefficient condition fails at j = {failing_index} \
             (a'_p d'_j - b'_p c'_j = 0)")]
    PivotCondition { pivot: usize, failing_index: usize },

    /// The pivot coefficient is not usable (needs a' != 0 and a'' = 1).
    #[error("pivot {pivot} is not admissible: requires a' != 0 and a'' = 1")]
    PivotInadmissible { pivot: usize },

    /// The fiber-1 characteristic function of a component is not positive, so
    /// its logarithm is not a real function. Symmetrizing the distributions
    /// (convolving with their reflections) always repairs this.
    #[error("fiber-1 characteristic function of distribution {index} is not positive \
             on the real line; symmetrize first")]
    SymmetrizeFirst { index: usize },

    /// Rejection sampling would accept fewer than one proposal in 10^4.
    #[error("ill-conditioned parameters: rejection acceptance {acceptance:.3e} below 1e-4")]
    IllConditioned { acceptance: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
