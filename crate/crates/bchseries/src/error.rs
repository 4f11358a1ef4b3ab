//! Error type shared by all modules.

use crate::C64;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    /// A sinh factor at `index` (0-based argument position, or term index for
    /// the assembled sums) has modulus below the degeneracy threshold.
    #[error("singular hyperbolic factor at argument {index}: |sinh| = {modulus:.3e} < delta")]
    Singular { index: usize, modulus: f64 },

    /// An eigenvalue tuple hit a removable singularity; callers decide the
    /// fallback policy.
    #[error("degenerate eigenvalue tuple: |sinh| = {modulus:.3e} < delta at argument {index}")]
    Degenerate { index: usize, modulus: f64 },

    /// Matrix is defective or its eigenvector basis is too ill-conditioned.
    #[error(
        "defective or ill-conditioned matrix: residual {residual:.3e}, condition {condition:.3e}"
    )]
    Defective { residual: f64, condition: f64 },

    /// An eigenvalue lies on (or hugs) the closed negative real axis, so the
    /// principal logarithm is not defined.
    #[error(
        "principal log branch cut: eigenvalue {re:.6e}{im:+.6e}i on the closed negative real axis"
    )]
    BranchCut { re: f64, im: f64 },

    #[error(
        "least-squares design matrix condition {condition:.3e} exceeds {cap:.1e}; widen the t grid"
    )]
    IllConditionedFit { condition: f64, cap: f64 },

    #[error("need at least {needed} points above the noise floor, found {found}")]
    TooFewPoints { needed: usize, found: usize },

    #[error("enumeration bound exceeded: {count} lattice tuples (cap {cap})")]
    EnumerationBound { count: u128, cap: u128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid input: {0}")]
    Input(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for errors caused by the caller's request rather than by the
    /// numerics of a valid problem. The CLI maps these to exit code 1.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::Input(_) | Error::EnumerationBound { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Convenience constructor for branch-cut errors.
pub(crate) fn branch_cut(lambda: C64) -> Error {
    Error::BranchCut {
        re: lambda.re,
        im: lambda.im,
    }
}
