use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// A structural hypothesis that a coupling matrix (or configuration) failed.
///
/// The names match the flags of [`crate::spectral::CouplingSpectrum`] so a
/// refusal can be traced back to the flag that caused it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    LambdaPositive,
    ZStrictlyPositive,
    LambdaSimple,
    UniquePositiveEigenvalue,
    /// All four entries of the coupling matrix strictly positive.
    Cooperative,
    /// `t₁μ` coincides with a higher eigenvalue of `-Δ_h`.
    NonResonant,
    /// `b·c > 0`, required by the symmetrization audit.
    SymmetrizableCoupling,
}

impl Hypothesis {
    pub fn name(self) -> &'static str {
        match self {
            Hypothesis::LambdaPositive => "lambda_positive",
            Hypothesis::ZStrictlyPositive => "z_strictly_positive",
            Hypothesis::LambdaSimple => "lambda_simple",
            Hypothesis::UniquePositiveEigenvalue => "unique_positive_eigenvalue",
            Hypothesis::Cooperative => "cooperative",
            Hypothesis::NonResonant => "non_resonant",
            Hypothesis::SymmetrizableCoupling => "symmetrizable_coupling",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field lives on {found} nodes, expected {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error("zero field has no Rayleigh quotient")]
    ZeroField,
    #[error("kernel sample K(x_{row}, y_{col}) = {value} is negative")]
    NegativeKernel { row: usize, col: usize, value: f64 },
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("matrix is singular to working precision (column {column})")]
    Singular { column: usize },
    #[error("eigenpair {index} did not converge: residual {residual:e} after {iterations} iterations")]
    EigenNotConverged { index: usize, iterations: usize, residual: f64 },
    #[error("hypothesis `{0}` does not hold")]
    Hypothesis(Hypothesis),
    #[error(
        "inconsistent threshold bracket: positive solution at t_lo={t_lo} is {lo_found}, at t_hi={t_hi} is {hi_found}"
    )]
    InconsistentBracket { t_lo: f64, lo_found: bool, t_hi: f64, hi_found: bool },
    #[error("continuation could not start: {0}")]
    ContinuationStart(String),
}
