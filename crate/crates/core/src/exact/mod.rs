//! Exact rational arithmetic, guarded polynomial fitting and exact
//! comparison of square-root ratios.

mod poly;
mod rational;
mod roots;

pub use poly::{fit_polynomial, leading_coefficient, UniPoly};
pub use rational::Rational;
pub use roots::{compare_root_ratio, compare_sqrt_ratio, RootRatio, SqrtRatio};

use thiserror::Error;

/// Default number of extra samples every fit must reproduce exactly.
pub const DEFAULT_GUARD: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("radicand must be positive, got {0}")]
    NonPositiveRadicand(Rational),
    #[error("root index must be positive")]
    ZeroRootIndex,
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("duplicate sample at k = {k}")]
    DegenerateSamples { k: i64 },
    #[error("guard sample at k = {k} disagrees with the fit: expected {expected}, polynomial gives {got}")]
    GuardMismatch {
        k: i64,
        expected: Box<Rational>,
        got: Box<Rational>,
    },
    #[error("polynomial has degree {degree}, more than the expected {expected}")]
    DegreeExceeded { degree: usize, expected: usize },
}
