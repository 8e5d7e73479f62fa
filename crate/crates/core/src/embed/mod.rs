//! Numerical checks of the moment-map picture on curves: moment matrices of
//! embedded curves, Schatten norms, Bergman density of states for
//! circle-invariant metrics on the projective line, and one-parameter
//! degenerations of conics.

mod curve;
mod hermitian;
mod metric;
mod quadrature;

pub use curve::{
    geometric_t_grid, CycleComponent, DegenerationExample, FchValue, MonomialCurve,
    MonotonicityReport, SchattenBoundReport,
};
pub use hermitian::{conjugate_exponent, q_norm, HermitianMatrix, SquareMatrix};
pub use metric::{
    density_convergence, holder_chain, moment_bound_check, DensityOfStates, DensityReport,
    DensityRow, HolderReport, InvariantMetricCP1, MetricSpec, MomentBoundReport, MomentBoundRow,
    CHECK_GRID,
};
pub use quadrature::{geometric_breaks, uniform_breaks, Quadrature};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} over {intervals} intervals; raise the resolution or loosen the tolerance")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        intervals: usize,
    },
    #[error("potential is not convex near x = {x}")]
    NonConvexPotential { x: f64 },
    #[error("matrix is not self-adjoint (gap {gap:e})")]
    NotHermitian { gap: f64 },
    #[error("f(t) decreased by {drop:e}, beyond quadrature tolerance")]
    MonotonicityViolated { drop: f64 },
    #[error("unknown example {0:?}")]
    UnknownExample(String),
    #[error("{0}")]
    InvalidParameter(String),
}
