//! Toric test configurations: lattice polytopes with piecewise-linear convex
//! weight functions, their weight spectra, and exact polytope integrals that
//! serve as oracles for the spectrum asymptotics.

mod integral;
mod linalg;
mod pl;
mod polytope;

pub(crate) use integral::least_squares_slope;
pub use integral::{
    complete_homogeneous, exact_integral, mean_value, n_infinity, simplex_moment,
    verify_trace_asymptotics, volume, AsymptoticsReport, ResidualRow, ResidualSeries,
};
pub use pl::{weight_spectrum, AffinePiece, PLConvexFunction};
pub use polytope::{Facet, LatticePolytope};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToricError {
    #[error("dimension {n} is not supported here")]
    UnsupportedDimension { n: usize },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the facet inequalities define an unbounded region")]
    Unbounded,
    #[error("the facet inequalities have no solution")]
    Empty,
    #[error("the polytope is not full-dimensional")]
    NotFullDimensional,
    #[error("vertex {vertex:?} is not a lattice point")]
    NonIntegralVertex { vertex: Vec<String> },
    #[error("listed vertices differ from the extreme points of the facet description")]
    VertexMismatch,
    #[error("piecewise-linear function has no pieces")]
    EmptyFunction,
    #[error("invalid k-range {k_min}..={k_max}")]
    InvalidRange { k_min: i64, k_max: i64 },
}
