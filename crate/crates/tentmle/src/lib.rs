//! `tentmle`: maximum-likelihood estimation of log-concave densities on weighted
//! point samples, together with the geometric combinatorics the estimator lives in.
//!
//! The log-density of the optimal estimate is a *tent function*: the least concave
//! function over the convex hull of the sample points that lies above prescribed
//! heights at those points. Its regions of linearity form a regular polyhedral
//! subdivision of the sample, so solving the estimation problem means walking the
//! secondary fan of the configuration. This crate exposes the whole toolchain:
//!
//! - [`geometry`]: point configurations, lifted upper hulls, tent functions,
//!   regular subdivisions and triangulations, GKZ vectors, secondary cones.
//! - [`hfunc`]: the symmetric function `H` whose values give both the gradient of
//!   the mass integral and the heights-to-weights map, in several mutually
//!   checking representations.
//! - [`quadrature`]: exact closed-form integration of `exp(piecewise affine)` over
//!   simplices and subdivided polytopes, with a stable kernel for clustered heights.
//! - [`solver`]: the concave maximization `w·y − ∫ exp(tent)` and its optimality
//!   certificates.
//! - [`duality`]: the inverse map from optimal heights to weight vectors, normal
//!   cones of the feasible body, and constructive realization of any regular
//!   subdivision as an MLE output.
//! - [`experiments`]: a deterministic, seedable harness for frequency and shape
//!   census experiments.
//! - [`cli`]: the `tentmle` command-line front end (JSON/CSV/SVG emission).
//!
//! Indices in all file formats are 1-based; in-memory indices are 0-based.

#![forbid(unsafe_code)]
// `!(x > 0.0)` style comparisons are deliberate: NaN must take the invalid
// branch. Indexed loops mirror the matrix arithmetic they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use thiserror::Error;

pub mod cli;
mod ddexp;
pub mod duality;
mod exact;
pub mod experiments;
pub mod geometry;
pub mod hfunc;
mod linalg;
pub mod manifest;
pub mod quadrature;
pub mod rng;
pub mod solver;
mod svg;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input points are duplicated, too few, or do not affinely span R^d.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A dimension or length does not match the paired configuration.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The lifted upper hull could not be resolved within tolerance.
    #[error("degenerate lifted hull: {0}")]
    HullDegenerate(String),

    /// Enumeration was requested for a configuration above the size guard.
    #[error("configuration too large for enumeration: n = {n} exceeds limit {limit}")]
    TooLarge { n: usize, limit: usize },

    /// Arguments too close together for the closed-form evaluation.
    #[error("arguments too clustered for the closed form (min gap {gap:.3e})")]
    NearSingular { gap: f64 },

    /// The series form failed to converge within the term cap.
    #[error("series did not converge within {0} terms")]
    SeriesDiverged(usize),

    /// Heights do not lie in the closed secondary cone of the triangulation.
    #[error("heights violate the secondary cone of the triangulation")]
    ConeViolation,

    /// Heights are not relevant (some tent pole hangs below the tent).
    #[error("heights are not relevant: point {index} lies {gap:.3e} below the tent")]
    NotRelevant { index: usize, gap: f64 },

    /// Heights do not have unit total mass.
    #[error("heights do not have unit mass (mass = {mass})")]
    NotUnitMass { mass: f64 },

    /// Weight vector fails positivity or normalization.
    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// The subdivision is not regular for the configuration.
    #[error("subdivision is not regular for this configuration")]
    NotRegular,

    /// Realization produced weights whose re-solve did not reproduce the subdivision.
    #[error("realization failed: {0}")]
    RealizationFailed(String),

    /// A sampled configuration violated the point-configuration invariants.
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    /// The optimizer exhausted its iteration budget.
    #[error("solver did not converge within {0} iterations")]
    NotConverged(usize),

    /// Malformed input file or schema violation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// I/O error from the CLI layer.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization error from the CLI layer.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use geometry::{
    GkzVector, HeightVector, PointConfiguration, Simplex, Subdivision, Triangulation,
};
pub use quadrature::MassResult;
pub use solver::{MleResult, SolverOptions, WeightVector};
