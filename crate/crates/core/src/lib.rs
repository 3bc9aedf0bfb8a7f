//! Numerical laboratory for optimal transport and entropy convexity in the
//! Chebyshev-norm plane.
//!
//! The crate builds discrete measures out of cell densities, solves the exact
//! quadratic transport problem under the l∞ cost with a three-stage
//! lexicographic refinement, pushes plans forward through a corrected midpoint
//! map on circular-corner domains, and evaluates curvature-dimension
//! inequalities (`CD(0,N)`, `CD*(K,N)`, `CD(K,∞)`) on the resulting triples.
//! A dumbbell "neck" space assembled from reflected corner domains provides
//! the matching global failure demonstration.
//!
//! Modules follow the pipeline order:
//!
//! * [`geometry`] — the l∞ metric, midpoint boxes, corner domains, neck space;
//! * [`measure`] — cell-density measures, block averaging, entropies, the
//!   distortion coefficient σ;
//! * [`transport`] — the exact solver, lexicographic refinement and plan audits;
//! * [`interpolation`] — the midpoint map, pushforwards, dyadic geodesics and
//!   the algebraic Jacobian inequality;
//! * [`cdcheck`] — inequality reports, the local experiment and the global
//!   failure demo;
//! * [`oracle`] — brute-force references used by tests;
//! * [`config`] — plain-text key-value configuration files.

pub mod cdcheck;
pub mod config;
pub mod geometry;
pub mod interpolation;
pub mod measure;
pub mod oracle;
pub mod transport;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A constructor or operation received parameters outside its domain.
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    /// An evaluation point fell outside the admissible coordinate range.
    #[error("coordinate {value} outside [{lo}, {hi}]")]
    OutsideRange { value: f64, lo: f64, hi: f64 },

    /// A measure construction found no support inside the target region.
    #[error("empty support: no cell of the grid meets the region with positive mass")]
    EmptySupport,

    /// Total masses of the two marginals disagree beyond tolerance.
    #[error("mass mismatch: source total {source_total} vs target total {target_total}")]
    MassMismatch { source_total: f64, target_total: f64 },

    /// A measure atom carried a nonpositive mass.
    #[error("nonpositive mass {0}")]
    NonpositiveMass(f64),

    /// The transport solver failed to converge.
    #[error("solver stalled in stage {stage} after {iterations} iterations")]
    SolverStall { stage: u8, iterations: usize },

    /// A midpoint escaped the corner domain; the domain parameters and the
    /// plan are inconsistent.
    #[error("midpoint ({x}, {y}) escapes the corner domain")]
    MidpointOutsideDomain { x: f64, y: f64 },

    /// A point sits below the circular lower boundary.
    #[error("point ({x}, {y}) lies below the lower boundary (S = {boundary})")]
    BelowBoundary { x: f64, y: f64, boundary: f64 },

    /// A precondition on operation inputs failed.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Malformed configuration input.
    #[error("config error: {0}")]
    Config(String),

    /// Input/output failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
