//! Numerical laboratory for the stability of the positive mass theorem on
//! conformally flat, asymptotically flat 3-metrics `g = φ⁴δ`.
//!
//! The crate builds a family of complete metrics with nonnegative scalar
//! curvature and known ADM mass, solves for harmonic coordinates on a
//! uniform grid, evaluates the harmonic-function mass lower bound, and
//! extracts the regular subregion on which the harmonic chart is almost an
//! isometry. Diagnostics on top of that measure boundary areas, coordinate
//! cylinder volumes, image coverage, chart distance distortion and
//! Bishop–Gromov volume ratios across a mass sweep.

pub mod error;
pub mod fieldio;
pub mod geodesic;
pub mod grid;
pub mod harness;
pub mod mass;
pub mod metric;
pub mod quadrature;
pub mod region;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{GridSpec, Lattice};
pub use metric::{AfParams, Bump, ConformalFactor, MetricGrid};
pub use solver::HarmonicTriple;
