//! Geodesic distances of `φ⁴δ` and the distance-based diagnostics.
//!
//! Distances solve the eikonal equation `|∇T| = φ²` by first-order fast
//! marching; the conformal metric makes this isotropic, so no graph
//! metrication bias enters.

mod bishop;
mod chart;
mod fmm;
mod ricci;

pub use bishop::{bishop_gromov_check, model_ball_volume, BishopGromovReport, BG_SLACK};
pub use chart::{chart_distance_comparison, interior_nodes, sample_sources, ChartComparison};
pub use fmm::{fast_marching, fast_marching_with, segment_length, DistanceField, INIT_RADIUS_CELLS};
pub use ricci::{ricci_min_eigenvalue, ricci_tensor};
