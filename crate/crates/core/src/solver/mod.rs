//! Discrete Laplace–Beltrami problem for harmonic coordinates.
//!
//! `Δ_g u = φ⁻⁶ ∂_i(φ² ∂_i u)` is discretized in flux form on the 7-point
//! stencil with `φ²` sampled at face midpoints. Multiplying through by
//! `φ⁶h²` gives a symmetric M-matrix, solved by conjugate gradients with a
//! geometric multigrid V-cycle as preconditioner.

mod cg;
mod harmonic;
mod laplace;
mod multigrid;
mod oracle;

pub use cg::{pcg, CgOutcome};
pub use harmonic::{
    coordinate_gradient, covariant_hessian, max_principle_violation, solve_dirichlet,
    solve_harmonic, sym_index, DirichletSolver, HarmonicTriple, Preconditioner, ScalarSolve,
    SolveOptions, DEFAULT_TOLERANCE,
};
pub use laplace::LaplaceBeltrami;
pub use multigrid::Multigrid;
pub use oracle::{oracle_comparison, radial_ode_oracle, OracleComparison, RadialProfile};
