use super::cg::{pcg, CgOutcome};
use super::laplace::LaplaceBeltrami;
use super::multigrid::Multigrid;
use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::metric::MetricGrid;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    Jacobi,
    #[default]
    Multigrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative residual target.
    pub tol: f64,
    /// Iteration cap; `None` means `50·n` for `n` nodes per axis.
    pub max_iter: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOLERANCE,
            max_iter: None,
            preconditioner: Preconditioner::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScalarSolve {
    pub u: Vec<f64>,
    pub outcome: CgOutcome,
}

/// Operator plus preconditioner, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct DirichletSolver {
    op: LaplaceBeltrami,
    mg: Option<Multigrid>,
    options: SolveOptions,
}

impl DirichletSolver {
    pub fn new(grid: &MetricGrid, options: SolveOptions) -> Self {
        let op = LaplaceBeltrami::assemble(grid);
        let mg = match options.preconditioner {
            Preconditioner::Multigrid => Some(Multigrid::new(grid.lattice, &grid.phi)),
            Preconditioner::Jacobi => None,
        };
        DirichletSolver { op, mg, options }
    }

    pub fn operator(&self) -> &LaplaceBeltrami {
        &self.op
    }

    /// Solves `Δ_g u = 0` with `u = boundary(x)` on the box faces.
    ///
    /// The initial guess is `boundary` evaluated at every node, so data that
    /// the stencil annihilates is returned unchanged.
    pub fn solve<F: Fn([f64; 3]) -> f64>(&self, boundary: F) -> Result<ScalarSolve> {
        let lat = *self.op.lattice();
        let len = lat.len();
        let mut u: Vec<f64> = (0..len).map(|i| boundary(lat.position(i))).collect();
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("Dirichlet data"));
        }
        let mut b = vec![0.0; len];
        self.op.apply_scaled(&u, &mut b);
        b.iter_mut().for_each(|v| *v = -*v);

        let mut delta = vec![0.0; len];
        let max_iter = self.options.max_iter.unwrap_or(50 * lat.n);
        let apply = |x: &[f64], out: &mut [f64]| self.op.apply_scaled(x, out);
        let outcome = match &self.mg {
            Some(mg) => pcg(apply, |r, z| mg.precondition(r, z), &b, &mut delta, self.options.tol, max_iter)?,
            None => {
                let diag = self.op.diagonal();
                let jacobi = |r: &[f64], z: &mut [f64]| {
                    for ((zi, ri), d) in z.iter_mut().zip(r).zip(diag) {
                        *zi = if *d > 0.0 { ri / d } else { 0.0 };
                    }
                };
                pcg(apply, jacobi, &b, &mut delta, self.options.tol, max_iter)?
            }
        };
        for (ui, di) in u.iter_mut().zip(&delta) {
            *ui += di;
        }
        Ok(ScalarSolve { u, outcome })
    }
}

pub fn solve_dirichlet<F: Fn([f64; 3]) -> f64>(
    grid: &MetricGrid,
    boundary: F,
    options: SolveOptions,
) -> Result<ScalarSolve> {
    DirichletSolver::new(grid, options).solve(boundary)
}

/// Harmonic function with Dirichlet data `x^axis` on the box (axis 0, 1 or 2).
pub fn solve_harmonic(grid: &MetricGrid, axis: usize, options: SolveOptions) -> Result<ScalarSolve> {
    if axis > 2 {
        return Err(Error::invalid("axis", format!("must be 0, 1 or 2, got {axis}")));
    }
    solve_dirichlet(grid, |x| x[axis], options)
}

/// Coordinate partials `∂_a u`: central differences inside, second-order
/// one-sided differences on the faces.
pub fn coordinate_gradient(lattice: &Lattice, u: &[f64]) -> Vec<[f64; 3]> {
    let mut grad = vec![[0.0; 3]; lattice.len()];
    for a in 0..3 {
        let d = first_derivative(lattice, u, a);
        for (g, v) in grad.iter_mut().zip(d) {
            g[a] = v;
        }
    }
    grad
}

fn first_derivative(lattice: &Lattice, u: &[f64], axis: usize) -> Vec<f64> {
    let n = lattice.n;
    let s = lattice.stride(axis);
    let inv = 1.0 / (2.0 * lattice.h);
    (0..lattice.len())
        .map(|idx| {
            let c = lattice.ijk(idx)[axis];
            if c == 0 {
                (-3.0 * u[idx] + 4.0 * u[idx + s] - u[idx + 2 * s]) * inv
            } else if c == n - 1 {
                (3.0 * u[idx] - 4.0 * u[idx - s] + u[idx - 2 * s]) * inv
            } else {
                (u[idx + s] - u[idx - s]) * inv
            }
        })
        .collect()
}

fn second_derivative(lattice: &Lattice, u: &[f64], axis: usize) -> Vec<f64> {
    let n = lattice.n;
    let s = lattice.stride(axis);
    let inv = 1.0 / (lattice.h * lattice.h);
    (0..lattice.len())
        .map(|idx| {
            let c = lattice.ijk(idx)[axis];
            if c == 0 {
                (2.0 * u[idx] - 5.0 * u[idx + s] + 4.0 * u[idx + 2 * s] - u[idx + 3 * s]) * inv
            } else if c == n - 1 {
                (2.0 * u[idx] - 5.0 * u[idx - s] + 4.0 * u[idx - 2 * s] - u[idx - 3 * s]) * inv
            } else {
                (u[idx + s] - 2.0 * u[idx] + u[idx - s]) * inv
            }
        })
        .collect()
}

/// Index of `(a, b)` in the packed `[xx, yy, zz, xy, xz, yz]` layout.
#[inline]
pub fn sym_index(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) => 3,
        (0, 2) => 4,
        _ => 5,
    }
}

/// Covariant Hessian `∂_a∂_b u − Γ^k_ab ∂_k u`, packed as `[xx, yy, zz, xy, xz, yz]`.
///
/// Mixed partials differentiate the stored gradient once, so the result is
/// symmetric by construction.
pub fn covariant_hessian(grid: &MetricGrid, u: &[f64], grad: &[[f64; 3]]) -> Vec<[f64; 6]> {
    let lat = &grid.lattice;
    let mut hess = vec![[0.0; 6]; lat.len()];
    for a in 0..3 {
        for (h, v) in hess.iter_mut().zip(second_derivative(lat, u, a)) {
            h[a] = v;
        }
    }
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let comp: Vec<f64> = grad.iter().map(|g| g[b]).collect();
        for (h, v) in hess.iter_mut().zip(first_derivative(lat, &comp, a)) {
            h[sym_index(a, b)] = v;
        }
    }
    for (idx, h) in hess.iter_mut().enumerate() {
        let gamma = grid.christoffel(idx);
        let g = grad[idx];
        for a in 0..3 {
            for b in a..3 {
                let corr: f64 = (0..3).map(|k| gamma[k][a][b] * g[k]).sum();
                h[sym_index(a, b)] -= corr;
            }
        }
    }
    hess
}

/// The three harmonic coordinates with derivatives.
#[derive(Debug, Clone)]
pub struct HarmonicTriple {
    pub lattice: Lattice,
    pub u: [Vec<f64>; 3],
    /// Coordinate partials `∂_a u^j`; the metric gradient is `φ⁻⁴ ∂_a u^j`.
    pub grad_u: [Vec<[f64; 3]>; 3],
    pub hess_u: [Vec<[f64; 6]>; 3],
    /// `φ⁻⁴` per node.
    pub inv_metric: Vec<f64>,
    pub residual_norm: [f64; 3],
    pub iterations: [usize; 3],
}

impl HarmonicTriple {
    pub fn solve(grid: &MetricGrid, options: SolveOptions) -> Result<Self> {
        let solver = DirichletSolver::new(grid, options);
        let mut u: [Vec<f64>; 3] = Default::default();
        let mut residual_norm = [0.0; 3];
        let mut iterations = [0; 3];
        for axis in 0..3 {
            let s = solver.solve(|x| x[axis])?;
            u[axis] = s.u;
            residual_norm[axis] = s.outcome.relative_residual;
            iterations[axis] = s.outcome.iterations;
        }
        Ok(Self::from_fields(grid, u, residual_norm, iterations))
    }

    /// Builds derivatives for externally supplied fields.
    pub fn from_fields(
        grid: &MetricGrid,
        u: [Vec<f64>; 3],
        residual_norm: [f64; 3],
        iterations: [usize; 3],
    ) -> Self {
        let lat = grid.lattice;
        let grad_u: [Vec<[f64; 3]>; 3] = std::array::from_fn(|j| coordinate_gradient(&lat, &u[j]));
        let hess_u = std::array::from_fn(|j| covariant_hessian(grid, &u[j], &grad_u[j]));
        HarmonicTriple {
            lattice: lat,
            u,
            grad_u,
            hess_u,
            inv_metric: grid.inv_metric.clone(),
            residual_norm,
            iterations,
        }
    }

    /// `⟨∇u^j, ∇u^k⟩_g = φ⁻⁴ ∂u^j·∂u^k`.
    #[inline]
    pub fn metric_inner(&self, idx: usize, j: usize, k: usize) -> f64 {
        let a = self.grad_u[j][idx];
        let b = self.grad_u[k][idx];
        self.inv_metric[idx] * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2])
    }

    /// The 3×3 Gram matrix `⟨∇u^j, ∇u^k⟩_g` at a node.
    pub fn gram(&self, idx: usize) -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for j in 0..3 {
            for k in j..3 {
                let v = self.metric_inner(idx, j, k);
                g[j][k] = v;
                g[k][j] = v;
            }
        }
        g
    }

    /// `|∇u^j|_g`.
    #[inline]
    pub fn grad_norm(&self, j: usize, idx: usize) -> f64 {
        self.metric_inner(idx, j, j).sqrt()
    }

    /// `|∇²u^j|_g = φ⁻⁴ |H|_F`.
    #[inline]
    pub fn hess_norm(&self, j: usize, idx: usize) -> f64 {
        let h = &self.hess_u[j][idx];
        let f2 = h[0] * h[0] + h[1] * h[1] + h[2] * h[2] + 2.0 * (h[3] * h[3] + h[4] * h[4] + h[5] * h[5]);
        self.inv_metric[idx] * f2.sqrt()
    }

    /// `g^{ab} ∇²_ab u^j`.
    #[inline]
    pub fn trace(&self, j: usize, idx: usize) -> f64 {
        let h = &self.hess_u[j][idx];
        self.inv_metric[idx] * (h[0] + h[1] + h[2])
    }

    /// `𝒰(x) = (u¹, u², u³)` at a node.
    #[inline]
    pub fn image(&self, idx: usize) -> [f64; 3] {
        [self.u[0][idx], self.u[1][idx], self.u[2][idx]]
    }
}

/// Amount by which interior values escape the boundary range (0 when the
/// discrete maximum principle holds).
pub fn max_principle_violation(lattice: &Lattice, u: &[f64]) -> f64 {
    let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut imin, mut imax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (idx, &v) in u.iter().enumerate() {
        if lattice.is_boundary(idx) {
            bmin = bmin.min(v);
            bmax = bmax.max(v);
        } else {
            imin = imin.min(v);
            imax = imax.max(v);
        }
    }
    (imax - bmax).max(bmin - imin).max(0.0)
}
