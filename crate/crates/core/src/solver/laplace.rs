use crate::grid::Lattice;
use crate::metric::MetricGrid;

/// Flux-form Laplace–Beltrami operator of `φ⁴δ`.
///
/// Internally stores the `h²φ⁶`-scaled operator
/// `(A u)_n = Σ_faces c_f (u_n − u_nb)`, with `c_f` the face value of `φ²`,
/// which is symmetric positive definite on interior unknowns.
#[derive(Debug, Clone)]
pub struct LaplaceBeltrami {
    lattice: Lattice,
    /// `coeff[a][idx]`: face coefficient between `idx` and `idx + stride(a)`.
    coeff: [Vec<f64>; 3],
    diag: Vec<f64>,
    weight: Vec<f64>,
}

impl LaplaceBeltrami {
    /// Fine-grid operator with face coefficients `φ²` evaluated analytically
    /// at face midpoints.
    pub fn assemble(grid: &MetricGrid) -> Self {
        let lattice = grid.lattice;
        let n = lattice.n;
        let coeff = std::array::from_fn(|a| {
            (0..lattice.len())
                .map(|idx| {
                    if lattice.ijk(idx)[a] + 1 < n {
                        let mut x = lattice.position(idx);
                        x[a] += 0.5 * lattice.h;
                        let p = grid.factor.phi(x);
                        p * p
                    } else {
                        0.0
                    }
                })
                .collect()
        });
        Self::from_coefficients(lattice, coeff, &grid.phi)
    }

    /// Operator with arithmetic face averages of nodal `φ²`, used for
    /// rediscretized coarse levels.
    pub fn from_phi(lattice: Lattice, phi: &[f64]) -> Self {
        assert_eq!(phi.len(), lattice.len());
        let n = lattice.n;
        let phi2: Vec<f64> = phi.iter().map(|p| p * p).collect();
        let coeff = std::array::from_fn(|a| {
            let s = lattice.stride(a);
            (0..lattice.len())
                .map(|idx| {
                    if lattice.ijk(idx)[a] + 1 < n {
                        0.5 * (phi2[idx] + phi2[idx + s])
                    } else {
                        0.0
                    }
                })
                .collect()
        });
        Self::from_coefficients(lattice, coeff, phi)
    }

    fn from_coefficients(lattice: Lattice, coeff: [Vec<f64>; 3], phi: &[f64]) -> Self {
        let len = lattice.len();
        let mut diag = vec![0.0; len];
        for (idx, d) in diag.iter_mut().enumerate() {
            if lattice.is_boundary(idx) {
                continue;
            }
            for (a, c) in coeff.iter().enumerate() {
                *d += c[idx] + c[idx - lattice.stride(a)];
            }
        }
        let weight = phi.iter().map(|p| p.powi(6)).collect();
        LaplaceBeltrami {
            lattice,
            coeff,
            diag,
            weight,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub(crate) fn coeff(&self) -> &[Vec<f64>; 3] {
        &self.coeff
    }

    /// Diagonal of the scaled operator (zero on boundary nodes).
    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// `φ⁶` per node: the weight making `Δ_g` self-adjoint.
    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    /// `out = A u` on interior nodes, zero on the boundary.
    pub fn apply_scaled(&self, u: &[f64], out: &mut [f64]) {
        let n = self.lattice.n;
        let (sx, sy, sz) = (1, n, n * n);
        let [cx, cy, cz] = &self.coeff;
        out.iter_mut().for_each(|o| *o = 0.0);
        for k in 1..n - 1 {
            for j in 1..n - 1 {
                let row = self.lattice.index(0, j, k);
                for idx in row + 1..row + n - 1 {
                    let uc = u[idx];
                    out[idx] = cx[idx] * (uc - u[idx + sx])
                        + cx[idx - sx] * (uc - u[idx - sx])
                        + cy[idx] * (uc - u[idx + sy])
                        + cy[idx - sy] * (uc - u[idx - sy])
                        + cz[idx] * (uc - u[idx + sz])
                        + cz[idx - sz] * (uc - u[idx - sz]);
                }
            }
        }
    }

    /// Discrete `Δ_g u = −A u / (h² φ⁶)` at interior nodes, zero on the boundary.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_scaled(u, &mut out);
        let h2 = self.lattice.h * self.lattice.h;
        for (o, w) in out.iter_mut().zip(&self.weight) {
            *o = -*o / (h2 * w);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::metric::ConformalFactor;

    #[test]
    fn flat_operator_annihilates_linear_functions() {
        let grid = MetricGrid::build(&ConformalFactor::flat(), GridSpec::new(0.5, 2.0).unwrap())
            .unwrap();
        let op = LaplaceBeltrami::assemble(&grid);
        let lat = grid.lattice;
        let u: Vec<f64> = (0..lat.len())
            .map(|i| {
                let x = lat.position(i);
                1.0 + 2.0 * x[0] - 3.0 * x[1] + 0.5 * x[2]
            })
            .collect();
        assert!(op.apply(&u).iter().all(|v| v.abs() < 1e-12));
        // standard 7-point stencil on a quadratic: Δ(x²) = 2
        let q: Vec<f64> = (0..lat.len()).map(|i| lat.position(i)[0].powi(2)).collect();
        let lq = op.apply(&q);
        for idx in 0..lat.len() {
            if !lat.is_boundary(idx) {
                assert!((lq[idx] - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constants_are_in_the_kernel() {
        let f = ConformalFactor::new(0.2, 0.5, vec![]).unwrap();
        let grid = MetricGrid::build(&f, GridSpec::new(0.5, 2.0).unwrap()).unwrap();
        let op = LaplaceBeltrami::assemble(&grid);
        let ones = vec![3.7; grid.lattice.len()];
        assert!(op.apply(&ones).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn off_diagonals_nonpositive_and_diagonally_dominant() {
        let f = ConformalFactor::new(0.4, 0.5, vec![]).unwrap();
        let grid = MetricGrid::build(&f, GridSpec::new(0.5, 2.0).unwrap()).unwrap();
        let op = LaplaceBeltrami::assemble(&grid);
        let lat = grid.lattice;
        for idx in 0..lat.len() {
            if lat.is_boundary(idx) {
                continue;
            }
            let mut off = 0.0;
            for a in 0..3 {
                let s = lat.stride(a);
                assert!(op.coeff[a][idx] > 0.0 && op.coeff[a][idx - s] > 0.0);
                off += op.coeff[a][idx] + op.coeff[a][idx - s];
            }
            assert!((op.diag[idx] - off).abs() < 1e-14);
        }
    }
}
