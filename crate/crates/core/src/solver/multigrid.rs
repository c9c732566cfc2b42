use super::laplace::LaplaceBeltrami;
use crate::grid::Lattice;

const SMOOTHING_STEPS: usize = 2;
const COARSE_SWEEPS: usize = 40;

/// Geometric multigrid hierarchy used as a symmetric CG preconditioner.
///
/// Coarse operators are rediscretized from `φ` injected onto every other
/// node. The V-cycle uses red–black Gauss–Seidel (red then black before the
/// coarse correction, black then red after), full-weighting restriction and
/// trilinear prolongation, so the preconditioner is symmetric.
#[derive(Debug, Clone)]
pub struct Multigrid {
    levels: Vec<LaplaceBeltrami>,
}

impl Multigrid {
    pub fn new(lattice: Lattice, phi: &[f64]) -> Self {
        let mut levels = vec![LaplaceBeltrami::from_phi(lattice, phi)];
        let mut phi = phi.to_vec();
        let mut lat = lattice;
        while (lat.n - 1) % 2 == 0 && lat.n > 5 {
            let nc = (lat.n - 1) / 2 + 1;
            let coarse = Lattice {
                n: nc,
                h: lat.h * 2.0,
                l_box: lat.l_box,
            };
            let mut phic = vec![0.0; coarse.len()];
            for k in 0..nc {
                for j in 0..nc {
                    for i in 0..nc {
                        phic[coarse.index(i, j, k)] = phi[lat.index(2 * i, 2 * j, 2 * k)];
                    }
                }
            }
            levels.push(LaplaceBeltrami::from_phi(coarse, &phic));
            phi = phic;
            lat = coarse;
        }
        Multigrid { levels }
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// `z ≈ A⁻¹ r` by one V-cycle from a zero initial guess.
    pub fn precondition(&self, r: &[f64], z: &mut [f64]) {
        self.vcycle(0, r, z);
    }

    fn vcycle(&self, level: usize, b: &[f64], x: &mut [f64]) {
        let op = &self.levels[level];
        x.iter_mut().for_each(|v| *v = 0.0);
        if level + 1 == self.levels.len() {
            for _ in 0..COARSE_SWEEPS {
                gauss_seidel(op, b, x, 0);
                gauss_seidel(op, b, x, 1);
            }
            for _ in 0..COARSE_SWEEPS {
                gauss_seidel(op, b, x, 1);
                gauss_seidel(op, b, x, 0);
            }
            return;
        }
        for _ in 0..SMOOTHING_STEPS {
            gauss_seidel(op, b, x, 0);
            gauss_seidel(op, b, x, 1);
        }
        let mut res = vec![0.0; b.len()];
        op.apply_scaled(x, &mut res);
        for ((r, &bi), idx) in res.iter_mut().zip(b).zip(0..) {
            *r = if op.lattice().is_boundary(idx) { 0.0 } else { bi - *r };
        }
        let coarse = &self.levels[level + 1];
        let bc = restrict(op.lattice(), coarse.lattice(), &res);
        let mut xc = vec![0.0; bc.len()];
        self.vcycle(level + 1, &bc, &mut xc);
        prolong_add(op.lattice(), coarse.lattice(), &xc, x);
        for _ in 0..SMOOTHING_STEPS {
            gauss_seidel(op, b, x, 1);
            gauss_seidel(op, b, x, 0);
        }
    }
}

/// One Gauss–Seidel half sweep over nodes with `(i+j+k) % 2 == color`.
fn gauss_seidel(op: &LaplaceBeltrami, b: &[f64], x: &mut [f64], color: usize) {
    let lat = op.lattice();
    let n = lat.n;
    let (sx, sy, sz) = (1, n, n * n);
    let [cx, cy, cz] = op.coeff();
    let diag = op.diagonal();
    for k in 1..n - 1 {
        for j in 1..n - 1 {
            let start = 1 + (color + j + k + 1) % 2;
            let mut idx = lat.index(start, j, k);
            let end = lat.index(n - 1, j, k);
            while idx < end {
                let s = cx[idx] * x[idx + sx]
                    + cx[idx - sx] * x[idx - sx]
                    + cy[idx] * x[idx + sy]
                    + cy[idx - sy] * x[idx - sy]
                    + cz[idx] * x[idx + sz]
                    + cz[idx - sz] * x[idx - sz];
                x[idx] = (b[idx] + s) / diag[idx];
                idx += 2;
            }
        }
    }
}

/// Full weighting times 4: the coarse right-hand side of the `h²`-scaled system.
fn restrict(fine: &Lattice, coarse: &Lattice, r: &[f64]) -> Vec<f64> {
    let nc = coarse.n;
    let mut out = vec![0.0; coarse.len()];
    const W: [f64; 3] = [0.5, 1.0, 0.5];
    for k in 1..nc - 1 {
        for j in 1..nc - 1 {
            for i in 1..nc - 1 {
                let (fi, fj, fk) = (2 * i, 2 * j, 2 * k);
                let mut s = 0.0;
                for (dz, wz) in W.iter().enumerate() {
                    for (dy, wy) in W.iter().enumerate() {
                        for (dx, wx) in W.iter().enumerate() {
                            s += wx * wy * wz * r[fine.index(fi + dx - 1, fj + dy - 1, fk + dz - 1)];
                        }
                    }
                }
                out[coarse.index(i, j, k)] = 4.0 * s / 8.0;
            }
        }
    }
    out
}

/// `x += P xc` with trilinear interpolation.
fn prolong_add(fine: &Lattice, coarse: &Lattice, xc: &[f64], x: &mut [f64]) {
    let n = fine.n;
    let stencil = |i: usize| -> ([usize; 2], [f64; 2], usize) {
        if i % 2 == 0 {
            ([i / 2, 0], [1.0, 0.0], 1)
        } else {
            ([i / 2, i / 2 + 1], [0.5, 0.5], 2)
        }
    };
    for k in 1..n - 1 {
        let (ck, wk, nk) = stencil(k);
        for j in 1..n - 1 {
            let (cj, wj, nj) = stencil(j);
            for i in 1..n - 1 {
                let (ci, wi, ni) = stencil(i);
                let mut v = 0.0;
                for a in 0..nk {
                    for b in 0..nj {
                        for c in 0..ni {
                            v += wk[a] * wj[b] * wi[c] * xc[coarse.index(ci[c], cj[b], ck[a])];
                        }
                    }
                }
                x[fine.index(i, j, k)] += v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::metric::{ConformalFactor, MetricGrid};
    use rand::{Rng, SeedableRng};

    fn setup() -> (LaplaceBeltrami, Multigrid) {
        let f = ConformalFactor::new(0.4, 0.5, vec![]).unwrap();
        let grid = MetricGrid::build(&f, GridSpec::new(0.25, 2.0).unwrap()).unwrap();
        (
            LaplaceBeltrami::assemble(&grid),
            Multigrid::new(grid.lattice, &grid.phi),
        )
    }

    #[test]
    fn hierarchy_depth() {
        let (_, mg) = setup();
        // 17 -> 9 -> 5
        assert_eq!(mg.depth(), 3);
    }

    #[test]
    fn preconditioner_is_symmetric() {
        let (op, mg) = setup();
        let lat = *op.lattice();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut rand_vec = || -> Vec<f64> {
            (0..lat.len())
                .map(|i| if lat.is_boundary(i) { 0.0 } else { rng.gen_range(-1.0..1.0) })
                .collect()
        };
        let (r1, r2) = (rand_vec(), rand_vec());
        let mut z1 = vec![0.0; lat.len()];
        let mut z2 = vec![0.0; lat.len()];
        mg.precondition(&r1, &mut z1);
        mg.precondition(&r2, &mut z2);
        let a: f64 = r2.iter().zip(&z1).map(|(x, y)| x * y).sum();
        let b: f64 = r1.iter().zip(&z2).map(|(x, y)| x * y).sum();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        let pos: f64 = r1.iter().zip(&z1).map(|(x, y)| x * y).sum();
        assert!(pos > 0.0);
    }
}
