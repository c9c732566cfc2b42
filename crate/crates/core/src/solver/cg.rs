use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned conjugate gradients for `A x = b`.
///
/// `apply(x, out)` writes `A x`; `precond(r, z)` writes `z ≈ A⁻¹ r`. Both must
/// be symmetric. `x` holds the initial guess on entry. Converges when
/// `‖b − A x‖ ≤ tol·‖b‖` (or `‖r₀‖` when `b = 0`).
pub fn pcg<A, P>(
    mut apply: A,
    mut precond: P,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome>
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let len = b.len();
    let mut r = vec![0.0; len];
    apply(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let r0 = dot(&r, &r).sqrt();
    let scale = {
        let nb = dot(b, b).sqrt();
        if nb > 0.0 {
            nb
        } else {
            r0
        }
    };
    if r0 == 0.0 || scale == 0.0 {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut z = vec![0.0; len];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; len];
    let mut rel = r0 / scale;
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !pap.is_finite() || pap <= 0.0 {
            return Err(Error::NotConverged {
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rz / pap;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = dot(&r, &r).sqrt() / scale;
        if !rel.is_finite() {
            return Err(Error::NonFinite("conjugate gradient residual"));
        }
        if rel <= tol {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: rel,
            });
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_tridiagonal_system() {
        // 1-D Dirichlet Laplacian
        let n = 50;
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let l = if i > 0 { x[i - 1] } else { 0.0 };
                let r = if i + 1 < n { x[i + 1] } else { 0.0 };
                out[i] = 2.0 * x[i] - l - r;
            }
        };
        let b = vec![1.0; n];
        let mut x = vec![0.0; n];
        let out = pcg(apply, |r, z| z.copy_from_slice(r), &b, &mut x, 1e-12, 200).unwrap();
        assert!(out.iterations <= n);
        let mut ax = vec![0.0; n];
        apply(&x, &mut ax);
        assert!(ax.iter().zip(&b).all(|(a, b)| (a - b).abs() < 1e-9));
    }

    #[test]
    fn reports_non_convergence() {
        let apply = |x: &[f64], out: &mut [f64]| {
            for (o, (i, v)) in out.iter_mut().zip(x.iter().enumerate()) {
                *o = (i + 1) as f64 * v;
            }
        };
        let b = vec![1.0; 20];
        let mut x = vec![0.0; 20];
        let err = pcg(apply, |r, z| z.copy_from_slice(r), &b, &mut x, 1e-14, 3).unwrap_err();
        assert!(matches!(err, Error::NotConverged { iterations: 3, .. }));
    }
}
