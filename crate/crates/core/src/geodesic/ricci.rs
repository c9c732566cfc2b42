use crate::metric::ConformalFactor;

/// Coordinate components of `Ric` for `g = e^{2f}δ`, `f = 2 ln φ`:
/// `Ric = −(∇²f − df⊗df) − (Δf + |df|²)δ`.
pub fn ricci_tensor(factor: &ConformalFactor, x: [f64; 3]) -> [[f64; 3]; 3] {
    let jet = factor.jet(x);
    let p = jet.value;
    let df: [f64; 3] = jet.grad.map(|g| 2.0 * g / p);
    let mut ddf = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ddf[i][j] = 2.0 * (jet.hess[i][j] / p - jet.grad[i] * jet.grad[j] / (p * p));
        }
    }
    let lap = ddf[0][0] + ddf[1][1] + ddf[2][2];
    let sq = df[0] * df[0] + df[1] * df[1] + df[2] * df[2];
    let mut ric = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            ric[i][j] = -(ddf[i][j] - df[i] * df[j]);
        }
        ric[i][i] -= lap + sq;
    }
    ric
}

/// Smallest eigenvalue of `Ric` relative to `g`, i.e. of `φ⁻⁴ Ric_ij`.
pub fn ricci_min_eigenvalue(factor: &ConformalFactor, x: [f64; 3]) -> f64 {
    let ric = ricci_tensor(factor, x);
    let p4 = factor.phi(x).powi(4);
    min_symmetric_eigenvalue(ric) / p4
}

/// Trigonometric closed form for the smallest eigenvalue of a symmetric 3×3.
fn min_symmetric_eigenvalue(a: [[f64; 3]; 3]) -> f64 {
    let p1 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    if p1 == 0.0 {
        return a[0][0].min(a[1][1]).min(a[2][2]);
    }
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = a;
    for (i, row) in b.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (*v - if i == j { q } else { 0.0 }) / p;
        }
    }
    let r = (crate::region::det3(b) / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}
