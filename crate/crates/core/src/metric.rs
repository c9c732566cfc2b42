//! Conformally flat asymptotically flat metrics `g = φ⁴δ` with `R_g ≥ 0`.
//!
//! The conformal factor is a regularized Schwarzschild term plus Newtonian
//! potentials of Gaussian densities:
//!
//! ```text
//! φ(x) = 1 + m_core / (2·√(|x|² + s²)) + Σ_k a_k π^{3/2} w_k³ · erf(|x−c_k|/w_k) / |x−c_k|
//! ```
//!
//! Every term is superharmonic, so `R_g = −8 φ⁻⁵ Δφ ≥ 0`, and the ADM mass
//! is `m_core + 2 Σ_k a_k π^{3/2} w_k³`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{GridSpec, Lattice};
use crate::quadrature::{extrapolate_to_zero, gauss_legendre};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Parameters of the `(A, B, σ)` decay condition
/// `|∂^k(g_uv − δ_uv)(x)| ≤ B |x|^{−σ−|k|}` for `|x| ≥ A`, `|k| ≤ 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
}

impl AfParams {
    pub fn new(a: f64, b: f64, sigma: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::invalid("A", format!("must be positive, got {a}")));
        }
        if !(b > 0.0) {
            return Err(Error::invalid("B", format!("must be positive, got {b}")));
        }
        if !(sigma > 0.5) {
            return Err(Error::invalid("sigma", format!("must exceed 1/2, got {sigma}")));
        }
        Ok(AfParams { a, b, sigma })
    }
}

/// Gaussian density `a·exp(−|x−c|²/w²)` whose Newtonian potential enters φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub amplitude: f64,
    pub width: f64,
}

impl Bump {
    /// Contribution of this bump to the ADM mass.
    pub fn mass(&self) -> f64 {
        2.0 * self.amplitude * PI.powf(1.5) * self.width.powi(3)
    }

    /// Amplitude that gives the bump the requested ADM mass contribution.
    pub fn amplitude_for_mass(mass: f64, width: f64) -> f64 {
        mass / (2.0 * PI.powf(1.5) * width.powi(3))
    }
}

/// Value, gradient and Hessian of φ at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiJet {
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
    /// `Δφ`, evaluated from its closed form rather than as the Hessian trace.
    pub laplacian: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFactor {
    m_core: f64,
    s_reg: f64,
    bumps: Vec<Bump>,
    m_exact: f64,
}

impl ConformalFactor {
    pub fn new(m_core: f64, s_reg: f64, bumps: Vec<Bump>) -> Result<Self> {
        if !(m_core >= 0.0) || !m_core.is_finite() {
            return Err(Error::invalid("m_core", format!("must be >= 0, got {m_core}")));
        }
        if !(s_reg > 0.0) || !s_reg.is_finite() {
            return Err(Error::invalid("s_reg", format!("must be > 0, got {s_reg}")));
        }
        for b in &bumps {
            if !(b.width > 0.0) || !b.width.is_finite() {
                return Err(Error::invalid("bump.width", format!("must be > 0, got {}", b.width)));
            }
            if !(b.amplitude >= 0.0) || !b.amplitude.is_finite() {
                return Err(Error::invalid(
                    "bump.amplitude",
                    format!("must be >= 0 to keep R_g >= 0, got {}", b.amplitude),
                ));
            }
            if b.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid("bump.center", "must be finite"));
            }
        }
        let m_exact = m_core + bumps.iter().map(Bump::mass).sum::<f64>();
        Ok(ConformalFactor {
            m_core,
            s_reg,
            bumps,
            m_exact,
        })
    }

    pub fn flat() -> Self {
        ConformalFactor::new(0.0, 1.0, Vec::new()).expect("flat factor is valid")
    }

    pub fn m_core(&self) -> f64 {
        self.m_core
    }

    pub fn s_reg(&self) -> f64 {
        self.s_reg
    }

    pub fn bumps(&self) -> &[Bump] {
        &self.bumps
    }

    /// Exact ADM mass.
    pub fn mass(&self) -> f64 {
        self.m_exact
    }

    pub fn is_flat(&self) -> bool {
        self.m_exact == 0.0
    }

    /// Radius outside of which the Gaussian densities are negligible; used as
    /// the inner radius `A` of the asymptotic region.
    pub fn inner_radius(&self) -> f64 {
        self.bumps
            .iter()
            .map(|b| Lattice::norm(b.center) + 4.0 * b.width)
            .fold(self.s_reg, f64::max)
    }

    pub fn phi(&self, x: [f64; 3]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let mut value = 1.0 + self.m_core / (2.0 * (r2 + self.s_reg * self.s_reg).sqrt());
        for b in &self.bumps {
            let d = sub(x, b.center);
            let rho = Lattice::norm(d);
            let t = rho / b.width;
            let k = b.amplitude * PI.powf(1.5) * b.width.powi(3);
            value += k * erf_ratio(t).0 / b.width;
        }
        value
    }

    pub fn jet(&self, x: [f64; 3]) -> PhiJet {
        let mut jet = PhiJet {
            value: 1.0,
            grad: [0.0; 3],
            hess: [[0.0; 3]; 3],
            laplacian: 0.0,
        };

        if self.m_core != 0.0 {
            let s2 = self.s_reg * self.s_reg;
            let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
            let rho = (r2 + s2).sqrt();
            let rho3 = rho * rho * rho;
            let rho5 = rho3 * rho * rho;
            let hm = 0.5 * self.m_core;
            jet.value += hm / rho;
            for i in 0..3 {
                jet.grad[i] -= hm * x[i] / rho3;
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    jet.hess[i][j] -= hm * (delta / rho3 - 3.0 * x[i] * x[j] / rho5);
                }
            }
            jet.laplacian -= 3.0 * hm * s2 / rho5;
        }

        for b in &self.bumps {
            let d = sub(x, b.center);
            let rho = Lattice::norm(d);
            let w = b.width;
            let t = rho / w;
            let k = b.amplitude * PI.powf(1.5) * w.powi(3);
            let (e, ep_over_t, epp) = erf_ratio(t);
            jet.value += k * e / w;
            let n = if rho > 0.0 {
                [d[0] / rho, d[1] / rho, d[2] / rho]
            } else {
                [0.0; 3]
            };
            // E'(t) = t·(E'/t); gradient magnitude k·E'(t)/w².
            let g = k * ep_over_t * t / (w * w);
            let c_radial = k * epp / (w * w * w);
            let c_tangent = k * ep_over_t / (w * w * w);
            for i in 0..3 {
                jet.grad[i] += g * n[i];
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    jet.hess[i][j] +=
                        c_radial * n[i] * n[j] + c_tangent * (delta - n[i] * n[j]);
                }
            }
            jet.laplacian -= 4.0 * PI * b.amplitude * (-t * t).exp();
        }
        jet
    }

    pub fn laplacian(&self, x: [f64; 3]) -> f64 {
        self.jet(x).laplacian
    }
}

/// `E(t) = erf(t)/t`, `E'(t)/t` and `E''(t)`; the removable singularity at
/// `t = 0` is handled by the Taylor series.
fn erf_ratio(t: f64) -> (f64, f64, f64) {
    if t < 0.25 {
        let t2 = t * t;
        let mut e = 0.0;
        let mut ep_t = 0.0;
        let mut epp = 0.0;
        let mut pow = 1.0; // t^{2n}
        let mut pow_prev = 0.0; // t^{2n-2}
        let mut fact = 1.0;
        for n in 0..14 {
            let nf = n as f64;
            if n > 0 {
                fact *= nf;
            }
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let c = FRAC_2_SQRT_PI * sign / (fact * (2.0 * nf + 1.0));
            e += c * pow;
            if n > 0 {
                ep_t += 2.0 * nf * c * pow_prev;
                epp += 2.0 * nf * (2.0 * nf - 1.0) * c * pow_prev;
            }
            pow_prev = pow;
            pow *= t2;
        }
        (e, ep_t, epp)
    } else {
        let erf = libm::erf(t);
        let gauss = FRAC_2_SQRT_PI * (-t * t).exp();
        let e = erf / t;
        let ep = gauss / t - erf / (t * t);
        let ep_t = ep / t;
        let epp = -2.0 * gauss - 2.0 * ep_t;
        (e, ep_t, epp)
    }
}

#[inline]
fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// `R_g = −8 φ⁻⁵ Δφ`.
pub fn scalar_curvature(factor: &ConformalFactor, x: [f64; 3]) -> f64 {
    let jet = factor.jet(x);
    -8.0 * jet.laplacian / jet.value.powi(5)
}

/// Christoffel symbols `Γ[k][i][j]` of `φ⁴δ`:
/// `Γ^k_ij = 2φ⁻¹(δ_ik ∂_jφ + δ_jk ∂_iφ − δ_ij ∂_kφ)`.
pub fn christoffel(factor: &ConformalFactor, x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let jet = factor.jet(x);
    christoffel_from(jet.value, jet.grad)
}

pub fn christoffel_from(phi: f64, grad: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let mut gamma = [[[0.0; 3]; 3]; 3];
    let c = 2.0 / phi;
    for (k, gk) in gamma.iter_mut().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                if i == k {
                    v += grad[j];
                }
                if j == k {
                    v += grad[i];
                }
                if i == j {
                    v -= grad[k];
                }
                gk[i][j] = c * v;
            }
        }
    }
    gamma
}

/// First derivatives `∂_c g_ab`, indexed `[c][a][b]`.
pub fn metric_first_derivatives(factor: &ConformalFactor, x: [f64; 3]) -> [[[f64; 3]; 3]; 3] {
    let jet = factor.jet(x);
    let p3 = 4.0 * jet.value.powi(3);
    let mut d = [[[0.0; 3]; 3]; 3];
    for (c, dc) in d.iter_mut().enumerate() {
        for (a, row) in dc.iter_mut().enumerate() {
            row[a] = p3 * jet.grad[c];
        }
    }
    d
}

/// Per-radius result of [`check_af_decay`].
#[derive(Debug, Clone, PartialEq)]
pub struct DecayRow {
    pub radius: f64,
    /// `max |∂^k(g−δ)|·|x|^{σ+k}/B` over the sampled sphere, for `k = 0, 1, 2`.
    pub ratios: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    pub pass: bool,
}

/// Samples the `(A, B, σ)` decay inequality on spheres of the given radii.
pub fn check_af_decay(
    factor: &ConformalFactor,
    params: &AfParams,
    sample_radii: &[f64],
) -> Result<DecayReport> {
    let dirs = fibonacci_sphere(256);
    let mut rows = Vec::with_capacity(sample_radii.len());
    for &r in sample_radii {
        if !(r > params.a) {
            return Err(Error::invalid(
                "sample_radii",
                format!("radius {r} is not outside A = {}", params.a),
            ));
        }
        let mut ratios = [0.0f64; 3];
        for d in &dirs {
            let x = [r * d[0], r * d[1], r * d[2]];
            let [k0, k1, k2] = metric_deviation_norms(factor, x);
            ratios[0] = ratios[0].max(k0 * r.powf(params.sigma) / params.b);
            ratios[1] = ratios[1].max(k1 * r.powf(params.sigma + 1.0) / params.b);
            ratios[2] = ratios[2].max(k2 * r.powf(params.sigma + 2.0) / params.b);
        }
        rows.push(DecayRow { radius: r, ratios });
    }
    let pass = rows.iter().all(|row| row.ratios.iter().all(|&q| q <= 1.0));
    Ok(DecayReport { rows, pass })
}

/// Largest component magnitude of `g−δ`, `∂(g−δ)` and `∂²(g−δ)` at `x`.
fn metric_deviation_norms(factor: &ConformalFactor, x: [f64; 3]) -> [f64; 3] {
    let jet = factor.jet(x);
    let p = jet.value;
    let k0 = (p.powi(4) - 1.0).abs();
    let k1 = jet
        .grad
        .iter()
        .map(|g| (4.0 * p.powi(3) * g).abs())
        .fold(0.0, f64::max);
    let mut k2 = 0.0f64;
    for c in 0..3 {
        for d in 0..3 {
            let v = 12.0 * p * p * jet.grad[c] * jet.grad[d] + 4.0 * p.powi(3) * jet.hess[c][d];
            k2 = k2.max(v.abs());
        }
    }
    [k0, k1, k2]
}

/// Smallest `B` (with 5% headroom) for which the factor is `(A, B, σ)`-AF on
/// sampled radii in `[A, 64·A]`.
pub fn estimate_af_params(factor: &ConformalFactor, a: f64, sigma: f64) -> Result<AfParams> {
    let radii: Vec<f64> = (0..=24).map(|i| a * 1.0001 * 2f64.powf(i as f64 / 4.0)).collect();
    let probe = AfParams::new(a, 1.0, sigma)?;
    let report = check_af_decay(factor, &probe, &radii)?;
    let worst = report
        .rows
        .iter()
        .flat_map(|r| r.ratios)
        .fold(0.0f64, f64::max);
    AfParams::new(a, (1.05 * worst).max(f64::MIN_POSITIVE), sigma)
}

fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [r * th.cos(), r * th.sin(), z]
        })
        .collect()
}

/// Angular resolution of the ADM sphere quadrature: uniform in longitude,
/// Gauss–Legendre in `cos θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereQuadrature {
    pub n_lon: usize,
    pub n_lat: usize,
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        SphereQuadrature { n_lon: 64, n_lat: 32 }
    }
}

/// `(1/16π) ∮_{S_r} Σ_{j,k} (g_jk,j − g_jj,k) v^k dA` with analytic `∂g`.
pub fn adm_flux(factor: &ConformalFactor, r: f64, quad: SphereQuadrature) -> f64 {
    let (mu, w_mu) = gauss_legendre(quad.n_lat);
    let dphi = 2.0 * PI / quad.n_lon as f64;
    let mut total = 0.0;
    for (&ct, &wt) in mu.iter().zip(&w_mu) {
        let st = (1.0 - ct * ct).max(0.0).sqrt();
        for l in 0..quad.n_lon {
            let ph = (l as f64 + 0.5) * dphi;
            let v = [st * ph.cos(), st * ph.sin(), ct];
            let x = [r * v[0], r * v[1], r * v[2]];
            let dg = metric_first_derivatives(factor, x);
            let mut integrand = 0.0;
            for k in 0..3 {
                let mut s = 0.0;
                for j in 0..3 {
                    s += dg[j][j][k] - dg[k][j][j];
                }
                integrand += s * v[k];
            }
            total += integrand * wt * dphi;
        }
    }
    total * r * r / (16.0 * PI)
}

/// Boundary-integral masses on several radii and their extrapolation in `1/r`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmEstimate {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub extrapolated: f64,
    /// `max_r r·|m_r − m_exact|`, the fitted constant in `|m_r − m| ≤ C/r`.
    pub fitted_c: f64,
}

pub fn adm_extrapolated(
    factor: &ConformalFactor,
    radii: &[f64],
    quad: SphereQuadrature,
) -> Result<AdmEstimate> {
    if radii.is_empty() {
        return Err(Error::invalid("adm.radii", "need at least one radius"));
    }
    let a = factor.inner_radius();
    if let Some(&r) = radii.iter().find(|&&r| !(r > a)) {
        return Err(Error::invalid(
            "adm.radii",
            format!("radius {r} is not outside the inner radius {a}"),
        ));
    }
    let values: Vec<f64> = radii.iter().map(|&r| adm_flux(factor, r, quad)).collect();
    let inv: Vec<f64> = radii.iter().map(|r| 1.0 / r).collect();
    let extrapolated = extrapolate_to_zero(&inv, &values);
    let fitted_c = radii
        .iter()
        .zip(&values)
        .map(|(r, m)| r * (m - factor.mass()).abs())
        .fold(0.0, f64::max);
    Ok(AdmEstimate {
        radii: radii.to_vec(),
        values,
        extrapolated,
        fitted_c,
    })
}

/// Uniform-grid discretization of `φ⁴δ` with analytic per-node quantities.
#[derive(Debug, Clone)]
pub struct MetricGrid {
    pub lattice: Lattice,
    pub factor: ConformalFactor,
    pub phi: Vec<f64>,
    pub grad_phi: Vec<[f64; 3]>,
    pub lap_phi: Vec<f64>,
    /// `√det g = φ⁶`.
    pub sqrt_g: Vec<f64>,
    pub scalar_r: Vec<f64>,
    /// `φ⁻⁴`, the scalar multiplying `δ^{ij}` in `g^{ij}`.
    pub inv_metric: Vec<f64>,
}

impl MetricGrid {
    pub fn build(factor: &ConformalFactor, spec: GridSpec) -> Result<Self> {
        let lattice = spec.lattice()?;
        let n = lattice.len();
        let mut phi = Vec::with_capacity(n);
        let mut grad_phi = Vec::with_capacity(n);
        let mut lap_phi = Vec::with_capacity(n);
        let mut sqrt_g = Vec::with_capacity(n);
        let mut scalar_r = Vec::with_capacity(n);
        let mut inv_metric = Vec::with_capacity(n);
        for idx in 0..n {
            let jet = factor.jet(lattice.position(idx));
            let p = jet.value;
            if !p.is_finite() || jet.grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite("conformal factor"));
            }
            let p2 = p * p;
            let p4 = p2 * p2;
            phi.push(p);
            grad_phi.push(jet.grad);
            lap_phi.push(jet.laplacian);
            sqrt_g.push(p4 * p2);
            scalar_r.push(-8.0 * jet.laplacian / (p4 * p));
            inv_metric.push(1.0 / p4);
        }
        Ok(MetricGrid {
            lattice,
            factor: factor.clone(),
            phi,
            grad_phi,
            lap_phi,
            sqrt_g,
            scalar_r,
            inv_metric,
        })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            h: self.lattice.h,
            l_box: self.lattice.l_box,
        }
    }

    /// ADM boundary integral on `S_r`, restricted to `A < r < L_box`.
    pub fn adm_mass_boundary_integral(&self, r: f64) -> Result<f64> {
        let a = self.factor.inner_radius();
        if !(r > a && r < self.lattice.l_box) {
            return Err(Error::invalid(
                "r",
                format!("radius {r} outside ({a}, {})", self.lattice.l_box),
            ));
        }
        Ok(adm_flux(&self.factor, r, SphereQuadrature::default()))
    }

    pub fn christoffel(&self, idx: usize) -> [[[f64; 3]; 3]; 3] {
        christoffel_from(self.phi[idx], self.grad_phi[idx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schwarzschild(m: f64) -> ConformalFactor {
        ConformalFactor::new(m, 0.5, vec![]).unwrap()
    }

    fn bump_member() -> ConformalFactor {
        ConformalFactor::new(
            0.1,
            0.5,
            vec![Bump {
                center: [3.0, 0.0, 0.0],
                amplitude: 0.01,
                width: 1.0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn flat_factor_is_trivial() {
        let f = ConformalFactor::flat();
        assert_eq!(f.mass(), 0.0);
        let jet = f.jet([0.3, -1.0, 2.0]);
        assert_eq!(jet.value, 1.0);
        assert_eq!(jet.grad, [0.0; 3]);
        assert_eq!(scalar_curvature(&f, [1.0, 2.0, 3.0]), 0.0);
        assert_eq!(christoffel(&f, [1.0, 0.0, 0.0]), [[[0.0; 3]; 3]; 3]);
    }

    #[test]
    fn exact_masses() {
        assert_eq!(schwarzschild(0.2).mass(), 0.2);
        let expected = 0.1 + 2.0 * 0.01 * PI.powf(1.5);
        assert!((bump_member().mass() - expected).abs() < 1e-15);
        assert!((bump_member().mass() - 0.2114).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ConformalFactor::new(0.1, 0.0, vec![]).is_err());
        assert!(ConformalFactor::new(-0.1, 1.0, vec![]).is_err());
        let bad_w = Bump {
            center: [0.0; 3],
            amplitude: 1.0,
            width: 0.0,
        };
        assert!(ConformalFactor::new(0.0, 1.0, vec![bad_w]).is_err());
        let bad_a = Bump {
            center: [0.0; 3],
            amplitude: -1.0,
            width: 1.0,
        };
        assert!(ConformalFactor::new(0.0, 1.0, vec![bad_a]).is_err());
        assert!(AfParams::new(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn scalar_curvature_at_origin_closed_form() {
        // Δφ(0) = −3·0.2/(2·0.5³) = −2.4, φ(0) = 1.2.
        let f = schwarzschild(0.2);
        let jet = f.jet([0.0; 3]);
        assert!((jet.value - 1.2).abs() < 1e-15);
        assert!((jet.laplacian + 2.4).abs() < 1e-13);
        let r = scalar_curvature(&f, [0.0; 3]);
        assert!((r - 19.2 / 1.2f64.powi(5)).abs() < 1e-12);
        assert!((r - 7.716).abs() < 1e-3);
    }

    #[test]
    fn christoffel_closed_form_and_symmetry() {
        let f = schwarzschild(0.2);
        let x = [2.0, 0.0, 0.0];
        let g = christoffel(&f, x);
        let dphi = -0.1 * 2.0 / 4.25f64.powf(1.5);
        let phi = 1.0 + 0.1 / 4.25f64.sqrt();
        assert!((g[0][0][0] - 2.0 * dphi / phi).abs() < 1e-15);
        let f = bump_member();
        for x in [[0.3, -0.7, 1.1], [3.0, 0.0, 0.0], [2.9, 0.1, -0.2]] {
            let g = christoffel(&f, x);
            for k in 0..3 {
                for i in 0..3 {
                    for j in 0..3 {
                        assert_eq!(g[k][i][j], g[k][j][i]);
                    }
                }
            }
        }
    }

    #[test]
    fn series_and_closed_form_agree_near_cutoff() {
        let below = erf_ratio(0.25 - 1e-12);
        let above = erf_ratio(0.25 + 1e-12);
        assert!((below.0 - above.0).abs() < 1e-12);
        assert!((below.1 - above.1).abs() < 1e-10);
        assert!((below.2 - above.2).abs() < 1e-10);
        let at_zero = erf_ratio(0.0);
        assert!((at_zero.0 - FRAC_2_SQRT_PI).abs() < 1e-16);
    }

    #[test]
    fn bump_laplacian_matches_hessian_trace() {
        let f = bump_member();
        for x in [[3.0, 0.0, 0.0], [3.0 + 1e-7, 0.0, 0.0], [2.0, 1.0, 0.5], [0.0, 0.0, 0.0]] {
            let jet = f.jet(x);
            let trace = jet.hess[0][0] + jet.hess[1][1] + jet.hess[2][2];
            assert!(
                (trace - jet.laplacian).abs() < 1e-12 * jet.laplacian.abs().max(1.0),
                "{x:?}: {trace} vs {}",
                jet.laplacian
            );
            assert!(jet.laplacian <= 0.0);
        }
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let f = bump_member();
        let x = [2.1, 0.4, -0.3];
        let jet = f.jet(x);
        let e = 1e-5;
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += e;
            xm[a] -= e;
            let fd = (f.phi(xp) - f.phi(xm)) / (2.0 * e);
            assert!((fd - jet.grad[a]).abs() < 1e-9);
            let gp = f.jet(xp).grad;
            let gm = f.jet(xm).grad;
            for b in 0..3 {
                let fd2 = (gp[b] - gm[b]) / (2.0 * e);
                assert!((fd2 - jet.hess[a][b]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn decay_check_examples() {
        let flat = ConformalFactor::flat();
        let p = AfParams::new(1.0, 1.0, 1.0).unwrap();
        let rep = check_af_decay(&flat, &p, &[2.0, 4.0]).unwrap();
        assert!(rep.pass);
        assert!(rep.rows.iter().all(|r| r.ratios == [0.0; 3]));

        let f = schwarzschild(0.2);
        let p = AfParams::new(1.0, 10.0, 1.0).unwrap();
        assert!(check_af_decay(&f, &p, &[4.0, 8.0, 16.0]).unwrap().pass);

        // φ − 1 decays like 1/r, slower than r^{-1.5}.
        let p = AfParams::new(1.0, 1.0, 1.5).unwrap();
        let rep = check_af_decay(&f, &p, &[4.0, 64.0, 1024.0, 16384.0]).unwrap();
        assert!(!rep.pass);
        assert!(rep.rows.last().unwrap().ratios[0] > 1.0);

        assert!(check_af_decay(&f, &p, &[0.5]).is_err());
    }

    #[test]
    fn estimated_af_params_pass_their_own_check() {
        let f = bump_member();
        let a = f.inner_radius();
        let p = estimate_af_params(&f, a, 1.0).unwrap();
        let radii = [a * 1.5, a * 3.0, a * 10.0];
        assert!(check_af_decay(&f, &p, &radii).unwrap().pass);
    }

    #[test]
    fn grid_nodes_have_nonnegative_curvature() {
        let f = bump_member();
        let g = MetricGrid::build(&f, GridSpec::new(0.5, 4.0).unwrap()).unwrap();
        assert!(g.scalar_r.iter().all(|&r| r >= 0.0));
        assert!(g.phi.iter().all(|&p| p >= 1.0));
        assert_eq!(g.lattice.n, 17);
        assert!(g.adm_mass_boundary_integral(20.0).is_err());
    }
}
