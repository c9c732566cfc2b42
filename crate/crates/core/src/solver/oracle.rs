//! Radial reference solution for bump-free factors.
//!
//! For `φ = φ(r)` the ansatz `u = f(r)·x^j` turns the flux-form equation
//! `∂_i(φ²∂_i u) = 0` into
//!
//! ```text
//! f'' + (4/r + 2φ'/φ) f' + 2φ'/(rφ) f = 0,
//! ```
//!
//! or, in `t = ln r` with `p = rφ'/φ`, `f_tt = −(3 + 2p) f_t − 2p f`. Regularity
//! at the origin fixes `f = 1 + α r² + …` with `α = m/(10 s³ φ(0))`; the
//! outward integration is normalized so that `f ≈ 1 − m/(2r)` far out.

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::metric::ConformalFactor;

const R_START: f64 = 1e-4;
const R_END: f64 = 1e6;
const R_CHECK: f64 = 1e5;
const DT: f64 = 1e-3;

/// Tabulated `f(r)` on a uniform grid in `ln r`.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    t0: f64,
    dt: f64,
    f: Vec<f64>,
    ft: Vec<f64>,
    alpha: f64,
}

impl RadialProfile {
    /// `f(r)`; cubic Hermite interpolation in `ln r`.
    pub fn eval(&self, r: f64) -> f64 {
        if r <= R_START {
            return self.f[0] * (1.0 + self.alpha * r * r) / (1.0 + self.alpha * R_START * R_START);
        }
        let s = (r.ln() - self.t0) / self.dt;
        let last = self.f.len() - 1;
        if s >= last as f64 {
            return self.f[last];
        }
        let i = s.floor() as usize;
        let x = s - i as f64;
        let (f0, f1) = (self.f[i], self.f[i + 1]);
        let (d0, d1) = (self.ft[i] * self.dt, self.ft[i + 1] * self.dt);
        let x2 = x * x;
        let x3 = x2 * x;
        (2.0 * x3 - 3.0 * x2 + 1.0) * f0
            + (x3 - 2.0 * x2 + x) * d0
            + (-2.0 * x3 + 3.0 * x2) * f1
            + (x3 - x2) * d1
    }

    pub fn r_max(&self) -> f64 {
        (self.t0 + self.dt * (self.f.len() - 1) as f64).exp()
    }
}

/// Shoots the radial equation outward and normalizes at infinity.
///
/// Fails for factors with bumps or when the normalization constant is not
/// stable between `r = 10⁵` and `r = 10⁶`.
pub fn radial_ode_oracle(factor: &ConformalFactor, r_max: f64) -> Result<RadialProfile> {
    if !factor.bumps().is_empty() {
        return Err(Error::invalid("factor", "radial oracle needs a bump-free factor"));
    }
    if !(r_max > 0.0) || r_max > R_END {
        return Err(Error::invalid("r_max", format!("must lie in (0, {R_END}]")));
    }
    let m = factor.m_core();
    let s = factor.s_reg();
    let phi0 = factor.phi([0.0; 3]);
    let alpha = m / (10.0 * s * s * s * phi0);

    let p = |t: f64| {
        let r = t.exp();
        let jet = factor.jet([r, 0.0, 0.0]);
        r * jet.grad[0] / jet.value
    };
    let rhs = |t: f64, y: [f64; 2]| {
        let pv = p(t);
        [y[1], -(3.0 + 2.0 * pv) * y[1] - 2.0 * pv * y[0]]
    };

    let t0 = R_START.ln();
    let steps = ((R_END.ln() - t0) / DT).ceil() as usize;
    let mut f = Vec::with_capacity(steps + 1);
    let mut ft = Vec::with_capacity(steps + 1);
    let mut y = [1.0 + alpha * R_START * R_START, 2.0 * alpha * R_START * R_START];
    f.push(y[0]);
    ft.push(y[1]);
    for i in 0..steps {
        let t = t0 + i as f64 * DT;
        let k1 = rhs(t, y);
        let k2 = rhs(t + 0.5 * DT, [y[0] + 0.5 * DT * k1[0], y[1] + 0.5 * DT * k1[1]]);
        let k3 = rhs(t + 0.5 * DT, [y[0] + 0.5 * DT * k2[0], y[1] + 0.5 * DT * k2[1]]);
        let k4 = rhs(t + DT, [y[0] + DT * k3[0], y[1] + DT * k3[1]]);
        for c in 0..2 {
            y[c] += DT / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if !y[0].is_finite() || !y[1].is_finite() {
            return Err(Error::Oracle(format!("non-finite state at r = {:.3e}", t.exp())));
        }
        f.push(y[0]);
        ft.push(y[1]);
    }

    let mut raw = RadialProfile {
        t0,
        dt: DT,
        f,
        ft,
        alpha,
    };
    let c_end = raw.f[raw.f.len() - 1] / (1.0 - m / (2.0 * R_END));
    let c_check = raw.eval(R_CHECK) / (1.0 - m / (2.0 * R_CHECK));
    if ((c_end - c_check) / c_end).abs() > 1e-8 {
        return Err(Error::Oracle(format!(
            "normalization drifts: {c_check:.12} at r = {R_CHECK:e} vs {c_end:.12} at r = {R_END:e}"
        )));
    }
    raw.f.iter_mut().for_each(|v| *v /= c_end);
    raw.ft.iter_mut().for_each(|v| *v /= c_end);
    Ok(raw)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub max_abs_error: f64,
    pub max_abs_reference: f64,
    /// `max|u − f·x^j| / max|f·x^j|` over all nodes.
    pub relative_error: f64,
}

pub fn oracle_comparison(
    lattice: &Lattice,
    u: &[f64],
    axis: usize,
    profile: &RadialProfile,
) -> OracleComparison {
    let mut err: f64 = 0.0;
    let mut reference: f64 = 0.0;
    for (idx, &v) in u.iter().enumerate() {
        let x = lattice.position(idx);
        let expected = profile.eval(Lattice::norm(x)) * x[axis];
        err = err.max((v - expected).abs());
        reference = reference.max(expected.abs());
    }
    OracleComparison {
        max_abs_error: err,
        max_abs_reference: reference,
        relative_error: if reference > 0.0 { err / reference } else { err },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_profile_is_one() {
        let prof = radial_ode_oracle(&ConformalFactor::flat(), 100.0).unwrap();
        for r in [0.0, 0.3, 1.0, 17.0, 1e4] {
            assert!((prof.eval(r) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn profile_satisfies_ode_and_asymptote() {
        let fac = ConformalFactor::new(0.2, 0.5, vec![]).unwrap();
        let prof = radial_ode_oracle(&fac, 100.0).unwrap();
        // residual of the r-form equation by finite differences of the table
        for r in [0.3, 1.0, 2.5, 7.0] {
            let d = 1e-3 * r;
            let (fm, f0, fp) = (prof.eval(r - d), prof.eval(r), prof.eval(r + d));
            let f1 = (fp - fm) / (2.0 * d);
            let f2 = (fp - 2.0 * f0 + fm) / (d * d);
            let jet = fac.jet([r, 0.0, 0.0]);
            let q = jet.grad[0] / jet.value;
            let res = f2 + (4.0 / r + 2.0 * q) * f1 + 2.0 * q / r * f0;
            assert!(res.abs() < 1e-4, "r = {r}: {res}");
        }
        assert!((prof.eval(1e3) - (1.0 - 0.1e-3)).abs() < 1e-7);
        assert!(radial_ode_oracle(&fac, 2e6).is_err());
    }
}
