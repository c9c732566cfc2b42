//! Harmonic-function mass lower bound and far-field sup/decay diagnostics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::metric::{adm_extrapolated, MetricGrid, SphereQuadrature};
use crate::quadrature::fit_line;
use crate::solver::HarmonicTriple;

/// Floor for `|∇u|` in the denominator of the Hessian term.
pub const EPS_GRAD: f64 = 1e-8;
/// Boundary cells excluded from volume integrals and sups.
pub const COLLAR_CELLS: usize = 2;
pub const HESSIAN_EXPONENT: f64 = 5.0 / 96.0;
pub const DEFECT_EXPONENT: f64 = 1.0 / 192.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkksBound {
    /// `(1/16π) ∫ (|∇²u|²/|∇u| + R|∇u|) dV_g` over the collar-trimmed interior.
    pub value: f64,
    pub hessian_part: f64,
    pub curvature_part: f64,
    pub collar_cells: usize,
    /// `∫ dV_g` over the excluded collar, for reference.
    pub excluded_volume: f64,
}

/// Midpoint quadrature of the mass-bound integrand for coordinate `j`.
pub fn bkks_lower_bound(grid: &MetricGrid, triple: &HarmonicTriple, j: usize) -> Result<BkksBound> {
    let lat = &grid.lattice;
    let h3 = lat.h.powi(3);
    let mut hess_part = 0.0;
    let mut curv_part = 0.0;
    let mut excluded = 0.0;
    for idx in 0..lat.len() {
        let dv = grid.sqrt_g[idx] * h3;
        if !lat.is_inside_collar(idx, COLLAR_CELLS) {
            excluded += dv;
            continue;
        }
        let gn = triple.grad_norm(j, idx);
        let hn = triple.hess_norm(j, idx);
        let a = hn * hn / gn.max(EPS_GRAD);
        let b = grid.scalar_r[idx] * gn;
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::NonFinite("mass-bound integrand"));
        }
        hess_part += a * dv;
        curv_part += b * dv;
    }
    let scale = 1.0 / (16.0 * PI);
    Ok(BkksBound {
        value: (hess_part + curv_part) * scale,
        hessian_part: hess_part * scale,
        curvature_part: curv_part * scale,
        collar_cells: COLLAR_CELLS,
        excluded_volume: excluded,
    })
}

/// Nodes with `|x| > r₀`, excluding the boundary collar.
pub fn far_mask(lattice: &Lattice, r0: f64) -> Vec<bool> {
    (0..lattice.len())
        .map(|idx| {
            Lattice::norm(lattice.position(idx)) > r0 && lattice.is_inside_collar(idx, COLLAR_CELLS)
        })
        .collect()
}

/// A far-region sup together with its implied constant `sup / m^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupDiagnostic {
    pub sup: f64,
    pub exponent: f64,
    /// `sup / m^exponent`; 0 for an exactly flat result, infinite when
    /// `m = 0` but `sup > 0`.
    pub implied_constant: f64,
}

impl SupDiagnostic {
    fn new(sup: f64, mass: f64, exponent: f64) -> Self {
        let implied_constant = if sup == 0.0 {
            0.0
        } else if mass > 0.0 {
            sup / mass.powf(exponent)
        } else {
            f64::INFINITY
        };
        SupDiagnostic {
            sup,
            exponent,
            implied_constant,
        }
    }
}

fn masked_sup(mask: &[bool], f: impl Fn(usize) -> f64) -> Result<f64> {
    let mut sup: Option<f64> = None;
    for (idx, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let v = f(idx);
        if !v.is_finite() {
            return Err(Error::NonFinite("far-field diagnostic"));
        }
        sup = Some(sup.map_or(v, |s: f64| s.max(v)));
    }
    sup.ok_or(Error::EmptyMask("far region"))
}

/// `sup_{far} max_j |∇²u^j|_g` against `m^{5/96}`.
pub fn sup_hessian_diagnostic(triple: &HarmonicTriple, far: &[bool], mass: f64) -> Result<SupDiagnostic> {
    let sup = masked_sup(far, |idx| (0..3).map(|j| triple.hess_norm(j, idx)).fold(0.0, f64::max))?;
    Ok(SupDiagnostic::new(sup, mass, HESSIAN_EXPONENT))
}

/// `sup_{far} max_{j,k} |⟨∇u^j,∇u^k⟩ − δ_jk|` against `m^{1/192}`.
pub fn ortho_defect_sup_diagnostic(triple: &HarmonicTriple, far: &[bool], mass: f64) -> Result<SupDiagnostic> {
    let sup = masked_sup(far, |idx| {
        let g = triple.gram(idx);
        let mut worst: f64 = 0.0;
        for (j, row) in g.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let d = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((v - d).abs());
            }
        }
        worst
    })?;
    Ok(SupDiagnostic::new(sup, mass, DEFECT_EXPONENT))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecayFit {
    /// Every sampled deviation is below `1e-12`.
    Exact,
    Fitted {
        /// Worst (largest) exponent over the three coordinates.
        exponent: f64,
        per_coordinate: [f64; 3],
        radii: Vec<f64>,
        /// `max_{|x|≈r, j} |∇u^j − ∂_j|_g` per radius.
        max_deviation: Vec<f64>,
    },
}

impl DecayFit {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            DecayFit::Exact => None,
            DecayFit::Fitted { exponent, .. } => Some(*exponent),
        }
    }
}

/// Log-log fit of `max_{|x|=r} |∇u^j − ∂_{x^j}|_g` against `r`.
///
/// Sphere samples are the nodes within `h/2` of each radius.
pub fn gradient_decay_fit(grid: &MetricGrid, triple: &HarmonicTriple, radii: &[f64]) -> Result<DecayFit> {
    let lat = &grid.lattice;
    if radii.len() < 2 {
        return Err(Error::invalid("decay radii", "need at least two radii"));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0) || r + lat.h > lat.l_box) {
        return Err(Error::invalid("decay radii", format!("radius {r} outside the box")));
    }
    let mut dev = vec![[0.0f64; 3]; radii.len()];
    for idx in 0..lat.len() {
        let x = lat.position(idx);
        let rx = Lattice::norm(x);
        for (ri, &r) in radii.iter().enumerate() {
            if (rx - r).abs() > 0.5 * lat.h {
                continue;
            }
            let p2 = grid.phi[idx] * grid.phi[idx];
            for j in 0..3 {
                let g = triple.grad_u[j][idx];
                let mut v = [g[0] / (p2 * p2), g[1] / (p2 * p2), g[2] / (p2 * p2)];
                v[j] -= 1.0;
                // g-norm of a vector is φ² times its Euclidean norm.
                let d = p2 * Lattice::norm(v);
                dev[ri][j] = dev[ri][j].max(d);
            }
        }
    }
    let all: Vec<f64> = dev.iter().map(|d| d.iter().copied().fold(0.0, f64::max)).collect();
    if all.iter().all(|&d| d < 1e-12) {
        return Ok(DecayFit::Exact);
    }
    let lr: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let mut per = [0.0; 3];
    for (j, p) in per.iter_mut().enumerate() {
        let ly: Vec<f64> = dev.iter().map(|d| d[j].max(1e-300).ln()).collect();
        *p = fit_line(&lr, &ly)
            .ok_or_else(|| Error::invalid("decay radii", "degenerate radii"))?
            .slope;
    }
    Ok(DecayFit::Fitted {
        exponent: per.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        per_coordinate: per,
        radii: radii.to_vec(),
        max_deviation: all,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassReport {
    pub m_exact: f64,
    pub m_adm: f64,
    pub bkks_bound: [f64; 3],
    /// `m_adm − bkks_bound[j]`.
    pub slack: [f64; 3],
    pub sup_hess: SupDiagnostic,
    pub sup_defect: SupDiagnostic,
    pub decay: DecayFit,
}

/// Settings for [`mass_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct MassSettings {
    pub r0: f64,
    pub adm_radii: Vec<f64>,
    pub decay_radii: Vec<f64>,
}

pub fn mass_report(grid: &MetricGrid, triple: &HarmonicTriple, settings: &MassSettings) -> Result<MassReport> {
    let m_exact = grid.factor.mass();
    let m_adm = adm_extrapolated(&grid.factor, &settings.adm_radii, SphereQuadrature::default())?.extrapolated;
    let mut bkks_bound = [0.0; 3];
    for (j, b) in bkks_bound.iter_mut().enumerate() {
        *b = bkks_lower_bound(grid, triple, j)?.value;
    }
    let far = far_mask(&grid.lattice, settings.r0);
    Ok(MassReport {
        m_exact,
        m_adm,
        bkks_bound,
        slack: bkks_bound.map(|b| m_adm - b),
        sup_hess: sup_hessian_diagnostic(triple, &far, m_exact)?,
        sup_defect: ortho_defect_sup_diagnostic(triple, &far, m_exact)?,
        decay: gradient_decay_fit(grid, triple, &settings.decay_radii)?,
    })
}
