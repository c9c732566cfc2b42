use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::metric::ConformalFactor;

use super::defect::DefectField;
use super::isosurface::extract_isosurface;

pub const TAU2_CANDIDATES: usize = 64;
/// Minimum distance between a selected level and any node value.
pub const LEVEL_CLEARANCE: f64 = 1e-12;

/// How the target threshold `τ` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauMode {
    /// `τ = scale · m^ε`.
    PowerLaw { epsilon: f64, scale: f64 },
    /// `τ = τ₀` for every member.
    Fixed(f64),
}

impl Default for TauMode {
    fn default() -> Self {
        TauMode::Fixed(0.05)
    }
}

impl TauMode {
    pub fn tau(&self, mass: f64) -> Result<f64> {
        let tau = match *self {
            TauMode::PowerLaw { epsilon, scale } => {
                if mass <= 0.0 {
                    return Err(Error::invalid("tau", "power-law mode needs a positive mass"));
                }
                scale * mass.powf(epsilon)
            }
            TauMode::Fixed(t) => t,
        };
        if !(tau > 0.0 && tau < 0.25) {
            return Err(Error::invalid("tau", format!("τ = {tau} is outside (0, 1/4)")));
        }
        Ok(tau)
    }
}

/// Per-coordinate levels `τ₁ʲ ∈ (τ/2, τ)` such that `1 + τ₁ʲ` stays clear of
/// every node value of `|∇u^j|²`: the midpoint of the widest gap between
/// node values inside the interval.
pub fn select_tau1(per_j_gradsq: &[Vec<f64>; 3], tau: f64) -> [f64; 3] {
    std::array::from_fn(|j| {
        let (lo, hi) = (0.5 * tau, tau);
        let mut vals: Vec<f64> = per_j_gradsq[j]
            .iter()
            .map(|v| v - 1.0)
            .filter(|&d| d > lo && d < hi)
            .collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        let mut edges = Vec::with_capacity(vals.len() + 2);
        edges.push(lo);
        edges.extend(vals);
        edges.push(hi);
        let (a, b) = edges
            .windows(2)
            .map(|w| (w[0], w[1]))
            .max_by(|x, y| (x.1 - x.0).total_cmp(&(y.1 - y.0)))
            .expect("at least the interval endpoints");
        0.5 * (a + b)
    })
}

/// `E₁ = ∩_j {|∇u^j|² ≤ 1 + τ₁ʲ}`.
pub fn e1_mask(defect: &DefectField, tau1: &[f64; 3]) -> Vec<bool> {
    (0..defect.lattice.len())
        .map(|idx| (0..3).all(|j| defect.per_j_gradsq[j][idx] <= 1.0 + tau1[j]))
        .collect()
}

/// Nodes of `M_{r₀} = {|x| ≤ r₀}`.
pub fn inner_mask(lattice: &Lattice, r0: f64) -> Vec<bool> {
    (0..lattice.len())
        .map(|idx| Lattice::norm(lattice.position(idx)) <= r0)
        .collect()
}

/// Result of the co-area level scan.
#[derive(Debug, Clone, PartialEq)]
pub struct Tau2Selection {
    pub tau2: f64,
    /// `(t, metric area of {Q = t})` for every candidate.
    pub candidates: Vec<(f64, f64)>,
    pub chosen_area: f64,
    pub mean_area: f64,
    /// `(2/τ₁) Σ_{M_{r₀}∩E₁} |∇Q|_g φ⁶ h³`.
    pub certificate_rhs: f64,
}

impl Tau2Selection {
    pub fn certificate_holds(&self) -> bool {
        self.chosen_area <= self.certificate_rhs
    }
}

/// Scans 64 uniformly spaced levels in `(τ₁/2, τ₁)` and returns the one whose
/// isosurface inside `region` (cells with all corners in the mask) has the
/// least metric area.
pub fn select_tau2(
    defect: &DefectField,
    tau1_min: f64,
    region: &[bool],
    factor: &ConformalFactor,
) -> Tau2Selection {
    let lat = &defect.lattice;
    let fallback = 0.75 * tau1_min;
    if !region.iter().any(|&b| b) {
        return Tau2Selection {
            tau2: fallback,
            candidates: Vec::new(),
            chosen_area: 0.0,
            mean_area: 0.0,
            certificate_rhs: 0.0,
        };
    }
    let h3 = lat.h.powi(3);
    let mut rhs = 0.0;
    for (idx, _) in region.iter().enumerate().filter(|(_, &b)| b) {
        let p2 = factor.phi(lat.position(idx)).powi(2);
        rhs += defect.grad_q_norm[idx] * p2 * p2 * p2 * h3;
    }
    let certificate_rhs = 2.0 / tau1_min * rhs;

    let m = lat.cells();
    let mut cells = Vec::new();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                if lat.cell_corners(i, j, k).iter().all(|&c| region[c]) {
                    cells.push([i, j, k]);
                }
            }
        }
    }
    let width = 0.5 * tau1_min;
    let candidates: Vec<(f64, f64)> = (0..TAU2_CANDIDATES)
        .map(|i| {
            let t = 0.5 * tau1_min + (i as f64 + 0.5) * width / TAU2_CANDIDATES as f64;
            let area = extract_isosurface(lat, &defect.q, t, &cells).metric_area(factor);
            (t, area)
        })
        .collect();
    let &(tau2, chosen_area) = candidates
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("64 candidates");
    let mean_area = candidates.iter().map(|c| c.1).sum::<f64>() / candidates.len() as f64;
    Tau2Selection {
        tau2,
        candidates,
        chosen_area,
        mean_area,
        certificate_rhs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_modes() {
        assert_eq!(TauMode::Fixed(0.05).tau(0.2).unwrap(), 0.05);
        assert!(TauMode::Fixed(0.3).tau(0.2).is_err());
        let pl = TauMode::PowerLaw { epsilon: 0.005, scale: 0.05 };
        assert!((pl.tau(0.2).unwrap() - 0.05 * 0.2f64.powf(0.005)).abs() < 1e-15);
        assert!(pl.tau(0.0).is_err());
        // the unscaled law m^ε is close to 1 at desk-scale masses
        assert!(TauMode::PowerLaw { epsilon: 0.005, scale: 1.0 }.tau(0.2).is_err());
    }

    #[test]
    fn tau1_with_no_values_in_range_is_midpoint() {
        let flat: [Vec<f64>; 3] = std::array::from_fn(|_| vec![1.0; 10]);
        assert_eq!(select_tau1(&flat, 0.01), [0.0075; 3]);
    }

    #[test]
    fn tau1_avoids_node_values() {
        let vals: Vec<f64> = (0..1000).map(|i| 1.0 + 0.005 + 0.005 * (i as f64 / 999.0).powi(3)).collect();
        let field: [Vec<f64>; 3] = std::array::from_fn(|_| vals.clone());
        let t = select_tau1(&field, 0.01);
        for &tj in &t {
            assert!(tj > 0.005 && tj < 0.01);
            assert!(vals.iter().all(|v| (v - 1.0 - tj).abs() >= LEVEL_CLEARANCE));
        }
        assert_eq!(t, select_tau1(&field, 0.01));
    }
}
