use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::metric::MetricGrid;
use crate::quadrature::gauss_legendre;

use super::fmm::DistanceField;

/// Allowed relative increase between consecutive ratios.
pub const BG_SLACK: f64 = 0.01;

/// `|B_{−Λ}(r)| = 4π ∫₀^r (sinh(√Λ t)/√Λ)² dt`, composite Gauss–Legendre.
pub fn model_ball_volume(lambda: f64, r: f64) -> f64 {
    if lambda == 0.0 {
        return 4.0 / 3.0 * PI * r.powi(3);
    }
    let k = lambda.sqrt();
    let panels = ((k * r).ceil() as usize * 4).max(8);
    let (x, w) = gauss_legendre(8);
    let step = r / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * step;
        for (xi, wi) in x.iter().zip(&w) {
            let t = mid + 0.5 * step * xi;
            let s = (k * t).sinh() / k;
            total += wi * 0.5 * step * s * s;
        }
    }
    4.0 * PI * total
}

#[derive(Debug, Clone, PartialEq)]
pub struct BishopGromovReport {
    pub lambda: f64,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
    pub model_volumes: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max_k (ratio_{k+1}/ratio_k − 1)`, clamped below at 0.
    pub max_relative_increase: f64,
    pub monotone: bool,
}

/// Geodesic-ball volumes `Σ φ⁶h³ χ` over sublevel sets of `T`, with the
/// indicator smoothed over one cell across the level, divided by the
/// constant-curvature model volumes.
pub fn bishop_gromov_check(
    field: &DistanceField,
    grid: &MetricGrid,
    lambda: f64,
    radii: &[f64],
) -> Result<BishopGromovReport> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::invalid("geodesic.lambda", "must be finite and >= 0"));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0)) || radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("geodesic.bg_radii", "must be positive and increasing"));
    }
    let lat = &field.lattice;
    let h = lat.h;
    let reach = field.reliable_range() - h;
    if let Some(&r) = radii.iter().find(|&&r| r > reach) {
        return Err(Error::invalid(
            "geodesic.bg_radii",
            format!("radius {r} beyond the reliable range {reach:.4} of the distance field"),
        ));
    }
    let h3 = h.powi(3);
    let t = &field.t;
    // Smearing width: projection of one cell onto the level normal.
    let width: Vec<f64> = (0..lat.len())
        .map(|idx| {
            let c = lat.ijk(idx);
            let mut l1 = 0.0;
            for a in 0..3 {
                let s = lat.stride(a);
                let (lo, hi) = (c[a] > 0, c[a] + 1 < lat.n);
                let g = match (lo, hi) {
                    (true, true) => (t[idx + s] - t[idx - s]) / (2.0 * h),
                    (true, false) => (t[idx] - t[idx - s]) / h,
                    _ => (t[idx + s] - t[idx]) / h,
                };
                l1 += g.abs();
            }
            h * l1
        })
        .collect();
    let volumes: Vec<f64> = radii
        .iter()
        .map(|&r| {
            (0..lat.len())
                .map(|idx| {
                    let w = width[idx];
                    let chi = if w > 0.0 {
                        (0.5 + (r - t[idx]) / w).clamp(0.0, 1.0)
                    } else if t[idx] <= r {
                        1.0
                    } else {
                        0.0
                    };
                    chi * grid.sqrt_g[idx] * h3
                })
                .sum()
        })
        .collect();
    let model_volumes: Vec<f64> = radii.iter().map(|&r| model_ball_volume(lambda, r)).collect();
    let ratios: Vec<f64> = volumes.iter().zip(&model_volumes).map(|(v, m)| v / m).collect();
    let max_relative_increase = ratios
        .windows(2)
        .map(|w| w[1] / w[0] - 1.0)
        .fold(0.0, f64::max);
    Ok(BishopGromovReport {
        lambda,
        radii: radii.to_vec(),
        volumes,
        model_volumes,
        ratios,
        max_relative_increase,
        monotone: max_relative_increase <= BG_SLACK,
    })
}
