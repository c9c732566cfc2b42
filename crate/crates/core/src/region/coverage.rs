use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::solver::HarmonicTriple;

/// Barycentric slack for voxel centres on shared tetrahedron faces.
const CONTAINMENT_TOL: f64 = 1e-9;

/// Kuhn subdivision of the unit cube into 6 tetrahedra, corners as
/// `dx + 2dy + 4dz` bit patterns.
const KUHN: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageSettings {
    /// Grid point whose image is the ball centre `p*`.
    pub base_point: [f64; 3],
    pub radius: f64,
    pub voxel: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageReport {
    pub p_star: [f64; 3],
    /// Voxelized `|B(p*, D)|`.
    pub ball_volume: f64,
    /// `|B(p*, D) ∖ Y|`.
    pub uncovered_volume: f64,
    /// `∫_{B(p*,D)} |χ_Y √det g − 1|`.
    pub weak_volume_integral: f64,
    /// Largest `|√det g − 1|` over covered voxels.
    pub max_sqrt_det_deviation: f64,
    pub voxels_in_ball: usize,
    pub covered_voxels: usize,
}

/// Rasterizes `𝒰(mask cells)` into voxels of `B(p*, D)`.
///
/// Cells with all corners in the mask are split into Kuhn tetrahedra; a voxel
/// centre inside an image tetrahedron is covered, and `√det g = det(G)^{-1/2}`
/// uses the Gram matrix `G = ⟨∇u^j,∇u^k⟩` interpolated barycentrically.
pub fn rasterize_image(mask: &[bool], triple: &HarmonicTriple, settings: &CoverageSettings) -> Result<CoverageReport> {
    let lat = &triple.lattice;
    let CoverageSettings { base_point, radius, voxel } = *settings;
    if !(voxel > 0.0) || voxel > lat.h * (1.0 + 1e-12) {
        return Err(Error::invalid(
            "coverage.voxel",
            format!("voxel pitch {voxel} must be positive and no coarser than h = {}", lat.h),
        ));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid("coverage.D", "must be positive"));
    }
    let base = lat.nearest(base_point);
    let p_star = triple.image(base);
    let reach = lat.l_box - 2.0 * lat.h;
    if p_star.iter().any(|c| c.abs() + radius > reach) {
        return Err(Error::invalid(
            "coverage.D",
            format!("ball of radius {radius} around {p_star:?} is not inside the grid image"),
        ));
    }

    let nv = (radius / voxel).ceil() as usize;
    let side = 2 * nv;
    let center = |i: usize, a: usize| p_star[a] + (i as f64 - nv as f64 + 0.5) * voxel;
    let vid = |i: usize, j: usize, k: usize| i + side * (j + side * k);
    let mut in_ball = vec![false; side * side * side];
    for k in 0..side {
        for j in 0..side {
            for i in 0..side {
                let d = [center(i, 0) - p_star[0], center(j, 1) - p_star[1], center(k, 2) - p_star[2]];
                in_ball[vid(i, j, k)] = Lattice::norm(d) <= radius;
            }
        }
    }
    let mut sqrt_det: Vec<Option<f64>> = vec![None; in_ball.len()];
    let lo_corner: [f64; 3] = std::array::from_fn(|a| p_star[a] - nv as f64 * voxel);
    let to_index = |y: f64, a: usize| (y - lo_corner[a]) / voxel - 0.5;

    let m = lat.cells();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let corners = lat.cell_corners(i, j, k);
                if !corners.iter().all(|&c| mask[c]) {
                    continue;
                }
                let imgs: [[f64; 3]; 8] = std::array::from_fn(|c| triple.image(corners[c]));
                let outside = (0..3).any(|a| {
                    let lo = imgs.iter().map(|y| y[a]).fold(f64::INFINITY, f64::min);
                    let hi = imgs.iter().map(|y| y[a]).fold(f64::NEG_INFINITY, f64::max);
                    hi < p_star[a] - radius || lo > p_star[a] + radius
                });
                if outside {
                    continue;
                }
                for tet in KUHN {
                    let y: [[f64; 3]; 4] = std::array::from_fn(|q| imgs[tet[q]]);
                    let Some(inv) = inverse3(std::array::from_fn(|r| {
                        std::array::from_fn(|c| y[c + 1][r] - y[0][r])
                    })) else {
                        continue;
                    };
                    let range: [(usize, usize); 3] = std::array::from_fn(|a| {
                        let lo = y.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
                        let hi = y.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
                        let a0 = to_index(lo, a).ceil().max(0.0);
                        let a1 = to_index(hi, a).floor().min(side as f64 - 1.0);
                        if a1 < a0 {
                            (1, 0)
                        } else {
                            (a0 as usize, a1 as usize)
                        }
                    });
                    if range.iter().any(|r| r.1 < r.0) {
                        continue;
                    }
                    for vk in range[2].0..=range[2].1 {
                        for vj in range[1].0..=range[1].1 {
                            for vi in range[0].0..=range[0].1 {
                                let v = vid(vi, vj, vk);
                                if !in_ball[v] || sqrt_det[v].is_some() {
                                    continue;
                                }
                                let c = [center(vi, 0), center(vj, 1), center(vk, 2)];
                                let d = [c[0] - y[0][0], c[1] - y[0][1], c[2] - y[0][2]];
                                let l: [f64; 3] = std::array::from_fn(|r| {
                                    inv[r][0] * d[0] + inv[r][1] * d[1] + inv[r][2] * d[2]
                                });
                                let l0 = 1.0 - l[0] - l[1] - l[2];
                                if l0 < -CONTAINMENT_TOL || l.iter().any(|&x| x < -CONTAINMENT_TOL) {
                                    continue;
                                }
                                let w = [l0, l[0], l[1], l[2]];
                                let mut gram = [[0.0; 3]; 3];
                                for (q, wq) in w.iter().enumerate() {
                                    let gq = triple.gram(corners[tet[q]]);
                                    for r in 0..3 {
                                        for s in 0..3 {
                                            gram[r][s] += wq * gq[r][s];
                                        }
                                    }
                                }
                                let det = det3(gram);
                                sqrt_det[v] = Some(if det > 0.0 { det.powf(-0.5) } else { f64::INFINITY });
                            }
                        }
                    }
                }
            }
        }
    }

    let dv = voxel.powi(3);
    let mut report = CoverageReport {
        p_star,
        ball_volume: 0.0,
        uncovered_volume: 0.0,
        weak_volume_integral: 0.0,
        max_sqrt_det_deviation: 0.0,
        voxels_in_ball: 0,
        covered_voxels: 0,
    };
    for (v, inside) in in_ball.iter().enumerate() {
        if !inside {
            continue;
        }
        report.voxels_in_ball += 1;
        match sqrt_det[v] {
            Some(s) => {
                report.covered_voxels += 1;
                let dev = (s - 1.0).abs();
                report.weak_volume_integral += dev * dv;
                report.max_sqrt_det_deviation = report.max_sqrt_det_deviation.max(dev);
            }
            None => {
                report.uncovered_volume += dv;
                report.weak_volume_integral += dv;
            }
        }
    }
    report.ball_volume = report.voxels_in_ball as f64 * dv;
    Ok(report)
}

/// `|B(p*, D) ∖ Y|`.
pub fn image_coverage(mask: &[bool], triple: &HarmonicTriple, settings: &CoverageSettings) -> Result<f64> {
    Ok(rasterize_image(mask, triple, settings)?.uncovered_volume)
}

/// `∫_{B(p*,D)} |χ_Y √det g − 1|`.
pub fn weak_volume_integrand(mask: &[bool], triple: &HarmonicTriple, settings: &CoverageSettings) -> Result<f64> {
    Ok(rasterize_image(mask, triple, settings)?.weak_volume_integral)
}

/// Exact `|B(D)| = 4πD³/3`.
pub fn ball_volume(radius: f64) -> f64 {
    4.0 / 3.0 * PI * radius.powi(3)
}

/// Upper bound on `|det(G)^{-1/2} − 1|` for symmetric `G` with
/// `Σ (G − I)² ≤ q`: eigenvalues lie in `[1 − √q, 1 + √q]`.
pub fn sqrt_det_bound(q: f64) -> f64 {
    let s = q.sqrt();
    if s >= 1.0 {
        return f64::INFINITY;
    }
    ((1.0 - s).powf(-1.5) - 1.0).max(1.0 - (1.0 + s).powf(-1.5))
}

pub(crate) fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inverse3(m: [[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3(m);
    let scale = m.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    if det.abs() <= 1e-14 * scale.powi(3) {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
            let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
            out[r][c] = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) * inv_det;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = [[2.0, 0.3, -0.1], [0.1, 1.5, 0.2], [0.0, -0.4, 0.9]];
        let inv = inverse3(m).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let v: f64 = (0..3).map(|k| m[r][k] * inv[k][c]).sum();
                assert!((v - if r == c { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(inverse3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_none());
    }

    #[test]
    fn kuhn_tetrahedra_tile_the_cube() {
        let vol: f64 = KUHN
            .iter()
            .map(|t| {
                let p = |c: usize| [(c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64];
                let (a, b, c, d) = (p(t[0]), p(t[1]), p(t[2]), p(t[3]));
                let m = std::array::from_fn(|r| [b[r] - a[r], c[r] - a[r], d[r] - a[r]]);
                det3(m).abs() / 6.0
            })
            .sum();
        assert!((vol - 1.0).abs() < 1e-15);
    }
}
