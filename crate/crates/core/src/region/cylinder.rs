use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::metric::MetricGrid;
use crate::solver::HarmonicTriple;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderVolume {
    pub direction: [f64; 3],
    pub l: f64,
    /// `Vol_g(Ω_L ∩ E)`.
    pub volume: f64,
    /// `volume / 2πL³`.
    pub ratio: f64,
}

/// Volume of the coordinate cylinder `Ω_L^a = {|u^a| ≤ L, |𝒰|² − (u^a)² ≤ L²}`
/// intersected with the region mask, `u^a = Σ a_j u^j`.
///
/// Cell-centred midpoint rule: `𝒰` is averaged over the 8 corners, the
/// weight is `φ⁶h³` at the centre times the fraction of corners in the mask.
pub fn cylinder_volume(
    mask: &[bool],
    grid: &MetricGrid,
    triple: &HarmonicTriple,
    direction: [f64; 3],
    l: f64,
) -> Result<CylinderVolume> {
    let norm = (direction.iter().map(|d| d * d).sum::<f64>()).sqrt();
    if !(norm > 0.0) {
        return Err(Error::invalid("cylinder.direction", "must be nonzero"));
    }
    if !(l > 0.0) {
        return Err(Error::invalid("cylinder.L", format!("must be positive, got {l}")));
    }
    let a = direction.map(|d| d / norm);
    let lat = &grid.lattice;
    let inside = |y: [f64; 3]| {
        let ua = a[0] * y[0] + a[1] * y[1] + a[2] * y[2];
        let r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2] - ua * ua;
        ua.abs() <= l && r2 <= l * l
    };
    for idx in 0..lat.len() {
        if lat.is_boundary(idx) && inside(triple.image(idx)) {
            return Err(Error::invalid(
                "cylinder.L",
                format!("cylinder of size {l} reaches the box boundary"),
            ));
        }
    }
    let h3 = lat.h.powi(3);
    let m = lat.cells();
    let mut volume = 0.0;
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let corners = lat.cell_corners(i, j, k);
                let in_mask = corners.iter().filter(|&&c| mask[c]).count();
                if in_mask == 0 {
                    continue;
                }
                let mut y = [0.0; 3];
                for &c in &corners {
                    let img = triple.image(c);
                    for d in 0..3 {
                        y[d] += 0.125 * img[d];
                    }
                }
                if !inside(y) {
                    continue;
                }
                let mut x = lat.position(corners[0]);
                x.iter_mut().for_each(|v| *v += 0.5 * lat.h);
                let p2 = grid.factor.phi(x).powi(2);
                volume += p2 * p2 * p2 * h3 * in_mask as f64 / 8.0;
            }
        }
    }
    Ok(CylinderVolume {
        direction: a,
        l,
        volume,
        ratio: volume / (2.0 * PI * l.powi(3)),
    })
}
