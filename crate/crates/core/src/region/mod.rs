//! Regular subregion on which the harmonic chart is almost an isometry.
//!
//! The pipeline is: defect field `Q` → per-coordinate gradient levels `τ₁ʲ`
//! → `E₁` → co-area scan for `τ₂` → connected component of `{Q ≤ τ₂}`
//! containing the outer shell → boundary mesh and the volume diagnostics.

mod coverage;
mod cylinder;
mod defect;
mod injectivity;
mod isosurface;
mod labeling;
mod tau;

pub use coverage::{
    ball_volume, image_coverage, rasterize_image, sqrt_det_bound, weak_volume_integrand, CoverageReport,
    CoverageSettings,
};
pub(crate) use coverage::det3;
pub use cylinder::{cylinder_volume, CylinderVolume};
pub use defect::{defect_field, DefectField};
pub use injectivity::{injectivity_probe, InjectivityReport, FOLD_THRESHOLD};
pub use isosurface::{all_cells, extract_isosurface, TriangleMesh};
pub use labeling::connected_component;
pub use tau::{
    e1_mask, inner_mask, select_tau1, select_tau2, Tau2Selection, TauMode, LEVEL_CLEARANCE,
    TAU2_CANDIDATES,
};

use crate::error::Result;
use crate::grid::Lattice;
use crate::metric::MetricGrid;

/// Mask of `E^τ` with its boundary surface.
#[derive(Debug, Clone)]
pub struct ExtractedRegion {
    pub mask: Vec<bool>,
    pub boundary_mesh: TriangleMesh,
    pub area_g: f64,
    /// Whether every node with `|x| > r₀` satisfies `Q ≤ τ₂`.
    pub seed_ok: bool,
}

/// 6-connected component of `{Q ≤ τ₂}` seeded from the outer shell
/// `|x| > r₀`, and the `Q = τ₂` surface over cells touching the mask.
pub fn extract_region(defect: &DefectField, tau2: f64, grid: &MetricGrid, r0: f64) -> ExtractedRegion {
    let lat = &grid.lattice;
    let below: Vec<bool> = defect.q.iter().map(|&q| q <= tau2).collect();
    let shell: Vec<usize> = (0..lat.len())
        .filter(|&i| Lattice::norm(lat.position(i)) > r0)
        .collect();
    let seed_ok = shell.iter().all(|&i| below[i]);
    let mask = connected_component(lat, &below, shell);
    let m = lat.cells();
    let mut cells = Vec::new();
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                let c = lat.cell_corners(i, j, k);
                if c.iter().any(|&n| mask[n]) && c.iter().any(|&n| !below[n]) {
                    cells.push([i, j, k]);
                }
            }
        }
    }
    let boundary_mesh = extract_isosurface(lat, &defect.q, tau2, &cells);
    let area_g = boundary_mesh.metric_area(&grid.factor);
    ExtractedRegion {
        mask,
        boundary_mesh,
        area_g,
        seed_ok,
    }
}

/// Every threshold and mask of the construction for one metric.
#[derive(Debug, Clone)]
pub struct RegularRegion {
    pub tau: f64,
    pub tau1: [f64; 3],
    pub tau2: f64,
    pub selection: Tau2Selection,
    pub mask: Vec<bool>,
    pub boundary_mesh: TriangleMesh,
    pub area_g: f64,
    pub seed_ok: bool,
}

impl RegularRegion {
    pub fn build(grid: &MetricGrid, defect: &DefectField, tau: f64, r0: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 0.25) {
            return Err(crate::error::Error::invalid("tau", format!("τ = {tau} is outside (0, 1/4)")));
        }
        if !(r0 > 0.0) {
            return Err(crate::error::Error::invalid("r0", "must be positive"));
        }
        let tau1 = select_tau1(&defect.per_j_gradsq, tau);
        let tau1_min = tau1.iter().copied().fold(f64::INFINITY, f64::min);
        let e1 = e1_mask(defect, &tau1);
        let region: Vec<bool> = inner_mask(&grid.lattice, r0)
            .iter()
            .zip(&e1)
            .map(|(a, b)| *a && *b)
            .collect();
        let selection = select_tau2(defect, tau1_min, &region, &grid.factor);
        let tau2 = selection.tau2;
        let ExtractedRegion {
            mask,
            boundary_mesh,
            area_g,
            seed_ok,
        } = extract_region(defect, tau2, grid, r0);
        Ok(RegularRegion {
            tau,
            tau1,
            tau2,
            selection,
            mask,
            boundary_mesh,
            area_g,
            seed_ok,
        })
    }

    pub fn mask_size(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }
}
