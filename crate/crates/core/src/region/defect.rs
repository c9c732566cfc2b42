use crate::grid::Lattice;
use crate::metric::MetricGrid;
use crate::solver::{coordinate_gradient, HarmonicTriple};

/// Orthonormality defect `Q = Σ_{j,k} (⟨∇u^j,∇u^k⟩_g − δ_jk)²` and helpers.
#[derive(Debug, Clone)]
pub struct DefectField {
    pub lattice: Lattice,
    pub q: Vec<f64>,
    /// `|∇Q|_g = φ⁻² |∂Q|`.
    pub grad_q_norm: Vec<f64>,
    /// `|∇u^j|²_g` per coordinate.
    pub per_j_gradsq: [Vec<f64>; 3],
}

pub fn defect_field(triple: &HarmonicTriple, grid: &MetricGrid) -> DefectField {
    let lat = grid.lattice;
    let len = lat.len();
    let mut q = vec![0.0; len];
    let mut per_j_gradsq: [Vec<f64>; 3] = std::array::from_fn(|_| vec![0.0; len]);
    for idx in 0..len {
        let g = triple.gram(idx);
        let mut s = 0.0;
        for (j, row) in g.iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                let d = v - if j == k { 1.0 } else { 0.0 };
                s += d * d;
            }
            per_j_gradsq[j][idx] = row[j];
        }
        q[idx] = s;
    }
    let grad_q_norm = coordinate_gradient(&lat, &q)
        .iter()
        .zip(&grid.phi)
        .map(|(g, p)| Lattice::norm(*g) / (p * p))
        .collect();
    DefectField {
        lattice: lat,
        q,
        grad_q_norm,
        per_j_gradsq,
    }
}
