use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::metric::{ConformalFactor, MetricGrid};
use crate::quadrature::gauss_legendre;

/// Nodes within this many cells of the source get exact segment lengths.
pub const INIT_RADIUS_CELLS: f64 = 3.0;

/// First-arrival distance from one node.
#[derive(Debug, Clone)]
pub struct DistanceField {
    pub lattice: Lattice,
    pub source: usize,
    pub t: Vec<f64>,
}

impl DistanceField {
    /// Smallest distance reached on the box boundary: geodesic balls of
    /// smaller radius stay inside the grid.
    pub fn reliable_range(&self) -> f64 {
        (0..self.lattice.len())
            .filter(|&i| self.lattice.is_boundary(i))
            .map(|i| self.t[i])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Conformal length `∫ φ² dl` of the straight segment `[a, b]`, composite
/// 4-point Gauss–Legendre with panels no longer than `panel`.
pub fn segment_length(factor: &ConformalFactor, a: [f64; 3], b: [f64; 3], panel: f64) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let len = Lattice::norm(d);
    if len == 0.0 {
        return 0.0;
    }
    let panels = (len / panel).ceil().max(1.0) as usize;
    let (x, w) = gauss_legendre(4);
    let step = 1.0 / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * step;
        for (xi, wi) in x.iter().zip(&w) {
            let s = mid + 0.5 * step * xi;
            let phi = factor.phi([a[0] + s * d[0], a[1] + s * d[1], a[2] + s * d[2]]);
            total += wi * 0.5 * step * phi * phi;
        }
    }
    total * len
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed so the max-heap pops the smallest arrival time.
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// First-order upwind fast marching for `|∇T| = φ²`, factored as
/// `T = T₀·τ` with `T₀ = φ²(source)·|x − source|` so that the point-source
/// singularity is carried analytically and only `τ` is differenced.
pub fn fast_marching(grid: &MetricGrid, source: usize) -> Result<DistanceField> {
    fast_marching_with(grid, source, INIT_RADIUS_CELLS)
}

/// As [`fast_marching`] with an explicit initialization radius in cells.
pub fn fast_marching_with(grid: &MetricGrid, source: usize, init_cells: f64) -> Result<DistanceField> {
    let lat = grid.lattice;
    if source >= lat.len() || lat.is_boundary(source) {
        return Err(Error::invalid("source", "must be an interior node"));
    }
    let n = lat.n;
    let h = lat.h;
    let ps = lat.position(source);
    let scale = grid.phi[source] * grid.phi[source];
    let marcher = Marcher {
        lat,
        ps,
        scale,
        slowness2: grid.phi.iter().map(|p| p.powi(4)).collect(),
    };
    let mut t = vec![f64::INFINITY; lat.len()];
    let mut known = vec![false; lat.len()];
    let mut heap = BinaryHeap::new();

    let [si, sj, sk] = lat.ijk(source);
    let reach = init_cells.ceil() as usize;
    let lo = |c: usize| c.saturating_sub(reach);
    let hi = |c: usize| (c + reach).min(n - 1);
    for k in lo(sk)..=hi(sk) {
        for j in lo(sj)..=hi(sj) {
            for i in lo(si)..=hi(si) {
                let idx = lat.index(i, j, k);
                let p = lat.position(idx);
                let d = Lattice::norm([p[0] - ps[0], p[1] - ps[1], p[2] - ps[2]]);
                if d <= init_cells * h + 1e-12 {
                    t[idx] = segment_length(&grid.factor, ps, p, h);
                    known[idx] = true;
                }
            }
        }
    }
    let accept = |idx: usize, t: &mut Vec<f64>, known: &[bool], heap: &mut BinaryHeap<Entry>| {
        for nb in neighbours(&lat, idx).into_iter().flatten() {
            if known[nb] {
                continue;
            }
            let cand = marcher.update(t, known, nb);
            if cand < t[nb] {
                t[nb] = cand;
                heap.push(Entry(cand, nb));
            }
        }
    };
    for idx in 0..lat.len() {
        if known[idx] {
            accept(idx, &mut t, &known, &mut heap);
        }
    }
    while let Some(Entry(v, idx)) = heap.pop() {
        if known[idx] || v > t[idx] {
            continue;
        }
        known[idx] = true;
        accept(idx, &mut t, &known, &mut heap);
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fast marching"));
    }
    Ok(DistanceField { lattice: lat, source, t })
}

fn neighbours(lat: &Lattice, idx: usize) -> [Option<usize>; 6] {
    let c = lat.ijk(idx);
    let mut out = [None; 6];
    for a in 0..3 {
        let s = lat.stride(a);
        if c[a] > 0 {
            out[2 * a] = Some(idx - s);
        }
        if c[a] + 1 < lat.n {
            out[2 * a + 1] = Some(idx + s);
        }
    }
    out
}

struct Marcher {
    lat: Lattice,
    ps: [f64; 3],
    scale: f64,
    /// `φ⁴ = |∇T|²` per node.
    slowness2: Vec<f64>,
}

impl Marcher {
    fn t0(&self, x: [f64; 3]) -> f64 {
        self.scale * Lattice::norm([x[0] - self.ps[0], x[1] - self.ps[1], x[2] - self.ps[2]])
    }

    /// Upwind update of `τ = T/T₀` at `idx` from its known neighbours: for
    /// every subset of axes, solve `Σ_a (τ ∂_a T₀ + T₀ D_a τ)² = φ⁴` with
    /// one-sided `D_a`, keep roots whose discrete gradient points away from
    /// the neighbours used, and return the smallest `T`.
    fn update(&self, t: &[f64], known: &[bool], idx: usize) -> f64 {
        let lat = &self.lat;
        let h = lat.h;
        let c = lat.ijk(idx);
        let x = lat.position(idx);
        let t0 = self.t0(x);
        let r = t0 / self.scale;
        // (α_a, β_a, e_a) with ∂_a T ≈ α_a τ + β_a
        let mut terms: [Option<(f64, f64, f64)>; 3] = [None; 3];
        let mut fallback = f64::INFINITY;
        for (axis, term) in terms.iter_mut().enumerate() {
            let s = lat.stride(axis);
            let mut best: Option<(usize, f64)> = None;
            if c[axis] > 0 && known[idx - s] {
                best = Some((idx - s, 1.0));
            }
            if c[axis] + 1 < lat.n && known[idx + s] && best.map_or(true, |(b, _)| t[idx + s] < t[b]) {
                best = Some((idx + s, -1.0));
            }
            let Some((nb, e)) = best else { continue };
            fallback = fallback.min(t[nb] + h * self.slowness2[idx].sqrt());
            let t0_nb = self.t0(lat.position(nb));
            let tau_nb = t[nb] / t0_nb;
            let g = self.scale * (x[axis] - self.ps[axis]) / r;
            *term = Some((g + e * t0 / h, -e * t0 * tau_nb / h, e));
        }
        let f2 = self.slowness2[idx];
        let mut best = f64::INFINITY;
        for subset in 1u8..8 {
            let used: Vec<(f64, f64, f64)> = (0..3)
                .filter(|a| subset & (1 << a) != 0)
                .map(|a| terms[a])
                .collect::<Option<Vec<_>>>()
                .unwrap_or_default();
            if used.is_empty() {
                continue;
            }
            let qa: f64 = used.iter().map(|u| u.0 * u.0).sum();
            let qb: f64 = used.iter().map(|u| 2.0 * u.0 * u.1).sum();
            let qc: f64 = used.iter().map(|u| u.1 * u.1).sum::<f64>() - f2;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc < 0.0 || qa == 0.0 {
                continue;
            }
            let sq = disc.sqrt();
            for tau in [(-qb + sq) / (2.0 * qa), (-qb - sq) / (2.0 * qa)] {
                if used.iter().all(|&(al, be, e)| e * (al * tau + be) >= 0.0) {
                    best = best.min(tau * t0);
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            fallback
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_segment_length_is_euclidean() {
        let l = segment_length(&ConformalFactor::flat(), [0.0; 3], [1.0, 2.0, 2.0], 0.25);
        assert!((l - 3.0).abs() < 1e-14);
    }
}

