//! Marching cubes with face-saddle disambiguation.
//!
//! Instead of a 256-entry case table, each cell is processed face by face:
//! every face with a sign change contributes one or two segments joining
//! crossing points on its edges (four-crossing faces are resolved with the
//! bilinear asymptotic decider). Each crossing edge is shared by exactly two
//! faces of the cell, so the segments close into loops, which are then
//! triangulated. Decisions depend only on face data and edge points are
//! computed from the lower node of each edge, so neighbouring cells produce
//! matching boundaries and the mesh is watertight away from the filter's edge.

use std::io::Write;

use crate::grid::Lattice;
use crate::metric::ConformalFactor;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriangleMesh {
    pub triangles: Vec<[[f64; 3]; 3]>,
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn triangle_area(t: &[[f64; 3]; 3]) -> f64 {
    0.5 * Lattice::norm(cross(sub(t[1], t[0]), sub(t[2], t[0])))
}

fn centroid(t: &[[f64; 3]; 3]) -> [f64; 3] {
    std::array::from_fn(|a| (t[0][a] + t[1][a] + t[2][a]) / 3.0)
}

impl TriangleMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn euclidean_area(&self) -> f64 {
        self.triangles.iter().map(triangle_area).fold(0.0, |a, b| a + b)
    }

    /// Area in `φ⁴δ`: `φ⁴` at each centroid times the Euclidean area.
    pub fn metric_area(&self, factor: &ConformalFactor) -> f64 {
        self.triangles
            .iter()
            .map(|t| factor.phi(centroid(t)).powi(4) * triangle_area(t))
            .fold(0.0, |a, b| a + b)
    }

    pub fn write_stl<W: Write>(&self, mut out: W, name: &str) -> std::io::Result<()> {
        writeln!(out, "solid {name}")?;
        for t in &self.triangles {
            let nrm = cross(sub(t[1], t[0]), sub(t[2], t[0]));
            let len = Lattice::norm(nrm);
            let nrm = if len > 0.0 {
                [nrm[0] / len, nrm[1] / len, nrm[2] / len]
            } else {
                [0.0; 3]
            };
            writeln!(out, "  facet normal {:e} {:e} {:e}", nrm[0], nrm[1], nrm[2])?;
            writeln!(out, "    outer loop")?;
            for v in t {
                writeln!(out, "      vertex {:e} {:e} {:e}", v[0], v[1], v[2])?;
            }
            writeln!(out, "    endloop")?;
            writeln!(out, "  endfacet")?;
        }
        writeln!(out, "endsolid {name}")
    }
}

/// Corner pairs `(lo, hi)` of the 12 cell edges; `hi = lo | (1 << axis)`.
const EDGES: [(usize, usize, usize); 12] = [
    (0, 1, 0),
    (2, 3, 0),
    (4, 5, 0),
    (6, 7, 0),
    (0, 2, 1),
    (1, 3, 1),
    (4, 6, 1),
    (5, 7, 1),
    (0, 4, 2),
    (1, 5, 2),
    (2, 6, 2),
    (3, 7, 2),
];

fn edge_between(a: usize, b: usize) -> usize {
    let (lo, hi) = (a.min(b), a.max(b));
    EDGES
        .iter()
        .position(|&(l, h, _)| l == lo && h == hi)
        .expect("corners are not adjacent")
}

/// The six faces as cyclically ordered corner quadruples.
fn faces() -> [[usize; 4]; 6] {
    let mut out = [[0; 4]; 6];
    let mut f = 0;
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        for side in 0..2 {
            let base = side << a;
            out[f] = [base, base | (1 << b), base | (1 << b) | (1 << c), base | (1 << c)];
            f += 1;
        }
    }
    out
}

/// Triangulates `{field = level}` inside the listed cells (lower-corner
/// indices). Triangles are oriented with normals toward increasing `field`.
pub fn extract_isosurface(lattice: &Lattice, field: &[f64], level: f64, cells: &[[usize; 3]]) -> TriangleMesh {
    let faces = faces();
    let face_edges: Vec<[usize; 4]> = faces
        .iter()
        .map(|f| std::array::from_fn(|i| edge_between(f[i], f[(i + 1) % 4])))
        .collect();
    let h = lattice.h;
    let mut mesh = TriangleMesh::default();
    for &[i, j, k] in cells {
        let corners = lattice.cell_corners(i, j, k);
        let v: [f64; 8] = std::array::from_fn(|c| field[corners[c]] - level);
        let pos: [bool; 8] = std::array::from_fn(|c| v[c] > 0.0);
        if pos.iter().all(|&p| p) || pos.iter().all(|&p| !p) {
            continue;
        }
        // Segment adjacency between crossing edges.
        let mut nbr = [[usize::MAX; 2]; 12];
        let mut link = |a: usize, b: usize| {
            for (x, y) in [(a, b), (b, a)] {
                let slot = if nbr[x][0] == usize::MAX { 0 } else { 1 };
                nbr[x][slot] = y;
            }
        };
        for (f, fe) in faces.iter().zip(&face_edges) {
            let s: [bool; 4] = std::array::from_fn(|q| pos[f[q]]);
            let crossing: Vec<usize> = (0..4).filter(|&q| s[q] != s[(q + 1) % 4]).collect();
            match crossing.len() {
                0 => {}
                2 => link(fe[crossing[0]], fe[crossing[1]]),
                4 => {
                    let (a, b, c, d) = (v[f[0]], v[f[1]], v[f[2]], v[f[3]]);
                    let denom = a + c - b - d;
                    let saddle = if denom != 0.0 { (a * c - b * d) / denom } else { 0.0 };
                    let ac_connected = if s[0] { saddle > 0.0 } else { saddle <= 0.0 };
                    if ac_connected {
                        link(fe[0], fe[1]);
                        link(fe[2], fe[3]);
                    } else {
                        link(fe[3], fe[0]);
                        link(fe[1], fe[2]);
                    }
                }
                _ => unreachable!("a face has an even number of sign changes"),
            }
        }
        let point = |e: usize| -> [f64; 3] {
            let (lo, hi, axis) = EDGES[e];
            let t = v[lo] / (v[lo] - v[hi]);
            let mut p = lattice.position(corners[lo]);
            p[axis] += t * h;
            p
        };
        // Gradient of the trilinear interpolant at the cell centre, for orientation.
        let grad: [f64; 3] = std::array::from_fn(|a| {
            (0..8)
                .map(|c| if c & (1 << a) != 0 { v[c] } else { -v[c] })
                .sum::<f64>()
        });
        let mut used = [false; 12];
        for start in 0..12 {
            if nbr[start][0] == usize::MAX || used[start] {
                continue;
            }
            let mut ring = vec![start];
            used[start] = true;
            let (mut prev, mut cur) = (start, nbr[start][0]);
            while cur != start {
                ring.push(cur);
                used[cur] = true;
                let next = if nbr[cur][0] != prev { nbr[cur][0] } else { nbr[cur][1] };
                prev = cur;
                cur = next;
            }
            let pts: Vec<[f64; 3]> = ring.iter().map(|&e| point(e)).collect();
            let mut push = |t: [[f64; 3]; 3]| {
                let nrm = cross(sub(t[1], t[0]), sub(t[2], t[0]));
                let dot = nrm[0] * grad[0] + nrm[1] * grad[1] + nrm[2] * grad[2];
                mesh.triangles.push(if dot < 0.0 { [t[0], t[2], t[1]] } else { t });
            };
            if pts.len() == 3 {
                push([pts[0], pts[1], pts[2]]);
            } else {
                let c: [f64; 3] =
                    std::array::from_fn(|a| pts.iter().map(|p| p[a]).sum::<f64>() / pts.len() as f64);
                for q in 0..pts.len() {
                    push([c, pts[q], pts[(q + 1) % pts.len()]]);
                }
            }
        }
    }
    mesh
}

/// All cells of the lattice.
pub fn all_cells(lattice: &Lattice) -> Vec<[usize; 3]> {
    let m = lattice.cells();
    let mut out = Vec::with_capacity(m * m * m);
    for k in 0..m {
        for j in 0..m {
            for i in 0..m {
                out.push([i, j, k]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use std::collections::HashMap;

    fn sphere_field(lat: &Lattice, c: [f64; 3]) -> Vec<f64> {
        (0..lat.len())
            .map(|i| Lattice::norm(sub(lat.position(i), c)))
            .collect()
    }

    fn edge_counts(mesh: &TriangleMesh) -> HashMap<[u64; 6], usize> {
        let key = |a: [f64; 3], b: [f64; 3]| {
            let (a, b) = if a.map(f64::to_bits) < b.map(f64::to_bits) { (a, b) } else { (b, a) };
            [a[0], a[1], a[2], b[0], b[1], b[2]].map(f64::to_bits)
        };
        let mut counts = HashMap::new();
        for t in &mesh.triangles {
            for q in 0..3 {
                *counts.entry(key(t[q], t[(q + 1) % 3])).or_insert(0) += 1;
            }
        }
        counts
    }

    #[test]
    fn sphere_area_converges_and_mesh_is_closed() {
        let lat = GridSpec::new(0.125, 2.0).unwrap().lattice().unwrap();
        let f = sphere_field(&lat, [0.03, -0.02, 0.01]);
        let mesh = extract_isosurface(&lat, &f, 1.0, &all_cells(&lat));
        let area = mesh.euclidean_area();
        assert!((area / (4.0 * std::f64::consts::PI) - 1.0).abs() < 0.01, "{area}");
        assert!(edge_counts(&mesh).values().all(|&c| c == 2));
        assert_eq!(mesh.metric_area(&ConformalFactor::flat()), area);
    }

    #[test]
    fn empty_when_no_crossing() {
        let lat = GridSpec::new(0.5, 1.0).unwrap().lattice().unwrap();
        let f = vec![0.3; lat.len()];
        assert!(extract_isosurface(&lat, &f, 1.0, &all_cells(&lat)).is_empty());
    }

    #[test]
    fn stl_lists_every_facet() {
        let lat = GridSpec::new(0.25, 1.0).unwrap().lattice().unwrap();
        let mesh = extract_isosurface(&lat, &sphere_field(&lat, [0.0; 3]), 0.6, &all_cells(&lat));
        let mut buf = Vec::new();
        mesh.write_stl(&mut buf, "s").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.matches("facet normal").count(), mesh.triangles.len());
        assert!(text.starts_with("solid s") && text.trim_end().ends_with("endsolid s"));
    }
}
