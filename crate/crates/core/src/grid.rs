//! Uniform Cartesian lattices on the cube `[-L_box, L_box]³`.

use crate::error::{Error, Result};

/// Grid resolution and extent as written in a run configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub l_box: f64,
}

impl GridSpec {
    pub fn new(h: f64, l_box: f64) -> Result<Self> {
        let spec = GridSpec { h, l_box };
        spec.lattice()?;
        Ok(spec)
    }

    /// Validated lattice for this spec: `n = 2·L_box/h + 1` nodes per axis.
    pub fn lattice(&self) -> Result<Lattice> {
        if !(self.h > 0.0) || !self.h.is_finite() {
            return Err(Error::invalid("grid.h", format!("must be positive, got {}", self.h)));
        }
        if !(self.l_box > 0.0) || !self.l_box.is_finite() {
            return Err(Error::invalid(
                "grid.L_box",
                format!("must be positive, got {}", self.l_box),
            ));
        }
        let cells = 2.0 * self.l_box / self.h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::invalid(
                "grid.h",
                format!("2·L_box/h = {cells} is not an integer"),
            ));
        }
        if rounded < 4.0 {
            return Err(Error::invalid("grid.h", "fewer than 4 cells per axis"));
        }
        Ok(Lattice {
            n: rounded as usize + 1,
            h: self.h,
            l_box: self.l_box,
        })
    }
}

/// Index arithmetic for an `n × n × n` node lattice, x fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub n: usize,
    pub h: f64,
    pub l_box: f64,
}

impl Lattice {
    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n * (j + self.n * k)
    }

    #[inline]
    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.n;
        let j = (idx / self.n) % self.n;
        let k = idx / (self.n * self.n);
        [i, j, k]
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.l_box + i as f64 * self.h
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.ijk(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => 1,
            1 => self.n,
            _ => self.n * self.n,
        }
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        let last = self.n - 1;
        self.ijk(idx).iter().any(|&c| c == 0 || c == last)
    }

    /// Whether the node is at least `collar` nodes away from every box face.
    #[inline]
    pub fn is_inside_collar(&self, idx: usize, collar: usize) -> bool {
        let hi = self.n - 1 - collar;
        self.ijk(idx).iter().all(|&c| c >= collar && c <= hi)
    }

    /// Nearest node to a point, clamped into the box.
    pub fn nearest(&self, x: [f64; 3]) -> usize {
        let c = |v: f64| {
            let t = ((v + self.l_box) / self.h).round();
            t.clamp(0.0, (self.n - 1) as f64) as usize
        };
        self.index(c(x[0]), c(x[1]), c(x[2]))
    }

    /// Number of cells per axis.
    #[inline]
    pub fn cells(&self) -> usize {
        self.n - 1
    }

    /// Node indices of the 8 corners of the cell with lower corner `(i,j,k)`,
    /// ordered by the bit pattern `dx + 2·dy + 4·dz`.
    #[inline]
    pub fn cell_corners(&self, i: usize, j: usize, k: usize) -> [usize; 8] {
        let base = self.index(i, j, k);
        let sx = 1;
        let sy = self.n;
        let sz = self.n * self.n;
        [
            base,
            base + sx,
            base + sy,
            base + sx + sy,
            base + sz,
            base + sx + sz,
            base + sy + sz,
            base + sx + sy + sz,
        ]
    }

    pub fn norm(x: [f64; 3]) -> f64 {
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_follow_extent_and_spacing() {
        let lat = GridSpec::new(0.25, 12.0).unwrap().lattice().unwrap();
        assert_eq!(lat.n, 97);
        assert_eq!(lat.coord(0), -12.0);
        assert_eq!(lat.coord(96), 12.0);
        assert_eq!(lat.coord(48), 0.0);
    }

    #[test]
    fn rejects_incommensurate_spacing() {
        assert!(GridSpec::new(0.3, 1.0).is_err());
        assert!(GridSpec::new(-1.0, 4.0).is_err());
        assert!(GridSpec::new(0.5, 0.0).is_err());
    }

    #[test]
    fn index_round_trip() {
        let lat = GridSpec::new(0.5, 2.0).unwrap().lattice().unwrap();
        for idx in 0..lat.len() {
            let [i, j, k] = lat.ijk(idx);
            assert_eq!(lat.index(i, j, k), idx);
        }
        assert_eq!(lat.nearest([0.1, -0.2, 1.9]), lat.index(4, 4, 8));
    }
}
