use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::solver::HarmonicTriple;

use super::fmm::DistanceField;

/// Mask nodes whose coordinate `δ`-ball lies in the mask.
pub fn interior_nodes(lattice: &Lattice, mask: &[bool], delta: f64) -> Vec<usize> {
    let r = (delta / lattice.h).ceil() as isize;
    let mut offsets = Vec::new();
    for dk in -r..=r {
        for dj in -r..=r {
            for di in -r..=r {
                let d2 = (di * di + dj * dj + dk * dk) as f64 * lattice.h * lattice.h;
                if d2 <= delta * delta + 1e-12 {
                    offsets.push([di, dj, dk]);
                }
            }
        }
    }
    let n = lattice.n as isize;
    (0..lattice.len())
        .filter(|&idx| {
            if !mask[idx] {
                return false;
            }
            let c = lattice.ijk(idx).map(|v| v as isize);
            offsets.iter().all(|o| {
                let p = [c[0] + o[0], c[1] + o[1], c[2] + o[2]];
                p.iter().all(|&v| v >= 0 && v < n)
                    && mask[lattice.index(p[0] as usize, p[1] as usize, p[2] as usize)]
            })
        })
        .collect()
}

/// Draws lattice nodes from a seeded stream and keeps those accepted, so two
/// members with nearly equal masks see nearly the same samples.
fn draw_common(
    rng: &mut ChaCha8Rng,
    n_nodes: usize,
    count: usize,
    mut accept: impl FnMut(usize) -> bool,
) -> Vec<usize> {
    let mut out = Vec::with_capacity(count);
    let budget = 1000 * count.max(1) + n_nodes;
    for _ in 0..budget {
        if out.len() == count {
            break;
        }
        let z = rng.gen_range(0..n_nodes);
        if accept(z) {
            out.push(z);
        }
    }
    out
}

/// Picks up to `count` distinct interior nodes as distance-field sources.
/// `interior` must be sorted, as returned by [`interior_nodes`].
pub fn sample_sources(interior: &[usize], n_nodes: usize, count: usize, seed: u64) -> Vec<usize> {
    let count = count.min(interior.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::new();
    let mut out = draw_common(&mut rng, n_nodes, count, |z| {
        let ok = interior.binary_search(&z).is_ok() && !picked.contains(&z);
        if ok {
            picked.push(z);
        }
        ok
    });
    if out.len() < count {
        // sparse interior: fall back to sampling the list directly
        let rest: Vec<usize> = interior.iter().copied().filter(|z| !out.contains(z)).collect();
        out.extend(rest.choose_multiple(&mut rng, count - out.len()).copied());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartComparison {
    pub pairs: usize,
    /// `max ||𝒰(y) − 𝒰(z)| − d(y,z)| / d(y,z)`; `None` without valid pairs.
    pub max_normalized: Option<f64>,
    pub mean_normalized: Option<f64>,
    pub median_normalized: Option<f64>,
    /// Largest unnormalized discrepancy.
    pub max_absolute: Option<f64>,
}

/// Compares chart distances against first-arrival distances for pairs
/// `(source, z)` with `z` drawn from `interior` at coordinate distance at
/// least `min_separation` from the source. `interior` must be sorted.
pub fn chart_distance_comparison(
    interior: &[usize],
    triple: &HarmonicTriple,
    fields: &[DistanceField],
    n_pairs: usize,
    min_separation: f64,
    seed: u64,
) -> Result<ChartComparison> {
    if fields.is_empty() {
        return Err(Error::invalid("geodesic.sources", "need at least one distance field"));
    }
    let lat = &triple.lattice;
    let per = n_pairs.div_ceil(fields.len());
    let mut values = Vec::new();
    let mut max_abs: f64 = 0.0;
    for (k, field) in fields.iter().enumerate() {
        // one stream per source keeps later sources aligned across members
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_c4a7);
        rng.set_stream(k as u64);
        let y = field.source;
        let py = lat.position(y);
        let uy = triple.image(y);
        let far_enough = |z: usize| {
            let pz = lat.position(z);
            Lattice::norm([pz[0] - py[0], pz[1] - py[1], pz[2] - py[2]]) >= min_separation
        };
        let targets = draw_common(&mut rng, lat.len(), per, |z| {
            interior.binary_search(&z).is_ok() && far_enough(z)
        });
        for z in targets {
            let uz = triple.image(z);
            let du = Lattice::norm([uz[0] - uy[0], uz[1] - uy[1], uz[2] - uy[2]]);
            let d = field.t[z];
            let disc = (du - d).abs();
            max_abs = max_abs.max(disc);
            values.push(disc / d);
        }
    }
    if values.is_empty() {
        return Ok(ChartComparison {
            pairs: 0,
            max_normalized: None,
            mean_normalized: None,
            median_normalized: None,
            max_absolute: None,
        });
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    let median = if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    };
    Ok(ChartComparison {
        pairs: n,
        max_normalized: Some(values[n - 1]),
        mean_normalized: Some(values.iter().sum::<f64>() / n as f64),
        median_normalized: Some(median),
        max_absolute: Some(max_abs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    #[test]
    fn interior_shrinks_by_delta() {
        let lat = GridSpec::new(0.5, 2.0).unwrap().lattice().unwrap();
        let mask = vec![true; lat.len()];
        let inner = interior_nodes(&lat, &mask, 1.0);
        // 9 nodes per axis, two lost on each side
        assert_eq!(inner.len(), 5 * 5 * 5);
        assert_eq!(interior_nodes(&lat, &mask, 0.0).len(), lat.len());
    }

    #[test]
    fn sources_are_deterministic_and_distinct() {
        let pool: Vec<usize> = (0..100).collect();
        let a = sample_sources(&pool, 1000, 5, 7);
        assert_eq!(a, sample_sources(&pool, 1000, 5, 7));
        let mut b = a.clone();
        b.sort();
        b.dedup();
        assert_eq!(b.len(), 5);
        assert!(a.iter().all(|z| *z < 100));
        // the whole pool when fewer nodes than requested
        assert_eq!(sample_sources(&pool[..3], 1000, 5, 7).len(), 3);
    }

    #[test]
    fn nearly_equal_pools_share_samples() {
        let full: Vec<usize> = (0..1000).collect();
        let holed: Vec<usize> = (0..1000).filter(|z| z % 97 != 0).collect();
        let a = sample_sources(&full, 1000, 8, 3);
        let b = sample_sources(&holed, 1000, 8, 3);
        let shared = a.iter().filter(|z| b.contains(z)).count();
        assert!(shared >= 6, "{a:?} {b:?}");
    }
}
