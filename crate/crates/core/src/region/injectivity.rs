use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Lattice;
use crate::solver::HarmonicTriple;

pub const FOLD_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectivityReport {
    /// `min |𝒰(y) − 𝒰(z)| / |y − z|` over the sampled pairs.
    pub min_ratio: f64,
    pub pairs: usize,
    /// Set when the ratio drops below 0.5 (possible fold).
    pub flagged: bool,
}

/// Samples `n_pairs` random mask node pairs at coordinate distance ≥ 2h.
pub fn injectivity_probe(mask: &[bool], triple: &HarmonicTriple, n_pairs: usize, seed: u64) -> Result<InjectivityReport> {
    let lat = &triple.lattice;
    let nodes: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    if nodes.len() < 2 {
        return Err(Error::EmptyMask("injectivity probe needs at least two mask nodes"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min_dist = 2.0 * lat.h;
    let mut min_ratio = f64::INFINITY;
    let mut pairs = 0;
    let mut attempts = 0usize;
    while pairs < n_pairs {
        attempts += 1;
        if attempts > 100 * n_pairs.max(1) {
            return Err(Error::EmptyMask("mask too small for the requested pair distance"));
        }
        let y = nodes[rng.gen_range(0..nodes.len())];
        let z = nodes[rng.gen_range(0..nodes.len())];
        let (py, pz) = (lat.position(y), lat.position(z));
        let d = Lattice::norm([py[0] - pz[0], py[1] - pz[1], py[2] - pz[2]]);
        if d < min_dist {
            continue;
        }
        let (uy, uz) = (triple.image(y), triple.image(z));
        let du = Lattice::norm([uy[0] - uz[0], uy[1] - uz[1], uy[2] - uz[2]]);
        min_ratio = min_ratio.min(du / d);
        pairs += 1;
    }
    Ok(InjectivityReport {
        min_ratio,
        pairs,
        flagged: min_ratio < FOLD_THRESHOLD,
    })
}
