//! First-arrival distances and geodesic-ball volume ratios.

use masslab::geodesic::{
    bishop_gromov_check, fast_marching, ricci_min_eigenvalue, segment_length, BG_SLACK,
};
use masslab::harness::corpus;
use masslab::{ConformalFactor, GridSpec, Lattice, MetricGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(factor: &ConformalFactor, h: f64, l_box: f64) -> MetricGrid {
    MetricGrid::build(factor, GridSpec::new(h, l_box).unwrap()).unwrap()
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Max error against the radial integral of `φ²`, which is the exact
/// distance from the centre of a radially symmetric factor.
fn radial_error(factor: &ConformalFactor, h: f64, l_box: f64, reach: f64) -> (f64, f64) {
    let g = grid(factor, h, l_box);
    let d = fast_marching(&g, g.lattice.nearest([0.0; 3])).unwrap();
    let (mut abs, mut rel): (f64, f64) = (0.0, 0.0);
    for idx in 0..g.lattice.len() {
        let p = g.lattice.position(idx);
        let r = Lattice::norm(p);
        if r > reach || r == 0.0 {
            continue;
        }
        let exact = segment_length(factor, [0.0; 3], p, h / 4.0);
        let e = (d.t[idx] - exact).abs();
        abs = abs.max(e);
        rel = rel.max(e / exact);
    }
    (abs, rel)
}

#[test]
fn flat_distances_are_euclidean() {
    let g = grid(&ConformalFactor::flat(), 0.25, 8.0);
    let src = g.lattice.nearest([1.0, -0.5, 0.25]);
    let ps = g.lattice.position(src);
    let d = fast_marching(&g, src).unwrap();
    let worst = (0..g.lattice.len())
        .map(|i| (d.t[i] - Lattice::norm(sub(g.lattice.position(i), ps))).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-10, "max error {worst:.3e}");
}

#[test]
fn schwarzschild_radial_distance_converges() {
    let f = ConformalFactor::new(0.2, 0.5, vec![]).unwrap();
    let errs: Vec<(f64, f64)> = [0.25, 0.125, 0.0625].iter().map(|&h| radial_error(&f, h, 3.0, 2.5)).collect();
    for w in errs.windows(2) {
        println!("abs {:.3e} -> {:.3e}, order {:.3}", w[0].0, w[1].0, (w[0].0 / w[1].0).log2());
    }
    println!("relative error at h = 0.25: {:.3e}", errs[0].1);
    for w in errs.windows(2) {
        assert!((w[0].0 / w[1].0).log2() >= 0.6);
    }
    assert!(errs[0].1 <= 0.02);
}

#[test]
fn distances_do_not_beat_straight_segments() {
    let f = corpus::bump_member(0.2).factor().unwrap();
    let h = 0.25;
    let g = grid(&f, h, 6.0);
    let src = g.lattice.nearest([2.0, 1.0, -0.5]);
    let ps = g.lattice.position(src);
    let d = fast_marching(&g, src).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..100 {
        let z = rng.gen_range(0..g.lattice.len());
        let seg = segment_length(&f, ps, g.lattice.position(z), h / 4.0);
        worst = worst.max(d.t[z] - seg);
    }
    println!("max T - segment = {worst:.4e} (h = {h})");
    assert!(worst <= 0.2 * h);
}

#[test]
fn symmetric_and_triangle_inequality() {
    let f = corpus::bump_member(0.2).factor().unwrap();
    let h = 0.25;
    let g = grid(&f, h, 6.0);
    let pts = [[2.0, 1.0, -0.5], [-1.5, 0.5, 2.0], [0.5, -2.5, 0.0]].map(|p| g.lattice.nearest(p));
    let fields: Vec<_> = pts.iter().map(|&p| fast_marching(&g, p).unwrap()).collect();
    let mut asym: f64 = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            asym = asym.max((fields[a].t[pts[b]] - fields[b].t[pts[a]]).abs());
        }
    }
    println!("max asymmetry {asym:.3e}");
    assert!(asym <= 0.1 * h);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..200 {
        let z = rng.gen_range(0..g.lattice.len());
        for a in 0..3 {
            for b in 0..3 {
                // d(a, z) <= d(a, b) + d(b, z)
                worst = worst.max(fields[a].t[z] - fields[a].t[pts[b]] - fields[b].t[z]);
            }
        }
    }
    println!("max triangle excess {worst:.3e}");
    assert!(worst <= 0.1 * h);
}

fn flat_ratios(h: f64, l_box: f64, radii: &[f64]) -> Vec<f64> {
    let g = grid(&ConformalFactor::flat(), h, l_box);
    let d = fast_marching(&g, g.lattice.nearest([0.0; 3])).unwrap();
    let rep = bishop_gromov_check(&d, &g, 0.0, radii).unwrap();
    assert!(rep.monotone);
    rep.ratios
}

#[test]
fn flat_volume_ratio_is_one() {
    let ratios = flat_ratios(0.25, 8.0, &[2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
    println!("{ratios:?}");
    for r in &ratios {
        assert!((r - 1.0).abs() < 0.01, "{r}");
    }
}

#[test]
fn flat_small_ball_volume_converges() {
    let coarse = flat_ratios(0.25, 3.0, &[1.0])[0] - 1.0;
    let fine = flat_ratios(0.125, 3.0, &[1.0])[0] - 1.0;
    println!("r = 1 error {coarse:.3e} -> {fine:.3e}");
    assert!(fine.abs() * 3.0 < coarse.abs());
}

#[test]
fn flat_ratio_against_hyperbolic_model_strictly_decreases() {
    let g = grid(&ConformalFactor::flat(), 0.25, 8.0);
    let d = fast_marching(&g, g.lattice.nearest([0.0; 3])).unwrap();
    let rep = bishop_gromov_check(&d, &g, 1.0, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
    assert!(rep.ratios.windows(2).all(|w| w[1] < w[0]), "{:?}", rep.ratios);
}

#[test]
fn schwarzschild_ratio_is_monotone_at_shipped_lambda() {
    let c = corpus::standard_corpus().into_iter().find(|c| c.name == "schwarzschild-0.2").unwrap();
    let g = grid(&c.factor().unwrap(), 0.25, 12.0);
    let d = fast_marching(&g, g.lattice.nearest([0.0; 3])).unwrap();
    let rep = bishop_gromov_check(&d, &g, c.geodesic.lambda, &c.geodesic.radii).unwrap();
    println!("{:?} max increase {:.3e}", rep.ratios, rep.max_relative_increase);
    assert!(rep.max_relative_increase <= BG_SLACK && rep.monotone);
}

/// Independent audit of the shipped Ricci bounds: the sampled minimum
/// eigenvalue of `Ric` relative to `g` never drops below `−2Λ`.
#[test]
fn shipped_lambda_bounds_sampled_ricci() {
    for c in corpus::standard_corpus() {
        let f = c.factor().unwrap();
        let step = 0.1;
        let n = (4.0 / step) as i32;
        let mut lo = f64::INFINITY;
        for i in -n..=n {
            for j in -n..=n {
                for k in -n..=n {
                    lo = lo.min(ricci_min_eigenvalue(&f, [i as f64 * step, j as f64 * step, k as f64 * step]));
                }
            }
        }
        let needed = (-lo / 2.0).max(0.0);
        println!("{}: sampled {needed:.5}, shipped {}", c.name, c.geodesic.lambda);
        assert!(c.geodesic.lambda >= needed, "{}", c.name);
    }
}
