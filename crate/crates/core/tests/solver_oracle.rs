//! Grid harmonic solves against the radial ODE profile of regularized
//! Schwarzschild, with oracle boundary data on a reduced box.

use masslab::solver::{oracle_comparison, radial_ode_oracle, solve_dirichlet, HarmonicTriple, SolveOptions};
use masslab::{ConformalFactor, GridSpec, Lattice, MetricGrid};

fn oracle_errors(m: f64, l_box: f64, hs: &[f64]) -> Vec<(f64, f64)> {
    let f = ConformalFactor::new(m, 0.5, vec![]).unwrap();
    let prof = radial_ode_oracle(&f, 100.0).unwrap();
    hs.iter()
        .map(|&h| {
            let g = MetricGrid::build(&f, GridSpec::new(h, l_box).unwrap()).unwrap();
            let s = solve_dirichlet(&g, |x| prof.eval(Lattice::norm(x)) * x[0], SolveOptions::default()).unwrap();
            let c = oracle_comparison(&g.lattice, &s.u, 0, &prof);
            (c.max_abs_error, c.relative_error)
        })
        .collect()
}

#[test]
fn second_order_convergence_to_radial_oracle() {
    let errs = oracle_errors(0.2, 4.0, &[0.5, 0.25, 0.125]);
    for w in errs.windows(2) {
        let order = (w[0].0 / w[1].0).log2();
        println!("abs {:.3e} -> {:.3e}, order {order:.3}", w[0].0, w[1].0);
        assert!(order >= 1.9, "observed order {order}");
    }
    let rel = errs[1].1;
    assert!(rel <= 5e-3, "relative error at h = 0.25: {rel:.3e}");
}

#[test]
fn flat_solve_reproduces_coordinates_on_reference_box() {
    let g = MetricGrid::build(&ConformalFactor::flat(), GridSpec::new(0.5, 6.0).unwrap()).unwrap();
    let t = HarmonicTriple::solve(&g, SolveOptions::default()).unwrap();
    let mut worst: f64 = 0.0;
    for idx in 0..g.lattice.len() {
        let x = g.lattice.position(idx);
        for j in 0..3 {
            worst = worst.max((t.u[j][idx] - x[j]).abs());
        }
    }
    assert!(worst < 1e-10, "max |u - x| = {worst:.3e}");
}

#[test]
fn error_shrinks_with_mass() {
    let big = oracle_errors(0.2, 4.0, &[0.25])[0].0;
    let small = oracle_errors(0.05, 4.0, &[0.25])[0].0;
    assert!(small < big, "{small:.3e} vs {big:.3e}");
}
