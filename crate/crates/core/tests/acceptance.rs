//! Acceptance suite over the standard corpus at the reference resolution
//! (h = 0.25, L_box = 12). Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_UNATTAINED` are evaluated and reported exactly
//! like the others but do not fail the test; each has a written analysis in
//! the project's decisions ledger. Every other criterion must pass.

use masslab::geodesic::BG_SLACK;
use masslab::harness::{analyze, corpus, run_pipeline, solve_stage, AreaTrend, RunConfig, RunOutput, Timings};
use masslab::region::ball_volume;
use masslab::solver::{oracle_comparison, radial_ode_oracle, solve_dirichlet, SolveOptions};
use masslab::{ConformalFactor, GridSpec, Lattice, MetricGrid};

const KNOWN_UNATTAINED: [u32; 3] = [6, 8, 10];

struct Verdict {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

struct Member {
    config: RunConfig,
    out: RunOutput,
}

fn find<'a>(members: &'a [Member], name: &str) -> &'a Member {
    members.iter().find(|m| m.config.name == name).unwrap_or_else(|| panic!("no member {name}"))
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4e}")).collect::<Vec<_>>().join(", ")
}

fn flat_baseline(members: &[Member]) -> Verdict {
    let flat = find(members, "flat");
    let c = &flat.config;
    let mut t = Timings::default();
    let (grid, triple) = solve_stage(c, &mut t).unwrap();
    let mut coord_err: f64 = 0.0;
    for idx in 0..grid.lattice.len() {
        let x = grid.lattice.position(idx);
        for j in 0..3 {
            coord_err = coord_err.max((triple.u[j][idx] - x[j]).abs());
        }
    }
    let o = &flat.out;
    let cov = o.coverage.unwrap();
    let ball = ball_volume(c.coverage.radius);
    let cyl_ok = !o.cylinders.is_empty() && o.cylinders.iter().all(|cy| (cy.ratio - 1.0).abs() <= 0.02);
    let pass = o.mass.m_adm.abs() < 1e-8
        && coord_err < 1e-10
        && o.sup_q < 1e-16
        && o.region.area_g == 0.0
        && cyl_ok
        && cov.uncovered_volume < 1e-6 * ball;
    Verdict {
        id: 1,
        name: "flat baseline",
        pass,
        detail: format!(
            "|m_adm| {:.1e}, max|u-x| {coord_err:.1e}, sup Q {:.1e}, area {:.1e}, cylinder {:?}, uncovered {:.1e} of {ball:.1}",
            o.mass.m_adm.abs(),
            o.sup_q,
            o.region.area_g,
            o.cylinders.iter().map(|c| (c.ratio * 1e4).round() / 1e4).collect::<Vec<_>>(),
            cov.uncovered_volume
        ),
    }
}

fn adm_oracle(members: &[Member]) -> Verdict {
    let s = &find(members, "schwarzschild-0.2").out.mass;
    let b = &find(members, "bumps-0.2").out.mass;
    let es = (s.m_adm - 0.2).abs() / 0.2;
    let eb = (b.m_adm - b.m_exact).abs() / b.m_exact;
    Verdict {
        id: 2,
        name: "ADM oracle",
        pass: es <= 0.02 && eb <= 0.02,
        detail: format!("schwarzschild rel err {es:.2e}, bumps rel err {eb:.2e} (tol 2e-2)"),
    }
}

fn solver_oracle() -> Verdict {
    let f = ConformalFactor::new(0.2, corpus::S_REG, vec![]).unwrap();
    let prof = radial_ode_oracle(&f, 100.0).unwrap();
    let mut abs = Vec::new();
    let mut rel = Vec::new();
    for h in [0.5, 0.25, 0.125] {
        let g = MetricGrid::build(&f, GridSpec::new(h, 4.0).unwrap()).unwrap();
        let s = solve_dirichlet(&g, |x| prof.eval(Lattice::norm(x)) * x[0], SolveOptions::default()).unwrap();
        let c = oracle_comparison(&g.lattice, &s.u, 0, &prof);
        abs.push(c.max_abs_error);
        rel.push(c.relative_error);
    }
    let orders: Vec<f64> = abs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Verdict {
        id: 3,
        name: "solver oracle",
        pass: rel[1] <= 5e-3 && orders.iter().all(|&p| p >= 1.9),
        detail: format!("rel err at h=0.25 {:.2e} (tol 5e-3), orders {orders:.3?} (min 1.9)", rel[1]),
    }
}

fn mass_inequality(members: &[Member]) -> Verdict {
    let mut worst = f64::INFINITY;
    let mut positive = true;
    for m in members {
        let r = &m.out.mass;
        worst = worst.min(r.slack.iter().copied().fold(f64::INFINITY, f64::min));
        if m.config.factor().unwrap().mass() > 0.0 {
            positive &= r.bkks_bound.iter().all(|&b| b > 0.0);
        }
    }
    Verdict {
        id: 4,
        name: "mass inequality",
        pass: worst >= -1e-4 && positive,
        detail: format!("min slack {worst:.3e} (tol -1e-4), bounds positive on non-flat members: {positive}"),
    }
}

fn coarea_certificate(members: &[Member]) -> Verdict {
    let failing: Vec<&str> = members
        .iter()
        .filter(|m| !m.out.region.selection.certificate_holds())
        .map(|m| m.config.name.as_str())
        .collect();
    Verdict {
        id: 5,
        name: "co-area certificate",
        pass: failing.is_empty(),
        detail: format!("{} members, failing: {failing:?}", members.len()),
    }
}

fn area_law(ladder: &[&Member]) -> Verdict {
    let report = analyze(ladder.iter().map(|m| m.out.row.clone()).collect());
    let areas: Vec<f64> = ladder.iter().map(|m| m.out.region.area_g).collect();
    let (pass, detail) = match report.fits.map(|f| f.area) {
        Some(AreaTrend::Fitted { fit, spread, zero_area, .. }) => (
            fit.slope >= 0.4 && spread <= 10.0 && zero_area == 0,
            format!(
                "slope {:.3} (min 0.4), C spread {spread:.1} (max 10), zero-area members {zero_area}, areas [{}]",
                fit.slope,
                fmt_list(&areas)
            ),
        ),
        other => (false, format!("no fit: {other:?}, skipped {:?}", report.skipped)),
    };
    Verdict { id: 6, name: "area law trend", pass, detail }
}

fn weak_volume(ladder: &[&Member], tau0: f64) -> Verdict {
    let cov: Vec<f64> = ladder.iter().map(|m| m.out.coverage.unwrap().uncovered_volume).collect();
    let weak: Vec<f64> = ladder.iter().map(|m| m.out.coverage.unwrap().weak_volume_integral).collect();
    let last = ladder.last().unwrap();
    let ball = ball_volume(last.config.coverage.radius);
    let band = 4.0 * tau0 + 0.05;
    let seeded: Vec<&&Member> = ladder.iter().filter(|m| m.out.region.seed_ok).collect();
    let cyl: Vec<f64> = seeded.iter().flat_map(|m| m.out.cylinders.iter().map(|c| c.ratio)).collect();
    let cyl_ok = !cyl.is_empty() && cyl.iter().all(|r| (r - 1.0).abs() <= band);
    let pass = strictly_decreasing(&cov) && strictly_decreasing(&weak) && weak[weak.len() - 1] <= 0.05 * ball && cyl_ok;
    Verdict {
        id: 7,
        name: "weak-volume trend",
        pass,
        detail: format!(
            "uncovered [{}], integral [{}], smallest {:.3}% of |B|, cylinder ratios on {} seeded members [{}] within 1 +- {band:.2}",
            fmt_list(&cov),
            fmt_list(&weak),
            100.0 * weak[weak.len() - 1] / ball,
            seeded.len(),
            fmt_list(&cyl)
        ),
    }
}

fn chart_distance(members: &[Member], ladder: &[&Member], tau0: f64) -> Verdict {
    let flat = find(members, "flat");
    let h = flat.config.grid.h;
    let c_fm = flat.out.chart.as_ref().and_then(|c| c.max_normalized).unwrap() / h;
    let bound = 4.0 * tau0 + c_fm * h;
    let all: Vec<f64> = members.iter().filter_map(|m| m.out.chart.as_ref()?.max_normalized).collect();
    let trend: Vec<f64> = ladder.iter().filter_map(|m| m.out.chart.as_ref()?.max_normalized).collect();
    let within = all.len() == members.len() && all.iter().all(|&d| d <= bound);
    let decreasing = trend.len() == ladder.len() && strictly_decreasing(&trend);
    Verdict {
        id: 8,
        name: "chart-distance comparison",
        pass: within && decreasing,
        detail: format!(
            "C_fm {c_fm:.2e}, bound {bound:.4}, corpus max {:.4} (within: {within}), ladder [{}] decreasing: {decreasing}",
            all.iter().copied().fold(0.0, f64::max),
            fmt_list(&trend)
        ),
    }
}

fn bishop_gromov(members: &[Member]) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for m in members {
        let bg = m.out.bishop_gromov.as_ref().unwrap();
        worst = worst.max(bg.max_relative_increase);
        monotone &= bg.monotone;
    }
    let flat = find(members, "flat").out.bishop_gromov.as_ref().unwrap();
    let flat_dev = flat.ratios.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    Verdict {
        id: 9,
        name: "Bishop-Gromov monotonicity",
        pass: monotone && worst <= BG_SLACK && flat_dev <= 0.01,
        detail: format!(
            "max relative increase {worst:.2e} (slack {BG_SLACK}), flat max |ratio - 1| {flat_dev:.2e} (tol 1e-2)"
        ),
    }
}

fn diagnostics(members: &[Member], ladder: &[&Member]) -> Verdict {
    let hess: Vec<f64> = ladder.iter().map(|m| m.out.mass.sup_hess.sup).collect();
    let defect: Vec<f64> = ladder.iter().map(|m| m.out.mass.sup_defect.sup).collect();
    let spread = |v: Vec<f64>| {
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) / v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let hc = spread(ladder.iter().map(|m| m.out.mass.sup_hess.implied_constant).collect());
    let dc = spread(ladder.iter().map(|m| m.out.mass.sup_defect.implied_constant).collect());
    let exps: Vec<f64> = members.iter().filter_map(|m| m.out.mass.decay.exponent()).collect();
    let worst_exp = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pass = strictly_decreasing(&hess)
        && strictly_decreasing(&defect)
        && hc <= 10.0
        && dc <= 10.0
        && exps.len() + 1 == members.len()
        && worst_exp <= -0.8;
    Verdict {
        id: 10,
        name: "far-field diagnostics",
        pass,
        detail: format!(
            "sup Hessian [{}], sup defect [{}], constant spreads {hc:.2} / {dc:.2} (max 10), worst decay exponent {worst_exp:.3} (max -0.8)",
            fmt_list(&hess),
            fmt_list(&defect)
        ),
    }
}

// Runs without the libtest harness so the verdict lines are always shown.
fn main() {
    let members: Vec<Member> = corpus::standard_corpus()
        .into_iter()
        .map(|config| {
            let out = run_pipeline(&config).unwrap_or_else(|e| panic!("{}: {e}", config.name));
            println!("ran {:<22} in {:>6.1} s", config.name, out.timings.total());
            Member { config, out }
        })
        .collect();
    let ladder: Vec<&Member> = corpus::MASS_LADDER
        .iter()
        .map(|m| find(&members, &corpus::bump_member(*m).name))
        .collect();
    let tau0 = members[0].config.tau.tau0;
    assert!(members.iter().all(|m| m.config.tau.tau0 == tau0));

    let verdicts = [
        flat_baseline(&members),
        adm_oracle(&members),
        solver_oracle(),
        mass_inequality(&members),
        coarea_certificate(&members),
        area_law(&ladder),
        weak_volume(&ladder, tau0),
        chart_distance(&members, &ladder, tau0),
        bishop_gromov(&members),
        diagnostics(&members, &ladder),
    ];
    println!();
    for v in &verdicts {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        let note = if !v.pass && KNOWN_UNATTAINED.contains(&v.id) { " [known unattained]" } else { "" };
        println!("criterion {:>2} {tag}{note}: {}: {}", v.id, v.name, v.detail);
    }
    let unexpected: Vec<u32> = verdicts
        .iter()
        .filter(|v| !v.pass && !KNOWN_UNATTAINED.contains(&v.id))
        .map(|v| v.id)
        .collect();
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
