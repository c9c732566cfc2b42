//! Standard corpus: flat, a regularized Schwarzschild ladder and a
//! three-bump ladder with the same total masses.

use crate::metric::Bump;

use super::config::RunConfig;

pub const MASS_LADDER: [f64; 5] = [0.4, 0.2, 0.1, 0.05, 0.025];
pub const S_REG: f64 = 0.5;

/// `(centre, width, share of the total mass)`.
pub const BUMP_SITES: [([f64; 3], f64, f64); 3] = [
    ([1.5, 0.0, 0.0], 0.5, 0.5),
    ([-1.0, 1.25, 0.5], 0.75, 0.3),
    ([0.0, -1.0, -1.5], 1.0, 0.2),
];

pub fn flat() -> RunConfig {
    RunConfig {
        name: "flat".into(),
        ..RunConfig::default()
    }
}

pub fn schwarzschild(m: f64) -> RunConfig {
    RunConfig {
        name: format!("schwarzschild-{m}"),
        m_core: m,
        s_reg: S_REG,
        ..RunConfig::default()
    }
}

pub fn bump_member(m: f64) -> RunConfig {
    let bumps = BUMP_SITES
        .iter()
        .map(|&(center, width, share)| Bump {
            center,
            amplitude: Bump::amplitude_for_mass(share * m, width),
            width,
        })
        .collect();
    RunConfig {
        name: format!("bumps-{m}"),
        bumps,
        s_reg: S_REG,
        ..RunConfig::default()
    }
}

/// Shipped Ricci lower bounds `Ric ≥ −2Λ g` per ladder mass, with margin
/// over the sampled minimum: `(m, Λ schwarzschild, Λ bumps)`.
pub const SHIPPED_LAMBDA: [(f64, f64, f64); 5] = [
    (0.4, 0.050, 0.083),
    (0.2, 0.040, 0.060),
    (0.1, 0.027, 0.036),
    (0.05, 0.016, 0.020),
    (0.025, 0.0085, 0.011),
];

fn shipped(m: f64) -> Option<&'static (f64, f64, f64)> {
    SHIPPED_LAMBDA.iter().find(|r| r.0 == m)
}

/// Flat, then the bump ladder, then the Schwarzschild ladder, each with its
/// shipped `Λ` for the volume-ratio check.
pub fn standard_corpus() -> Vec<RunConfig> {
    let mut out = vec![flat()];
    for m in MASS_LADDER {
        let mut c = bump_member(m);
        c.geodesic.lambda = shipped(m).map_or(0.0, |r| r.2);
        out.push(c);
    }
    for m in MASS_LADDER {
        let mut c = schwarzschild(m);
        c.geodesic.lambda = shipped(m).map_or(0.0, |r| r.1);
        out.push(c);
    }
    out
}
