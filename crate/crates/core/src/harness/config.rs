//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! name = schw-0.2
//! metric.m_core = 0.2
//! bump.1.center = 3, 0, 0
//! grid.h = 0.25
//! adm.radii = 6, 8.4, 10.8
//! ```
//!
//! One `key = value` per line, dotted keys for nesting, vectors as comma
//! lists. Every problem is collected with its line number; parsing never
//! stops at the first error.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{ConfigError, Error, Result};
use crate::grid::GridSpec;
use crate::metric::{Bump, ConformalFactor};
use crate::region::{CoverageSettings, TauMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauKind {
    Fixed,
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauConfig {
    pub kind: TauKind,
    pub tau0: f64,
    pub epsilon: f64,
    pub scale: f64,
}

impl TauConfig {
    pub fn mode(&self) -> TauMode {
        match self.kind {
            TauKind::Fixed => TauMode::Fixed(self.tau0),
            TauKind::PowerLaw => TauMode::PowerLaw {
                epsilon: self.epsilon,
                scale: self.scale,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CylinderConfig {
    pub directions: Vec<[f64; 3]>,
    pub lengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicConfig {
    pub sources: usize,
    pub pairs: usize,
    /// Minimum coordinate distance of sampled points from the region boundary.
    pub delta: f64,
    /// Minimum coordinate separation of a sampled pair.
    pub min_separation: f64,
    /// Ricci lower bound `Ric ≥ −2Λ` used for the volume-ratio check.
    pub lambda: f64,
    pub center: [f64; 3],
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Toggles {
    pub cylinder: bool,
    pub coverage: bool,
    pub geodesic: bool,
    pub injectivity: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub seed: u64,
    /// Artifact directory; `None` keeps everything in memory.
    pub output: Option<String>,
    pub write_fields: bool,
    pub m_core: f64,
    pub s_reg: f64,
    pub bumps: Vec<Bump>,
    pub grid: GridSpec,
    pub r0: f64,
    pub tau: TauConfig,
    pub adm_radii: Vec<f64>,
    pub decay_radii: Vec<f64>,
    pub cylinder: CylinderConfig,
    pub coverage: CoverageSettings,
    pub geodesic: GeodesicConfig,
    pub injectivity_pairs: usize,
    pub diagnostics: Toggles,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            name: "run".into(),
            seed: 42,
            output: None,
            write_fields: false,
            m_core: 0.0,
            s_reg: 0.5,
            bumps: Vec::new(),
            grid: GridSpec { h: 0.25, l_box: 12.0 },
            r0: 4.0,
            tau: TauConfig {
                kind: TauKind::Fixed,
                tau0: 0.05,
                epsilon: 0.005,
                scale: 0.05,
            },
            adm_radii: vec![6.0, 8.4, 10.8],
            decay_radii: vec![5.0, 6.0, 7.0, 8.0],
            cylinder: CylinderConfig {
                directions: vec![[1.0, 0.0, 0.0]],
                lengths: vec![4.0],
            },
            coverage: CoverageSettings {
                base_point: [4.5, 0.0, 0.0],
                radius: 6.0,
                voxel: 0.25,
            },
            geodesic: GeodesicConfig {
                sources: 4,
                pairs: 400,
                delta: 0.5,
                min_separation: 1.0,
                lambda: 0.0,
                center: [0.0; 3],
                radii: vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
            },
            injectivity_pairs: 10_000,
            diagnostics: Toggles {
                cylinder: true,
                coverage: true,
                geodesic: true,
                injectivity: true,
            },
        }
    }
}

impl RunConfig {
    pub fn factor(&self) -> Result<ConformalFactor> {
        ConformalFactor::new(self.m_core, self.s_reg, self.bumps.clone())
    }

    /// Range checks that need the whole config.
    pub fn validate(&self) -> Vec<ConfigError> {
        let mut errs = Vec::new();
        let mut bad = |key: &str, reason: String| {
            errs.push(ConfigError {
                line: 0,
                key: key.to_string(),
                reason,
            })
        };
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            bad("name", format!("`{}` must be nonempty and use only [A-Za-z0-9._-]", self.name));
        }
        if let Some(out) = &self.output {
            if out.is_empty() || out.contains('#') || out.trim() != out {
                bad("output", "must be a nonempty path without `#` or surrounding blanks".into());
            }
        }
        if !(self.m_core >= 0.0) {
            bad("metric.m_core", format!("must be >= 0, got {}", self.m_core));
        }
        if !(self.s_reg > 0.0) {
            bad("metric.s_reg", format!("must be > 0, got {}", self.s_reg));
        }
        for (i, b) in self.bumps.iter().enumerate() {
            if !(b.amplitude >= 0.0) {
                bad(&format!("bump.{}.amplitude", i + 1), format!("must be >= 0, got {}", b.amplitude));
            }
            if !(b.width > 0.0) {
                bad(&format!("bump.{}.width", i + 1), format!("must be > 0, got {}", b.width));
            }
        }
        let grid_ok = match self.grid.lattice() {
            Ok(_) => true,
            Err(Error::InvalidParameter { name, reason }) => {
                bad(name, reason);
                false
            }
            Err(e) => {
                bad("grid", e.to_string());
                false
            }
        };
        let l = self.grid.l_box;
        if !(self.r0 > 0.0) || (grid_ok && self.r0 >= l) {
            bad("r0", format!("must lie in (0, L_box), got {}", self.r0));
        }
        let t = &self.tau;
        if !(t.tau0 > 0.0 && t.tau0 < 0.25) {
            bad("tau.tau0", format!("must lie in (0, 1/4), got {}", t.tau0));
        }
        if !(t.epsilon > 0.0 && t.epsilon < 1.0) {
            bad("tau.epsilon", format!("must lie in (0, 1), got {}", t.epsilon));
        }
        if !(t.scale > 0.0 && t.scale < 0.25) {
            bad("tau.scale", format!("must lie in (0, 1/4), got {}", t.scale));
        }
        let a = self
            .bumps
            .iter()
            .map(|b| (b.center[0].powi(2) + b.center[1].powi(2) + b.center[2].powi(2)).sqrt() + 4.0 * b.width)
            .fold(self.s_reg, f64::max);
        if self.adm_radii.len() < 2 {
            bad("adm.radii", "need at least two radii".into());
        }
        if let Some(r) = self.adm_radii.iter().find(|&&r| !(r > a)) {
            bad("adm.radii", format!("radius {r} must exceed the inner radius {a}"));
        }
        if self.decay_radii.len() < 2 {
            bad("decay.radii", "need at least two radii".into());
        }
        if let Some(r) = self.decay_radii.iter().find(|&&r| !(r > 0.0) || (grid_ok && r + self.grid.h > l)) {
            bad("decay.radii", format!("radius {r} outside (0, L_box − h]"));
        }
        if self.cylinder.directions.is_empty() {
            bad("cylinder.direction", "need at least one direction".into());
        }
        for (i, d) in self.cylinder.directions.iter().enumerate() {
            if !(d.iter().map(|x| x * x).sum::<f64>() > 0.0) {
                bad(&format!("cylinder.direction.{}", i + 1), "must be nonzero".into());
            }
        }
        if self.cylinder.lengths.is_empty() || self.cylinder.lengths.iter().any(|&x| !(x > 0.0)) {
            bad("cylinder.L", "need positive lengths".into());
        }
        let c = &self.coverage;
        if !(c.radius > 0.0) {
            bad("coverage.D", format!("must be > 0, got {}", c.radius));
        }
        if !(c.voxel > 0.0) || (grid_ok && c.voxel > self.grid.h) {
            bad("coverage.voxel", format!("must lie in (0, h], got {}", c.voxel));
        }
        let g = &self.geodesic;
        if g.sources == 0 {
            bad("geodesic.sources", "must be >= 1".into());
        }
        if g.pairs == 0 {
            bad("geodesic.pairs", "must be >= 1".into());
        }
        if !(g.delta >= 0.0) {
            bad("geodesic.delta", format!("must be >= 0, got {}", g.delta));
        }
        if !(g.min_separation > 0.0) {
            bad("geodesic.min_separation", format!("must be > 0, got {}", g.min_separation));
        }
        if !(g.lambda >= 0.0) {
            bad("geodesic.lambda", format!("must be >= 0, got {}", g.lambda));
        }
        if g.radii.is_empty() || g.radii.iter().any(|&r| !(r > 0.0)) || g.radii.windows(2).any(|w| w[1] <= w[0]) {
            bad("geodesic.radii", "must be positive and strictly increasing".into());
        }
        if self.injectivity_pairs == 0 {
            bad("injectivity.pairs", "must be >= 1".into());
        }
        errs
    }

    /// Canonical text form; `parse_config(&c.serialize())` returns `c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let triple = |v: &[f64; 3]| list(v);
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("name", self.name.clone());
        kv("seed", self.seed.to_string());
        if let Some(o) = &self.output {
            kv("output", o.clone());
        }
        kv("write_fields", self.write_fields.to_string());
        kv("metric.m_core", format!("{:?}", self.m_core));
        kv("metric.s_reg", format!("{:?}", self.s_reg));
        for (i, b) in self.bumps.iter().enumerate() {
            kv(&format!("bump.{}.center", i + 1), triple(&b.center));
            kv(&format!("bump.{}.amplitude", i + 1), format!("{:?}", b.amplitude));
            kv(&format!("bump.{}.width", i + 1), format!("{:?}", b.width));
        }
        kv("grid.h", format!("{:?}", self.grid.h));
        kv("grid.L_box", format!("{:?}", self.grid.l_box));
        kv("r0", format!("{:?}", self.r0));
        kv(
            "tau.mode",
            match self.tau.kind {
                TauKind::Fixed => "fixed".into(),
                TauKind::PowerLaw => "power".into(),
            },
        );
        kv("tau.tau0", format!("{:?}", self.tau.tau0));
        kv("tau.epsilon", format!("{:?}", self.tau.epsilon));
        kv("tau.scale", format!("{:?}", self.tau.scale));
        kv("adm.radii", list(&self.adm_radii));
        kv("decay.radii", list(&self.decay_radii));
        for (i, d) in self.cylinder.directions.iter().enumerate() {
            kv(&format!("cylinder.direction.{}", i + 1), triple(d));
        }
        kv("cylinder.L", list(&self.cylinder.lengths));
        kv("coverage.base_point", triple(&self.coverage.base_point));
        kv("coverage.D", format!("{:?}", self.coverage.radius));
        kv("coverage.voxel", format!("{:?}", self.coverage.voxel));
        let g = &self.geodesic;
        kv("geodesic.sources", g.sources.to_string());
        kv("geodesic.pairs", g.pairs.to_string());
        kv("geodesic.delta", format!("{:?}", g.delta));
        kv("geodesic.min_separation", format!("{:?}", g.min_separation));
        kv("geodesic.lambda", format!("{:?}", g.lambda));
        kv("geodesic.center", triple(&g.center));
        kv("geodesic.radii", list(&g.radii));
        kv("injectivity.pairs", self.injectivity_pairs.to_string());
        kv("diagnostics.cylinder", self.diagnostics.cylinder.to_string());
        kv("diagnostics.coverage", self.diagnostics.coverage.to_string());
        kv("diagnostics.geodesic", self.diagnostics.geodesic.to_string());
        kv("diagnostics.injectivity", self.diagnostics.injectivity.to_string());
        s
    }
}

struct Parser {
    errors: Vec<ConfigError>,
}

impl Parser {
    fn err(&mut self, line: usize, key: &str, reason: impl Into<String>) {
        self.errors.push(ConfigError {
            line,
            key: key.to_string(),
            reason: reason.into(),
        });
    }

    fn float(&mut self, line: usize, key: &str, v: &str) -> Option<f64> {
        match v.trim().parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.err(line, key, format!("`{v}` is not a finite number"));
                None
            }
        }
    }

    fn list(&mut self, line: usize, key: &str, v: &str) -> Option<Vec<f64>> {
        let parts: Vec<&str> = v.split(',').collect();
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            out.push(self.float(line, key, p)?);
        }
        Some(out)
    }

    fn triple(&mut self, line: usize, key: &str, v: &str) -> Option<[f64; 3]> {
        let l = self.list(line, key, v)?;
        if l.len() != 3 {
            self.err(line, key, format!("expected 3 comma-separated numbers, got {}", l.len()));
            return None;
        }
        Some([l[0], l[1], l[2]])
    }

    fn uint<T: std::str::FromStr>(&mut self, line: usize, key: &str, v: &str) -> Option<T> {
        match v.parse::<T>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(line, key, format!("`{v}` is not a nonnegative integer"));
                None
            }
        }
    }

    fn boolean(&mut self, line: usize, key: &str, v: &str) -> Option<bool> {
        match v {
            "true" => Some(true),
            "false" => Some(false),
            _ => {
                self.err(line, key, format!("`{v}` is not `true` or `false`"));
                None
            }
        }
    }
}

#[derive(Default)]
struct PartialBump {
    center: Option<[f64; 3]>,
    amplitude: Option<f64>,
    width: Option<f64>,
    line: usize,
}

/// Parses and validates a configuration; unspecified keys take defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut p = Parser { errors: Vec::new() };
    let mut c = RunConfig::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut bumps: BTreeMap<usize, PartialBump> = BTreeMap::new();
    let mut directions: BTreeMap<usize, [f64; 3]> = BTreeMap::new();
    let mut directions_given = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            p.err(line, content, "expected `key = value`");
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            p.err(line, k, "empty key");
            continue;
        }
        if let Some(first) = seen.insert(k.to_string(), line) {
            p.err(line, k, format!("duplicate key (first set on line {first})"));
            continue;
        }
        let parts: Vec<&str> = k.split('.').collect();
        match parts.as_slice() {
            ["name"] => c.name = v.to_string(),
            ["seed"] => c.seed = p.uint(line, k, v).unwrap_or(c.seed),
            ["output"] => c.output = Some(v.to_string()),
            ["write_fields"] => c.write_fields = p.boolean(line, k, v).unwrap_or(c.write_fields),
            ["metric", "m_core"] => c.m_core = p.float(line, k, v).unwrap_or(c.m_core),
            ["metric", "s_reg"] => c.s_reg = p.float(line, k, v).unwrap_or(c.s_reg),
            ["bump", idx, field] => {
                let Some(i) = idx.parse::<usize>().ok().filter(|&i| i >= 1) else {
                    p.err(line, k, "bump index must be a positive integer");
                    continue;
                };
                let entry = bumps.entry(i).or_default();
                if entry.line == 0 {
                    entry.line = line;
                }
                match *field {
                    "center" => entry.center = p.triple(line, k, v),
                    "amplitude" => entry.amplitude = p.float(line, k, v),
                    "width" => entry.width = p.float(line, k, v),
                    _ => p.err(line, k, "unknown key"),
                }
            }
            ["grid", "h"] => c.grid.h = p.float(line, k, v).unwrap_or(c.grid.h),
            ["grid", "L_box"] => c.grid.l_box = p.float(line, k, v).unwrap_or(c.grid.l_box),
            ["r0"] => c.r0 = p.float(line, k, v).unwrap_or(c.r0),
            ["tau", "mode"] => match v {
                "fixed" => c.tau.kind = TauKind::Fixed,
                "power" => c.tau.kind = TauKind::PowerLaw,
                _ => p.err(line, k, format!("`{v}` is not `fixed` or `power`")),
            },
            ["tau", "tau0"] => c.tau.tau0 = p.float(line, k, v).unwrap_or(c.tau.tau0),
            ["tau", "epsilon"] => c.tau.epsilon = p.float(line, k, v).unwrap_or(c.tau.epsilon),
            ["tau", "scale"] => c.tau.scale = p.float(line, k, v).unwrap_or(c.tau.scale),
            ["adm", "radii"] => c.adm_radii = p.list(line, k, v).unwrap_or(c.adm_radii),
            ["decay", "radii"] => c.decay_radii = p.list(line, k, v).unwrap_or(c.decay_radii),
            ["cylinder", "direction", idx] => {
                directions_given = true;
                match idx.parse::<usize>().ok().filter(|&i| i >= 1) {
                    Some(i) => {
                        if let Some(d) = p.triple(line, k, v) {
                            directions.insert(i, d);
                        }
                    }
                    None => p.err(line, k, "direction index must be a positive integer"),
                }
            }
            ["cylinder", "L"] => c.cylinder.lengths = p.list(line, k, v).unwrap_or(c.cylinder.lengths),
            ["coverage", "base_point"] => {
                c.coverage.base_point = p.triple(line, k, v).unwrap_or(c.coverage.base_point)
            }
            ["coverage", "D"] => c.coverage.radius = p.float(line, k, v).unwrap_or(c.coverage.radius),
            ["coverage", "voxel"] => c.coverage.voxel = p.float(line, k, v).unwrap_or(c.coverage.voxel),
            ["geodesic", "sources"] => c.geodesic.sources = p.uint(line, k, v).unwrap_or(c.geodesic.sources),
            ["geodesic", "pairs"] => c.geodesic.pairs = p.uint(line, k, v).unwrap_or(c.geodesic.pairs),
            ["geodesic", "delta"] => c.geodesic.delta = p.float(line, k, v).unwrap_or(c.geodesic.delta),
            ["geodesic", "min_separation"] => {
                c.geodesic.min_separation = p.float(line, k, v).unwrap_or(c.geodesic.min_separation)
            }
            ["geodesic", "lambda"] => c.geodesic.lambda = p.float(line, k, v).unwrap_or(c.geodesic.lambda),
            ["geodesic", "center"] => c.geodesic.center = p.triple(line, k, v).unwrap_or(c.geodesic.center),
            ["geodesic", "radii"] => c.geodesic.radii = p.list(line, k, v).unwrap_or(c.geodesic.radii),
            ["injectivity", "pairs"] => {
                c.injectivity_pairs = p.uint(line, k, v).unwrap_or(c.injectivity_pairs)
            }
            ["diagnostics", which] => {
                let slot = match *which {
                    "cylinder" => &mut c.diagnostics.cylinder,
                    "coverage" => &mut c.diagnostics.coverage,
                    "geodesic" => &mut c.diagnostics.geodesic,
                    "injectivity" => &mut c.diagnostics.injectivity,
                    _ => {
                        p.err(line, k, "unknown key");
                        continue;
                    }
                };
                if let Some(b) = p.boolean(line, k, v) {
                    *slot = b;
                }
            }
            _ => p.err(line, k, "unknown key"),
        }
    }

    for (i, b) in bumps {
        let key = format!("bump.{i}");
        match (b.center, b.amplitude, b.width) {
            (Some(center), Some(amplitude), Some(width)) => c.bumps.push(Bump {
                center,
                amplitude,
                width,
            }),
            _ => p.err(b.line, &key, "needs center, amplitude and width"),
        }
    }
    if directions_given {
        c.cylinder.directions = directions.into_values().collect();
    }

    let mut errors = p.errors;
    let line_of = |key: &str| -> usize {
        seen.get(key)
            .copied()
            .or_else(|| seen.iter().find(|(k, _)| k.starts_with(key)).map(|(_, &l)| l))
            .unwrap_or(0)
    };
    for mut e in c.validate() {
        // Keys already reported as malformed are not re-reported as out of range.
        if errors.iter().any(|x| x.key == e.key) {
            continue;
        }
        e.line = line_of(&e.key);
        errors.push(e);
    }
    if errors.is_empty() {
        Ok(c)
    } else {
        Err(Error::Config(errors))
    }
}
