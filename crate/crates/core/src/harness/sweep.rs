use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::quadrature::fit_line;

use super::config::RunConfig;
use super::pipeline::{run_member, Timings};
use super::row::{write_rows, SweepRow};
use super::svg::{Plot, Scale, Series};

/// Fits need at least this many members.
pub const MIN_MEMBERS: usize = 4;
/// Exponent of the area law being tested.
pub const AREA_EXPONENT: f64 = 0.5;

/// Two-sided 95% Student-t quantiles for 1..=10 degrees of freedom.
const T95: [f64; 10] = [12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228];

fn t95(dof: usize) -> f64 {
    match dof {
        0 => f64::INFINITY,
        d if d <= T95.len() => T95[d - 1],
        _ => 1.96,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// 95% confidence interval of the slope.
    pub band: (f64, f64),
    pub points: Vec<(f64, f64)>,
}

/// Log-log fit of `y` against `m` over positive values.
pub fn power_fit(points: &[(f64, f64)]) -> Option<PowerFit> {
    let pos: Vec<(f64, f64)> = points.iter().copied().filter(|&(m, y)| m > 0.0 && y > 0.0).collect();
    let xs: Vec<f64> = pos.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pos.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&xs, &ys)?;
    let half = t95(pos.len().saturating_sub(2)) * fit.slope_stderr;
    let half = if pos.len() > 2 { half } else { f64::INFINITY };
    Some(PowerFit {
        slope: fit.slope,
        intercept: fit.intercept,
        band: (fit.slope - half, fit.slope + half),
        points: pos,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum AreaTrend {
    /// Every member has an empty boundary.
    ExactZero,
    Fitted {
        fit: PowerFit,
        /// `|∂E| / m^{1/2}` per member with positive area.
        constants: Vec<f64>,
        /// `max/min` of the constants.
        spread: f64,
        /// Members with `|∂E| = 0`, excluded from the log fit.
        zero_area: usize,
    },
    /// Fewer than two members with positive area.
    Degenerate { positive: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepFits {
    pub area: AreaTrend,
    pub coverage_decreasing: Option<bool>,
    pub weak_decreasing: Option<bool>,
    pub chart_decreasing: Option<bool>,
    pub sup_hess_decreasing: Option<bool>,
    pub sup_defect_decreasing: Option<bool>,
    pub hess_constant_spread: Option<f64>,
    pub defect_constant_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    /// Ordered by decreasing `m_exact`.
    pub rows: Vec<SweepRow>,
    pub fits: Option<SweepFits>,
    /// Why fits were skipped, if they were.
    pub skipped: Option<String>,
}

/// `Some(true)` when every value is strictly below its predecessor.
pub fn strictly_decreasing(values: &[Option<f64>]) -> Option<bool> {
    let v: Vec<f64> = values.iter().copied().collect::<Option<Vec<_>>>()?;
    Some(v.windows(2).all(|w| w[1] < w[0]))
}

fn spread(values: &[Option<f64>]) -> Option<f64> {
    let v: Vec<f64> = values.iter().copied().collect::<Option<Vec<_>>>()?;
    let pos: Vec<f64> = v.into_iter().filter(|&c| c > 0.0 && c.is_finite()).collect();
    if pos.len() < 2 {
        return None;
    }
    let hi = pos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = pos.iter().copied().fold(f64::INFINITY, f64::min);
    Some(hi / lo)
}

/// Orders rows by decreasing mass and computes the trend fits.
pub fn analyze(mut rows: Vec<SweepRow>) -> SweepReport {
    rows.sort_by(|a, b| {
        b.m_exact
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.m_exact.unwrap_or(f64::NEG_INFINITY))
            .then_with(|| a.member.cmp(&b.member))
    });
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.is_ok()).collect();
    if ok.len() < MIN_MEMBERS {
        let why = format!("{} successful members, need {MIN_MEMBERS}", ok.len());
        return SweepReport { rows, fits: None, skipped: Some(why) };
    }
    if ok.iter().all(|r| r.area_g == Some(0.0)) {
        let fits = SweepFits {
            area: AreaTrend::ExactZero,
            coverage_decreasing: None,
            weak_decreasing: None,
            chart_decreasing: None,
            sup_hess_decreasing: None,
            sup_defect_decreasing: None,
            hess_constant_spread: None,
            defect_constant_spread: None,
        };
        return SweepReport { rows, fits: Some(fits), skipped: None };
    }
    let masses: Vec<f64> = ok.iter().map(|r| r.m_exact.unwrap_or(0.0)).collect();
    if masses.iter().any(|&m| !(m > 0.0)) || masses.windows(2).any(|w| w[1] >= w[0]) {
        let why = "member masses are not positive and strictly decreasing".to_string();
        return SweepReport { rows, fits: None, skipped: Some(why) };
    }
    let col = |f: fn(&SweepRow) -> Option<f64>| ok.iter().map(|r| f(r)).collect::<Vec<_>>();

    let area_pts: Vec<(f64, f64)> = ok.iter().filter_map(|r| Some((r.m_exact?, r.area_g?))).collect();
    let zero_area = area_pts.iter().filter(|p| p.1 == 0.0).count();
    let area = match power_fit(&area_pts) {
        Some(fit) => {
            let constants: Vec<f64> = fit.points.iter().map(|&(m, a)| a / m.powf(AREA_EXPONENT)).collect();
            let spread = spread(&constants.iter().map(|&c| Some(c)).collect::<Vec<_>>()).unwrap_or(1.0);
            AreaTrend::Fitted { fit, constants, spread, zero_area }
        }
        None => AreaTrend::Degenerate { positive: area_pts.len() - zero_area },
    };
    let fits = SweepFits {
        area,
        coverage_decreasing: strictly_decreasing(&col(|r| r.coverage_defect)),
        weak_decreasing: strictly_decreasing(&col(|r| r.weak_integral)),
        chart_decreasing: strictly_decreasing(&col(|r| r.chart_max)),
        sup_hess_decreasing: strictly_decreasing(&col(|r| r.sup_hess)),
        sup_defect_decreasing: strictly_decreasing(&col(|r| r.sup_defect)),
        hess_constant_spread: spread(&col(|r| r.hess_constant)),
        defect_constant_spread: spread(&col(|r| r.defect_constant)),
    };
    SweepReport { rows, fits: Some(fits), skipped: None }
}

/// Runs every member and analyzes the rows. Members are independent: a
/// failing member yields a failed row and the sweep continues.
pub fn sweep(configs: &[RunConfig]) -> (SweepReport, Vec<(String, Timings)>) {
    let mut rows = Vec::with_capacity(configs.len());
    let mut timings = Vec::with_capacity(configs.len());
    for c in configs {
        let (row, t) = run_member(c);
        rows.push(row);
        timings.push((c.name.clone(), t));
    }
    (analyze(rows), timings)
}

fn verdict(v: Option<bool>) -> &'static str {
    match v {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

impl SweepReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "members: {}", self.rows.len());
        for r in &self.rows {
            let _ = writeln!(s, "  {:<24} m = {:<10} {}", r.member, r.m_exact.map_or("-".into(), |m| format!("{m}")), r.status);
        }
        match (&self.fits, &self.skipped) {
            (_, Some(why)) => {
                let _ = writeln!(s, "fits skipped: {why}");
            }
            (Some(f), None) => {
                match &f.area {
                    AreaTrend::ExactZero => {
                        let _ = writeln!(s, "area law: exact zero (every boundary is empty)");
                    }
                    AreaTrend::Degenerate { positive } => {
                        let _ = writeln!(s, "area law: degenerate ({positive} members with positive area)");
                    }
                    AreaTrend::Fitted { fit, spread, zero_area, .. } => {
                        let _ = writeln!(
                            s,
                            "area law: slope {:.4} (95% band {:.4} .. {:.4}), C spread {:.3}, zero-area members {}",
                            fit.slope, fit.band.0, fit.band.1, spread, zero_area
                        );
                    }
                }
                let _ = writeln!(s, "coverage defect strictly decreasing: {}", verdict(f.coverage_decreasing));
                let _ = writeln!(s, "weak-volume integral strictly decreasing: {}", verdict(f.weak_decreasing));
                let _ = writeln!(s, "chart discrepancy strictly decreasing: {}", verdict(f.chart_decreasing));
                let _ = writeln!(s, "sup Hessian strictly decreasing: {}", verdict(f.sup_hess_decreasing));
                let _ = writeln!(s, "sup defect strictly decreasing: {}", verdict(f.sup_defect_decreasing));
                if let Some(x) = f.hess_constant_spread {
                    let _ = writeln!(s, "Hessian implied-constant spread: {x:.3}");
                }
                if let Some(x) = f.defect_constant_spread {
                    let _ = writeln!(s, "defect implied-constant spread: {x:.3}");
                }
            }
            (None, None) => {}
        }
        s
    }

    fn plots(&self) -> Vec<(&'static str, Plot)> {
        let ok: Vec<&SweepRow> = self.rows.iter().filter(|r| r.is_ok()).collect();
        let pts = |f: fn(&SweepRow) -> Option<f64>| -> Vec<(f64, f64)> {
            ok.iter().filter_map(|r| Some((r.m_exact?, f(r)?))).collect()
        };
        let mut area_series = vec![Series {
            label: "|∂E| (metric area)".into(),
            points: pts(|r| r.area_g),
            line: false,
        }];
        if let Some(SweepFits { area: AreaTrend::Fitted { fit, .. }, .. }) = &self.fits {
            let line = fit
                .points
                .iter()
                .map(|&(m, _)| (m, (fit.intercept + fit.slope * m.ln()).exp()))
                .collect();
            area_series.push(Series {
                label: format!("fit, slope {:.3}", fit.slope),
                points: line,
                line: true,
            });
        }
        vec![
            (
                "area_vs_mass.svg",
                Plot {
                    title: "Boundary area of the regular region".into(),
                    x_label: "m_exact [L]".into(),
                    y_label: "area [L^2]".into(),
                    x_scale: Scale::Log,
                    y_scale: Scale::Log,
                    series: area_series,
                },
            ),
            (
                "slack_vs_mass.svg",
                Plot {
                    title: "Mass inequality slack".into(),
                    x_label: "m_exact [L]".into(),
                    y_label: "m_adm − max_j bound_j [L]".into(),
                    x_scale: Scale::Log,
                    y_scale: Scale::Linear,
                    series: vec![Series {
                        label: "min slack".into(),
                        points: pts(|r| r.min_slack),
                        line: false,
                    }],
                },
            ),
            (
                "integrand_vs_mass.svg",
                Plot {
                    title: "Weak volume convergence".into(),
                    x_label: "m_exact [L]".into(),
                    y_label: "volume [L^3]".into(),
                    x_scale: Scale::Log,
                    y_scale: Scale::Log,
                    series: vec![
                        Series {
                            label: "∫|χ√det g − 1|".into(),
                            points: pts(|r| r.weak_integral),
                            line: false,
                        },
                        Series {
                            label: "uncovered volume".into(),
                            points: pts(|r| r.coverage_defect),
                            line: false,
                        },
                    ],
                },
            ),
        ]
    }

    /// Writes `sweep.csv`, `summary.txt` and the SVG plots into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_rows(fs::File::create(dir.join("sweep.csv"))?, &self.rows)?;
        fs::write(dir.join("summary.txt"), self.summary())?;
        for (name, plot) in self.plots() {
            fs::write(dir.join(name), plot.render())?;
        }
        Ok(())
    }
}

pub fn write_timings(dir: &Path, timings: &[(String, Timings)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(fs::File::create(dir.join("timings.csv"))?);
    w.write_record(["member", "stage", "seconds [s]"])?;
    for (member, t) in timings {
        for (stage, secs) in &t.0 {
            w.write_record([member.as_str(), stage, &format!("{secs:.3}")])?;
        }
        w.write_record([member.as_str(), "total", &format!("{:.3}", t.total())])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(name: &str, m: f64, area: f64) -> SweepRow {
        SweepRow {
            member: name.into(),
            status: "ok".into(),
            m_exact: Some(m),
            area_g: Some(area),
            coverage_defect: Some(m),
            weak_integral: Some(m),
            ..SweepRow::default()
        }
    }

    #[test]
    fn area_fit_recovers_power() {
        let rows: Vec<SweepRow> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .enumerate()
            .map(|(i, &m)| row(&format!("m{i}"), m, 3.0 * m.sqrt()))
            .collect();
        let rep = analyze(rows);
        let f = rep.fits.unwrap();
        match f.area {
            AreaTrend::Fitted { fit, spread, .. } => {
                assert!((fit.slope - 0.5).abs() < 1e-12);
                assert!((spread - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(f.coverage_decreasing, Some(true));
    }

    #[test]
    fn flat_sweep_is_exact_zero() {
        let rows: Vec<SweepRow> = (0..4).map(|i| row(&format!("f{i}"), 0.0, 0.0)).collect();
        assert_eq!(analyze(rows).fits.unwrap().area, AreaTrend::ExactZero);
    }

    #[test]
    fn few_members_skip_fits_but_keep_rows() {
        let rows = vec![row("a", 0.2, 1.0), row("b", 0.1, 0.5), SweepRow::failed("c", Some(0.05), "x")];
        let rep = analyze(rows);
        assert!(rep.fits.is_none() && rep.skipped.is_some());
        assert_eq!(rep.rows.len(), 3);
    }

    #[test]
    fn dropping_a_member_only_changes_its_row() {
        let full: Vec<SweepRow> = [0.4, 0.2, 0.1, 0.05, 0.025]
            .iter()
            .enumerate()
            .map(|(i, &m)| row(&format!("m{i}"), m, m))
            .collect();
        let a = analyze(full.clone());
        let b = analyze(full[..4].to_vec());
        assert_eq!(&a.rows[..4], &b.rows[..]);
        assert!(b.fits.is_some());
    }
}
