use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::fieldio::{save_field, FieldData};
use crate::geodesic::{
    bishop_gromov_check, chart_distance_comparison, fast_marching, interior_nodes, sample_sources,
    BishopGromovReport, ChartComparison,
};
use crate::mass::{mass_report, MassReport, MassSettings};
use crate::metric::MetricGrid;
use crate::region::{
    cylinder_volume, defect_field, injectivity_probe, rasterize_image, CoverageReport, CylinderVolume,
    DefectField, InjectivityReport, RegularRegion,
};
use crate::solver::{HarmonicTriple, SolveOptions};

use super::config::RunConfig;
use super::row::{write_rows, SweepRow};

/// Wall-clock seconds per stage; kept out of the CSV so rows stay
/// byte-identical across runs.
#[derive(Debug, Clone, Default)]
pub struct Timings(pub Vec<(String, f64)>);

impl Timings {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let out = f();
        self.0.push((stage.to_string(), t.elapsed().as_secs_f64()));
        out
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|s| s.1).sum()
    }

    pub fn write_csv<W: Write>(&self, member: &str, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["member", "stage", "seconds [s]"])?;
        for (stage, s) in &self.0 {
            w.write_record([member, stage, &format!("{s:.3}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Metric grid and harmonic coordinates for a config.
pub fn solve_stage(config: &RunConfig, timings: &mut Timings) -> Result<(MetricGrid, HarmonicTriple)> {
    let factor = config.factor()?;
    let grid = timings.time("metric", || MetricGrid::build(&factor, config.grid))?;
    let triple = timings.time("solve", || HarmonicTriple::solve(&grid, SolveOptions::default()))?;
    Ok((grid, triple))
}

pub fn mass_stage(
    config: &RunConfig,
    grid: &MetricGrid,
    triple: &HarmonicTriple,
    timings: &mut Timings,
) -> Result<MassReport> {
    let settings = MassSettings {
        r0: config.r0,
        adm_radii: config.adm_radii.clone(),
        decay_radii: config.decay_radii.clone(),
    };
    timings.time("mass", || mass_report(grid, triple, &settings))
}

pub fn region_stage(
    config: &RunConfig,
    grid: &MetricGrid,
    triple: &HarmonicTriple,
    timings: &mut Timings,
) -> Result<(DefectField, RegularRegion)> {
    let tau = config.tau.mode().tau(grid.factor.mass())?;
    timings.time("region", || {
        let defect = defect_field(triple, grid);
        let region = RegularRegion::build(grid, &defect, tau, config.r0)?;
        Ok((defect, region))
    })
}

/// Everything computed for one member.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub row: SweepRow,
    pub timings: Timings,
    pub mass: MassReport,
    pub region: RegularRegion,
    pub sup_q: f64,
    pub cylinders: Vec<CylinderVolume>,
    pub coverage: Option<CoverageReport>,
    pub chart: Option<ChartComparison>,
    pub bishop_gromov: Option<BishopGromovReport>,
    pub injectivity: Option<InjectivityReport>,
}

/// Full pipeline for one config; artifacts go to `<output>/<name>/` when an
/// output directory is set.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput> {
    let errs = config.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let mut timings = Timings::default();
    let (grid, triple) = solve_stage(config, &mut timings)?;
    let mass = mass_stage(config, &grid, &triple, &mut timings)?;
    let (defect, region) = region_stage(config, &grid, &triple, &mut timings)?;
    let sup_q = defect.q.iter().copied().fold(0.0, f64::max);

    let mut cylinders = Vec::new();
    if config.diagnostics.cylinder {
        timings.time("cylinder", || {
            for &d in &config.cylinder.directions {
                for &l in &config.cylinder.lengths {
                    cylinders.push(cylinder_volume(&region.mask, &grid, &triple, d, l)?);
                }
            }
            Ok(())
        })?;
    }
    let coverage = if config.diagnostics.coverage {
        Some(timings.time("coverage", || rasterize_image(&region.mask, &triple, &config.coverage))?)
    } else {
        None
    };
    let mut bg_field = None;
    let (chart, bishop_gromov) = if config.diagnostics.geodesic {
        let g = &config.geodesic;
        let chart = timings.time("chart_distance", || {
            let interior = interior_nodes(&grid.lattice, &region.mask, g.delta);
            let sources = sample_sources(&interior, grid.lattice.len(), g.sources, config.seed);
            let fields = sources
                .iter()
                .map(|&s| fast_marching(&grid, s))
                .collect::<Result<Vec<_>>>()?;
            if fields.is_empty() {
                return Ok(ChartComparison {
                    pairs: 0,
                    max_normalized: None,
                    mean_normalized: None,
                    median_normalized: None,
                    max_absolute: None,
                });
            }
            chart_distance_comparison(&interior, &triple, &fields, g.pairs, g.min_separation, config.seed)
        })?;
        let bg = timings.time("bishop_gromov", || {
            let field = fast_marching(&grid, grid.lattice.nearest(g.center))?;
            let report = bishop_gromov_check(&field, &grid, g.lambda, &g.radii)?;
            bg_field = Some(field);
            Ok(report)
        })?;
        (Some(chart), Some(bg))
    } else {
        (None, None)
    };
    let injectivity = if config.diagnostics.injectivity {
        Some(timings.time("injectivity", || {
            injectivity_probe(&region.mask, &triple, config.injectivity_pairs, config.seed)
        })?)
    } else {
        None
    };

    let m = mass.m_exact;
    let ratios: Vec<f64> = cylinders.iter().map(|c| c.ratio).collect();
    let row = SweepRow {
        member: config.name.clone(),
        status: "ok".into(),
        m_exact: Some(m),
        m_adm: Some(mass.m_adm),
        bkks_1: Some(mass.bkks_bound[0]),
        bkks_2: Some(mass.bkks_bound[1]),
        bkks_3: Some(mass.bkks_bound[2]),
        min_slack: Some(mass.slack.iter().copied().fold(f64::INFINITY, f64::min)),
        tau: Some(region.tau),
        tau1_min: Some(region.tau1.iter().copied().fold(f64::INFINITY, f64::min)),
        tau2: Some(region.tau2),
        area_g: Some(region.area_g),
        seed_ok: Some(region.seed_ok),
        coarea_lhs: Some(region.selection.chosen_area),
        coarea_rhs: Some(region.selection.certificate_rhs),
        certificate: Some(region.selection.certificate_holds()),
        mask_nodes: Some(region.mask_size() as u64),
        sup_q: Some(sup_q),
        cyl_ratio_min: ratios.iter().copied().reduce(f64::min),
        cyl_ratio_max: ratios.iter().copied().reduce(f64::max),
        coverage_defect: coverage.map(|c| c.uncovered_volume),
        ball_volume: coverage.map(|c| c.ball_volume),
        weak_integral: coverage.map(|c| c.weak_volume_integral),
        max_sqrt_det_dev: coverage.map(|c| c.max_sqrt_det_deviation),
        chart_max: chart.as_ref().and_then(|c| c.max_normalized),
        chart_mean: chart.as_ref().and_then(|c| c.mean_normalized),
        chart_pairs: chart.as_ref().map(|c| c.pairs as u64),
        bg_lambda: bishop_gromov.as_ref().map(|b| b.lambda),
        bg_max_increase: bishop_gromov.as_ref().map(|b| b.max_relative_increase),
        bg_monotone: bishop_gromov.as_ref().map(|b| b.monotone),
        inj_min_ratio: injectivity.map(|i| i.min_ratio),
        sup_hess: Some(mass.sup_hess.sup),
        hess_constant: Some(mass.sup_hess.implied_constant),
        sup_defect: Some(mass.sup_defect.sup),
        defect_constant: Some(mass.sup_defect.implied_constant),
        decay_exponent: mass.decay.exponent(),
    };

    if let Some(dir) = member_dir(config) {
        timings.time("artifacts", || {
            fs::create_dir_all(&dir)?;
            fs::write(dir.join("config.txt"), config.serialize())?;
            write_rows(fs::File::create(dir.join("row.csv"))?, std::slice::from_ref(&row))?;
            let stl = std::io::BufWriter::new(fs::File::create(dir.join("boundary.stl"))?);
            region.boundary_mesh.write_stl(stl, &config.name)?;
            if config.write_fields {
                let lat = &grid.lattice;
                for j in 0..3 {
                    let name = format!("u{}", j + 1);
                    save_field(&dir.join(format!("{name}.field")), &name, lat, &FieldData::F64(triple.u[j].clone()))?;
                }
                save_field(&dir.join("q.field"), "q", lat, &FieldData::F64(defect.q.clone()))?;
                save_field(&dir.join("mask.field"), "mask", lat, &FieldData::Mask(region.mask.clone()))?;
                if let Some(f) = &bg_field {
                    save_field(&dir.join("distance.field"), "distance", lat, &FieldData::F64(f.t.clone()))?;
                }
            }
            Ok(())
        })?;
        timings.write_csv(&config.name, fs::File::create(dir.join("timings.csv"))?)?;
    }

    Ok(RunOutput {
        row,
        timings,
        mass,
        region,
        sup_q,
        cylinders,
        coverage,
        chart,
        bishop_gromov,
        injectivity,
    })
}

pub fn member_dir(config: &RunConfig) -> Option<PathBuf> {
    config.output.as_ref().map(|o| Path::new(o).join(&config.name))
}

/// Runs one member; a failure becomes a row with the reason recorded.
pub fn run_member(config: &RunConfig) -> (SweepRow, Timings) {
    match run_pipeline(config) {
        Ok(out) => (out.row, out.timings),
        Err(e) => {
            let m = config.factor().ok().map(|f| f.mass());
            (SweepRow::failed(&config.name, m, &e.to_string()), Timings::default())
        }
    }
}
