use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use masslab::harness::{
    analyze, corpus, mass_stage, parse_config, read_rows, region_stage, run_pipeline, solve_stage, sweep,
    write_timings, RunConfig, Timings,
};
use masslab::Error;

/// Mass-stability experiments on conformally flat 3-metrics.
#[derive(Parser)]
#[command(name = "masslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for harmonic coordinates and report solver statistics.
    Solve { config: PathBuf },
    /// ADM mass, harmonic-function lower bounds and far-field diagnostics.
    Mass { config: PathBuf },
    /// Extract the regular region and its boundary.
    Region { config: PathBuf },
    /// Full pipeline for one member, writing its artifacts.
    Run { config: PathBuf },
    /// Run every config listed in a file (one path per line).
    Sweep {
        list: PathBuf,
        /// Directory for sweep.csv, timings.csv, summary.txt and plots.
        #[arg(long, default_value = "sweep-out")]
        out: PathBuf,
    },
    /// Re-analyze an existing sweep.csv and regenerate summary and plots.
    Report { dir: PathBuf },
    /// Write the standard corpus configs and a list file into a directory.
    Corpus { dir: PathBuf },
}

/// 1: the inputs were rejected before any computation. 2: a computation failed.
enum Failure {
    Validation(String),
    Pipeline(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Pipeline(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Pipeline(e.to_string())
    }
}

fn load(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let config = parse_config(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    let errs = config.validate();
    if !errs.is_empty() {
        return Err(Failure::Validation(format!("{}: {}", path.display(), Error::Config(errs))));
    }
    Ok(config)
}

fn load_list(list: &Path) -> Result<Vec<RunConfig>, Failure> {
    let text = fs::read_to_string(list).map_err(|e| Failure::Validation(format!("{}: {e}", list.display())))?;
    let base = list.parent().unwrap_or(Path::new("."));
    let mut configs = Vec::new();
    let mut problems = Vec::new();
    for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()) {
        if line.is_empty() {
            continue;
        }
        match load(&base.join(line)) {
            Ok(c) => configs.push(c),
            Err(Failure::Validation(m) | Failure::Pipeline(m)) => problems.push(m),
        }
    }
    if !problems.is_empty() {
        return Err(Failure::Validation(problems.join("\n")));
    }
    if configs.is_empty() {
        return Err(Failure::Validation(format!("{}: no configs listed", list.display())));
    }
    Ok(configs)
}

fn print_timings(t: &Timings) {
    for (stage, s) in &t.0 {
        println!("  {stage:<16} {s:>8.2} s");
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { config } => {
            let c = load(&config)?;
            let mut t = Timings::default();
            let (grid, triple) = solve_stage(&c, &mut t)?;
            println!("{}: {} nodes, m_exact = {}", c.name, grid.lattice.len(), grid.factor.mass());
            for j in 0..3 {
                println!(
                    "  u{}: {} iterations, relative residual {:.3e}",
                    j + 1,
                    triple.iterations[j],
                    triple.residual_norm[j]
                );
            }
            print_timings(&t);
        }
        Command::Mass { config } => {
            let c = load(&config)?;
            let mut t = Timings::default();
            let (grid, triple) = solve_stage(&c, &mut t)?;
            let r = mass_stage(&c, &grid, &triple, &mut t)?;
            println!("{}: m_exact = {:.6e}, m_adm = {:.6e}", c.name, r.m_exact, r.m_adm);
            for j in 0..3 {
                println!("  bound u{}: {:.6e} (slack {:.3e})", j + 1, r.bkks_bound[j], r.slack[j]);
            }
            println!("  sup Hessian {:.3e} (constant {:.3e})", r.sup_hess.sup, r.sup_hess.implied_constant);
            println!("  sup defect  {:.3e} (constant {:.3e})", r.sup_defect.sup, r.sup_defect.implied_constant);
            match r.decay.exponent() {
                Some(p) => println!("  gradient decay exponent {p:.3}"),
                None => println!("  gradient decay exponent: n/a (flat)"),
            }
            print_timings(&t);
        }
        Command::Region { config } => {
            let c = load(&config)?;
            let mut t = Timings::default();
            let (grid, triple) = solve_stage(&c, &mut t)?;
            let (_, region) = region_stage(&c, &grid, &triple, &mut t)?;
            println!(
                "{}: tau = {:.4}, tau1 = {:.4?}, tau2 = {:.4}",
                c.name, region.tau, region.tau1, region.tau2
            );
            println!(
                "  mask nodes {}, boundary area {:.6e}, seed ok {}, certificate {}",
                region.mask_size(),
                region.area_g,
                region.seed_ok,
                region.selection.certificate_holds()
            );
            if let Some(dir) = &c.output {
                let dir = Path::new(dir).join(&c.name);
                fs::create_dir_all(&dir)?;
                let stl = std::io::BufWriter::new(fs::File::create(dir.join("boundary.stl"))?);
                region.boundary_mesh.write_stl(stl, &c.name)?;
                println!("  wrote {}", dir.join("boundary.stl").display());
            }
            print_timings(&t);
        }
        Command::Run { config } => {
            let c = load(&config)?;
            let out = run_pipeline(&c)?;
            for (h, v) in masslab::harness::HEADERS.iter().zip(out.row.cells()) {
                println!("  {h:<32} {v}");
            }
            print_timings(&out.timings);
        }
        Command::Sweep { list, out } => {
            let configs = load_list(&list)?;
            let (report, timings) = sweep(&configs);
            report.write(&out)?;
            write_timings(&out, &timings)?;
            print!("{}", report.summary());
            println!("wrote {}", out.display());
            let failed: Vec<&str> = report.rows.iter().filter(|r| !r.is_ok()).map(|r| r.member.as_str()).collect();
            if !failed.is_empty() {
                return Err(Failure::Pipeline(format!("members failed: {}", failed.join(", "))));
            }
        }
        Command::Report { dir } => {
            let csv = dir.join("sweep.csv");
            let file = fs::File::open(&csv).map_err(|e| Failure::Validation(format!("{}: {e}", csv.display())))?;
            let rows = read_rows(file).map_err(|e| Failure::Validation(format!("{}: {e}", csv.display())))?;
            let report = analyze(rows);
            report.write(&dir)?;
            print!("{}", report.summary());
        }
        Command::Corpus { dir } => {
            fs::create_dir_all(&dir)?;
            let mut list = String::new();
            for c in corpus::standard_corpus() {
                let name = format!("{}.cfg", c.name);
                fs::write(dir.join(&name), c.serialize())?;
                list.push_str(&name);
                list.push('\n');
            }
            fs::write(dir.join("corpus.list"), list)?;
            println!("wrote {}", dir.join("corpus.list").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Pipeline(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
