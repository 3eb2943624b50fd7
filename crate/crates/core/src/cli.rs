//! The `cisolve` command line: `run`, `study`, `symbol` and `oracle`.
//!
//! Exit codes: 0 on success, 1 on configuration or I/O errors, 2 on a
//! physical failure (positivity loss, blow-up) or a failed oracle check.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_config, parse_list, Config, DEFAULT_ORACLE_EPS};
use crate::diagnostics::{hyperbolicity_scan, oracle_compare, run_study, RunReport};
use crate::error::{Error, Result};
use crate::integrate::run_simulation_with;
use crate::io::{write_diagnostics_csv, write_field_dump, write_study_csv};
use crate::model::symbol::analyze_symbol;
use crate::schemes::{SchemeConfig, SchemeKind};

/// Oracle distances above this fail the `oracle` subcommand.
pub const ORACLE_TOL: f64 = 1e-5;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PHYSICAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cisolve", version, about = "Pseudo-spectral compressible-incompressible fluid solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// Configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// `key=value` applied after the file; repeatable
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one simulation and write diagnostics
    Run(ConfigArgs),
    /// Sweep eps and compare each run with a Scheme A reference
    Study {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Comma-separated eps values (overrides study.eps_list)
        #[arg(long)]
        eps_list: Option<String>,
    },
    /// Eigenstructure of the symbol at one state and wave vector
    Symbol {
        #[arg(long)]
        rho: f64,
        /// Velocity components, e.g. `0.5,0`
        #[arg(long, allow_hyphen_values = true)]
        v: String,
        #[arg(long, allow_hyphen_values = true)]
        f: f64,
        /// Wave vector, e.g. `1,0`
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
    },
    /// Compare Scheme A with the reduction oracle for a density-only law
    Oracle(ConfigArgs),
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

pub fn execute(command: &Command) -> Result<i32> {
    match command {
        Command::Run(a) => cmd_run(&load_config(&a.config, &a.overrides)?),
        Command::Study { cfg, eps_list } => {
            let mut c = load_config(&cfg.config, &cfg.overrides)?;
            if let Some(list) = eps_list {
                c.eps_list = parse_list(list)
                    .ok()
                    .filter(|v| !v.is_empty() && v.iter().all(|e| *e > 0.0))
                    .ok_or_else(|| Error::Config {
                        line: 0,
                        key: "--eps-list".into(),
                        message: format!("expected positive comma-separated values, got `{list}`"),
                    })?;
            }
            cmd_study(&c)
        }
        Command::Symbol { rho, v, f, xi } => cmd_symbol(*rho, v, *f, xi),
        Command::Oracle(a) => cmd_oracle(&load_config(&a.config, &a.overrides)?),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn print_report(r: &RunReport) {
    println!(
        "scheme {} eps {} dt {:.6e} steps {} final time {:.6}",
        r.scheme,
        r.eps.map_or("-".to_string(), |e| format!("{e}")),
        r.dt,
        r.steps,
        r.final_time
    );
    println!(
        "max hs_norm {:.6e}  max div {:.3e}  max penalty {:.3e}  min rho {:.6}",
        r.max_hs_norm(),
        r.max_div_norm(),
        r.max_penalty_norm(),
        r.min_density()
    );
}

/// Runs one simulation, writing `diagnostics.csv` and optional dumps.
pub fn run_config(c: &Config) -> Result<RunReport> {
    let grid = c.grid()?;
    let initial = c.initial_state()?;
    let scheme = c.scheme_config(&grid);
    let controls = c.time_controls();
    create_dir(&c.output_dir)?;
    let report = run_simulation_with(&initial, &scheme, &c.law, &controls, |step, t, s| {
        if c.output_fields {
            write_field_dump(s, t, &c.output_dir.join(format!("field_{step:06}.cifd")))?;
        }
        Ok(())
    })?;
    write_diagnostics_csv(&report, &c.output_dir.join("diagnostics.csv"))?;
    Ok(report)
}

fn cmd_run(c: &Config) -> Result<i32> {
    let report = run_config(c)?;
    print_report(&report);
    let scan = hyperbolicity_scan(
        std::slice::from_ref(&report.final_state),
        &c.law,
        c.scan_samples,
        c.seed,
    )?;
    println!(
        "final state: min f {:.6e}  min f/rho {:.6e}  max imag {:.3e}  hyperbolic {}",
        scan.min_f,
        scan.min_f_over_rho,
        scan.max_imag,
        scan.hyperbolic()
    );
    match report.failure {
        Some(f) => {
            println!("FAILED: {} at t = {:.6}", f.kind, f.time);
            Ok(EXIT_PHYSICAL)
        }
        None => Ok(EXIT_OK),
    }
}

fn cmd_study(c: &Config) -> Result<i32> {
    let grid = c.grid()?;
    let initial = c.initial_state()?;
    let template = c.scheme_config(&grid);
    let mut reference = SchemeConfig::new(SchemeKind::MollifiedProjected, c.reference_eps);
    reference.mollifier = c.mollifier;
    let study = run_study(&initial, &template, &reference, &c.law, &c.time_controls(), &c.eps_list)?;
    create_dir(&c.output_dir)?;
    write_study_csv(&study, &c.output_dir.join("study.csv"))?;
    println!(
        "scheme {} vs Scheme A (eps {}) at t = {:.6}",
        study.scheme, c.reference_eps, study.common_time
    );
    for r in &study.rows {
        print!("eps {:<8} distance {:.6e}", r.eps, r.distance);
        if let Some(p) = r.penalty_constant {
            print!("  penalty/eps {p:.6e}");
        }
        if let Some(d) = r.divergence_constant {
            print!("  div/eps {d:.6e}");
        }
        if let Some(f) = r.run.failure {
            print!("  FAILED: {} at t = {:.6}", f.kind, f.time);
        }
        println!();
    }
    if let Some(rate) = study.rate {
        println!("observed rate (empirical) {rate:.4}");
    }
    let failed = study.reference.failure.is_some() || study.rows.iter().any(|r| r.run.failure.is_some());
    Ok(if failed { EXIT_PHYSICAL } else { EXIT_OK })
}

fn parse_vec(name: &'static str, s: &str) -> Result<Vec<f64>> {
    parse_list(s).map_err(|m| Error::param(name, m))
}

fn cmd_symbol(rho: f64, v: &str, f: f64, xi: &str) -> Result<i32> {
    let v = parse_vec("v", v)?;
    let xi = parse_vec("xi", xi)?;
    if v.len() != xi.len() || v.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "v has {} components, xi has {}",
            v.len(),
            xi.len()
        )));
    }
    let a = analyze_symbol(rho, &v, f, &xi)?;
    println!("symbol:{}", a.symbol);
    match &a.closed_form {
        Some(cf) => println!("closed-form eigenvalues: {cf:?}"),
        None => println!("closed-form eigenvalues: complex (f rho < 0)"),
    }
    let numeric: Vec<String> = a
        .numeric
        .iter()
        .map(|z| if z.im == 0.0 { format!("{}", z.re) } else { format!("{}{:+}i", z.re, z.im) })
        .collect();
    println!("numerical eigenvalues:   [{}]", numeric.join(", "));
    if let Some(m) = a.max_mismatch {
        println!("max mismatch: {m:.3e}");
    }
    println!("symmetrizer diag: {:?} (positive definite: {})", a.symmetrizer.diag, a.symmetrizer.positive_definite);
    println!("middle eigenvalue multiplicity: {}", a.middle_multiplicity);
    println!("hyperbolic: {}", if a.hyperbolic { "yes" } else { "no" });
    Ok(EXIT_OK)
}

fn cmd_oracle(c: &Config) -> Result<i32> {
    if !c.law.is_reducible() {
        return Err(Error::NotReducible(c.law.to_string()));
    }
    let initial = c.initial_state()?;
    let controls = c.time_controls();
    let mut general = SchemeConfig::new(SchemeKind::MollifiedProjected, c.eps.unwrap_or(DEFAULT_ORACLE_EPS));
    general.mollifier = c.mollifier;
    let oracle = SchemeConfig::new(SchemeKind::ReductionOracle, 1.0);
    let (a, o) = rayon::join(
        || run_simulation_with(&initial, &general, &c.law, &controls, |_, _, _| Ok(())),
        || run_simulation_with(&initial, &oracle, &c.law, &controls, |_, _, _| Ok(())),
    );
    let (a, o) = (a?, o?);
    if a.failure.is_some() || o.failure.is_some() {
        println!("FAILED: a run stopped early ({:?} / {:?})", a.failure, o.failure);
        return Ok(EXIT_PHYSICAL);
    }
    let d = oracle_compare(&a, &o, &c.law)?;
    println!("v distance        {:.6e}", d.v_distance);
    println!("rho distance      {:.6e}", d.rho_distance);
    println!("pressure distance {:.6e}", d.pressure_distance);
    Ok(if d.max() > ORACLE_TOL { EXIT_PHYSICAL } else { EXIT_OK })
}
