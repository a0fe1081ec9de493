//! Experiment runner behind the `urysohn` binary: `run <config>` and
//! `constants <system>`.

pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{compute_constants, schedule, ApproxSchedule, BoundReport};
use crate::discretization::{build_grid, Grid};
use crate::ensemble::{estimate_family_size, sample_admissible, verify_theorem, ExperimentOptions, ExperimentReport};
use crate::error::Error;
use crate::pipeline::{estimate_r_star, FamilyDesign, StageErrors};
use crate::registry::builtin_system;
use crate::solver::contraction_report;
use crate::system::SystemSpec;

pub use config::RunConfig;

pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 11] = [
    "epsilon",
    "alpha_star",
    "Delta_star",
    "delta_star",
    "sigma_star",
    "c_star",
    "g1",
    "g2",
    "bound",
    "sampled_max_distance",
    "pass",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Config = 1,
    Numerical = 2,
    BoundViolation = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub status: ExitStatus,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Validation(_) | Error::UnknownSystem(_) => ExitStatus::Config,
            _ => ExitStatus::Numerical,
        };
        CliError { status, message: e.to_string() }
    }
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { status: ExitStatus::Config, message: format!("{}: {e}", path.display()) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RStarSource {
    Config,
    Estimated,
}

/// Everything one `run` computes, before anything is written.
#[derive(Debug, Clone)]
pub struct RunResults {
    pub system: SystemSpec,
    pub grid_cells: Vec<usize>,
    pub constants: BoundReport,
    pub r_star: f64,
    pub r_star_source: RStarSource,
    pub legs: Vec<(ApproxSchedule, ExperimentReport)>,
}

impl RunResults {
    pub fn all_pass(&self) -> bool {
        self.legs.iter().all(|(_, r)| r.pass)
    }
}

fn prepare(config: &RunConfig) -> Result<(SystemSpec, Grid, BoundReport, f64, RStarSource), CliError> {
    let system = config.build_system()?;
    let grid = build_grid(&system.domain, &config.cells_for(system.domain_dim())?)?;
    let constants = compute_constants(&system, &grid)?;
    let (r_star, source) = match config.r_star {
        Some(r) => (r, RStarSource::Config),
        None => {
            let samples = sample_admissible(&system, &grid, config.sample_count, config.seed)?;
            let estimate = estimate_r_star(&samples, &grid, system.domain.diameter() / 2.0)?;
            (if estimate > 0.0 { estimate } else { 1.0 }, RStarSource::Estimated)
        }
    };
    Ok((system, grid, constants, r_star, source))
}

/// Runs every ε leg of the experiment.
pub fn execute(config: &RunConfig) -> Result<RunResults, CliError> {
    let (system, grid, constants, r_star, r_star_source) = prepare(config)?;
    let mut legs = Vec::with_capacity(config.epsilons.len());
    for &eps in &config.epsilons {
        let sched = schedule(&constants, eps, r_star, config.tau_cap)?;
        let opts = ExperimentOptions {
            sample_count: config.sample_count,
            cap: config.ensemble_cap,
            family_samples: config.family_samples,
            seed: config.seed,
            solver: config.solver(),
            design: None,
        };
        let report = verify_theorem(&system, &grid, &constants, &sched, &opts)?;
        legs.push((sched, report));
    }
    Ok(RunResults { system, grid_cells: grid.cells_per_axis().to_vec(), constants, r_star, r_star_source, legs })
}

/// Resolved schedules and family sizes, without solving anything.
pub fn dry_run(config: &RunConfig) -> Result<String, CliError> {
    let (system, grid, constants, r_star, source) = prepare(config)?;
    let mut s = String::new();
    let _ = writeln!(s, "system {} on {} grid nodes", system.name, grid.len());
    let _ = writeln!(s, "c* = {}  g1 = {}  g2 = {}", constants.c_star, constants.g1, constants.g2);
    let _ = writeln!(
        s,
        "R* = {r_star} ({})",
        if source == RStarSource::Config { "from config" } else { "estimated" }
    );
    let _ = writeln!(
        s,
        "{:>8} {:>10} {:>12} {:>12} {:>12} {:>12} {:>6} {:>7} {:>6} {:>14}  {}",
        "epsilon", "tau*", "alpha*", "Delta*", "delta*", "sigma*", "cells", "levels", "net", "family", "mode"
    );
    for &eps in &config.epsilons {
        let sched = schedule(&constants, eps, r_star, config.tau_cap)?;
        let design = FamilyDesign::from_schedule(&system.domain, system.control_dim, &sched)?;
        let size = estimate_family_size(&design, system.rho);
        let (size_text, mode) = match size {
            Some(n) if n <= config.ensemble_cap as f64 => (format!("{n}"), "enumerate"),
            Some(n) => (format!("{n:.3e}"), "sample"),
            None => ("uncountable".to_string(), "sample"),
        };
        let _ = writeln!(
            s,
            "{:>8} {:>10.4e} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>6} {:>7} {:>6} {:>14}  {}",
            eps,
            sched.tau_star,
            sched.alpha_star,
            sched.partition_diameter,
            sched.level_step,
            sched.sigma_star,
            design.partition.len(),
            design.ladder.levels().len(),
            design.net.len(),
            size_text,
            mode
        );
    }
    s.push_str("dry run: nothing written\n");
    Ok(s)
}

pub fn results_csv(results: &RunResults) -> String {
    let mut s = CSV_COLUMNS.join(",");
    s.push('\n');
    let c = &results.constants;
    for (sched, r) in &results.legs {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            sched.epsilon,
            sched.alpha_star,
            sched.partition_diameter,
            sched.level_step,
            sched.sigma_star,
            c.c_star,
            c.g1,
            c.g2,
            r.bound,
            r.sampled_max_distance,
            r.pass
        );
    }
    s
}

/// Finite numbers as JSON numbers, the rest as strings.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(x.to_string())
    }
}

fn stage_json(e: &StageErrors) -> Value {
    json!({
        "truncation_excess_measure": num(e.truncation_excess_measure),
        "truncation_excess_bound": num(e.truncation_excess_bound),
        "truncation_sup_change": num(e.truncation_sup_change),
        "steklov_eta_max": e.steklov_eta.map(num),
        "steklov_lipschitz": num(e.steklov_lipschitz),
        "steklov_l2_change": num(e.steklov_l2_change),
        "cell_sup_error": num(e.cell_sup_error),
        "cell_error_bound": num(e.cell_error_bound),
        "magnitude_sup_error": num(e.magnitude_sup_error),
        "magnitude_bound": num(e.magnitude_bound),
        "direction_sup_error": num(e.direction_sup_error),
        "direction_bound": num(e.direction_bound),
        "l2_norms": e.l2_norms.iter().map(|&x| num(x)).collect::<Vec<_>>(),
    })
}

/// Provenance record. Wall times are left out so repeated runs give
/// identical bytes.
pub fn manifest_json(results: &RunResults, config: &RunConfig, config_sha256: &str, files: &[&str]) -> String {
    let c = &results.constants;
    let k = &c.contraction;
    let sys = &results.system;
    let experiments: Vec<Value> = results
        .legs
        .iter()
        .map(|(s, r)| {
            json!({
                "epsilon": num(s.epsilon),
                "schedule": {
                    "tau_star": num(s.tau_star),
                    "alpha_star": num(s.alpha_star),
                    "r_star": num(s.r_star),
                    "Delta_star": num(s.partition_diameter),
                    "delta_star": num(s.level_step),
                    "sigma_star": num(s.sigma_star),
                },
                "design": {
                    "partition_cells": r.partition_cells,
                    "partition_diameter": num(r.partition_diameter),
                    "ladder_levels": r.ladder_levels,
                    "ladder_step": num(r.ladder_step),
                    "net_points": r.net_points,
                    "net_sigma": num(r.net_sigma),
                },
                "generation": r.generation.as_str(),
                "family_size": r.family_size,
                "grid_nodes": r.grid_nodes,
                "sample_count": r.sample_count,
                "bound": num(r.bound),
                "sampled_max_distance": num(r.sampled_max_distance),
                "pass": r.pass,
                "residual_violations": r.residual_violations,
                "max_residual": num(r.max_residual),
                "membership_violations": r.membership_violations,
                "stage_violations": r.stage_violations,
                "stage_errors": stage_json(&r.stage_errors),
            })
        })
        .collect();
    let manifest = json!({
        "crate": { "name": env!("CARGO_PKG_NAME"), "version": env!("CARGO_PKG_VERSION") },
        "config_sha256": config_sha256,
        "seed": config.seed,
        "config": serde_json::to_value(config).expect("config serialises"),
        "csv_schema": { "version": CSV_SCHEMA_VERSION, "columns": CSV_COLUMNS },
        "files": files,
        "system": {
            "name": sys.name,
            "state_dim": sys.state_dim,
            "control_dim": sys.control_dim,
            "domain_lower": sys.domain.lower(),
            "domain_upper": sys.domain.upper(),
            "lambda": num(sys.lambda),
            "rho": num(sys.rho),
            "grid_cells": results.grid_cells,
        },
        "constants": {
            "kappa0": num(k.kappa0),
            "kappa1": num(k.kappa1),
            "kappa2": num(k.kappa2),
            "mu_e": num(k.mu_e),
            "condition_value": num(k.condition_value),
            "contraction_factor": num(k.contraction_factor),
            "omega_star": num(c.omega_star),
            "m": num(c.m_eps),
            "h_norm": num(c.h_norm),
            "psi_norm": num(c.psi_norm),
            "beta_star": num(c.beta_star),
            "c_star": num(c.c_star),
            "g1": num(c.g1),
            "g2": num(c.g2),
        },
        "r_star": {
            "value": num(results.r_star),
            "source": match results.r_star_source { RStarSource::Config => "config", RStarSource::Estimated => "estimated" },
        },
        "experiments": experiments,
        "note": "sampled_max_distance is a maximum over sampled admissible controls and can only under-report the worst case",
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    text.push('\n');
    text
}

pub fn convergence_svg(results: &RunResults) -> String {
    let sampled: Vec<(f64, f64)> = results.legs.iter().map(|(s, r)| (s.epsilon, r.sampled_max_distance)).collect();
    let bound: Vec<(f64, f64)> = results.legs.iter().map(|(s, r)| (s.epsilon, r.bound)).collect();
    svg::log_log_chart(
        &format!("{}: distance to the finite trajectory set", results.system.name),
        "epsilon",
        "L2 distance",
        &[
            svg::Series { label: "bound (c*+1)·ε", color: "#c0392b", points: bound },
            svg::Series { label: "sampled max distance", color: "#2471a3", points: sampled },
        ],
    )
}

/// Writes the enabled artifacts; returns the file names written.
pub fn write_outputs(results: &RunResults, config: &RunConfig, config_sha256: &str) -> Result<Vec<PathBuf>, CliError> {
    let dir = &config.out_dir;
    let mut names: Vec<&str> = Vec::new();
    if config.emit.csv {
        names.push("results.csv");
    }
    if config.emit.json {
        names.push("manifest.json");
    }
    if config.emit.svg {
        names.push("convergence.svg");
    }
    if names.is_empty() {
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for name in &names {
        let body = match *name {
            "results.csv" => results_csv(results),
            "manifest.json" => manifest_json(results, config, config_sha256, &names),
            _ => convergence_svg(results),
        };
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// The constants table for a registered system.
pub fn print_constants(name: &str, grid_cells: usize) -> Result<String, CliError> {
    let system = builtin_system(name)?;
    if grid_cells == 0 {
        return Err(Error::Validation("grid must have at least one cell per axis".into()).into());
    }
    let grid = build_grid(&system.domain, &vec![grid_cells; system.domain_dim()])?;
    let report = contraction_report(&system, &grid);
    let mut s = String::new();
    let _ = writeln!(s, "system {} (n={}, m={}, k={}), {} grid nodes", system.name, system.state_dim, system.control_dim, system.domain_dim(), grid.len());
    let row = |s: &mut String, label: &str, v: f64| {
        let _ = writeln!(s, "{label:<10} {v:>14.6}");
    };
    row(&mut s, "kappa0", report.kappa0);
    row(&mut s, "kappa1", report.kappa1);
    row(&mut s, "kappa2", report.kappa2);
    row(&mut s, "mu(E)", report.mu_e);
    match compute_constants(&system, &grid) {
        Ok(c) => {
            row(&mut s, "omega*", c.omega_star);
            row(&mut s, "M", c.m_eps);
            row(&mut s, "beta*", c.beta_star);
            row(&mut s, "c*", c.c_star);
            row(&mut s, "g1", c.g1);
            row(&mut s, "g2", c.g2);
        }
        Err(_) => {
            for label in ["omega*", "M", "beta*", "c*", "g1", "g2"] {
                let _ = writeln!(s, "{label:<10} {:>14}", "n/a");
            }
        }
    }
    let _ = writeln!(
        s,
        "{:<10} {:>14.6}  {}",
        "condition",
        report.condition_value,
        if report.passes { "ok" } else { "FAILS" }
    );
    Ok(s)
}

#[derive(Parser)]
#[command(name = "urysohn", version, about = "Finite approximation of trajectory sets of Urysohn-type control systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Print the resolved schedule and family sizes; write nothing.
        #[arg(long)]
        dry_run: bool,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the error constants of a built-in system.
    Constants {
        system: String,
        /// Grid cells per axis.
        #[arg(long, default_value_t = 128)]
        grid: usize,
    },
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { ExitStatus::Config } else { ExitStatus::Success };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code as i32;
        }
    };
    match dispatch(cli.command, out) {
        Ok(status) => status as i32,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.status as i32
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<ExitStatus, CliError> {
    match command {
        Command::Constants { system, grid } => {
            let _ = out.write_all(print_constants(&system, grid)?.as_bytes());
            Ok(ExitStatus::Success)
        }
        Command::Run { config, dry_run: dry, seed, out: out_dir } => {
            let raw = std::fs::read(&config).map_err(|e| CliError::io(&config, e))?;
            let text = String::from_utf8(raw.clone())
                .map_err(|_| CliError { status: ExitStatus::Config, message: format!("{} is not UTF-8", config.display()) })?;
            let mut cfg = RunConfig::parse(&text)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(dir) = out_dir {
                cfg.out_dir = dir;
            }
            if dry {
                let _ = out.write_all(dry_run(&cfg)?.as_bytes());
                return Ok(ExitStatus::Success);
            }
            let results = execute(&cfg)?;
            let sha = hex::encode(Sha256::digest(&raw));
            let written = write_outputs(&results, &cfg, &sha)?;
            for (sched, r) in &results.legs {
                let _ = writeln!(
                    out,
                    "eps={:<8} bound={:<10.6} sampled={:<12.6e} family={} ({}) {} [{:.2?}]",
                    sched.epsilon,
                    r.bound,
                    r.sampled_max_distance,
                    r.family_size,
                    r.generation.as_str(),
                    if r.pass { "pass" } else { "FAILURE" },
                    r.wall_time
                );
            }
            for path in &written {
                let _ = writeln!(out, "wrote {}", path.display());
            }
            Ok(if results.all_pass() { ExitStatus::Success } else { ExitStatus::BoundViolation })
        }
    }
}
