//! Command-line interface: argument parsing, dispatch, and artifact emission.
//!
//! All numerical work lives in the library modules; this module only builds
//! problems from configuration, runs them, prints a short report, and writes
//! the CSV/JSON artifacts.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{ExperimentConfig, OutputFormat, StateSpec};
use crate::config::AlphaGridSpec;
use crate::error::{Error, Result};
use crate::heat;
use crate::sweep::{
    self, BoundReport, EmitFormat, ErrorField, Experiment, RateFit, SweepRecord,
};

/// Environment variable capping the worker-thread count.
pub const THREADS_ENV: &str = "SOFT2HARD_THREADS";

/// Process exit codes: 0 success, 1 strict-mode check failure, 2 usage or
/// runtime error.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "soft2hard",
    about = "Soft-to-hard terminal-constraint penalization experiments",
    version
)]
pub struct Cli {
    /// JSON config file; command-line flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Penalty grid: log:lo:hi:count, linear:lo:hi:count, or a comma list.
    #[arg(long, global = true, value_name = "SPEC")]
    pub alpha_grid: Option<String>,

    /// Time horizon T.
    #[arg(long, global = true, value_name = "T")]
    pub horizon: Option<f64>,

    /// Rocket terminal position y_T.
    #[arg(long, global = true, value_name = "Y")]
    pub target_position: Option<f64>,

    /// Heat target: sine combination, coefficient rule, or spectrum file.
    #[arg(long, global = true, value_name = "SPEC")]
    pub target: Option<String>,

    /// Heat initial state (same forms as --target); defaults to zero.
    #[arg(long, global = true, value_name = "SPEC")]
    pub initial: Option<String>,

    /// Modal truncation for heat experiments.
    #[arg(long, global = true, value_name = "N")]
    pub modes: Option<usize>,

    /// Interior spatial points for finite-difference solves.
    #[arg(long, global = true, value_name = "NX")]
    pub nx: Option<usize>,

    /// Time steps for finite-difference solves.
    #[arg(long, global = true, value_name = "NT")]
    pub nt: Option<usize>,

    /// θ values for rate constants and bound checks (comma list in [0, 1]).
    #[arg(long, global = true, value_name = "LIST")]
    pub theta: Option<String>,

    /// Output directory for artifacts (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Restrict artifacts to one format (default: write both).
    #[arg(long, global = true, value_enum, value_name = "FMT")]
    pub format: Option<OutputFormat>,

    /// Exit nonzero when a bound check or discrepancy budget fails.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Per-α absolute discrepancy budget for `compare`.
    #[arg(long, global = true, value_name = "EPS")]
    pub budget: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RocketSolver {
    /// Closed-form controls and errors.
    Analytic,
    /// Crank–Nicolson discretization.
    Fd,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep α for the rocket problem and fit decay slopes.
    RocketSweep {
        #[arg(long, value_enum, default_value_t = RocketSolver::Analytic)]
        solver: RocketSolver,
    },
    /// Sweep α for the heat problem using the modal solver.
    HeatModalSweep,
    /// Sweep α for the heat problem using the finite-difference solver.
    HeatFdSweep,
    /// Partial sums of the hard-control energy and a divergence heuristic.
    Admissibility,
    /// Rate constants C_θ for the requested θ values.
    RateConstants,
    /// Modal vs finite-difference errors on a shared α grid.
    Compare,
}

/// Entry point: configure the thread pool, parse arguments, dispatch.
pub fn run() -> i32 {
    init_thread_pool();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

/// Cap the global worker pool from `SOFT2HARD_THREADS` when set. The result
/// is identical for any positive thread count; the cap only limits
/// parallelism.
pub fn init_thread_pool() {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

/// Merge the config file (if any) with command-line flag overrides.
pub fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let base = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    let thetas = cli
        .theta
        .as_deref()
        .map(|list| {
            list.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::config("theta", format!("bad number \"{s}\"")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .transpose()?;
    let overlay = ExperimentConfig {
        horizon: cli.horizon,
        target_position: cli.target_position,
        initial: cli.initial.clone().map(StateSpec::Text),
        target: cli.target.clone().map(StateSpec::Text),
        alpha_grid: cli.alpha_grid.clone().map(AlphaGridSpec::Text),
        modes: cli.modes,
        nx: cli.nx,
        nt: cli.nt,
        theta: thetas,
        quadrature_points: None,
        out: cli.out.clone(),
        format: cli.format,
        strict: if cli.strict { Some(true) } else { None },
        budget: cli.budget,
    };
    Ok(base.overlay(overlay))
}

pub fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = effective_config(cli)?;
    match &cli.command {
        Command::RocketSweep { solver } => rocket_sweep(&cfg, *solver),
        Command::HeatModalSweep => heat_sweep(&cfg, false),
        Command::HeatFdSweep => heat_sweep(&cfg, true),
        Command::Admissibility => admissibility(&cfg),
        Command::RateConstants => rate_constants_cmd(&cfg),
        Command::Compare => compare(&cfg),
    }
}

fn rocket_sweep(cfg: &ExperimentConfig, solver: RocketSolver) -> Result<i32> {
    let problem = cfg.rocket_problem()?;
    let experiment = match solver {
        RocketSolver::Analytic => Experiment::RocketAnalytic {
            problem: problem.clone(),
            quadrature_points: cfg.quadrature_points(),
        },
        RocketSolver::Fd => Experiment::RocketFd {
            problem: problem.clone(),
            nt: cfg.nt(),
        },
    };
    let alphas = cfg.alpha_values(false)?;
    let records = sweep::run_sweep(&experiment, &alphas)?;
    let fields = [ErrorField::Terminal, ErrorField::Control, ErrorField::State];
    let (fits, labels) = fit_table(&records, &fields, experiment.gram_scale())?;
    print_sweep_report(&records, &fits, &labels, None);
    let meta = serde_json::json!({
        "kind": "rocket-sweep",
        "solver": experiment.solver_tag().as_str(),
        "horizon": problem.horizon(),
        "target_position": problem.target(),
        "alpha_grid": alphas,
        "fit_labels": labels,
    });
    emit_artifacts(cfg, "records", &records, &fits, &meta)?;
    Ok(EXIT_OK)
}

fn heat_sweep(cfg: &ExperimentConfig, fd: bool) -> Result<i32> {
    let problem = cfg.heat_problem()?;
    let experiment = if fd {
        Experiment::HeatFd {
            problem: problem.clone(),
            nx: cfg.nx(),
            nt: cfg.nt(),
        }
    } else {
        Experiment::HeatModal {
            problem: problem.clone(),
        }
    };
    let alphas = cfg.alpha_values(true)?;
    let records = sweep::run_sweep(&experiment, &alphas)?;
    let fields = [ErrorField::Terminal, ErrorField::Control];
    let (fits, labels) = fit_table(&records, &fields, experiment.gram_scale())?;

    let constants = cfg
        .thetas()?
        .iter()
        .map(|&theta| heat::rate_constants(&problem, theta))
        .collect::<Result<Vec<_>>>()?;
    let bounds = sweep::check_rate_bounds(&records, &constants);
    print_sweep_report(&records, &fits, &labels, Some(&bounds));

    let meta = serde_json::json!({
        "kind": if fd { "heat-fd-sweep" } else { "heat-modal-sweep" },
        "solver": experiment.solver_tag().as_str(),
        "horizon": problem.horizon(),
        "modes": problem.truncation(),
        "nx": if fd { Some(cfg.nx()) } else { None },
        "nt": if fd { Some(cfg.nt()) } else { None },
        "alpha_grid": alphas,
        "fit_labels": labels,
        "bound_violations": bounds.violations().len(),
    });
    emit_artifacts(cfg, "records", &records, &fits, &meta)?;
    if cfg.strict() && !bounds.violations().is_empty() {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

fn admissibility(cfg: &ExperimentConfig) -> Result<i32> {
    let problem = cfg.heat_problem()?;
    let report = heat::admissibility_diagnostic(&problem)?;
    let n = report.partial_sums.len();
    println!("admissibility diagnostic ({n} modes)");
    println!("{:>8} {:>18}", "modes", "energy_sum");
    let mut m = 1;
    while m <= n {
        println!("{:>8} {:>18.10e}", m, report.partial_sums[m - 1]);
        m *= 2;
    }
    if n.count_ones() != 1 {
        println!("{:>8} {:>18.10e}", n, report.partial_sums[n - 1]);
    }
    println!(
        "growth exponent {:.4} -> {}",
        report.growth_exponent, report.classification
    );

    let out = prepare_out_dir(cfg)?;
    if write_format(cfg, OutputFormat::Csv) {
        let mut w = artifact_writer(&out.join("admissibility.csv"))?;
        with_path(&out, "admissibility.csv", || {
            writeln!(w, "modes,energy_sum")?;
            for (i, s) in report.partial_sums.iter().enumerate() {
                writeln!(w, "{},{}", i + 1, s)?;
            }
            w.flush()
        })?;
    }
    if write_format(cfg, OutputFormat::Json) {
        let summary = serde_json::json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "kind": "admissibility",
            "horizon": problem.horizon(),
            "modes": n,
            "partial_sums": report.partial_sums,
            "growth_exponent": report.growth_exponent,
            "classification": report.classification.to_string(),
        });
        write_json(&out.join("admissibility.json"), &summary)?;
    }
    if cfg.strict() && report.classification == heat::Admissibility::DivergentLooking {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

fn rate_constants_cmd(cfg: &ExperimentConfig) -> Result<i32> {
    let problem = cfg.heat_problem()?;
    let constants = cfg
        .thetas()?
        .iter()
        .map(|&theta| heat::rate_constants(&problem, theta))
        .collect::<Result<Vec<_>>>()?;
    println!("{:>8} {:>18}", "theta", "constant");
    for c in &constants {
        println!("{:>8.4} {:>18.10e}", c.theta, c.value);
    }

    let out = prepare_out_dir(cfg)?;
    if write_format(cfg, OutputFormat::Csv) {
        let mut w = artifact_writer(&out.join("rate_constants.csv"))?;
        with_path(&out, "rate_constants.csv", || {
            writeln!(w, "theta,constant")?;
            for c in &constants {
                writeln!(w, "{},{}", c.theta, c.value)?;
            }
            w.flush()
        })?;
    }
    if write_format(cfg, OutputFormat::Json) {
        let summary = serde_json::json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "kind": "rate-constants",
            "horizon": problem.horizon(),
            "modes": problem.truncation(),
            "constants": constants
                .iter()
                .map(|c| serde_json::json!({"theta": c.theta, "value": c.value}))
                .collect::<Vec<_>>(),
        });
        write_json(&out.join("rate_constants.json"), &summary)?;
    }
    Ok(EXIT_OK)
}

fn compare(cfg: &ExperimentConfig) -> Result<i32> {
    let problem = cfg.heat_problem()?;
    let alphas = cfg.alpha_values(true)?;
    let modal = sweep::run_sweep(
        &Experiment::HeatModal {
            problem: problem.clone(),
        },
        &alphas,
    )?;
    let fd = sweep::run_sweep(
        &Experiment::HeatFd {
            problem: problem.clone(),
            nx: cfg.nx(),
            nt: cfg.nt(),
        },
        &alphas,
    )?;
    let budget = cfg.budget();

    println!(
        "{:>12} {:>14} {:>14} {:>12} {:>12}",
        "alpha", "terminal(modal)", "terminal(fd)", "diff(term)", "diff(ctrl)"
    );
    // the budget applies to the terminal mismatch only: the control columns
    // compare against the continuum hard control and carry an irreducible
    // discretization floor
    let mut worst: f64 = 0.0;
    let mut rows = Vec::with_capacity(alphas.len());
    for (m, f) in modal.iter().zip(&fd) {
        let dt = (m.terminal_err - f.terminal_err).abs();
        let dc = (m.control_err - f.control_err).abs();
        worst = worst.max(dt);
        println!(
            "{:>12.4e} {:>14.6e} {:>14.6e} {:>12.3e} {:>12.3e}",
            m.alpha, m.terminal_err, f.terminal_err, dt, dc
        );
        rows.push((m.alpha, m.terminal_err, f.terminal_err, dt, m.control_err, f.control_err, dc));
    }
    let within = worst <= budget;
    println!(
        "max terminal discrepancy {:.3e} (budget {:.3e}): {}",
        worst,
        budget,
        if within { "within budget" } else { "OVER BUDGET" }
    );

    let out = prepare_out_dir(cfg)?;
    if write_format(cfg, OutputFormat::Csv) {
        let mut w = artifact_writer(&out.join("compare.csv"))?;
        with_path(&out, "compare.csv", || {
            writeln!(
                w,
                "alpha,modal_terminal_err,fd_terminal_err,terminal_diff,modal_control_err,fd_control_err,control_diff"
            )?;
            for (a, mt, ft, dt, mc, fc, dc) in &rows {
                writeln!(w, "{a},{mt},{ft},{dt},{mc},{fc},{dc}")?;
            }
            w.flush()
        })?;
    }
    if write_format(cfg, OutputFormat::Json) {
        let summary = serde_json::json!({
            "artifact_version": env!("CARGO_PKG_VERSION"),
            "kind": "compare",
            "horizon": problem.horizon(),
            "modes": problem.truncation(),
            "nx": cfg.nx(),
            "nt": cfg.nt(),
            "alpha_grid": alphas,
            "budget": budget,
            "max_terminal_discrepancy": worst,
            "within_budget": within,
        });
        write_json(&out.join("compare.json"), &summary)?;
    }
    if cfg.strict() && !within {
        return Ok(EXIT_CHECK_FAILED);
    }
    Ok(EXIT_OK)
}

/// For each field: an asymptotic-window fit and a full-grid fit, with a
/// parallel label vector (the JSON summary's `fit_labels`).
fn fit_table(
    records: &[SweepRecord],
    fields: &[ErrorField],
    gram_scale: f64,
) -> Result<(Vec<RateFit>, Vec<String>)> {
    let mut fits = Vec::new();
    let mut labels = Vec::new();
    for &field in fields {
        let name = match field {
            ErrorField::Terminal => "terminal",
            ErrorField::Control => "control",
            ErrorField::State => "state",
        };
        fits.push(sweep::fit_asymptotic_slope(records, field, gram_scale)?);
        labels.push(format!("{name}/asymptotic"));
        fits.push(sweep::fit_loglog_slope(records, field, (None, None))?);
        labels.push(format!("{name}/full-grid"));
    }
    Ok((fits, labels))
}

fn print_sweep_report(
    records: &[SweepRecord],
    fits: &[RateFit],
    labels: &[String],
    bounds: Option<&BoundReport>,
) {
    println!("{} sweep points, solver {}", records.len(), records[0].solver_tag);
    println!(
        "{:>22} {:>10} {:>8} {:>7} {:>24}",
        "fit", "slope", "r^2", "points", "alpha window"
    );
    for (fit, label) in fits.iter().zip(labels) {
        println!(
            "{:>22} {:>10.4} {:>8.4} {:>7} [{:.3e}, {:.3e}]",
            label, fit.slope, fit.r_squared, fit.points, fit.window.0, fit.window.1
        );
    }
    if let Some(report) = bounds {
        let violations = report.violations();
        if violations.is_empty() {
            println!("rate bounds: {} checks, all satisfied", report.checks.len());
        } else {
            println!(
                "rate bounds: {} checks, {} VIOLATED",
                report.checks.len(),
                violations.len()
            );
            for v in violations.iter().take(5) {
                println!(
                    "  violated: alpha={:.4e} theta={:.2} {:?} bound={:.6e} observed={:.6e}",
                    v.alpha, v.theta, v.kind, v.bound, v.observed
                );
            }
        }
    }
}

fn prepare_out_dir(cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_format(cfg: &ExperimentConfig, format: OutputFormat) -> bool {
    cfg.format.map(|f| f == format).unwrap_or(true)
}

fn emit_artifacts(
    cfg: &ExperimentConfig,
    stem: &str,
    records: &[SweepRecord],
    fits: &[RateFit],
    meta: &serde_json::Value,
) -> Result<()> {
    let out = prepare_out_dir(cfg)?;
    if write_format(cfg, OutputFormat::Csv) {
        sweep::emit_records(
            &out.join(format!("{stem}.csv")),
            EmitFormat::Csv,
            records,
            fits,
            meta,
        )?;
    }
    if write_format(cfg, OutputFormat::Json) {
        sweep::emit_records(
            &out.join("summary.json"),
            EmitFormat::JsonSummary,
            records,
            fits,
            meta,
        )?;
    }
    Ok(())
}

fn artifact_writer(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = artifact_writer(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::io(path, e.into()))?;
    writeln!(w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Wrap an io closure so failures report the artifact path.
fn with_path<F: FnOnce() -> std::io::Result<()>>(dir: &Path, name: &str, f: F) -> Result<()> {
    f().map_err(|e| Error::io(dir.join(name), e))
}
