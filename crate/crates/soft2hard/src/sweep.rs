//! Penalty sweeps, log–log slope fits, rate-bound checks, and record I/O.
//!
//! A sweep evaluates one solver over a grid of penalty parameters and
//! collects one [`SweepRecord`] per α. Slopes are estimated by ordinary
//! least squares of `ln err` on `ln α`. Because the exact errors behave like
//! `1/(1+αa)`, the pre-asymptotic curvature at small `αa` drags full-grid
//! slopes above −1; fits over the asymptotic window (records with
//! `α·a ≥ 10` by default) reproduce the reference slopes.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd::{self, SpaceTimeGrid};
use crate::heat::{self, HeatProblem, RateConstants};
use crate::rocket::{self, RocketProblem};
use crate::util::ols_line;

/// Records with `α·a` at or above this lie in the asymptotic regime used
/// for default slope fits.
pub const DEFAULT_ALPHA_GRAM_THRESHOLD: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverTag {
    RocketAnalytic,
    RocketFd,
    HeatModal,
    HeatFd,
}

impl SolverTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverTag::RocketAnalytic => "rocket-analytic",
            SolverTag::RocketFd => "rocket-fd",
            SolverTag::HeatModal => "heat-modal",
            SolverTag::HeatFd => "heat-fd",
        }
    }
}

impl std::fmt::Display for SolverTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rocket-analytic" => Ok(SolverTag::RocketAnalytic),
            "rocket-fd" => Ok(SolverTag::RocketFd),
            "heat-modal" => Ok(SolverTag::HeatModal),
            "heat-fd" => Ok(SolverTag::HeatFd),
            other => Err(Error::parse(other, "unknown solver tag")),
        }
    }
}

/// One sweep sample: the errors of the penalized solution at a given α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub alpha: f64,
    pub terminal_err: f64,
    pub control_err: f64,
    /// Trajectory error; not defined for the heat solvers.
    pub state_err: Option<f64>,
    pub solver_tag: SolverTag,
}

/// Which error column of a record a fit or bound check reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorField {
    Terminal,
    Control,
    State,
}

impl ErrorField {
    fn get(&self, r: &SweepRecord) -> Option<f64> {
        match self {
            ErrorField::Terminal => Some(r.terminal_err),
            ErrorField::Control => Some(r.control_err),
            ErrorField::State => r.state_err,
        }
    }
}

/// Specification of a penalty-parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaGrid {
    /// Geometric progression from `lo` to `hi` with `count` points.
    Log { lo: f64, hi: f64, count: usize },
    /// Uniform spacing from `lo` to `hi` with `count` points.
    Linear { lo: f64, hi: f64, count: usize },
    /// Values passed through verbatim (must be positive, strictly increasing).
    Explicit(Vec<f64>),
}

impl AlphaGrid {
    /// The eight-point grid of the reference heat experiments.
    pub fn reference_heat() -> Self {
        AlphaGrid::Explicit(vec![1.0, 10.0, 50.0, 100.0, 500.0, 1000.0, 5000.0, 10000.0])
    }

    /// The 25-point geometric grid `[1, 10⁶]` used for rocket sweeps.
    pub fn default_rocket() -> Self {
        AlphaGrid::Log {
            lo: 1.0,
            hi: 1e6,
            count: 25,
        }
    }

    pub fn build(&self) -> Result<Vec<f64>> {
        let alphas = match self {
            AlphaGrid::Log { lo, hi, count } => {
                Self::check_range(*lo, *hi, *count)?;
                let ratio = (hi / lo).powf(1.0 / (*count as f64 - 1.0));
                (0..*count).map(|i| lo * ratio.powi(i as i32)).collect()
            }
            AlphaGrid::Linear { lo, hi, count } => {
                Self::check_range(*lo, *hi, *count)?;
                let step = (hi - lo) / (*count as f64 - 1.0);
                (0..*count).map(|i| lo + step * i as f64).collect()
            }
            AlphaGrid::Explicit(values) => {
                if values.is_empty() {
                    return Err(Error::InvalidAlphaGrid("explicit list is empty".into()));
                }
                values.clone()
            }
        };
        for w in alphas.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidAlphaGrid(format!(
                    "grid must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if alphas.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidAlphaGrid(
                "grid values must be positive and finite".into(),
            ));
        }
        Ok(alphas)
    }

    fn check_range(lo: f64, hi: f64, count: usize) -> Result<()> {
        if !(lo > 0.0) || !(hi > lo) || count < 2 {
            Err(Error::InvalidAlphaGrid(format!(
                "need 0 < lo < hi and count >= 2, got lo={lo} hi={hi} count={count}"
            )))
        } else {
            Ok(())
        }
    }
}

/// A fully specified sweep experiment: problem plus solver.
#[derive(Debug, Clone)]
pub enum Experiment {
    RocketAnalytic {
        problem: RocketProblem,
        quadrature_points: usize,
    },
    RocketFd {
        problem: RocketProblem,
        nt: usize,
    },
    HeatModal {
        problem: HeatProblem,
    },
    HeatFd {
        problem: HeatProblem,
        nx: usize,
        nt: usize,
    },
}

impl Experiment {
    pub fn solver_tag(&self) -> SolverTag {
        match self {
            Experiment::RocketAnalytic { .. } => SolverTag::RocketAnalytic,
            Experiment::RocketFd { .. } => SolverTag::RocketFd,
            Experiment::HeatModal { .. } => SolverTag::HeatModal,
            Experiment::HeatFd { .. } => SolverTag::HeatFd,
        }
    }

    /// Gram scale governing the asymptotic regime: `a` for the rocket,
    /// `max_n a_n = a_1` for the heat problem.
    pub fn gram_scale(&self) -> f64 {
        match self {
            Experiment::RocketAnalytic { problem, .. } => rocket::derived(problem).gram,
            Experiment::RocketFd { problem, .. } => rocket::derived(problem).gram,
            Experiment::HeatModal { problem } | Experiment::HeatFd { problem, .. } => {
                problem.mode(1).map(|m| m.gram).unwrap_or(f64::NAN)
            }
        }
    }
}

/// Run one record per α. Sweep points are independent and evaluated in
/// parallel; output order is by the α grid regardless of scheduling.
pub fn run_sweep(experiment: &Experiment, alphas: &[f64]) -> Result<Vec<SweepRecord>> {
    // shared setup amortized across the grid
    let heat_fd_ctx = match experiment {
        Experiment::HeatFd { problem, nx, nt } => {
            let grid = SpaceTimeGrid::new(*nx, *nt, problem.horizon())?;
            let gram = fd::assemble_terminal_gram(&grid);
            let y0 = sample_spectrum(&grid, problem, true)?;
            let yt = sample_spectrum(&grid, problem, false)?;
            let hard = sample_modal_hard_control(&grid, problem);
            Some((grid, gram, y0, yt, hard))
        }
        _ => None,
    };

    alphas
        .par_iter()
        .map(|&alpha| {
            sweep_point(experiment, heat_fd_ctx.as_ref(), alpha).map_err(|e| Error::SweepPoint {
                alpha,
                source: Box::new(e),
            })
        })
        .collect()
}

type HeatFdContext = (
    SpaceTimeGrid,
    fd::TerminalGram,
    nalgebra::DVector<f64>,
    nalgebra::DVector<f64>,
    nalgebra::DMatrix<f64>,
);

fn sweep_point(
    experiment: &Experiment,
    heat_fd_ctx: Option<&HeatFdContext>,
    alpha: f64,
) -> Result<SweepRecord> {
    let tag = experiment.solver_tag();
    match experiment {
        Experiment::RocketAnalytic {
            problem,
            quadrature_points,
        } => {
            let e = rocket::errors(problem, alpha, *quadrature_points)?;
            Ok(SweepRecord {
                alpha,
                terminal_err: e.terminal_mismatch,
                control_err: e.control_err,
                state_err: Some(e.state_err),
                solver_tag: tag,
            })
        }
        Experiment::RocketFd { problem, nt } => {
            let sol = fd::rocket_discrete_solve(problem, alpha, *nt)?;
            Ok(SweepRecord {
                alpha,
                terminal_err: sol.terminal_mismatch,
                control_err: sol.control_err,
                state_err: Some(sol.state_err),
                solver_tag: tag,
            })
        }
        Experiment::HeatModal { problem } => Ok(SweepRecord {
            alpha,
            terminal_err: heat::terminal_error(problem, alpha)?,
            control_err: heat::control_error(problem, alpha)?,
            state_err: None,
            solver_tag: tag,
        }),
        Experiment::HeatFd { .. } => {
            let (grid, gram, y0, yt, hard) = heat_fd_ctx.expect("context built for heat-fd");
            let sol = fd::penalized_optimal_control_fd(grid, gram, y0, yt, alpha)?;
            let control_err = fd::spacetime_norm(grid, &(&sol.control - hard));
            Ok(SweepRecord {
                alpha,
                terminal_err: sol.terminal_mismatch_norm,
                control_err,
                state_err: None,
                solver_tag: tag,
            })
        }
    }
}

/// Sample one of the problem's spectra on the interior grid points.
fn sample_spectrum(
    grid: &SpaceTimeGrid,
    problem: &HeatProblem,
    initial: bool,
) -> Result<nalgebra::DVector<f64>> {
    let spectrum = if initial {
        problem.initial()
    } else {
        problem.target()
    };
    let xs = grid.interior_points();
    let mut out = nalgebra::DVector::zeros(xs.len());
    for (i, &x) in xs.iter().enumerate() {
        out[i] = spectrum.evaluate(x)?;
    }
    Ok(out)
}

/// The modal hard control `u*(x,t) = Σ (d_n/a_n) e^{−λ_n(T−t)} e_n(x)`
/// sampled on the grid's interior points and midpoint times.
fn sample_modal_hard_control(grid: &SpaceTimeGrid, problem: &HeatProblem) -> nalgebra::DMatrix<f64> {
    let hard = heat::hard_control_coefficients(problem);
    let xs = grid.interior_points();
    let ts = grid.midpoint_times();
    let horizon = problem.horizon();
    nalgebra::DMatrix::from_fn(xs.len(), ts.len(), |i, k| {
        (1..=problem.truncation())
            .map(|n| {
                let m = problem.mode(n).expect("mode within truncation");
                hard.amplitudes[n - 1] * m.kernel(horizon, ts[k]) * heat::basis(n, xs[i])
            })
            .sum()
    })
}

/// Least-squares log–log fit of an error field against α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `[α_min, α_max]` actually used in the fit.
    pub window: (f64, f64),
    /// Number of records in the fit.
    pub points: usize,
}

/// OLS of `ln err` on `ln α` over records whose α lies in `window`
/// (inclusive; `None` bound = unbounded) and whose error is positive.
pub fn fit_loglog_slope(
    records: &[SweepRecord],
    field: ErrorField,
    window: (Option<f64>, Option<f64>),
) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in records {
        if window.0.is_some_and(|w| r.alpha < w) || window.1.is_some_and(|w| r.alpha > w) {
            continue;
        }
        let Some(err) = field.get(r) else { continue };
        if err > 0.0 {
            xs.push(r.alpha.ln());
            ys.push(err.ln());
            lo = lo.min(r.alpha);
            hi = hi.max(r.alpha);
        }
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateFit(xs.len()));
    }
    let (slope, intercept, r_squared) = ols_line(&xs, &ys);
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        window: (lo, hi),
        points: xs.len(),
    })
}

/// Smallest α in the asymptotic regime `α·gram ≥ threshold`.
pub fn asymptotic_alpha_min(gram_scale: f64, threshold: f64) -> f64 {
    threshold / gram_scale
}

/// Default fit: window restricted to `α·gram ≥ 10`.
pub fn fit_asymptotic_slope(
    records: &[SweepRecord],
    field: ErrorField,
    gram_scale: f64,
) -> Result<RateFit> {
    fit_loglog_slope(
        records,
        field,
        (
            Some(asymptotic_alpha_min(gram_scale, DEFAULT_ALPHA_GRAM_THRESHOLD)),
            None,
        ),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// `terminal_err ≤ C_θ α^{−(1/2+θ)}`, applicable for `θ ≤ 1/2`.
    Terminal,
    /// `control_err ≤ D_θ α^{−θ}`, applicable for `0 < θ ≤ 1`.
    Control,
}

/// One rate-bound comparison at a given `(α, θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub alpha: f64,
    pub theta: f64,
    pub kind: BoundKind,
    pub bound: f64,
    pub observed: f64,
    /// `bound − observed`; negative means a violation.
    pub margin: f64,
}

impl BoundCheck {
    pub fn satisfied(&self) -> bool {
        self.margin >= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn violations(&self) -> Vec<&BoundCheck> {
        self.checks.iter().filter(|c| !c.satisfied()).collect()
    }
}

/// Check the non-asymptotic rate bounds against every record: for each
/// constant, the terminal bound when `θ ≤ 1/2` and the control bound when
/// `θ > 0`.
pub fn check_rate_bounds(records: &[SweepRecord], constants: &[RateConstants]) -> BoundReport {
    let mut checks = Vec::new();
    for c in constants {
        for r in records {
            if c.theta <= 0.5 {
                let bound = c.value * r.alpha.powf(-(0.5 + c.theta));
                checks.push(BoundCheck {
                    alpha: r.alpha,
                    theta: c.theta,
                    kind: BoundKind::Terminal,
                    bound,
                    observed: r.terminal_err,
                    margin: bound - r.terminal_err,
                });
            }
            if c.theta > 0.0 {
                let bound = c.value * r.alpha.powf(-c.theta);
                checks.push(BoundCheck {
                    alpha: r.alpha,
                    theta: c.theta,
                    kind: BoundKind::Control,
                    bound,
                    observed: r.control_err,
                    margin: bound - r.control_err,
                });
            }
        }
    }
    BoundReport { checks }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    JsonSummary,
}

#[derive(Serialize)]
struct JsonSummary<'a> {
    artifact_version: &'static str,
    experiment: &'a serde_json::Value,
    fits: &'a [RateFit],
    records: &'a [SweepRecord],
}

/// Write records to `path` in the requested format.
///
/// CSV columns are `alpha,terminal_err,control_err,state_err,solver_tag`;
/// inapplicable fields are emitted as empty cells, not zeros. The JSON
/// summary carries the fits, the experiment description, and the artifact
/// version. Both outputs are byte-deterministic.
pub fn emit_records(
    path: &Path,
    format: EmitFormat,
    records: &[SweepRecord],
    fits: &[RateFit],
    experiment_meta: &serde_json::Value,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        EmitFormat::Csv => {
            write_csv(&mut w, records).map_err(|e| Error::io(path, e))?;
        }
        EmitFormat::JsonSummary => {
            let summary = JsonSummary {
                artifact_version: env!("CARGO_PKG_VERSION"),
                experiment: experiment_meta,
                fits,
                records,
            };
            serde_json::to_writer_pretty(&mut w, &summary)
                .map_err(|e| Error::io(path, e.into()))?;
            writeln!(w).map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_csv<W: Write>(w: &mut W, records: &[SweepRecord]) -> std::io::Result<()> {
    writeln!(w, "alpha,terminal_err,control_err,state_err,solver_tag")?;
    for r in records {
        let state = r.state_err.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{}",
            r.alpha, r.terminal_err, r.control_err, state, r.solver_tag
        )?;
    }
    Ok(())
}

/// Parse the CSV schema written by [`emit_records`].
pub fn parse_records_csv<R: std::io::Read>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::parse("<csv>", e.to_string()))?
        .unwrap_or_default();
    if header.trim() != "alpha,terminal_err,control_err,state_err,solver_tag" {
        return Err(Error::parse(header, "unexpected CSV header"));
    }
    let mut records = Vec::new();
    for line in lines {
        let line = line.map_err(|e| Error::parse("<csv>", e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::parse(line.clone(), "expected 5 columns"));
        }
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::parse(line.clone(), format!("bad number \"{s}\"")))
        };
        records.push(SweepRecord {
            alpha: num(cols[0])?,
            terminal_err: num(cols[1])?,
            control_err: num(cols[2])?,
            state_err: if cols[3].is_empty() {
                None
            } else {
                Some(num(cols[3])?)
            },
            solver_tag: cols[4].parse()?,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heat::SineSpectrum;
    use approx::assert_relative_eq;

    fn single_mode_problem() -> HeatProblem {
        HeatProblem::new(
            1.0,
            SineSpectrum::zeros(1),
            SineSpectrum::single_mode(1, 1.0 / std::f64::consts::SQRT_2),
        )
        .unwrap()
    }

    #[test]
    fn alpha_grids() {
        let reference = AlphaGrid::reference_heat().build().unwrap();
        assert_eq!(
            reference,
            vec![1.0, 10.0, 50.0, 100.0, 500.0, 1000.0, 5000.0, 10000.0]
        );
        let two = AlphaGrid::Log {
            lo: 1.0,
            hi: 100.0,
            count: 2,
        }
        .build()
        .unwrap();
        assert_relative_eq!(two[0], 1.0);
        assert_relative_eq!(two[1], 100.0);
        let g25 = AlphaGrid::default_rocket().build().unwrap();
        assert_eq!(g25.len(), 25);
        assert_relative_eq!(g25[0], 1.0);
        assert_relative_eq!(g25[24], 1e6, max_relative = 1e-12);
        assert!(AlphaGrid::Explicit(vec![]).build().is_err());
        assert!(AlphaGrid::Explicit(vec![2.0, 1.0]).build().is_err());
        assert!(AlphaGrid::Log {
            lo: -1.0,
            hi: 1.0,
            count: 5
        }
        .build()
        .is_err());
    }

    #[test]
    fn rocket_analytic_sweep_monotone() {
        let exp = Experiment::RocketAnalytic {
            problem: RocketProblem::new(1.0, 1.0).unwrap(),
            quadrature_points: 64,
        };
        let alphas = AlphaGrid::default_rocket().build().unwrap();
        let records = run_sweep(&exp, &alphas).unwrap();
        assert_eq!(records.len(), 25);
        for w in records.windows(2) {
            assert!(w[1].terminal_err < w[0].terminal_err);
            assert!(w[1].control_err < w[0].control_err);
            assert!(w[1].state_err.unwrap() < w[0].state_err.unwrap());
        }
    }

    #[test]
    fn heat_modal_sweep_closed_form() {
        let p = single_mode_problem();
        let exp = Experiment::HeatModal { problem: p.clone() };
        let records = run_sweep(&exp, &AlphaGrid::reference_heat().build().unwrap()).unwrap();
        let m = p.mode(1).unwrap();
        for r in &records {
            let expected = m.mismatch.abs() / (1.0 + r.alpha * m.gram);
            assert_relative_eq!(r.terminal_err, expected, max_relative = 1e-12);
            assert!(r.state_err.is_none());
        }
    }

    #[test]
    fn zero_mismatch_sweep_refuses_fit() {
        let p = HeatProblem::new(1.0, SineSpectrum::zeros(4), SineSpectrum::zeros(4)).unwrap();
        let records = run_sweep(
            &Experiment::HeatModal { problem: p },
            &AlphaGrid::reference_heat().build().unwrap(),
        )
        .unwrap();
        assert!(records.iter().all(|r| r.terminal_err == 0.0));
        assert!(matches!(
            fit_loglog_slope(&records, ErrorField::Terminal, (None, None)),
            Err(Error::DegenerateFit(0))
        ));
    }

    #[test]
    fn exact_power_law_fits_perfectly() {
        let records: Vec<SweepRecord> = [1.0, 10.0, 100.0, 1000.0]
            .iter()
            .map(|&alpha| SweepRecord {
                alpha,
                terminal_err: 1.0 / alpha,
                control_err: 2.0 / alpha,
                state_err: None,
                solver_tag: SolverTag::HeatModal,
            })
            .collect();
        let fit = fit_loglog_slope(&records, ErrorField::Terminal, (None, None)).unwrap();
        assert_relative_eq!(fit.slope, -1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.r_squared, 1.0, max_relative = 1e-12);
        assert_eq!(fit.points, 4);
        assert_eq!(fit.window, (1.0, 1000.0));
    }

    #[test]
    fn rocket_window_fit_near_minus_one() {
        let problem = RocketProblem::new(1.0, 1.0).unwrap();
        let exp = Experiment::RocketAnalytic {
            problem,
            quadrature_points: 64,
        };
        let records = run_sweep(&exp, &AlphaGrid::default_rocket().build().unwrap()).unwrap();
        let gram = rocket::derived(&problem).gram;
        // min(αa) >= 10 keeps the slope within 0.05 of −1
        let fit = fit_asymptotic_slope(&records, ErrorField::Terminal, gram).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.05, "slope {}", fit.slope);
        // min(αa) >= 100 tightens it to 0.001
        let tight = fit_loglog_slope(
            &records,
            ErrorField::Terminal,
            (Some(asymptotic_alpha_min(gram, 100.0)), None),
        )
        .unwrap();
        assert!((tight.slope + 1.0).abs() < 1e-3, "slope {}", tight.slope);
    }

    #[test]
    fn heat_modal_reference_slope() {
        let p = single_mode_problem();
        let gram = p.mode(1).unwrap().gram;
        let exp = Experiment::HeatModal { problem: p };
        let records = run_sweep(&exp, &AlphaGrid::reference_heat().build().unwrap()).unwrap();
        let fit = fit_asymptotic_slope(&records, ErrorField::Terminal, gram).unwrap();
        // asymptotic window keeps α ∈ {500, 1000, 5000, 10000}
        assert_eq!(fit.points, 4);
        assert_relative_eq!(fit.slope, -0.9883, epsilon = 1e-3);
    }

    #[test]
    fn rate_bounds_hold_on_closed_form_sweep() {
        let p = single_mode_problem();
        let records = run_sweep(
            &Experiment::HeatModal { problem: p.clone() },
            &AlphaGrid::reference_heat().build().unwrap(),
        )
        .unwrap();
        let constants: Vec<RateConstants> = [0.0, 0.25, 0.5, 1.0]
            .iter()
            .map(|&t| heat::rate_constants(&p, t).unwrap())
            .collect();
        let report = check_rate_bounds(&records, &constants);
        assert!(report.violations().is_empty());
        // θ = 1/2, α = 100: bound C/α vs observed
        let c = heat::rate_constants(&p, 0.5).unwrap().value;
        let chk = report
            .checks
            .iter()
            .find(|c| c.theta == 0.5 && c.alpha == 100.0 && c.kind == BoundKind::Terminal)
            .unwrap();
        assert_relative_eq!(chk.bound, c / 100.0, max_relative = 1e-12);
        assert!(chk.observed <= chk.bound);
    }

    #[test]
    fn csv_round_trip() {
        let records = vec![
            SweepRecord {
                alpha: 1.0,
                terminal_err: 0.5,
                control_err: 0.25,
                state_err: Some(0.125),
                solver_tag: SolverTag::RocketAnalytic,
            },
            SweepRecord {
                alpha: 10.0,
                terminal_err: 0.05,
                control_err: 0.025,
                state_err: None,
                solver_tag: SolverTag::HeatModal,
            },
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &records).unwrap();
        let back = parse_records_csv(buf.as_slice()).unwrap();
        assert_eq!(back, records);

        let mut empty = Vec::new();
        write_csv(&mut empty, &[]).unwrap();
        assert_eq!(
            String::from_utf8(empty.clone()).unwrap(),
            "alpha,terminal_err,control_err,state_err,solver_tag\n"
        );
        assert!(parse_records_csv(empty.as_slice()).unwrap().is_empty());
    }

    #[test]
    fn emit_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = single_mode_problem();
        let records = run_sweep(
            &Experiment::HeatModal { problem: p },
            &AlphaGrid::reference_heat().build().unwrap(),
        )
        .unwrap();
        let fit = fit_loglog_slope(&records, ErrorField::Terminal, (None, None)).unwrap();
        let meta = serde_json::json!({"solver": "heat-modal"});
        let csv_path = dir.path().join("records.csv");
        let json_path = dir.path().join("summary.json");
        emit_records(&csv_path, EmitFormat::Csv, &records, &[fit], &meta).unwrap();
        emit_records(&json_path, EmitFormat::JsonSummary, &records, &[fit], &meta).unwrap();
        let body = std::fs::read_to_string(&csv_path).unwrap();
        assert_eq!(body.lines().count(), 9); // header + 8 alphas
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
        assert_eq!(summary["experiment"]["solver"], "heat-modal");
        assert!(summary["fits"][0]["slope"].is_number());
    }

    #[test]
    fn solver_tag_round_trip() {
        for tag in [
            SolverTag::RocketAnalytic,
            SolverTag::RocketFd,
            SolverTag::HeatModal,
            SolverTag::HeatFd,
        ] {
            assert_eq!(tag.as_str().parse::<SolverTag>().unwrap(), tag);
        }
        assert!("nope".parse::<SolverTag>().is_err());
    }
}
