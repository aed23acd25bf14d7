//! Experiment configuration: JSON config files, flag overlays, validation.
//!
//! A config names a problem kind, its parameters, a solver, the α grid, and
//! output options. Heat targets and initial states may be given as a sine
//! combination (`"sin(pi x)"`), a coefficient rule (`"d_n = 1/n"`), a path
//! to a spectrum file, or inline coefficients.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr;
use crate::heat::{self, HeatProblem, SineSpectrum, DEFAULT_MODES};
use crate::rocket::RocketProblem;
use crate::sweep::AlphaGrid;

/// Default finite-difference grid for the heat experiments.
pub const DEFAULT_NX: usize = 63;
/// Default time-step count (matches the rocket reference experiment).
pub const DEFAULT_NT: usize = 80;
/// Default θ list for rate constants and bound checks.
pub const DEFAULT_THETAS: [f64; 4] = [0.0, 0.25, 0.5, 1.0];
/// Default quadrature panel count for the rocket state-error norm.
pub const DEFAULT_QUADRATURE_POINTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// A heat-state specification: sine combination, coefficient rule, spectrum
/// file, or inline coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Inline(Vec<f64>),
    Text(String),
}

impl StateSpec {
    /// Resolve to a spectrum with at least `modes` coefficients.
    ///
    /// Text resolution order: an existing file path wins, then a sine
    /// combination (anything containing `sin`), then a coefficient rule.
    pub fn resolve(&self, key: &str, modes: usize) -> Result<SineSpectrum> {
        match self {
            StateSpec::Inline(coeffs) => SineSpectrum::new(coeffs.clone())
                .map_err(|e| Error::config(key, e.to_string())),
            StateSpec::Text(text) => {
                let trimmed = text.trim();
                if Path::new(trimmed).is_file() {
                    let file = File::open(trimmed).map_err(|e| Error::io(trimmed, e))?;
                    let (_, spectrum) = heat::read_spectrum(&mut BufReader::new(file))?;
                    return Ok(spectrum);
                }
                if trimmed.contains("sin") {
                    let terms = expr::parse_sine_target(trimmed)
                        .map_err(|e| Error::config(key, e.to_string()))?;
                    let max_k = terms.iter().map(|(k, _)| *k).max().unwrap_or(1);
                    let mut coeffs = vec![0.0; max_k.max(1)];
                    for (k, amp) in terms {
                        // sin(kπx) = e_k/√2 in the orthonormal basis
                        coeffs[k - 1] += amp / std::f64::consts::SQRT_2;
                    }
                    return SineSpectrum::new(coeffs)
                        .map_err(|e| Error::config(key, e.to_string()));
                }
                let rule =
                    expr::parse_rule(trimmed).map_err(|e| Error::config(key, e.to_string()))?;
                SineSpectrum::from_rule(modes, |n| rule.evaluate(n))
                    .map_err(|e| Error::config(key, e.to_string()))
            }
        }
    }
}

/// An α-grid specification: `"log:lo:hi:count"`, `"linear:lo:hi:count"`, a
/// comma-separated explicit list, or a JSON array of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaGridSpec {
    Values(Vec<f64>),
    Text(String),
}

impl AlphaGridSpec {
    pub fn to_grid(&self) -> Result<AlphaGrid> {
        match self {
            AlphaGridSpec::Values(v) => Ok(AlphaGrid::Explicit(v.clone())),
            AlphaGridSpec::Text(text) => parse_alpha_grid(text),
        }
    }
}

pub fn parse_alpha_grid(text: &str) -> Result<AlphaGrid> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::InvalidAlphaGrid(format!("bad number \"{s}\" in \"{text}\"")))
    };
    match parts.as_slice() {
        [kind @ ("log" | "linear"), lo, hi, count] => {
            let count = count
                .trim()
                .parse()
                .map_err(|_| Error::InvalidAlphaGrid(format!("bad count in \"{text}\"")))?;
            let (lo, hi) = (num(lo)?, num(hi)?);
            Ok(if *kind == "log" {
                AlphaGrid::Log { lo, hi, count }
            } else {
                AlphaGrid::Linear { lo, hi, count }
            })
        }
        [list] => {
            let values = list
                .split(',')
                .map(|v| num(v))
                .collect::<Result<Vec<f64>>>()?;
            Ok(AlphaGrid::Explicit(values))
        }
        _ => Err(Error::InvalidAlphaGrid(format!(
            "\"{text}\" (expected log:lo:hi:count, linear:lo:hi:count, or a comma list)"
        ))),
    }
}

/// User-facing experiment configuration; every field optional so a JSON
/// config and command-line flags can be overlaid before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub horizon: Option<f64>,
    /// Rocket terminal position `y_T`.
    pub target_position: Option<f64>,
    /// Heat initial state; defaults to zero.
    pub initial: Option<StateSpec>,
    /// Heat terminal target.
    pub target: Option<StateSpec>,
    pub alpha_grid: Option<AlphaGridSpec>,
    pub modes: Option<usize>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    pub theta: Option<Vec<f64>>,
    pub quadrature_points: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub strict: Option<bool>,
    /// Absolute per-α discrepancy budget for `compare`.
    pub budget: Option<f64>,
}

impl ExperimentConfig {
    /// Read a JSON config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::config(
            path.display().to_string(),
            e.to_string(),
        ))
    }

    /// Overlay `other` on `self`: fields set in `other` win.
    pub fn overlay(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if other.$field.is_some() { self.$field = other.$field; })*
            };
        }
        take!(
            horizon,
            target_position,
            initial,
            target,
            alpha_grid,
            modes,
            nx,
            nt,
            theta,
            quadrature_points,
            out,
            format,
            strict,
            budget
        );
        self
    }

    pub fn horizon(&self) -> Result<f64> {
        let t = self.horizon.unwrap_or(1.0);
        if t > 0.0 && t.is_finite() {
            Ok(t)
        } else {
            Err(Error::config("horizon", format!("must be positive, got {t}")))
        }
    }

    pub fn modes(&self) -> usize {
        self.modes.unwrap_or(DEFAULT_MODES)
    }

    pub fn nx(&self) -> usize {
        self.nx.unwrap_or(DEFAULT_NX)
    }

    pub fn nt(&self) -> usize {
        self.nt.unwrap_or(DEFAULT_NT)
    }

    pub fn thetas(&self) -> Result<Vec<f64>> {
        let thetas = self.theta.clone().unwrap_or_else(|| DEFAULT_THETAS.to_vec());
        for t in &thetas {
            if !(0.0..=1.0).contains(t) {
                return Err(Error::config("theta", format!("{t} outside [0, 1]")));
            }
        }
        Ok(thetas)
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points.unwrap_or(DEFAULT_QUADRATURE_POINTS)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn strict(&self) -> bool {
        self.strict.unwrap_or(false)
    }

    pub fn budget(&self) -> f64 {
        self.budget.unwrap_or(2e-3)
    }

    /// Build the rocket problem (`y_T` defaults to 1).
    pub fn rocket_problem(&self) -> Result<RocketProblem> {
        RocketProblem::new(self.horizon()?, self.target_position.unwrap_or(1.0))
            .map_err(|e| Error::config("horizon/target_position", e.to_string()))
    }

    /// Build the heat problem from the target and (optional) initial specs.
    pub fn heat_problem(&self) -> Result<HeatProblem> {
        let modes = self.modes();
        let target = self
            .target
            .as_ref()
            .ok_or_else(|| Error::config("target", "heat experiments need a target"))?
            .resolve("target", modes)?;
        let initial = match &self.initial {
            Some(spec) => spec.resolve("initial", modes)?,
            None => SineSpectrum::zeros(target.truncation()),
        };
        HeatProblem::new(self.horizon()?, initial, target)
            .map_err(|e| Error::config("horizon", e.to_string()))
    }

    /// The α grid, with a per-problem-kind default.
    pub fn alpha_values(&self, heat: bool) -> Result<Vec<f64>> {
        let grid = match &self.alpha_grid {
            Some(spec) => spec.to_grid()?,
            None if heat => AlphaGrid::reference_heat(),
            None => AlphaGrid::default_rocket(),
        };
        grid.build()
    }
}
