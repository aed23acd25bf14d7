//! Closed-form modal treatment of the penalized heat control problem.
//!
//! On `(0,1)` with Dirichlet boundaries the eigenpairs are
//! `e_n(x) = √2 sin(nπx)`, `λ_n = (nπ)²`. Expanding the initial state `y_0`
//! and target `y_T` in that basis decouples the control problem into
//! independent scalar problems per mode, with
//!
//! * mismatch `d_n = y_{T,n} − e^{−λ_n T} y_{0,n}`,
//! * influence kernel `g_n(s) = e^{−λ_n (T−s)}`,
//! * Gram `a_n = ‖g_n‖² = (1 − e^{−2λ_n T})/(2λ_n)`.
//!
//! The hard minimum-energy control has modal amplitudes `c_n = d_n/a_n`
//! (control `u_n = c_n g_n`), the penalized one `c_{α,n} = α d_n/(1+α a_n)`,
//! and the error series, admissibility diagnostic, and rate constants all
//! reduce to weighted sums of `|d_n|²` over modes.
//!
//! All series are finite with truncation order `N`; sums use fixed-order
//! pairwise summation so results are bit-reproducible.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::util::{ols_line, pairwise_sum, trapezoid_uniform};

/// Default truncation order used by the CLI and the experiment defaults.
pub const DEFAULT_MODES: usize = 64;

/// Default sample count for [`sine_coefficients`] when projecting a
/// sampled function.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Coefficients `c_1..c_N` of a function in the orthonormal sine basis
/// `e_n(x) = √2 sin(nπx)`. By Parseval the `L²(0,1)` norm equals the
/// Euclidean norm of the coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SineSpectrum {
    coeffs: Vec<f64>,
}

impl SineSpectrum {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidProblem(
                "spectrum needs at least one coefficient".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProblem(
                "spectrum coefficients must be finite".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(truncation: usize) -> Self {
        Self {
            coeffs: vec![0.0; truncation.max(1)],
        }
    }

    /// Spectrum with a single nonzero entry at 1-based mode `n`.
    pub fn single_mode(n: usize, amplitude: f64) -> Self {
        let mut coeffs = vec![0.0; n.max(1)];
        coeffs[n.max(1) - 1] = amplitude;
        Self { coeffs }
    }

    /// Build coefficients from a rule `n ↦ c_n` for `n = 1..=truncation`.
    pub fn from_rule<F: Fn(usize) -> f64>(truncation: usize, rule: F) -> Result<Self> {
        Self::new((1..=truncation.max(1)).map(rule).collect())
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    /// 1-based coefficient access; zero beyond the truncation order.
    pub fn coefficient(&self, n: usize) -> f64 {
        if n >= 1 {
            self.coeffs.get(n - 1).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// `L²(0,1)` norm (= Euclidean norm of the coefficients).
    pub fn norm(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c * c).collect();
        pairwise_sum(&sq).sqrt()
    }

    /// Evaluate `Σ c_n e_n(x)` at `x ∈ [0,1]`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        check_position(x)?;
        let terms: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * basis(i + 1, x))
            .collect();
        Ok(pairwise_sum(&terms))
    }

    fn padded(&self, truncation: usize) -> SineSpectrum {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(truncation, 0.0);
        SineSpectrum { coeffs }
    }
}

/// Orthonormal basis function `e_n(x) = √2 sin(nπx)`.
pub fn basis(n: usize, x: f64) -> f64 {
    std::f64::consts::SQRT_2 * (n as f64 * PI * x).sin()
}

/// Dirichlet eigenvalue `λ_n = (nπ)²`.
pub fn eigenvalue(n: usize) -> f64 {
    let npi = n as f64 * PI;
    npi * npi
}

fn check_position(x: f64) -> Result<()> {
    if x.is_finite() && (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::PositionOutOfRange(x))
    }
}

fn check_alpha_nonneg(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha {
            alpha,
            requirement: "nonnegative",
        })
    }
}

/// Heat control problem: horizon, initial spectrum `y_0`, target spectrum
/// `y_T`, zero-padded to a common truncation order.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    horizon: f64,
    initial: SineSpectrum,
    target: SineSpectrum,
}

impl HeatProblem {
    pub fn new(horizon: f64, initial: SineSpectrum, target: SineSpectrum) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "horizon must be a positive finite number, got {horizon}"
            )));
        }
        let n = initial.truncation().max(target.truncation());
        Ok(Self {
            horizon,
            initial: initial.padded(n),
            target: target.padded(n),
        })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn initial(&self) -> &SineSpectrum {
        &self.initial
    }

    pub fn target(&self) -> &SineSpectrum {
        &self.target
    }

    pub fn truncation(&self) -> usize {
        self.initial.truncation()
    }

    /// Per-mode quantities for mode `n` (1-based, within the truncation).
    pub fn mode(&self, n: usize) -> Result<ModeQuantities> {
        mode_quantities(self, n)
    }

    /// Per-mode quantities for every mode within the truncation.
    pub fn modes(&self) -> Vec<ModeQuantities> {
        (1..=self.truncation())
            .map(|n| mode_quantities(self, n).expect("index within truncation"))
            .collect()
    }
}

/// Scalar quantities of one sine mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeQuantities {
    /// 1-based mode index.
    pub index: usize,
    /// `λ_n = (nπ)²`.
    pub eigenvalue: f64,
    /// `a_n = (1 − e^{−2λ_n T})/(2λ_n)`, the squared norm of the influence
    /// kernel. The exponential simply underflows for large `λ_n T`, giving
    /// the correct limit `1/(2λ_n)`.
    pub gram: f64,
    /// `d_n = y_{T,n} − e^{−λ_n T} y_{0,n}`.
    pub mismatch: f64,
}

impl ModeQuantities {
    /// Influence kernel `g_n(s) = e^{−λ_n (T−s)}` for `s ∈ [0, T]`.
    pub fn kernel(&self, horizon: f64, s: f64) -> f64 {
        (-self.eigenvalue * (horizon - s)).exp()
    }
}

pub fn mode_quantities(p: &HeatProblem, n: usize) -> Result<ModeQuantities> {
    let max = p.truncation();
    if n < 1 || n > max {
        return Err(Error::ModeOutOfRange { index: n, max });
    }
    let lambda = eigenvalue(n);
    let decay = (-lambda * p.horizon()).exp();
    Ok(ModeQuantities {
        index: n,
        eigenvalue: lambda,
        gram: (1.0 - decay * decay) / (2.0 * lambda),
        mismatch: p.target().coefficient(n) - decay * p.initial().coefficient(n),
    })
}

/// Project uniform samples of a function on `[0,1]` (endpoints included)
/// onto the first `modes` sine coefficients by composite trapezoid.
pub fn sine_coefficients(samples: &[f64], modes: usize) -> Result<SineSpectrum> {
    let modes = modes.max(1);
    let needed = 2 * modes + 2;
    if samples.len() < needed {
        return Err(Error::InsufficientResolution {
            points: samples.len(),
            modes,
            needed,
        });
    }
    let m = samples.len();
    let coeffs = (1..=modes)
        .map(|n| {
            let integrand: Vec<f64> = samples
                .iter()
                .enumerate()
                .map(|(i, f)| f * basis(n, i as f64 / (m - 1) as f64))
                .collect();
            trapezoid_uniform(&integrand, 0.0, 1.0)
        })
        .collect();
    SineSpectrum::new(coeffs)
}

/// How the admissibility partial sums behave as the mode count grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    ConvergentLooking,
    DivergentLooking,
}

impl std::fmt::Display for Admissibility {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Admissibility::ConvergentLooking => "convergent-looking",
            Admissibility::DivergentLooking => "divergent-looking",
        })
    }
}

/// Partial sums `E_M = Σ_{n≤M} |d_n|²/a_n` of the hard-control energy and a
/// growth classification.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    /// `E_1..E_N`, nondecreasing in `M`.
    pub partial_sums: Vec<f64>,
    /// Fitted slope of `log E_M` vs `log M` over the upper half of modes.
    pub growth_exponent: f64,
    pub classification: Admissibility,
}

/// Divergence heuristic: partial sums of `|d_n|²/a_n`, classified
/// divergent-looking when the fitted growth exponent over the upper half of
/// modes exceeds 0.5. The raw sums are returned so callers can apply their
/// own criterion.
pub fn admissibility_diagnostic(p: &HeatProblem) -> Result<AdmissibilityReport> {
    let n = p.truncation();
    if n < 4 {
        return Err(Error::InvalidProblem(format!(
            "admissibility diagnostic needs at least 4 modes, got {n}"
        )));
    }
    let mut partial_sums = Vec::with_capacity(n);
    let mut acc = 0.0;
    for m in p.modes() {
        acc += m.mismatch * m.mismatch / m.gram;
        partial_sums.push(acc);
    }
    // log–log fit over M = N/2 .. N, skipping zero sums
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for m in (n / 2)..=n {
        if m >= 1 && partial_sums[m - 1] > 0.0 {
            xs.push((m as f64).ln());
            ys.push(partial_sums[m - 1].ln());
        }
    }
    let growth_exponent = if xs.len() < 2 || xs.first() == xs.last() {
        0.0
    } else {
        ols_line(&xs, &ys).0
    };
    let classification = if growth_exponent > 0.5 {
        Admissibility::DivergentLooking
    } else {
        Admissibility::ConvergentLooking
    };
    Ok(AdmissibilityReport {
        partial_sums,
        growth_exponent,
        classification,
    })
}

/// Hard minimum-energy control in modal form: `u*(x,t) = Σ c_n g_n(t) e_n(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HardControl {
    /// Amplitudes `c_n = d_n/a_n`.
    pub amplitudes: Vec<f64>,
    /// `‖u*‖²_{L²(Q)} = Σ |d_n|²/a_n`.
    pub energy_sq: f64,
}

pub fn hard_control_coefficients(p: &HeatProblem) -> HardControl {
    let modes = p.modes();
    let amplitudes: Vec<f64> = modes.iter().map(|m| m.mismatch / m.gram).collect();
    let energy_terms: Vec<f64> = modes
        .iter()
        .map(|m| m.mismatch * m.mismatch / m.gram)
        .collect();
    HardControl {
        amplitudes,
        energy_sq: pairwise_sum(&energy_terms),
    }
}

/// Penalized control amplitudes `c_{α,n} = α d_n/(1+α a_n)`.
pub fn penalized_control_coefficients(p: &HeatProblem, alpha: f64) -> Result<Vec<f64>> {
    check_alpha_nonneg(alpha)?;
    Ok(p.modes()
        .iter()
        .map(|m| alpha * m.mismatch / (1.0 + alpha * m.gram))
        .collect())
}

/// Terminal spectrum of the penalized solution:
/// `y_{α,n}(T) = e^{−λ_n T} y_{0,n} + (α a_n/(1+α a_n)) d_n`.
pub fn penalized_terminal_spectrum(p: &HeatProblem, alpha: f64) -> Result<SineSpectrum> {
    check_alpha_nonneg(alpha)?;
    let coeffs = p
        .modes()
        .iter()
        .map(|m| {
            let decay = (-m.eigenvalue * p.horizon()).exp();
            decay * p.initial().coefficient(m.index)
                + alpha * m.gram / (1.0 + alpha * m.gram) * m.mismatch
        })
        .collect();
    SineSpectrum::new(coeffs)
}

fn check_alpha_pos(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha {
            alpha,
            requirement: "positive",
        })
    }
}

/// `‖y_α(·,T) − y_T‖_{L²(0,1)} = (Σ d_n²/(1+α a_n)²)^{1/2}`.
pub fn terminal_error(p: &HeatProblem, alpha: f64) -> Result<f64> {
    check_alpha_pos(alpha)?;
    let terms: Vec<f64> = p
        .modes()
        .iter()
        .map(|m| {
            let r = m.mismatch / (1.0 + alpha * m.gram);
            r * r
        })
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// `‖u_α* − u*‖_{L²(Q)} = (Σ d_n²/(a_n (1+α a_n)²))^{1/2}`.
pub fn control_error(p: &HeatProblem, alpha: f64) -> Result<f64> {
    check_alpha_pos(alpha)?;
    let terms: Vec<f64> = p
        .modes()
        .iter()
        .map(|m| {
            let r = m.mismatch / (1.0 + alpha * m.gram);
            r * r / m.gram
        })
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// Penalized control energy `‖u_α*‖²_{L²(Q)} = Σ c_{α,n}² a_n`, increasing
/// in `α` and bounded by the hard energy.
pub fn penalized_energy_sq(p: &HeatProblem, alpha: f64) -> Result<f64> {
    check_alpha_nonneg(alpha)?;
    let terms: Vec<f64> = p
        .modes()
        .iter()
        .map(|m| {
            let c = alpha * m.mismatch / (1.0 + alpha * m.gram);
            c * c * m.gram
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Non-asymptotic rate constant for exponent `θ`:
/// `C_θ = D_θ = (Σ |d_n|²/a_n^{1+2θ})^{1/2}`.
///
/// The bounds `terminal_error(α) ≤ C_θ α^{−(1/2+θ)}` (for `θ ≤ 1/2`) and
/// `control_error(α) ≤ D_θ α^{−θ}` (for `0 < θ ≤ 1`) hold for every `α ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub theta: f64,
    pub value: f64,
}

pub fn rate_constants(p: &HeatProblem, theta: f64) -> Result<RateConstants> {
    if !theta.is_finite() || !(0.0..=1.0).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let terms: Vec<f64> = p
        .modes()
        .iter()
        .map(|m| m.mismatch * m.mismatch / m.gram.powf(1.0 + 2.0 * theta))
        .collect();
    Ok(RateConstants {
        theta,
        value: pairwise_sum(&terms).sqrt(),
    })
}

/// State value at `(x, t)` under the modal control `u_n = c_n g_n`:
///
/// `y_n(t) = e^{−λ_n t} y_{0,n} + c_n e^{−λ_n (T−t)} (1 − e^{−2λ_n t})/(2λ_n)`.
pub fn modal_state(p: &HeatProblem, amplitudes: &[f64], x: f64, t: f64) -> Result<f64> {
    check_position(x)?;
    if !t.is_finite() || !(0.0..=p.horizon()).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            horizon: p.horizon(),
        });
    }
    if amplitudes.len() != p.truncation() {
        return Err(Error::ShapeMismatch(format!(
            "{} amplitudes for {} modes",
            amplitudes.len(),
            p.truncation()
        )));
    }
    let terms: Vec<f64> = p
        .modes()
        .iter()
        .zip(amplitudes)
        .map(|(m, c)| {
            let lam = m.eigenvalue;
            let decay_t = (-lam * t).exp();
            let yn = decay_t * p.initial().coefficient(m.index)
                + c * (-lam * (p.horizon() - t)).exp() * (1.0 - decay_t * decay_t) / (2.0 * lam);
            yn * basis(m.index, x)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// Write a spectrum in the plain-text interchange format: a header line
/// `T=<value> N=<value>` followed by one `n <tab> coefficient` line per mode.
pub fn write_spectrum<W: Write>(w: &mut W, horizon: f64, s: &SineSpectrum) -> std::io::Result<()> {
    writeln!(w, "T={} N={}", horizon, s.truncation())?;
    for (i, c) in s.coefficients().iter().enumerate() {
        writeln!(w, "{}\t{}", i + 1, c)?;
    }
    Ok(())
}

/// Parse the plain-text spectrum format; returns the horizon and spectrum.
pub fn read_spectrum<R: BufRead>(r: &mut R) -> Result<(f64, SineSpectrum)> {
    let mut header = String::new();
    r.read_line(&mut header)
        .map_err(|e| Error::parse("<spectrum>", e.to_string()))?;
    let header = header.trim();
    let mut horizon = None;
    let mut n = None;
    for field in header.split_whitespace() {
        if let Some(v) = field.strip_prefix("T=") {
            horizon = v.parse::<f64>().ok();
        } else if let Some(v) = field.strip_prefix("N=") {
            n = v.parse::<usize>().ok();
        }
    }
    let (horizon, n) = match (horizon, n) {
        (Some(t), Some(n)) if n >= 1 => (t, n),
        _ => {
            return Err(Error::parse(
                header,
                "expected header \"T=<value> N=<value>\"",
            ))
        }
    };
    let mut coeffs = vec![0.0; n];
    for line in r.lines() {
        let line = line.map_err(|e| Error::parse("<spectrum>", e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let idx: usize = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(line, "expected \"n <tab> coefficient\""))?;
        let val: f64 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::parse(line, "expected \"n <tab> coefficient\""))?;
        if idx < 1 || idx > n {
            return Err(Error::parse(line, format!("mode index outside 1..={n}")));
        }
        coeffs[idx - 1] = val;
    }
    Ok((horizon, SineSpectrum::new(coeffs)?))
}
