//! Closed-form solutions of the rocket prototype.
//!
//! The system `y'' = v − 1`, `y(0) = y'(0) = 0` with terminal condition
//! `y(T) = y_T` reduces to the single scalar moment constraint
//! `⟨v, g⟩ = d` with `g(t) = T − t` and `d = y_T + T²/2`. The minimum-energy
//! control is the projection of the origin onto that hyperplane,
//! `v*(t) = (d/a) g(t)` with `a = ‖g‖² = T³/3`, and the quadratic penalty
//! version is the contraction `v_α* = β_α v*`, `β_α = αa/(1+αa)`.
//!
//! Everything here is a pure pointwise evaluator; the only quadrature is the
//! `L²(0,T)` state-error norm, for which no closed form is stated.

use crate::error::{Error, Result};
use crate::util::simpson;

/// Rocket problem data: horizon `T > 0` and terminal position target `y_T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocketProblem {
    horizon: f64,
    target: f64,
}

impl RocketProblem {
    pub fn new(horizon: f64, target: f64) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "horizon must be a positive finite number, got {horizon}"
            )));
        }
        if !target.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "target must be finite, got {target}"
            )));
        }
        Ok(Self { horizon, target })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if t.is_finite() && (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            Err(Error::TimeOutOfRange {
                t,
                horizon: self.horizon,
            })
        }
    }
}

/// Scalars derived from a [`RocketProblem`]: the moment target `d` and the
/// Gram scalar `a = ‖g‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocketDerived {
    /// `d = y_T + T²/2`, the part of the terminal condition the control
    /// must supply.
    pub moment_target: f64,
    /// `a = ‖g‖² = T³/3`.
    pub gram: f64,
}

impl RocketDerived {
    /// Contraction factor `β_α = αa/(1+αa)`, in `(0,1)` for `α > 0` and
    /// strictly increasing in `α`.
    pub fn contraction(&self, alpha: f64) -> f64 {
        let aa = alpha * self.gram;
        aa / (1.0 + aa)
    }
}

pub fn derived(p: &RocketProblem) -> RocketDerived {
    let t = p.horizon();
    RocketDerived {
        moment_target: p.target() + t * t / 2.0,
        gram: t * t * t / 3.0,
    }
}

/// Minimum-energy hard-constrained control `v*(t) = (d/a)(T − t)`.
pub fn hard_control(p: &RocketProblem, t: f64) -> Result<f64> {
    p.check_time(t)?;
    let d = derived(p);
    Ok(d.moment_target / d.gram * (p.horizon() - t))
}

/// Hard-constrained state `y*(t) = (d/(2T³)) t²(3T − t) − t²/2`.
///
/// Satisfies `y*(0) = 0` and `y*(T) = y_T`.
pub fn hard_state(p: &RocketProblem, t: f64) -> Result<f64> {
    p.check_time(t)?;
    let big_t = p.horizon();
    let d = derived(p).moment_target;
    Ok(d / (2.0 * big_t.powi(3)) * t * t * (3.0 * big_t - t) - t * t / 2.0)
}

fn check_alpha(alpha: f64, strictly_positive: bool) -> Result<()> {
    let ok = alpha.is_finite() && if strictly_positive { alpha > 0.0 } else { alpha >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidAlpha {
            alpha,
            requirement: if strictly_positive {
                "positive"
            } else {
                "nonnegative"
            },
        })
    }
}

/// Penalized control `v_α*(t) = β_α v*(t)`. At `α = 0` this is the zero
/// control, the unpenalized minimizer of `½‖v‖²`.
pub fn penalized_control(p: &RocketProblem, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha, false)?;
    let beta = derived(p).contraction(alpha);
    Ok(beta * hard_control(p, t)?)
}

/// Penalized state `y_α*(t) = β_α (y*(t) + t²/2) − t²/2`.
pub fn penalized_state(p: &RocketProblem, alpha: f64, t: f64) -> Result<f64> {
    check_alpha(alpha, false)?;
    let beta = derived(p).contraction(alpha);
    Ok(beta * (hard_state(p, t)? + t * t / 2.0) - t * t / 2.0)
}

/// Soft-to-hard errors of the penalized solution at a given `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocketErrors {
    /// `‖v_α* − v*‖_{L²(0,T)} = ‖v*‖/(1+αa) = |d|/(√a (1+αa))`.
    pub control_err: f64,
    /// `‖y_α* − y*‖_{L²(0,T)} = ‖y* + t²/2‖/(1+αa)`, norm by quadrature.
    pub state_err: f64,
    /// `|y_α*(T) − y_T| = |d|/(1+αa)`.
    pub terminal_mismatch: f64,
}

/// All three error norms for `α > 0`. The state-error norm is computed with
/// composite Simpson quadrature on `quadrature_points` panels (at least 64
/// are used regardless; the squared integrand is degree 6).
pub fn errors(p: &RocketProblem, alpha: f64, quadrature_points: usize) -> Result<RocketErrors> {
    check_alpha(alpha, true)?;
    if quadrature_points < 2 {
        return Err(Error::InvalidProblem(format!(
            "need at least 2 quadrature points, got {quadrature_points}"
        )));
    }
    let d = derived(p);
    let damp = 1.0 / (1.0 + alpha * d.gram);
    let control_err = d.moment_target.abs() / d.gram.sqrt() * damp;
    let terminal_mismatch = d.moment_target.abs() * damp;
    // ‖y* + t²/2‖² = ∫ (d/(2T³))² t⁴ (3T − t)² dt
    let big_t = p.horizon();
    let c = d.moment_target / (2.0 * big_t.powi(3));
    let sq = simpson(
        |t| {
            let v = c * t * t * (3.0 * big_t - t);
            v * v
        },
        0.0,
        big_t,
        quadrature_points.max(64),
    );
    Ok(RocketErrors {
        control_err,
        state_err: sq.sqrt() * damp,
        terminal_mismatch,
    })
}
