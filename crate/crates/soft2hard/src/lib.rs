//! Soft-to-hard terminal constraint penalization for linear control problems.
//!
//! The crate implements two model problems in which a hard terminal
//! constraint `y(T) = y_T` is replaced by a quadratic penalty
//! `(α/2)‖y(T) − y_T‖²` and the penalized optimum converges to the
//! hard-constrained one as `α → ∞`:
//!
//! * [`rocket`] — a second-order system `y'' = v − 1` whose terminal
//!   condition reduces to a single scalar moment of the control. Hard and
//!   penalized optima are closed-form.
//! * [`heat`] — the 1-D heat equation on `(0,1)` with distributed control,
//!   decoupled into independent scalar problems per Dirichlet sine mode.
//!   Includes admissibility diagnostics and non-asymptotic rate constants.
//! * [`fd`] — an independent Crank–Nicolson finite-difference optimizer
//!   used as a brute-force oracle for both problems.
//! * [`sweep`] — penalty sweeps over α, log–log slope fitting and rate
//!   bound checks, with CSV/JSON output.
//! * [`cli`] — the `soft2hard` command-line front end.

pub mod cli;
pub mod config;
pub mod error;
pub mod expr;
pub mod fd;
pub mod heat;
pub mod rocket;
pub mod sweep;
pub mod util;

pub use error::{Error, Result};
