//! Independent finite-difference optimizer for both model problems.
//!
//! The heat equation is discretized with Crank–Nicolson in time and the
//! standard second-difference Laplacian in space (homogeneous Dirichlet,
//! `nx` interior points). The control slice for step `k` is the value at the
//! step midpoint, consistent with the Crank–Nicolson stencil. Writing the
//! discrete terminal map as `y_T^h(u) = S y_0 + B u`, the penalized optimum
//! of `½‖u‖² + (α/2)‖B u − d̂‖²` is found exactly through the reduced
//! terminal-space system `(I + αG) m = d̂` with `G = B Bᵀ`, followed by one
//! adjoint application `u = α Bᵀ m`.
//!
//! Inner products are weighted: `dx` in space, `dx·dt` in space-time, so the
//! discrete quantities converge to their continuous counterparts under grid
//! refinement (second order in both `dx` and `dt`).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rocket::{self, RocketProblem};
use crate::util::pairwise_sum;

/// Uniform space-time grid on `(0,1) × (0,T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeGrid {
    nx: usize,
    nt: usize,
    horizon: f64,
}

impl SpaceTimeGrid {
    pub fn new(nx: usize, nt: usize, horizon: f64) -> Result<Self> {
        if nx < 3 {
            return Err(Error::InvalidProblem(format!("nx must be >= 3, got {nx}")));
        }
        if nt < 2 {
            return Err(Error::InvalidProblem(format!("nt must be >= 2, got {nt}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidProblem(format!(
                "horizon must be a positive finite number, got {horizon}"
            )));
        }
        Ok(Self { nx, nt, horizon })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.nx + 1) as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.nt as f64
    }

    /// Interior grid points `x_i = (i+1) dx`, `i = 0..nx`.
    pub fn interior_points(&self) -> Vec<f64> {
        (1..=self.nx).map(|i| i as f64 * self.dx()).collect()
    }

    /// Midpoint times `t_{k+1/2}`, one per step.
    pub fn midpoint_times(&self) -> Vec<f64> {
        (0..self.nt).map(|k| (k as f64 + 0.5) * self.dt()).collect()
    }

    /// Sample a function of `x` on the interior points.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> DVector<f64> {
        DVector::from_iterator(self.nx, self.interior_points().into_iter().map(f))
    }

    fn check_state(&self, v: &DVector<f64>, what: &str) -> Result<()> {
        if v.len() == self.nx {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{what} has length {}, grid has nx = {}",
                v.len(),
                self.nx
            )))
        }
    }

    fn check_control(&self, u: &DMatrix<f64>) -> Result<()> {
        if u.nrows() == self.nx && u.ncols() == self.nt {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "control is {}x{}, grid needs {}x{}",
                u.nrows(),
                u.ncols(),
                self.nx,
                self.nt
            )))
        }
    }
}

/// Weighted spatial inner product `⟨a, b⟩ = dx Σ a_i b_i`.
pub fn space_inner(grid: &SpaceTimeGrid, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let terms: Vec<f64> = a.iter().zip(b.iter()).map(|(x, y)| x * y).collect();
    grid.dx() * pairwise_sum(&terms)
}

pub fn space_norm(grid: &SpaceTimeGrid, v: &DVector<f64>) -> f64 {
    space_inner(grid, v, v).sqrt()
}

/// Weighted space-time inner product `⟨u, w⟩ = dx·dt Σ u_{ik} w_{ik}`.
pub fn spacetime_inner(grid: &SpaceTimeGrid, u: &DMatrix<f64>, w: &DMatrix<f64>) -> f64 {
    let terms: Vec<f64> = u.iter().zip(w.iter()).map(|(x, y)| x * y).collect();
    grid.dx() * grid.dt() * pairwise_sum(&terms)
}

pub fn spacetime_norm(grid: &SpaceTimeGrid, u: &DMatrix<f64>) -> f64 {
    spacetime_inner(grid, u, u).sqrt()
}

/// Solve `(I − (dt/2) L) x = rhs` in place, `L` the second-difference
/// operator, by the Thomas algorithm. The matrix is strictly diagonally
/// dominant for any `dt > 0`, so the elimination cannot break down.
fn solve_implicit(grid: &SpaceTimeGrid, rhs: &mut [f64]) {
    let r = grid.dt() / (2.0 * grid.dx() * grid.dx());
    let diag = 1.0 + 2.0 * r;
    let off = -r;
    let n = rhs.len();
    let mut cp = vec![0.0; n];
    cp[0] = off / diag;
    rhs[0] /= diag;
    for i in 1..n {
        let denom = diag - off * cp[i - 1];
        assert!(denom != 0.0, "tridiagonal solve broke down");
        cp[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= cp[i] * rhs[i + 1];
    }
}

/// Apply `(I + (dt/2) L)` to a state vector.
fn apply_explicit(grid: &SpaceTimeGrid, y: &DVector<f64>) -> Vec<f64> {
    let r = grid.dt() / (2.0 * grid.dx() * grid.dx());
    let n = y.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { y[i - 1] } else { 0.0 };
            let right = if i + 1 < n { y[i + 1] } else { 0.0 };
            y[i] + r * (left - 2.0 * y[i] + right)
        })
        .collect()
}

/// One Crank–Nicolson step of `y_t − y_xx = u`:
/// `(I − (dt/2)L) y⁺ = (I + (dt/2)L) y + dt·u_half`,
/// with `u_half` the control at the step midpoint.
pub fn step_heat(
    grid: &SpaceTimeGrid,
    state: &DVector<f64>,
    control_half: &DVector<f64>,
) -> Result<DVector<f64>> {
    grid.check_state(state, "state")?;
    grid.check_state(control_half, "control slice")?;
    let mut rhs = apply_explicit(grid, state);
    let dt = grid.dt();
    for (r, u) in rhs.iter_mut().zip(control_half.iter()) {
        *r += dt * u;
    }
    solve_implicit(grid, &mut rhs);
    Ok(DVector::from_vec(rhs))
}

/// March the full horizon; returns the terminal state.
pub fn solve_forward(
    grid: &SpaceTimeGrid,
    y0: &DVector<f64>,
    control: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    grid.check_state(y0, "initial state")?;
    grid.check_control(control)?;
    let mut y = y0.clone();
    for k in 0..grid.nt() {
        y = step_heat(grid, &y, &control.column(k).clone_owned())?;
    }
    Ok(y)
}

/// Like [`solve_forward`] but keeps the whole trajectory (`nt + 1` states).
pub fn solve_forward_trajectory(
    grid: &SpaceTimeGrid,
    y0: &DVector<f64>,
    control: &DMatrix<f64>,
) -> Result<Vec<DVector<f64>>> {
    grid.check_state(y0, "initial state")?;
    grid.check_control(control)?;
    let mut traj = Vec::with_capacity(grid.nt() + 1);
    traj.push(y0.clone());
    for k in 0..grid.nt() {
        let next = step_heat(grid, traj.last().unwrap(), &control.column(k).clone_owned())?;
        traj.push(next);
    }
    Ok(traj)
}

/// Terminal state of the uncontrolled (free-decay) evolution, `S y_0`.
pub fn free_terminal(grid: &SpaceTimeGrid, y0: &DVector<f64>) -> Result<DVector<f64>> {
    solve_forward(grid, y0, &DMatrix::zeros(grid.nx(), grid.nt()))
}

/// Control-to-terminal-state map `B u` (forward solve from the zero state).
pub fn apply_control_to_terminal(
    grid: &SpaceTimeGrid,
    control: &DMatrix<f64>,
) -> Result<DVector<f64>> {
    solve_forward(grid, &DVector::zeros(grid.nx()), control)
}

/// Adjoint `Bᵀ w` of the control-to-terminal map with respect to the
/// weighted inner products: a reverse-time sweep producing one control
/// slice per step.
pub fn apply_terminal_adjoint(grid: &SpaceTimeGrid, w: &DVector<f64>) -> Result<DMatrix<f64>> {
    grid.check_state(w, "terminal vector")?;
    let mut out = DMatrix::zeros(grid.nx(), grid.nt());
    let mut p: Vec<f64> = w.iter().copied().collect();
    for k in (0..grid.nt()).rev() {
        let mut slice = p.clone();
        solve_implicit(grid, &mut slice);
        out.column_mut(k)
            .iter_mut()
            .zip(&slice)
            .for_each(|(o, s)| *o = *s);
        // p ← A p with A = (I − (dt/2)L)⁻¹ (I + (dt/2)L)
        let mut q = apply_explicit(grid, &DVector::from_vec(p));
        solve_implicit(grid, &mut q);
        p = q;
    }
    Ok(out)
}

/// Reduced terminal Gram matrix `G = B Bᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalGram {
    grid: SpaceTimeGrid,
    matrix: DMatrix<f64>,
}

impl TerminalGram {
    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Assemble `G` column by column: column `j` is `B(Bᵀ e_j)`. Columns are
/// independent and computed in parallel; each lands in its own slot so the
/// result does not depend on thread count.
pub fn assemble_terminal_gram(grid: &SpaceTimeGrid) -> TerminalGram {
    let nx = grid.nx();
    let cols: Vec<Vec<f64>> = (0..nx)
        .into_par_iter()
        .map(|j| {
            let mut e = DVector::zeros(nx);
            e[j] = 1.0;
            let u = apply_terminal_adjoint(grid, &e).expect("shape is consistent");
            let col = apply_control_to_terminal(grid, &u).expect("shape is consistent");
            col.iter().copied().collect()
        })
        .collect();
    let mut matrix = DMatrix::zeros(nx, nx);
    for (j, col) in cols.iter().enumerate() {
        matrix.column_mut(j).iter_mut().zip(col).for_each(|(m, v)| *m = *v);
    }
    TerminalGram {
        grid: *grid,
        matrix,
    }
}

/// Result of the discrete penalized optimization.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSolution {
    /// Optimal control field, `nx × nt`, slice `k` at the midpoint of step `k`.
    pub control: DMatrix<f64>,
    /// Terminal state `S y_0 + B u`.
    pub terminal_state: DVector<f64>,
    /// `‖y_T^h(u) − y_T‖` in the `dx`-weighted norm.
    pub terminal_mismatch_norm: f64,
    /// `‖u‖` in the `dx·dt`-weighted norm.
    pub control_norm: f64,
}

/// Exact discrete penalized optimum via the reduced solve
/// `(I + αG) m = d̂`, `u = α Bᵀ m`. In the discrete model the terminal
/// mismatch equals `−m` exactly.
pub fn penalized_optimal_control_fd(
    grid: &SpaceTimeGrid,
    gram: &TerminalGram,
    y0: &DVector<f64>,
    y_target: &DVector<f64>,
    alpha: f64,
) -> Result<DiscreteSolution> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidAlpha {
            alpha,
            requirement: "nonnegative",
        });
    }
    if gram.grid != *grid {
        return Err(Error::ShapeMismatch(
            "terminal Gram was assembled for a different grid".into(),
        ));
    }
    grid.check_state(y0, "initial state")?;
    grid.check_state(y_target, "terminal target")?;
    let free = free_terminal(grid, y0)?;
    let dhat = y_target - &free;
    let nx = grid.nx();
    let system = DMatrix::identity(nx, nx) + alpha * gram.matrix();
    // I + αG is SPD for α ≥ 0 (G is a Gram matrix)
    let chol = system
        .cholesky()
        .expect("I + alpha*G is symmetric positive definite");
    let m = chol.solve(&dhat);
    let control = apply_terminal_adjoint(grid, &m)? * alpha;
    let terminal_state = &free + apply_control_to_terminal(grid, &control)?;
    let mismatch = &terminal_state - y_target;
    Ok(DiscreteSolution {
        terminal_mismatch_norm: space_norm(grid, &mismatch),
        control_norm: spacetime_norm(grid, &control),
        control,
        terminal_state,
    })
}

/// Discrete penalized solution of the rocket prototype on `nt` trapezoid
/// time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct RocketDiscreteSolution {
    /// Control samples at the `nt + 1` time nodes.
    pub control: Vec<f64>,
    /// Discrete Gram scalar `a_h = ⟨g, g⟩_h` (→ `T³/3` at rate `O(nt⁻²)`).
    pub gram: f64,
    /// `|⟨v_α, g⟩_h − d| = |d|/(1 + α a_h)`.
    pub terminal_mismatch: f64,
    /// `‖v_α − v_h*‖_h` against the discrete hard control.
    pub control_err: f64,
    /// Discrete `L²` norm of the trajectory difference.
    pub state_err: f64,
}

fn trapezoid_weights(nt: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; nt + 1];
    w[0] = dt / 2.0;
    w[nt] = dt / 2.0;
    w
}

/// Discrete trajectory `y_i = ∫₀^{t_i} (t_i − s)(v(s) − 1) ds` by trapezoid
/// over the nodes up to `t_i`.
fn rocket_trajectory(horizon: f64, nt: usize, v: &[f64]) -> Vec<f64> {
    let dt = horizon / nt as f64;
    (0..=nt)
        .map(|i| {
            if i == 0 {
                return 0.0;
            }
            let ti = i as f64 * dt;
            let terms: Vec<f64> = (0..=i)
                .map(|j| {
                    let w = if j == 0 || j == i { dt / 2.0 } else { dt };
                    w * (ti - j as f64 * dt) * (v[j] - 1.0)
                })
                .collect();
            pairwise_sum(&terms)
        })
        .collect()
}

/// Solve the trapezoid-discretized penalized rocket problem
/// `min ½‖v‖_h² + (α/2)|⟨v,g⟩_h − d|²` in closed rank-one form:
/// `v = (α d/(1 + α a_h)) g` with `g` sampled as `T − t`.
pub fn rocket_discrete_solve(
    problem: &RocketProblem,
    alpha: f64,
    nt: usize,
) -> Result<RocketDiscreteSolution> {
    if nt < 2 {
        return Err(Error::InvalidProblem(format!("nt must be >= 2, got {nt}")));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidAlpha {
            alpha,
            requirement: "nonnegative",
        });
    }
    let horizon = problem.horizon();
    let dt = horizon / nt as f64;
    let w = trapezoid_weights(nt, dt);
    let g: Vec<f64> = (0..=nt).map(|i| horizon - i as f64 * dt).collect();
    let gram_terms: Vec<f64> = g.iter().zip(&w).map(|(gi, wi)| wi * gi * gi).collect();
    let a_h = pairwise_sum(&gram_terms);
    let d = rocket::derived(problem).moment_target;

    let soft_coeff = alpha * d / (1.0 + alpha * a_h);
    let hard_coeff = d / a_h;
    let control: Vec<f64> = g.iter().map(|gi| soft_coeff * gi).collect();
    let hard: Vec<f64> = g.iter().map(|gi| hard_coeff * gi).collect();

    let damp = 1.0 / (1.0 + alpha * a_h);
    let terminal_mismatch = d.abs() * damp;
    // v_α − v_h* = −(1/(1+αa_h)) v_h*, so ‖·‖ = |d| damp / √a_h
    let control_err = d.abs() * damp / a_h.sqrt();

    let y_soft = rocket_trajectory(horizon, nt, &control);
    let y_hard = rocket_trajectory(horizon, nt, &hard);
    let diff_sq: Vec<f64> = y_soft
        .iter()
        .zip(&y_hard)
        .zip(&w)
        .map(|((a, b), wi)| wi * (a - b) * (a - b))
        .collect();
    let state_err = pairwise_sum(&diff_sq).sqrt();

    Ok(RocketDiscreteSolution {
        control,
        gram: a_h,
        terminal_mismatch,
        control_err,
        state_err,
    })
}
