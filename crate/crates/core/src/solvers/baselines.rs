use crate::error::{check_len, Error, Result};
use crate::linop::LinearOperator;
use crate::problems::{Objective, SaddleProblem, Side};
use crate::prox::ProxFn;
use crate::vector;

use super::config::BaselineConfig;

/// Shrinks allowed in one linesearch before giving up.
pub const MAX_LINESEARCH_SHRINKS: usize = 200;

/// Iterate of the comparison methods.
///
/// Field meaning per method:
/// * PDA: `z_cur` is the extrapolated point, `tau` the primal step.
/// * PDA-L: `z_cur` is the last `x̄`, `tau`/`theta` the last accepted step
///   and ratio, `kx_cur` caches `Kx_cur`.
/// * PGM/FISTA: `z_cur` is the momentum point, `tau` the current step, `t`
///   the momentum parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineState {
    pub x_prev: Vec<f64>,
    pub x_cur: Vec<f64>,
    pub y_cur: Vec<f64>,
    pub z_cur: Vec<f64>,
    pub kty_cur: Vec<f64>,
    pub kx_cur: Vec<f64>,
    pub tau: f64,
    pub theta: f64,
    pub t: f64,
    pub iter: usize,
    pub backtracks: usize,
}

fn stall(iter: usize) -> Error {
    Error::LinesearchStall {
        iter,
        shrinks: MAX_LINESEARCH_SHRINKS,
    }
}

fn check_finite(state: &BaselineState) -> Result<()> {
    if vector::all_finite(&state.x_cur) && vector::all_finite(&state.y_cur) && state.tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Divergence { iter: state.iter })
    }
}

/// Initial state for every comparison method. `tau` is the starting step of
/// the chosen method.
pub fn init_baseline(problem: &SaddleProblem, x0: &[f64], y0: &[f64], tau: f64, theta: f64) -> Result<BaselineState> {
    check_len("initial primal point", problem.primal_dim(), x0.len())?;
    check_len("initial dual point", problem.dual_dim(), y0.len())?;
    Ok(BaselineState {
        x_prev: x0.to_vec(),
        x_cur: x0.to_vec(),
        y_cur: y0.to_vec(),
        z_cur: x0.to_vec(),
        kty_cur: problem.op.adjoint_apply(y0)?,
        kx_cur: problem.op.apply(x0)?,
        tau,
        theta,
        t: 1.0,
        iter: 0,
        backtracks: 0,
    })
}

/// Initial PDA-L step `√min(m, n)/‖K‖_F`.
pub fn pdal_initial_step(op: &LinearOperator) -> f64 {
    let fro = op.frobenius_norm();
    if fro == 0.0 {
        1.0
    } else {
        (op.rows().min(op.cols()) as f64).sqrt() / fro
    }
}

/// Fixed-step PDA with `δ = 1`.
pub fn pda_iterate(state: &mut BaselineState, problem: &SaddleProblem, bcfg: &BaselineConfig) -> Result<()> {
    let (tau, sigma) = (bcfg.tau, bcfg.sigma);
    let kz = problem.op.apply(&state.z_cur)?;
    let y = problem
        .fstar
        .prox(&vector::add_scaled(&state.y_cur, sigma, &kz), sigma)?;
    let kty = problem.op.adjoint_apply(&y)?;
    let x = problem.g.prox(&vector::add_scaled(&state.x_cur, -tau, &kty), tau)?;
    state.z_cur = vector::extrapolate(&x, &state.x_cur, 1.0);
    state.x_prev = std::mem::replace(&mut state.x_cur, x);
    state.y_cur = y;
    state.kty_cur = kty;
    state.tau = tau;
    state.iter += 1;
    check_finite(state)
}

/// Primal-dual method with linesearch on the dual step.
pub fn pdal_iterate(state: &mut BaselineState, problem: &SaddleProblem, bcfg: &BaselineConfig) -> Result<()> {
    let beta = bcfg.beta;
    let tau_prev = state.tau;
    let x = problem
        .g
        .prox(&vector::add_scaled(&state.x_cur, -tau_prev, &state.kty_cur), tau_prev)?;
    let kx = problem.op.apply(&x)?;
    let mut tau = tau_prev * (1.0 + state.theta).sqrt();
    let mut shrinks = 0;
    loop {
        let theta = tau / tau_prev;
        let kxbar: Vec<f64> = kx.iter().zip(&state.kx_cur).map(|(a, b)| a + theta * (a - b)).collect();
        let s = beta * tau;
        let y = problem.fstar.prox(&vector::add_scaled(&state.y_cur, s, &kxbar), s)?;
        let kty = problem.op.adjoint_apply(&y)?;
        let lhs = beta.sqrt() * tau * vector::dist(&kty, &state.kty_cur);
        let rhs = bcfg.alpha_ls * vector::dist(&y, &state.y_cur);
        if lhs <= rhs {
            state.z_cur = vector::extrapolate(&x, &state.x_cur, theta);
            state.x_prev = std::mem::replace(&mut state.x_cur, x);
            state.kx_cur = kx;
            state.y_cur = y;
            state.kty_cur = kty;
            state.tau = tau;
            state.theta = theta;
            state.backtracks += shrinks;
            state.iter += 1;
            return check_finite(state);
        }
        if shrinks == MAX_LINESEARCH_SHRINKS {
            return Err(stall(state.iter));
        }
        tau *= bcfg.mu_ls;
        shrinks += 1;
    }
}

/// Smooth part `h(x) = ½‖Ax − b‖²` and regularizer of a least-squares
/// problem posed on its primal side.
pub struct SmoothSplit<'a> {
    pub matrix: &'a LinearOperator,
    pub b: &'a [f64],
    pub reg: &'a ProxFn,
}

impl<'a> SmoothSplit<'a> {
    pub fn of(problem: &'a SaddleProblem) -> Result<Self> {
        match &problem.objective {
            Objective::LeastSquares {
                matrix,
                b,
                side: Side::Primal,
                ..
            } => Ok(Self {
                matrix,
                b,
                reg: &problem.g,
            }),
            _ => Err(Error::UnsupportedMetric(format!(
                "problem '{}' has no primal least-squares split",
                problem.label
            ))),
        }
    }

    /// `h(x)` and `∇h(x) = A*(Ax − b)`.
    pub fn value_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let r = vector::sub(&self.matrix.apply(x)?, self.b);
        Ok((0.5 * vector::norm_sq(&r), self.matrix.adjoint_apply(&r)?))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        let r = vector::sub(&self.matrix.apply(x)?, self.b);
        Ok(0.5 * vector::norm_sq(&r))
    }
}

/// Proximal gradient step with a fixed step.
pub fn pgm_iterate(state: &mut BaselineState, problem: &SaddleProblem, bcfg: &BaselineConfig) -> Result<()> {
    let split = SmoothSplit::of(problem)?;
    let (_, grad) = split.value_grad(&state.x_cur)?;
    let x = split
        .reg
        .prox(&vector::add_scaled(&state.x_cur, -bcfg.step, &grad), bcfg.step)?;
    state.x_prev = std::mem::replace(&mut state.x_cur, x);
    state.z_cur = state.x_cur.clone();
    state.tau = bcfg.step;
    state.iter += 1;
    check_finite(state)
}

/// Next FISTA momentum parameter.
pub fn fista_momentum(t: f64) -> f64 {
    (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0
}

/// Accelerated proximal gradient with backtracking on the step.
///
/// For `h(x) = ½‖Ax − b‖²` the upper-bound test
/// `h(x⁺) ≤ h(v) + ⟨∇h(v), x⁺ − v⟩ + ‖x⁺ − v‖²/(2λ)` is exactly
/// `λ‖A(x⁺ − v)‖² ≤ ‖x⁺ − v‖²`, which is evaluated instead to avoid
/// cancellation near convergence.
pub fn fista_iterate(state: &mut BaselineState, problem: &SaddleProblem, bcfg: &BaselineConfig) -> Result<()> {
    let split = SmoothSplit::of(problem)?;
    let v = &state.z_cur;
    let (_, grad) = split.value_grad(v)?;
    let mut lam = state.tau;
    let mut shrinks = 0;
    let x = loop {
        let x = split.reg.prox(&vector::add_scaled(v, -lam, &grad), lam)?;
        let d = vector::sub(&x, v);
        let ad = split.matrix.apply(&d)?;
        if lam * vector::norm_sq(&ad) <= vector::norm_sq(&d) {
            break x;
        }
        if shrinks == MAX_LINESEARCH_SHRINKS {
            return Err(stall(state.iter));
        }
        lam *= bcfg.fista_beta;
        shrinks += 1;
    };
    let t_next = fista_momentum(state.t);
    let w = (state.t - 1.0) / t_next;
    state.z_cur = vector::extrapolate(&x, &state.x_cur, w);
    state.x_prev = std::mem::replace(&mut state.x_cur, x);
    state.t = t_next;
    state.tau = lam;
    state.backtracks += shrinks;
    state.iter += 1;
    check_finite(state)
}
