use crate::error::{check_len, Error, Result};
use crate::problems::SaddleProblem;
use crate::vector;

use super::config::{local_step, phi_schedule, predict_step, SolverConfig};

/// Shrinks allowed in one correction pass before giving up.
pub const MAX_CORRECTION_SHRINKS: usize = 200;

/// Iterate of the adaptive methods after `iter` outer iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x_prev: Vec<f64>,
    pub x_cur: Vec<f64>,
    pub y_prev: Vec<f64>,
    pub y_cur: Vec<f64>,
    /// Extrapolated point `zₙ` of the last iteration.
    pub z_cur: Vec<f64>,
    /// Step that produced `x_cur`, after correction (`λₙ₋₁`).
    pub lam_used: f64,
    /// `λₙ`, the primal step of the next iteration.
    pub lam_cur: f64,
    /// `λₙ₊₁`, the dual step of the next iteration.
    pub lam_next: f64,
    pub beta_prev: f64,
    pub beta_cur: f64,
    pub zeta0: f64,
    pub zeta_cur: f64,
    pub iter: usize,
    pub correction_backtracks: usize,
    /// `K*yₙ`
    pub kty_cur: Vec<f64>,
    /// `K*yₙ₋₁`
    pub kty_prev: Vec<f64>,
}

/// Sets up iteration 0 and computes `ζ₀`.
pub fn init_state(problem: &SaddleProblem, x0: &[f64], y0: &[f64], cfg: &SolverConfig) -> Result<SolverState> {
    cfg.validate()?;
    check_len("initial primal point", problem.primal_dim(), x0.len())?;
    check_len("initial dual point", problem.dual_dim(), y0.len())?;
    let lam = cfg.lambda0;
    let kty = problem.op.adjoint_apply(y0)?;
    let kx = problem.op.apply(x0)?;
    let xp = problem.g.prox(&vector::add_scaled(x0, -lam, &kty), lam)?;
    let s = cfg.beta0 * lam;
    let yp = problem.fstar.prox(&vector::add_scaled(y0, s, &kx), s)?;
    let zeta0 = vector::dist(x0, &xp).max(vector::dist(y0, &yp));
    Ok(SolverState {
        x_prev: x0.to_vec(),
        x_cur: x0.to_vec(),
        y_prev: y0.to_vec(),
        y_cur: y0.to_vec(),
        z_cur: x0.to_vec(),
        lam_used: lam,
        lam_cur: lam,
        lam_next: lam,
        beta_prev: cfg.beta0,
        beta_cur: cfg.beta0,
        zeta0,
        zeta_cur: zeta0,
        iter: 0,
        correction_backtracks: 0,
        kty_prev: kty.clone(),
        kty_cur: kty,
    })
}

/// Candidate primal update together with the steps that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalCandidate {
    pub x: Vec<f64>,
    /// `‖x − xₙ‖`
    pub zeta: f64,
    pub lam: f64,
    pub lam_next: f64,
    pub shrinks: usize,
}

fn primal_step(state: &SolverState, problem: &SaddleProblem, lam: f64) -> Result<Vec<f64>> {
    problem
        .g
        .prox(&vector::add_scaled(&state.x_cur, -lam, &state.kty_cur), lam)
}

/// `xₙ₊₁ = Prox_{λₙg}(xₙ − λₙK*yₙ)` with the current steps.
pub fn primal_candidate(state: &SolverState, problem: &SaddleProblem) -> Result<PrimalCandidate> {
    let x = primal_step(state, problem, state.lam_cur)?;
    Ok(PrimalCandidate {
        zeta: vector::dist(&x, &state.x_cur),
        x,
        lam: state.lam_cur,
        lam_next: state.lam_next,
        shrinks: 0,
    })
}

/// Shrinks `λₙ` until `‖xₙ₊₁ − xₙ‖ ≤ min{μζ₀, νζₙ}`.
pub fn correction_pass(
    state: &SolverState,
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    mut cand: PrimalCandidate,
) -> Result<PrimalCandidate> {
    let bound = (cfg.mu_corr * state.zeta0).min(cfg.nu_corr * state.zeta_cur);
    let phi = phi_schedule(state.iter, cfg);
    while cand.zeta > bound {
        if cand.shrinks == MAX_CORRECTION_SHRINKS {
            return Err(Error::LinesearchStall {
                iter: state.iter,
                shrinks: cand.shrinks,
            });
        }
        cand.lam *= cfg.rho;
        let cap = if cfg.nonmonotone { phi * cand.lam } else { cand.lam };
        cand.lam_next = cand.lam_next.min(cap);
        cand.x = primal_step(state, problem, cand.lam)?;
        cand.zeta = vector::dist(&cand.x, &state.x_cur);
        cand.shrinks += 1;
    }
    Ok(cand)
}

struct DualUpdate {
    z: Vec<f64>,
    y: Vec<f64>,
    kty: Vec<f64>,
    dy: f64,
    kdy: f64,
}

fn dual_update(state: &SolverState, problem: &SaddleProblem, x_new: &[f64], delta: f64, s: f64) -> Result<DualUpdate> {
    let z = vector::extrapolate(x_new, &state.x_cur, delta);
    let kz = problem.op.apply(&z)?;
    let y = problem.fstar.prox(&vector::add_scaled(&state.y_cur, s, &kz), s)?;
    let kty = problem.op.adjoint_apply(&y)?;
    let dy = vector::dist(&y, &state.y_cur);
    let kdy = vector::dist(&kty, &state.kty_cur);
    Ok(DualUpdate { z, y, kty, dy, kdy })
}

fn commit(state: &mut SolverState, cand: PrimalCandidate, dual: DualUpdate, lam_after: f64) -> Result<()> {
    if !vector::all_finite(&cand.x) || !vector::all_finite(&dual.y) || !lam_after.is_finite() {
        return Err(Error::Divergence { iter: state.iter });
    }
    state.x_prev = std::mem::replace(&mut state.x_cur, cand.x);
    state.y_prev = std::mem::replace(&mut state.y_cur, dual.y);
    state.kty_prev = std::mem::replace(&mut state.kty_cur, dual.kty);
    state.z_cur = dual.z;
    state.lam_used = cand.lam;
    state.lam_cur = cand.lam_next;
    state.lam_next = lam_after;
    state.zeta_cur = cand.zeta;
    state.correction_backtracks += cand.shrinks;
    state.iter += 1;
    Ok(())
}

/// One outer iteration of PDA-C.
pub fn pdac_iterate(state: &mut SolverState, problem: &SaddleProblem, cfg: &SolverConfig) -> Result<()> {
    let mut cand = primal_candidate(state, problem)?;
    if cfg.corrects() {
        cand = correction_pass(state, problem, cfg, cand)?;
    }
    let dual = dual_update(state, problem, &cand.x, cfg.delta, cfg.beta0 * cand.lam_next)?;
    let phi = phi_schedule(state.iter, cfg);
    let lam_after = predict_step(dual.dy, dual.kdy, cand.lam_next, phi, cfg);
    commit(state, cand, dual, lam_after)
}

/// One outer iteration of APDA-C. With `γ = 0` it performs exactly the
/// floating-point operations of monotone PDA-C.
pub fn apdac_iterate(state: &mut SolverState, problem: &SaddleProblem, cfg: &SolverConfig) -> Result<()> {
    if !(cfg.delta >= 1.0) {
        return Err(Error::Config {
            param: "delta",
            bound: "the accelerated method needs delta >= 1".into(),
            value: cfg.delta,
        });
    }
    let cand = primal_candidate(state, problem)?;
    let beta_next = state.beta_cur * (1.0 + cfg.gamma * cand.lam_next);
    let dual = dual_update(state, problem, &cand.x, cfg.delta, beta_next * cand.lam_next)?;
    let cap = (state.beta_cur / beta_next).sqrt() * cand.lam_next;
    let lam_after = if dual.kdy == 0.0 {
        cap
    } else {
        local_step(cfg.alpha, beta_next, dual.dy, dual.kdy).min(cap)
    };
    state.beta_prev = state.beta_cur;
    state.beta_cur = beta_next;
    commit(state, cand, dual, lam_after)
}
