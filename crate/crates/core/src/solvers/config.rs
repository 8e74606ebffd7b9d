use crate::error::{Error, Result};

/// Lower end of the admissible extrapolation range, `(√5 − 1)/2`.
pub fn delta_lower_bound() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Parameters of the adaptive primal-dual methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Extrapolation `δ` in `z = x⁺ + δ(x⁺ − x)`.
    pub delta: f64,
    /// Step safety factor `α < 1/√δ`.
    pub alpha: f64,
    /// Backtracking factor of the correction loop.
    pub rho: f64,
    /// `μ` in the correction bound `‖x⁺ − x‖ ≤ min{μζ₀, νζₙ}`.
    pub mu_corr: f64,
    /// `ν` in the correction bound.
    pub nu_corr: f64,
    /// Dual/primal step ratio `β` (initial `β₀` for the accelerated method).
    pub beta0: f64,
    /// Strong-convexity modulus of `g` used by the accelerated method.
    pub gamma: f64,
    pub lambda0: f64,
    /// Upper cap on steps in nonmonotone mode.
    pub lambda_cap: f64,
    /// Last iteration with the full growth factor `(1+δ)/δ`.
    pub n_hat: usize,
    /// First iteration after which steps may no longer grow.
    pub n_zero: usize,
    pub max_iter: usize,
    pub nonmonotone: bool,
    /// Disables the correction loop even when `δ < 1`. Convergence is not
    /// known without it; exposed for experimentation only.
    pub correction: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: 0.62,
            alpha: 1.27,
            rho: 0.7,
            mu_corr: 10.0,
            nu_corr: 1.5,
            beta0: 1.0,
            gamma: 0.0,
            lambda0: 1.0,
            lambda_cap: 1e6,
            n_hat: 5000,
            n_zero: 10_000,
            max_iter: 30_000,
            nonmonotone: true,
            correction: true,
            seed: 0,
        }
    }
}

fn reject(param: &'static str, bound: impl Into<String>, value: f64) -> Error {
    Error::Config {
        param,
        bound: bound.into(),
        value,
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let lo = delta_lower_bound();
        if !(self.delta > lo) || !self.delta.is_finite() {
            return Err(reject(
                "delta",
                format!("delta must exceed (sqrt(5)-1)/2 = {lo:.10}"),
                self.delta,
            ));
        }
        let alpha_max = 1.0 / self.delta.sqrt();
        if !(self.alpha > 0.0 && self.alpha < alpha_max) {
            return Err(reject(
                "alpha",
                format!("alpha must lie in (0, 1/sqrt(delta)) = (0, {alpha_max:.10})"),
                self.alpha,
            ));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(reject("rho", "rho must lie in (0, 1)", self.rho));
        }
        if !(self.nu_corr > 1.0) {
            return Err(reject("nu-corr", "nu-corr must exceed 1", self.nu_corr));
        }
        if !(self.mu_corr >= self.nu_corr) {
            return Err(reject(
                "mu-corr",
                format!("mu-corr must be >= nu-corr = {}", self.nu_corr),
                self.mu_corr,
            ));
        }
        if !(self.beta0 > 0.0) || !self.beta0.is_finite() {
            return Err(reject("beta", "beta must be positive", self.beta0));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(reject("gamma", "gamma must be >= 0", self.gamma));
        }
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            return Err(reject("lambda0", "lambda0 must be positive", self.lambda0));
        }
        if !(self.lambda_cap > 0.0) {
            return Err(reject("lambda-cap", "lambda-cap must be positive", self.lambda_cap));
        }
        if self.n_hat > self.n_zero {
            return Err(reject(
                "n-hat",
                format!("n-hat must not exceed n-zero = {}", self.n_zero),
                self.n_hat as f64,
            ));
        }
        Ok(())
    }

    /// Additional requirement of the accelerated method: `δ ≥ 1`.
    pub fn validate_accelerated(&self) -> Result<()> {
        self.validate()?;
        if !(self.delta >= 1.0) {
            return Err(reject("delta", "the accelerated method needs delta >= 1", self.delta));
        }
        Ok(())
    }

    /// Whether the correction loop runs.
    pub fn corrects(&self) -> bool {
        self.correction && self.delta < 1.0
    }
}

/// Growth factor `φₙ` of the nonmonotone step rule.
pub fn phi_schedule(n: usize, cfg: &SolverConfig) -> f64 {
    if !cfg.nonmonotone {
        return 1.0;
    }
    let d = cfg.delta;
    if n <= cfg.n_hat {
        (1.0 + d) / d
    } else if n <= cfg.n_zero {
        let k = (n - cfg.n_hat) as f64;
        (1.0 + d + k) / (d + k)
    } else {
        1.0
    }
}

/// `α‖Δy‖ / (√β‖K*Δy‖)`
pub(crate) fn local_step(alpha: f64, beta: f64, dy_norm: f64, kdy_norm: f64) -> f64 {
    alpha * dy_norm / (beta.sqrt() * kdy_norm)
}

/// Next step from the local inverse Lipschitz estimate of `K*`. When
/// `K*Δy = 0` the previous step is kept.
pub fn predict_step(dy_norm: f64, kdy_norm: f64, lam_next: f64, phi: f64, cfg: &SolverConfig) -> f64 {
    if kdy_norm == 0.0 {
        return lam_next;
    }
    let local = local_step(cfg.alpha, cfg.beta0, dy_norm, kdy_norm);
    if cfg.nonmonotone {
        local.min(phi * lam_next).min(cfg.lambda_cap)
    } else {
        local.min(lam_next)
    }
}

/// Parameters of the comparison methods.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    /// Primal step (fixed-step PDA) or initial primal step (PDA-L).
    pub tau: f64,
    /// Dual step of fixed-step PDA.
    pub sigma: f64,
    /// Initial extrapolation carry `θ₀` of PDA-L.
    pub theta: f64,
    /// Dual/primal step ratio of PDA-L.
    pub beta: f64,
    /// Linesearch acceptance factor of PDA-L, in (0, 1).
    pub alpha_ls: f64,
    /// Linesearch shrink factor of PDA-L, in (0, 1).
    pub mu_ls: f64,
    /// Backtracking factor of FISTA, in (0, 1).
    pub fista_beta: f64,
    pub fista_lambda0: f64,
    /// Fixed step of the proximal gradient method.
    pub step: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            tau: 1.0,
            sigma: 1.0,
            theta: 1.0,
            beta: 1.0,
            alpha_ls: 0.99,
            mu_ls: 0.7,
            fista_beta: 0.7,
            fista_lambda0: 1.0,
            step: 1.0,
        }
    }
}

/// Slack on `τσL² ≤ 1` so the boundary settings are accepted.
pub const STEP_PRODUCT_TOL: f64 = 1e-12;

impl BaselineConfig {
    fn positive(param: &'static str, v: f64) -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(reject(param, format!("{param} must be positive"), v))
        }
    }

    fn unit_open(param: &'static str, v: f64) -> Result<()> {
        if v > 0.0 && v < 1.0 {
            Ok(())
        } else {
            Err(reject(param, format!("{param} must lie in (0, 1)"), v))
        }
    }

    /// Fixed-step PDA: positive steps with `τσL² ≤ 1`.
    pub fn validate_pda(&self, op_norm: f64) -> Result<()> {
        Self::positive("tau", self.tau)?;
        Self::positive("sigma", self.sigma)?;
        let product = self.tau * self.sigma * op_norm * op_norm;
        if product > 1.0 + STEP_PRODUCT_TOL {
            return Err(reject(
                "tau",
                format!("tau*sigma*L^2 must not exceed 1 (L = {op_norm})"),
                product,
            ));
        }
        Ok(())
    }

    pub fn validate_pdal(&self) -> Result<()> {
        Self::positive("tau", self.tau)?;
        Self::positive("beta", self.beta)?;
        Self::positive("theta", self.theta)?;
        Self::unit_open("alpha-ls", self.alpha_ls)?;
        Self::unit_open("mu-ls", self.mu_ls)
    }

    pub fn validate_pgm(&self) -> Result<()> {
        Self::positive("step", self.step)
    }

    pub fn validate_fista(&self) -> Result<()> {
        Self::positive("fista-lambda0", self.fista_lambda0)?;
        Self::unit_open("fista-beta", self.fista_beta)
    }
}
