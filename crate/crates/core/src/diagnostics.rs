//! Quantities from the convergence analysis that can be evaluated at runtime:
//! gap functions, the Lyapunov pair `(aₙ, bₙ)`, and ergodic averages.

use crate::error::{check_len, Error, Result};
use crate::problems::SaddleProblem;
use crate::solvers::{SolverConfig, SolverState};
use crate::vector;

/// Numerical saddle point together with its fixed-point residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub x_bar: Vec<f64>,
    pub y_bar: Vec<f64>,
    pub quality: f64,
}

impl ReferencePoint {
    /// Wraps `(x̄, ȳ)` and measures its residual at unit probe step.
    pub fn measure(problem: &SaddleProblem, x_bar: Vec<f64>, y_bar: Vec<f64>) -> Result<Self> {
        let quality = saddle_residual(problem, &x_bar, &y_bar, 1.0)?;
        Ok(Self { x_bar, y_bar, quality })
    }
}

/// `max{‖x − Prox_{λg}(x − λK*y)‖, ‖y − Prox_{λf*}(y + λKx)‖}`
pub fn saddle_residual(problem: &SaddleProblem, x: &[f64], y: &[f64], probe_lambda: f64) -> Result<f64> {
    if !(probe_lambda > 0.0) {
        return Err(Error::Argument(format!(
            "probe step must be positive, got {probe_lambda}"
        )));
    }
    let l = probe_lambda;
    let kty = problem.op.adjoint_apply(y)?;
    let kx = problem.op.apply(x)?;
    let xp = problem.g.prox(&vector::add_scaled(x, -l, &kty), l)?;
    let yp = problem.fstar.prox(&vector::add_scaled(y, l, &kx), l)?;
    Ok(vector::dist(x, &xp).max(vector::dist(y, &yp)))
}

/// `P(x) = g(x) − g(x̄) + ⟨K*ȳ, x − x̄⟩`, `+∞` off the domain of `g`.
pub fn gap_p(problem: &SaddleProblem, reference: &ReferencePoint, x: &[f64]) -> Result<f64> {
    check_len("primal point", problem.primal_dim(), x.len())?;
    let gx = problem.g.value(x);
    if !gx.is_finite() {
        return Ok(f64::INFINITY);
    }
    let kty = problem.op.adjoint_apply(&reference.y_bar)?;
    Ok(gx - problem.g.value(&reference.x_bar) + vector::dot(&kty, &vector::sub(x, &reference.x_bar)))
}

/// `D(y) = f*(y) − f*(ȳ) − ⟨Kx̄, y − ȳ⟩`, `+∞` off the domain of `f*`.
pub fn gap_d(problem: &SaddleProblem, reference: &ReferencePoint, y: &[f64]) -> Result<f64> {
    check_len("dual point", problem.dual_dim(), y.len())?;
    let fy = problem.fstar.value(y);
    if !fy.is_finite() {
        return Ok(f64::INFINITY);
    }
    let kx = problem.op.apply(&reference.x_bar)?;
    Ok(fy - problem.fstar.value(&reference.y_bar) - vector::dot(&kx, &vector::sub(y, &reference.y_bar)))
}

/// Iterates and steps around outer iteration `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovWindow {
    pub n: usize,
    /// `xₙ₋₁, xₙ, xₙ₊₁`
    pub x: [Vec<f64>; 3],
    /// `yₙ₋₁, yₙ`
    pub y: [Vec<f64>; 2],
    /// `λₙ₋₁, λₙ, λₙ₊₁`
    pub lam: [f64; 3],
}

impl LyapunovWindow {
    /// Window for `n = before.iter` from the states before and after one
    /// iteration. Uses the corrected step `λₙ`.
    pub fn from_states(before: &SolverState, after: &SolverState) -> Result<Self> {
        if before.iter == 0 {
            return Err(Error::InsufficientHistory("the window needs one completed iteration"));
        }
        if after.iter != before.iter + 1 {
            return Err(Error::InsufficientHistory("states must be consecutive"));
        }
        Ok(Self {
            n: before.iter,
            x: [before.x_prev.clone(), before.x_cur.clone(), after.x_cur.clone()],
            y: [before.y_prev.clone(), before.y_cur.clone()],
            lam: [before.lam_used, after.lam_used, after.lam_cur],
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSample {
    pub n: usize,
    pub a_n: f64,
    /// `aₙ₊₁` evaluated from the same window.
    pub a_next: f64,
    pub b_n: f64,
    pub eta_n: f64,
    /// The three expressions that must be eventually positive:
    /// `λₙ/(δλₙ₋₁) − αελₙ/λₙ₊₁`, `1 − αλₙ/(ελₙ₊₁)`, `1 − 1/δ + δλₙ₊₁/λₙ`.
    pub burn_in_terms: [f64; 3],
}

impl LyapunovSample {
    /// `aₙ₊₁ ≤ aₙ − bₙ + tol·max(1, aₙ)`
    pub fn decreases(&self, tol: f64) -> bool {
        self.a_next <= self.a_n - self.b_n + tol * self.a_n.max(1.0)
    }

    pub fn past_burn_in(&self) -> bool {
        self.burn_in_terms.iter().all(|&t| t > 0.0)
    }
}

/// Lyapunov pair with `ε = 1/√δ`, using `cfg.beta0` as `β`.
pub fn lyapunov_sample(
    window: &LyapunovWindow,
    reference: &ReferencePoint,
    problem: &SaddleProblem,
    cfg: &SolverConfig,
) -> Result<LyapunovSample> {
    let (d, a, beta) = (cfg.delta, cfg.alpha, cfg.beta0);
    let eps = 1.0 / d.sqrt();
    let [x0, x1, x2] = &window.x;
    let [y0, y1] = &window.y;
    let [l0, l1, l2] = window.lam;
    let p0 = gap_p(problem, reference, x0)?;
    let p1 = gap_p(problem, reference, x1)?;
    let a_n = vector::dist_sq(x1, &reference.x_bar)
        + vector::dist_sq(y0, &reference.y_bar) / beta
        + 2.0 * l0 * (1.0 + d) * p0;
    let a_next = vector::dist_sq(x2, &reference.x_bar)
        + vector::dist_sq(y1, &reference.y_bar) / beta
        + 2.0 * l1 * (1.0 + d) * p1;
    let z1 = vector::extrapolate(x1, x0, d);
    let c1 = l1 / (d * l0) - a * eps * l1 / l2;
    let c2 = 1.0 - l1 / (d * l0);
    let c3 = d * l1 / l0;
    let c4 = (1.0 - a * l1 / (eps * l2)) / beta;
    let b_n = c1 * vector::dist_sq(x2, &z1)
        + c2 * vector::dist_sq(x2, x1)
        + c3 * vector::dist_sq(x1, x0)
        + c4 * vector::dist_sq(y1, y0);
    let eta_n = (1.0 + d) * p1 - d * p0 + gap_d(problem, reference, y1)?;
    Ok(LyapunovSample {
        n: window.n,
        a_n,
        a_next,
        b_n,
        eta_n,
        burn_in_terms: [c1, 1.0 - a * l1 / (eps * l2), 1.0 - 1.0 / d + d * l2 / l1],
    })
}

/// Consecutive positive samples required to declare the burn-in over.
pub const BURN_IN_RUN: usize = 50;

/// Index `n` of the first sample that starts a run of `run` samples whose
/// burn-in terms are all positive.
pub fn burn_in_index(samples: &[LyapunovSample], run: usize) -> Option<usize> {
    let mut start = 0;
    let mut len = 0;
    for (i, s) in samples.iter().enumerate() {
        if s.past_burn_in() {
            if len == 0 {
                start = i;
            }
            len += 1;
            if len >= run {
                return Some(samples[start].n);
            }
        } else {
            len = 0;
        }
    }
    None
}

/// Smallest `n` after which every sample satisfies the decrease inequality.
/// `None` when the last sample violates it.
pub fn decrease_burn_in(samples: &[LyapunovSample], tol: f64) -> Option<usize> {
    match samples.iter().rposition(|s| !s.decreases(tol)) {
        None => Some(samples.first().map_or(0, |s| s.n)),
        Some(i) if i + 1 < samples.len() => Some(samples[i + 1].n),
        Some(_) => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Weights `λₗ`, head `λₙ₁δ`.
    PdaC,
    /// Weights `βₗλₗ`, head `βₙ₁λₙ₁δ`.
    ApdaC,
}

/// Weighted running average `(Xⱼ, Yⱼ)` of the extrapolated primal points and
/// the dual iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicAverage {
    pub mode: WeightMode,
    pub n1: usize,
    pub head_weight: f64,
    head: Vec<f64>,
    s: f64,
    x_num: Vec<f64>,
    y_num: Vec<f64>,
    updates: usize,
}

impl ErgodicAverage {
    pub fn new(mode: WeightMode, n1: usize, head_weight: f64, head: Vec<f64>, dual_dim: usize) -> Result<Self> {
        if !(head_weight >= 0.0) || !head_weight.is_finite() {
            return Err(Error::Argument(format!("head weight must be >= 0, got {head_weight}")));
        }
        let n = head.len();
        Ok(Self {
            mode,
            n1,
            head_weight,
            head,
            s: 0.0,
            x_num: vec![0.0; n],
            y_num: vec![0.0; dual_dim],
            updates: 0,
        })
    }

    pub fn update(&mut self, weight: f64, z: &[f64], y: &[f64]) -> Result<()> {
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(Error::Argument(format!(
                "ergodic weight must be positive, got {weight}"
            )));
        }
        check_len("ergodic primal point", self.x_num.len(), z.len())?;
        check_len("ergodic dual point", self.y_num.len(), y.len())?;
        self.s += weight;
        for (acc, v) in self.x_num.iter_mut().zip(z) {
            *acc += weight * v;
        }
        for (acc, v) in self.y_num.iter_mut().zip(y) {
            *acc += weight * v;
        }
        self.updates += 1;
        Ok(())
    }

    /// Accumulated weight `sⱼ`.
    pub fn total_weight(&self) -> f64 {
        self.s
    }

    pub fn updates(&self) -> usize {
        self.updates
    }

    pub fn x_avg(&self) -> Vec<f64> {
        let total = self.head_weight + self.s;
        self.head
            .iter()
            .zip(&self.x_num)
            .map(|(h, x)| (self.head_weight * h + x) / total)
            .collect()
    }

    pub fn y_avg(&self) -> Vec<f64> {
        self.y_num.iter().map(|y| y / self.s).collect()
    }
}
