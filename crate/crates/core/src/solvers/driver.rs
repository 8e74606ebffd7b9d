use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{saddle_residual, ErgodicAverage, WeightMode};
use crate::error::{Error, Result};
use crate::problems::{pd_gap_game, primal_objective, Objective, SaddleProblem, Side};

use super::adaptive::{apdac_iterate, init_state, pdac_iterate, SolverState};
use super::baselines::{
    fista_iterate, init_baseline, pda_iterate, pdal_initial_step, pdal_iterate, pgm_iterate, BaselineState,
};
use super::config::{BaselineConfig, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    PdaC,
    ApdaC,
    Pda,
    PdaL,
    Pgm,
    Fista,
}

impl SolverKind {
    pub fn is_adaptive(self) -> bool {
        matches!(self, Self::PdaC | Self::ApdaC)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    pub max_iter: usize,
    pub max_seconds: Option<f64>,
}

impl Budget {
    pub fn iterations(max_iter: usize) -> Self {
        Self {
            max_iter,
            max_seconds: None,
        }
    }
}

/// One row of the CSV trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub seconds: f64,
    pub metric: f64,
    pub lambda: f64,
    pub beta: f64,
    pub corrections: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub iterations: usize,
    pub corrections: usize,
    pub seconds: f64,
}

impl IterationTrace {
    pub fn final_metric(&self) -> f64 {
        self.rows.last().map_or(f64::NAN, |r| r.metric)
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug)]
pub struct RunFailure {
    pub trace: IterationTrace,
    pub error: Error,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (after {} iterations)", self.error, self.trace.iterations)
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub kind: SolverKind,
    pub cfg: SolverConfig,
    pub bcfg: BaselineConfig,
    pub budget: Budget,
    pub trace_every: usize,
    /// Subtracted from the objective when known.
    pub phi_star: Option<f64>,
}

enum Iterate {
    Adaptive(SolverState),
    Baseline(BaselineState),
}

impl Iterate {
    fn primal(&self) -> &[f64] {
        match self {
            Self::Adaptive(s) => &s.x_cur,
            Self::Baseline(s) => &s.x_cur,
        }
    }

    fn dual(&self) -> &[f64] {
        match self {
            Self::Adaptive(s) => &s.y_cur,
            Self::Baseline(s) => &s.y_cur,
        }
    }

    fn iter(&self) -> usize {
        match self {
            Self::Adaptive(s) => s.iter,
            Self::Baseline(s) => s.iter,
        }
    }

    fn lambda(&self) -> f64 {
        match self {
            Self::Adaptive(s) => s.lam_cur,
            Self::Baseline(s) => s.tau,
        }
    }

    fn corrections(&self) -> usize {
        match self {
            Self::Adaptive(s) => s.correction_backtracks,
            Self::Baseline(s) => s.backtracks,
        }
    }
}

fn metric(problem: &SaddleProblem, it: &Iterate, avg: Option<&ErgodicAverage>, phi_star: Option<f64>) -> Result<f64> {
    match &problem.objective {
        Objective::LeastSquares { side, .. } => {
            let v = match side {
                Side::Primal => it.primal(),
                Side::Dual => it.dual(),
            };
            Ok(primal_objective(problem, v)? - phi_star.unwrap_or(0.0))
        }
        Objective::MatrixGame => match avg {
            Some(a) => pd_gap_game(&problem.op, &a.x_avg(), &a.y_avg()),
            None => pd_gap_game(&problem.op, it.primal(), it.dual()),
        },
        Objective::None => saddle_residual(problem, it.primal(), it.dual(), 1.0),
    }
}

struct Recorder<'a> {
    problem: &'a SaddleProblem,
    spec: &'a RunSpec,
    start: Instant,
    rows: Vec<TraceRow>,
    avg: Option<ErgodicAverage>,
    pending: Option<Vec<f64>>,
}

impl Recorder<'_> {
    fn record(&mut self, it: &Iterate) -> Result<()> {
        let seconds = self.start.elapsed().as_secs_f64();
        let beta = match (self.spec.kind, it) {
            (SolverKind::PdaC, _) => self.spec.cfg.beta0,
            (SolverKind::ApdaC, Iterate::Adaptive(s)) => s.beta_cur,
            (SolverKind::PdaL, _) => self.spec.bcfg.beta,
            _ => 0.0,
        };
        self.rows.push(TraceRow {
            iter: it.iter(),
            seconds,
            metric: metric(self.problem, it, self.avg.as_ref(), self.spec.phi_star)?,
            lambda: it.lambda(),
            beta,
            corrections: it.corrections(),
        });
        Ok(())
    }

    /// Adds to the ergodic average on games. The adaptive methods may still
    /// correct `λₗ` while computing `xₗ₊₁`, so `(zₗ, yₗ)` enters one
    /// iteration late with its final weight.
    fn accumulate(&mut self, it: &Iterate, x_start: &[f64]) -> Result<()> {
        if !matches!(self.problem.objective, Objective::MatrixGame) {
            return Ok(());
        }
        let entry = match (self.spec.kind, it) {
            (SolverKind::PdaC | SolverKind::ApdaC, Iterate::Adaptive(s)) => {
                let pending = self.pending.replace(s.z_cur.clone());
                match pending {
                    None => None,
                    Some(z) => {
                        let w = if self.spec.kind == SolverKind::ApdaC {
                            s.beta_prev * s.lam_used
                        } else {
                            s.lam_used
                        };
                        let mode = if self.spec.kind == SolverKind::ApdaC {
                            WeightMode::ApdaC
                        } else {
                            WeightMode::PdaC
                        };
                        Some((w, w * self.spec.cfg.delta, mode, z, s.y_prev.clone()))
                    }
                }
            }
            (SolverKind::PdaL, Iterate::Baseline(s)) => Some((
                s.tau,
                s.tau * s.theta,
                WeightMode::PdaC,
                s.z_cur.clone(),
                s.y_cur.clone(),
            )),
            (_, Iterate::Baseline(s)) => Some((1.0, 0.0, WeightMode::PdaC, s.x_cur.clone(), s.y_cur.clone())),
            _ => unreachable!("adaptive kinds carry adaptive states"),
        };
        let Some((weight, head_weight, mode, z, y)) = entry else {
            return Ok(());
        };
        let avg = match &mut self.avg {
            Some(a) => a,
            None => self.avg.insert(ErgodicAverage::new(
                mode,
                1,
                head_weight,
                x_start.to_vec(),
                self.problem.dual_dim(),
            )?),
        };
        avg.update(weight, &z, &y)
    }
}

fn start(spec: &RunSpec, problem: &SaddleProblem, x0: &[f64], y0: &[f64]) -> Result<Iterate> {
    let bcfg = &spec.bcfg;
    let needs_split = matches!(spec.kind, SolverKind::Pgm | SolverKind::Fista);
    if needs_split && !matches!(problem.objective, Objective::LeastSquares { side: Side::Primal, .. }) {
        return Err(Error::UnsupportedMetric(format!(
            "{:?} needs a least-squares problem posed on its primal side",
            spec.kind
        )));
    }
    Ok(match spec.kind {
        SolverKind::PdaC => Iterate::Adaptive(init_state(problem, x0, y0, &spec.cfg)?),
        SolverKind::ApdaC => {
            spec.cfg.validate_accelerated()?;
            Iterate::Adaptive(init_state(problem, x0, y0, &spec.cfg)?)
        }
        SolverKind::Pda => {
            bcfg.validate_pda(problem.op.norm()?)?;
            Iterate::Baseline(init_baseline(problem, x0, y0, bcfg.tau, 1.0)?)
        }
        SolverKind::PdaL => {
            bcfg.validate_pdal()?;
            Iterate::Baseline(init_baseline(problem, x0, y0, bcfg.tau, bcfg.theta)?)
        }
        SolverKind::Pgm => {
            bcfg.validate_pgm()?;
            Iterate::Baseline(init_baseline(problem, x0, y0, bcfg.step, 1.0)?)
        }
        SolverKind::Fista => {
            bcfg.validate_fista()?;
            Iterate::Baseline(init_baseline(problem, x0, y0, bcfg.fista_lambda0, 1.0)?)
        }
    })
}

fn step(spec: &RunSpec, problem: &SaddleProblem, it: &mut Iterate) -> Result<()> {
    match (spec.kind, it) {
        (SolverKind::PdaC, Iterate::Adaptive(s)) => pdac_iterate(s, problem, &spec.cfg),
        (SolverKind::ApdaC, Iterate::Adaptive(s)) => apdac_iterate(s, problem, &spec.cfg),
        (SolverKind::Pda, Iterate::Baseline(s)) => pda_iterate(s, problem, &spec.bcfg),
        (SolverKind::PdaL, Iterate::Baseline(s)) => pdal_iterate(s, problem, &spec.bcfg),
        (SolverKind::Pgm, Iterate::Baseline(s)) => pgm_iterate(s, problem, &spec.bcfg),
        (SolverKind::Fista, Iterate::Baseline(s)) => fista_iterate(s, problem, &spec.bcfg),
        _ => unreachable!("state variant follows the solver kind"),
    }
}

/// Runs a solver within the budget, recording a trace row every
/// `trace_every` iterations and after the last one.
#[allow(clippy::result_large_err)]
pub fn run(
    spec: &RunSpec,
    problem: &SaddleProblem,
    x0: &[f64],
    y0: &[f64],
) -> std::result::Result<IterationTrace, RunFailure> {
    let mut rec = Recorder {
        problem,
        spec,
        start: Instant::now(),
        rows: Vec::new(),
        avg: None,
        pending: None,
    };
    let fail =
        |rec: Recorder<'_>, error: Error, x: Vec<f64>, y: Vec<f64>, iterations: usize, corrections: usize| RunFailure {
            trace: IterationTrace {
                seconds: rec.start.elapsed().as_secs_f64(),
                rows: rec.rows,
                x,
                y,
                iterations,
                corrections,
            },
            error,
        };
    let mut it = match start(spec, problem, x0, y0) {
        Ok(it) => it,
        Err(e) => return Err(fail(rec, e, x0.to_vec(), y0.to_vec(), 0, 0)),
    };
    if let Err(e) = rec.record(&it) {
        return Err(fail(rec, e, x0.to_vec(), y0.to_vec(), 0, 0));
    }
    let every = spec.trace_every.max(1);
    let mut recorded_last = true;
    while it.iter() < spec.budget.max_iter {
        if let Some(limit) = spec.budget.max_seconds {
            if rec.start.elapsed().as_secs_f64() >= limit {
                break;
            }
        }
        let outcome = step(spec, problem, &mut it)
            .and_then(|()| rec.accumulate(&it, x0))
            .and_then(|()| {
                recorded_last = it.iter() % every == 0;
                if recorded_last {
                    rec.record(&it)
                } else {
                    Ok(())
                }
            });
        if let Err(e) = outcome {
            let (x, y, n, c) = (it.primal().to_vec(), it.dual().to_vec(), it.iter(), it.corrections());
            return Err(fail(rec, e, x, y, n, c));
        }
    }
    if !recorded_last {
        if let Err(e) = rec.record(&it) {
            let (x, y, n, c) = (it.primal().to_vec(), it.dual().to_vec(), it.iter(), it.corrections());
            return Err(fail(rec, e, x, y, n, c));
        }
    }
    Ok(IterationTrace {
        seconds: rec.start.elapsed().as_secs_f64(),
        rows: rec.rows,
        x: it.primal().to_vec(),
        y: it.dual().to_vec(),
        iterations: it.iter(),
        corrections: it.corrections(),
    })
}

/// `λ₀ = 1/(√β·L̃)` with `L̃` a cheap upper bound on `‖K‖`.
pub fn default_lambda0(problem: &SaddleProblem, beta: f64) -> f64 {
    let bound = problem.op.frobenius_norm().min(problem.op.norm_upper_bound());
    if bound > 0.0 {
        1.0 / (beta.sqrt() * bound)
    } else {
        1.0
    }
}

/// Default PDA-L start step from the problem operator.
pub fn default_pdal_tau(problem: &SaddleProblem) -> f64 {
    pdal_initial_step(&problem.op)
}
