use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::diagnostics::saddle_residual;
use crate::error::{Error, Result};
use crate::linop::LinearOperator;
use crate::problems::{Objective, SaddleProblem, Side};
use crate::prox::ProxFn;
use crate::vector;

use super::baselines::{fista_iterate, init_baseline};
use super::config::BaselineConfig;

/// High-accuracy solution of a least-squares family.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    /// Minimizer of the original (unswapped) problem.
    pub x: Vec<f64>,
    /// `Ax̄ − b`
    pub y: Vec<f64>,
    pub phi_star: f64,
    /// Saddle residual of `(x̄, ȳ)` at unit probe step.
    pub residual: f64,
    pub iterations: usize,
}

impl Reference {
    /// `(x̄, ȳ)` expressed in the variables of `problem`.
    pub fn saddle_for(&self, problem: &SaddleProblem) -> (Vec<f64>, Vec<f64>) {
        match &problem.objective {
            Objective::LeastSquares { side: Side::Dual, .. } => (self.y.clone(), self.x.clone()),
            _ => (self.x.clone(), self.y.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceOptions {
    pub max_iter: usize,
    pub residual_target: f64,
    /// Stop when the residual has not improved for this many iterations.
    pub stall_window: usize,
    pub check_every: usize,
    /// Random `N(0, 1)` starting point from this seed instead of zero.
    pub start_seed: Option<u64>,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self {
            max_iter: 1_000_000,
            residual_target: 1e-12,
            stall_window: 20_000,
            check_every: 50,
            start_seed: None,
        }
    }
}

/// The original least-squares problem on its primal side.
fn unswapped(problem: &SaddleProblem) -> Result<(SaddleProblem, f64, bool)> {
    match &problem.objective {
        Objective::LeastSquares {
            matrix,
            b,
            l1_weight,
            nonneg,
            ..
        } => {
            let g = if *nonneg {
                ProxFn::IndNonneg
            } else {
                ProxFn::scaled_l1(*l1_weight)?
            };
            let p = SaddleProblem::new(
                g,
                ProxFn::quad_shift(b.clone())?,
                matrix.clone(),
                0.0,
                problem.label.clone(),
            )?
            .with_objective(Objective::LeastSquares {
                matrix: matrix.clone(),
                b: b.clone(),
                l1_weight: *l1_weight,
                nonneg: *nonneg,
                side: Side::Primal,
            });
            Ok((p, *l1_weight, *nonneg))
        }
        _ => Err(Error::UnsupportedMetric(format!(
            "reference solves need a least-squares problem, '{}' is not",
            problem.label
        ))),
    }
}

fn objective(matrix: &LinearOperator, b: &[f64], weight: f64, x: &[f64]) -> Result<(f64, Vec<f64>)> {
    let r = vector::sub(&matrix.apply(x)?, b);
    Ok((0.5 * vector::norm_sq(&r) + weight * vector::norm1(x), r))
}

/// FISTA with gradient-based adaptive restart, run until the saddle residual
/// reaches the target, stops improving, or the budget runs out.
pub fn solve_reference(problem: &SaddleProblem, opts: &ReferenceOptions) -> Result<Reference> {
    let (p, weight, nonneg) = unswapped(problem)?;
    let Objective::LeastSquares { matrix, b, .. } = &p.objective else {
        unreachable!("built as least squares above")
    };
    let bcfg = BaselineConfig::default();
    let x0: Vec<f64> = match opts.start_seed {
        None => vec![0.0; p.primal_dim()],
        Some(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..p.primal_dim()).map(|_| StandardNormal.sample(&mut rng)).collect()
        }
    };
    let y0 = vector::sub(&matrix.apply(&x0)?, b);
    let mut state = init_baseline(&p, &x0, &y0, bcfg.fista_lambda0, 1.0)?;
    let residual_at = |x: &[f64]| -> Result<f64> {
        if nonneg && x.iter().any(|v| *v < 0.0) {
            return Ok(f64::INFINITY);
        }
        let r = vector::sub(&matrix.apply(x)?, b);
        saddle_residual(&p, x, &r, 1.0)
    };
    let mut best = residual_at(&x0)?;
    let mut best_x = x0;
    let mut last_improvement = 0;
    let mut iterations = 0;
    let check_every = opts.check_every.max(1);
    while iterations < opts.max_iter && best > opts.residual_target {
        let v = state.z_cur.clone();
        let x_old = state.x_cur.clone();
        fista_iterate(&mut state, &p, &bcfg)?;
        iterations += 1;
        let restart = vector::dot(&vector::sub(&v, &state.x_cur), &vector::sub(&state.x_cur, &x_old)) > 0.0;
        if restart {
            state.t = 1.0;
            state.z_cur = state.x_cur.clone();
        }
        // let the step grow back after backtracking
        state.tau /= bcfg.fista_beta;
        if iterations % check_every == 0 {
            let res = residual_at(&state.x_cur)?;
            if res < best {
                best = res;
                best_x.clone_from(&state.x_cur);
                last_improvement = iterations;
            } else if iterations - last_improvement >= opts.stall_window {
                break;
            }
        }
    }
    let (phi_star, y) = objective(matrix, b, weight, &best_x)?;
    let residual = saddle_residual(&p, &best_x, &y, 1.0)?;
    Ok(Reference {
        x: best_x,
        y,
        phi_star,
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linop::{DenseMatrix, SparseMatrix};
    use crate::problems::{gen_lasso, nnls_from_matrix, primal_objective, Family, ProblemSpec};

    #[test]
    fn zero_problem() {
        let op = LinearOperator::from(DenseMatrix::zeros(3, 2));
        let p = SaddleProblem::new(
            ProxFn::scaled_l1(0.0).unwrap(),
            ProxFn::quad_shift(vec![0.0; 3]).unwrap(),
            op.clone(),
            0.0,
            "zero",
        )
        .unwrap()
        .with_objective(Objective::LeastSquares {
            matrix: op,
            b: vec![0.0; 3],
            l1_weight: 0.0,
            nonneg: false,
            side: Side::Primal,
        });
        let r = solve_reference(&p, &ReferenceOptions::default()).unwrap();
        assert_eq!(r.x, vec![0.0, 0.0]);
        assert_eq!(r.phi_star, 0.0);
        assert_eq!(r.residual, 0.0);
    }

    #[test]
    fn small_lasso_reaches_tight_residual() {
        let spec = ProblemSpec::standard(Family::LassoWay1)
            .with_dims(20, 40)
            .with_sparsity(4);
        let (p, _) = gen_lasso(&spec).unwrap();
        let r = solve_reference(&p, &ReferenceOptions::default()).unwrap();
        assert!(r.residual <= 1e-10, "residual {}", r.residual);
        assert!((primal_objective(&p, &r.x).unwrap() - r.phi_star).abs() <= 1e-12 * r.phi_star.max(1.0));
    }

    #[test]
    fn swapped_reference_maps_sides() {
        let k = SparseMatrix::from_triplets(4, 2, &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, -1.0), (3, 1, 0.5)]).unwrap();
        let plain = nnls_from_matrix(k.clone(), 2, false).unwrap();
        let swapped = nnls_from_matrix(k, 2, true).unwrap();
        let r1 = solve_reference(&plain, &ReferenceOptions::default()).unwrap();
        let r2 = solve_reference(&swapped, &ReferenceOptions::default()).unwrap();
        assert_eq!(r1, r2);
        let (u, v) = r2.saddle_for(&swapped);
        assert_eq!(u, r2.y);
        assert_eq!(v, r2.x);
        assert!(saddle_residual(&swapped, &u, &v, 1.0).unwrap() <= 1e-9);
    }
}
