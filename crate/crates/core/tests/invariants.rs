//! Property checks on operators, proximal maps, generators and solver steps.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use saddle_core::diagnostics::{decrease_burn_in, lyapunov_sample, LyapunovWindow, ReferencePoint};
use saddle_core::linop::{DenseMatrix, LinearOperator, SparseMatrix};
use saddle_core::problems::{gen_lasso, gen_matrix_game, pd_gap_game, Family, ProblemSpec, SaddleProblem};
use saddle_core::prox::{proj_simplex, ProxFn};
use saddle_core::solvers::{
    apdac_iterate, correction_pass, default_lambda0, init_state, pdac_iterate, primal_candidate, run, solve_reference,
    BaselineConfig, Budget, ReferenceOptions, RunSpec, SolverConfig, SolverKind,
};
use saddle_core::vector::{dist, dot, sub};

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn random_sparse(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> SparseMatrix {
    let mut t = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random::<f64>() < 0.3 {
                t.push((i, j, rng.sample(StandardNormal)));
            }
        }
    }
    SparseMatrix::from_triplets(rows, cols, &t).unwrap()
}

fn small_lasso(seed: u64, m: usize, n: usize) -> SaddleProblem {
    let spec = ProblemSpec::standard(Family::LassoWay1)
        .with_seed(seed)
        .with_dims(m, n)
        .with_sparsity(3);
    gen_lasso(&spec).unwrap().0
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    proj_simplex(&gaussian(rng, n)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn adjoint_identity(seed in 0u64..10_000, rows in 1usize..12, cols in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = gaussian(&mut rng, rows * cols);
        let ops = [
            LinearOperator::from(DenseMatrix::new(rows, cols, entries).unwrap()),
            LinearOperator::from(random_sparse(&mut rng, rows, cols)),
        ];
        for op in ops {
            for op in [op.clone(), op.adjoint(), op.negated()] {
                for _ in 0..100 {
                    let x = gaussian(&mut rng, op.cols());
                    let y = gaussian(&mut rng, op.rows());
                    let lhs = dot(&op.apply(&x).unwrap(), &y);
                    let rhs = dot(&x, &op.adjoint_apply(&y).unwrap());
                    prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
                }
            }
        }
    }

    #[test]
    fn prox_variational_inequality(seed in 0u64..10_000, n in 1usize..7, t in 0.01f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = gaussian(&mut rng, n);
        let fns = [
            ProxFn::scaled_l1(rng.random_range(0.0..2.0)).unwrap(),
            ProxFn::quad_shift(b).unwrap(),
            ProxFn::IndNonneg,
            ProxFn::IndSimplex,
        ];
        for g in fns {
            let x: Vec<f64> = gaussian(&mut rng, n).iter().map(|v| 3.0 * v).collect();
            let p = g.prox(&x, t).unwrap();
            for _ in 0..20 {
                let y = match g {
                    ProxFn::IndNonneg => gaussian(&mut rng, n).iter().map(|v| v.abs()).collect(),
                    ProxFn::IndSimplex => random_simplex_point(&mut rng, n),
                    _ => gaussian(&mut rng, n),
                };
                let lhs = dot(&sub(&p, &x), &sub(&y, &p));
                let rhs = t * (g.value(&p) - g.value(&y));
                prop_assert!(lhs >= rhs - 1e-9, "{g:?}: {lhs} < {rhs}");
            }
        }
    }

    #[test]
    fn simplex_projection_is_feasible(v in proptest::collection::vec(-50.0f64..50.0, 1..40)) {
        let p = proj_simplex(&v).unwrap();
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn game_gap_matches_vertex_enumeration(seed in 0u64..10_000) {
        let spec = ProblemSpec::standard(Family::GameInstance2).with_dims(7, 5).with_seed(seed);
        let game = gen_matrix_game(&spec).unwrap();
        let k = game.op.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let x = random_simplex_point(&mut rng, 5);
            let y = random_simplex_point(&mut rng, 7);
            let gap = pd_gap_game(&game.op, &x, &y).unwrap();
            // best responses are attained at simplex vertices
            let row = |i: usize| (0..5).map(|j| k.get(i, j) * x[j]).sum::<f64>();
            let col = |j: usize| (0..7).map(|i| k.get(i, j) * y[i]).sum::<f64>();
            let best_y = (0..7).map(row).fold(f64::NEG_INFINITY, f64::max);
            let best_x = (0..5).map(col).fold(f64::INFINITY, f64::min);
            prop_assert!((gap - (best_y - best_x)).abs() <= 1e-12);
            let value = dot(&game.op.apply(&x).unwrap(), &y);
            prop_assert!(gap >= 0.0 && best_y >= value - 1e-12 && value >= best_x - 1e-12);
        }
    }

    #[test]
    fn generators_are_pure(seed in 0u64..10_000) {
        let spec = ProblemSpec::standard(Family::LassoWay2).with_dims(6, 9).with_sparsity(2).with_seed(seed);
        let (a, ga) = gen_lasso(&spec).unwrap();
        let (b, gb) = gen_lasso(&spec).unwrap();
        prop_assert_eq!(a.op.to_dense(), b.op.to_dense());
        prop_assert_eq!(ga, gb);
        let spec = ProblemSpec::standard(Family::GameInstance3).with_dims(6, 4).with_seed(seed);
        prop_assert_eq!(gen_matrix_game(&spec).unwrap().op.to_dense(), gen_matrix_game(&spec).unwrap().op.to_dense());
    }

    #[test]
    fn step_rules_hold_every_iteration(seed in 0u64..10_000, nonmonotone: bool, delta_is_one: bool) {
        let p = small_lasso(seed, 10, 16);
        let beta = 1.0 / 400.0;
        let (delta, alpha) = if delta_is_one { (1.0, 0.99) } else { (0.62, 1.27) };
        let cfg = SolverConfig {
            delta,
            alpha,
            beta0: beta,
            lambda0: default_lambda0(&p, beta),
            nonmonotone,
            n_hat: 50,
            n_zero: 100,
            ..SolverConfig::default()
        };
        let (x0, y0) = p.default_start();
        let mut s = init_state(&p, &x0, &y0, &cfg).unwrap();
        for _ in 0..300 {
            if cfg.corrects() {
                let bound = (cfg.mu_corr * s.zeta0).min(cfg.nu_corr * s.zeta_cur);
                let cand = correction_pass(&s, &p, &cfg, primal_candidate(&s, &p).unwrap()).unwrap();
                prop_assert!(cand.zeta <= bound + 1e-12);
            }
            let before = s.clone();
            pdac_iterate(&mut s, &p, &cfg).unwrap();
            prop_assert!(delta * s.lam_next <= (1.0 + delta) * s.lam_cur + 1e-12);
            if !nonmonotone {
                prop_assert!(s.lam_next <= s.lam_cur);
                prop_assert!(s.lam_cur <= before.lam_cur);
            }
        }
    }

    #[test]
    fn accelerated_beta_schedule(seed in 0u64..10_000, gamma in 0.05f64..2.0) {
        let p = small_lasso(seed, 12, 8);
        let cfg = SolverConfig {
            delta: 1.0,
            alpha: 0.99,
            gamma,
            lambda0: default_lambda0(&p, 1.0),
            nonmonotone: false,
            ..SolverConfig::default()
        };
        let (x0, y0) = p.default_start();
        let mut s = init_state(&p, &x0, &y0, &cfg).unwrap();
        let mut sigma = f64::INFINITY;
        for _ in 0..300 {
            let beta = s.beta_cur;
            apdac_iterate(&mut s, &p, &cfg).unwrap();
            prop_assert_eq!(s.beta_cur.to_bits(), (beta * (1.0 + gamma * s.lam_cur)).to_bits());
            prop_assert!(s.beta_cur > beta);
            let next = s.beta_prev.sqrt() * s.lam_cur;
            prop_assert!(next <= sigma + 1e-12);
            sigma = next;
        }
    }
}

/// `Kx̄ − b` of an accurate LASSO solution satisfies the primal inclusion.
#[test]
fn lasso_dual_image_is_a_saddle_point() {
    let p = small_lasso(3, 15, 30);
    let r = solve_reference(&p, &ReferenceOptions::default()).unwrap();
    let (x, y) = r.saddle_for(&p);
    let kty = p.op.adjoint_apply(&y).unwrap();
    let moved = p.g.prox(&sub(&x, &kty), 1.0).unwrap();
    assert!(dist(&x, &moved) <= 1e-6);
}

/// On `δ = 1` runs the decrement `bₙ` is nonnegative after the burn-in and
/// the energy decreases.
#[test]
fn lyapunov_decrement_nonnegative_for_unit_delta() {
    let p = small_lasso(5, 20, 40);
    let r = solve_reference(&p, &ReferenceOptions::default()).unwrap();
    let (x, y) = r.saddle_for(&p);
    let rp = ReferencePoint::measure(&p, x, y).unwrap();
    assert!(rp.quality <= 1e-8);
    let cfg = SolverConfig {
        delta: 1.0,
        alpha: 0.99,
        lambda0: default_lambda0(&p, 1.0),
        nonmonotone: false,
        ..SolverConfig::default()
    };
    let (x0, y0) = p.default_start();
    let mut s = init_state(&p, &x0, &y0, &cfg).unwrap();
    pdac_iterate(&mut s, &p, &cfg).unwrap();
    let mut samples = Vec::new();
    for _ in 0..2000 {
        let before = s.clone();
        pdac_iterate(&mut s, &p, &cfg).unwrap();
        if before.iter.is_multiple_of(10) {
            let w = LyapunovWindow::from_states(&before, &s).unwrap();
            samples.push(lyapunov_sample(&w, &rp, &p, &cfg).unwrap());
        }
    }
    let n_star = decrease_burn_in(&samples, 1e-7).expect("decrease holds eventually");
    assert!(n_star <= 200, "burn-in {n_star}");
    for smp in samples.iter().filter(|smp| smp.n > n_star) {
        assert!(smp.b_n >= -1e-9, "b_{} = {}", smp.n, smp.b_n);
    }
}

/// Ergodic gaps on a game shrink along log-spaced checkpoints, allowing 5%
/// ripple.
#[test]
fn ergodic_game_gap_trend() {
    let spec = ProblemSpec::standard(Family::GameInstance1).with_dims(30, 30);
    let p = gen_matrix_game(&spec).unwrap();
    let cfg = SolverConfig {
        delta: 1.0,
        alpha: 0.99,
        lambda0: default_lambda0(&p, 1.0),
        nonmonotone: false,
        ..SolverConfig::default()
    };
    let run_spec = RunSpec {
        kind: SolverKind::PdaC,
        cfg,
        bcfg: BaselineConfig::default(),
        budget: Budget::iterations(8192),
        trace_every: 1,
        phi_star: None,
    };
    let (x0, y0) = p.default_start();
    let trace = run(&run_spec, &p, &x0, &y0).unwrap();
    let gaps: Vec<f64> = (4..=13).map(|k| trace.rows[1 << k].metric).collect();
    for w in gaps.windows(2) {
        assert!(w[1] <= 1.05 * w[0], "{gaps:?}");
    }
}
