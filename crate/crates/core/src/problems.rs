//! Experiment families: LASSO, matrix games, and nonnegative least squares.
//!
//! All random data comes from a `ChaCha8Rng` seeded with `ProblemSpec::seed`.
//! Draw order is fixed: matrix entries row by row, then (for LASSO) the
//! support positions, the support values, and finally the noise vector.

use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};

use crate::error::{check_len, Error, Result};
use crate::linop::{read_matrix_market, DenseMatrix, LinearOperator, SparseMatrix};
use crate::prox::{simplex_violation, ProxFn};
use crate::vector;

/// Directory searched for the NNLS Matrix Market files.
pub const DATA_DIR_ENV: &str = "SADDLE_SOLVE_DATA";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    LassoWay1,
    LassoWay2,
    GameInstance1,
    GameInstance2,
    GameInstance3,
    GameInstance4,
    NnlsWell,
    NnlsIllc,
}

impl Family {
    pub fn is_lasso(self) -> bool {
        matches!(self, Self::LassoWay1 | Self::LassoWay2)
    }

    pub fn is_game(self) -> bool {
        matches!(
            self,
            Self::GameInstance1 | Self::GameInstance2 | Self::GameInstance3 | Self::GameInstance4
        )
    }

    pub fn is_nnls(self) -> bool {
        matches!(self, Self::NnlsWell | Self::NnlsIllc)
    }

    /// Default Matrix Market file name for the NNLS families.
    pub fn data_file(self) -> Option<&'static str> {
        match self {
            Self::NnlsWell => Some("well1033.mtx"),
            Self::NnlsIllc => Some("illc1033.mtx"),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub family: Family,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    /// Number of nonzeros in the LASSO ground truth.
    pub s: usize,
    /// `μ` in `μ‖x‖₁`.
    pub weight: f64,
    /// Standard deviation of the LASSO observation noise.
    pub noise_std: f64,
    pub data_path: Option<PathBuf>,
}

impl ProblemSpec {
    /// The published setting of each family: sizes, seed, and weights.
    pub fn standard(family: Family) -> Self {
        let (m, n, s, seed) = match family {
            Family::LassoWay1 => (200, 1000, 10, 1),
            Family::LassoWay2 => (1000, 2000, 100, 1),
            Family::GameInstance1 | Family::GameInstance2 => (100, 100, 0, 100),
            Family::GameInstance3 => (500, 100, 0, 100),
            Family::GameInstance4 => (100, 200, 0, 100),
            Family::NnlsWell | Family::NnlsIllc => (1033, 320, 0, 1),
        };
        Self {
            family,
            seed,
            m,
            n,
            s,
            weight: 0.1,
            noise_std: 0.1,
            data_path: None,
        }
    }

    pub fn with_dims(mut self, m: usize, n: usize) -> Self {
        self.m = m;
        self.n = n;
        self
    }

    pub fn with_sparsity(mut self, s: usize) -> Self {
        self.s = s;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(Error::Argument(format!(
                "problem dimensions must be positive, got {}x{}",
                self.m, self.n
            )));
        }
        if self.family.is_lasso() && self.s > self.n {
            return Err(Error::Argument(format!(
                "sparsity {} exceeds signal length {}",
                self.s, self.n
            )));
        }
        if !(self.weight >= 0.0) || !(self.noise_std >= 0.0) {
            return Err(Error::Argument("weight and noise level must be >= 0".into()));
        }
        Ok(())
    }

    /// Resolves the Matrix Market file for an NNLS family: the explicit
    /// `data_path`, else `$SADDLE_SOLVE_DATA/<name>.mtx`.
    pub fn resolve_data_path(&self) -> Result<PathBuf> {
        if let Some(p) = &self.data_path {
            return Ok(p.clone());
        }
        let name = self
            .family
            .data_file()
            .ok_or_else(|| Error::Argument(format!("{:?} does not read a data file", self.family)))?;
        let dir = std::env::var_os(DATA_DIR_ENV).ok_or_else(|| {
            Error::Argument(format!(
                "no matrix file given and {DATA_DIR_ENV} is not set (looking for {name})"
            ))
        })?;
        Ok(Path::new(&dir).join(name))
    }
}

/// Which iterate the primal objective is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Primal,
    Dual,
}

/// Objective used for reporting.
#[derive(Debug, Clone)]
pub enum Objective {
    /// `½‖Ax − b‖² + μ‖x‖₁`, optionally restricted to `x ≥ 0`. `A` is the
    /// data matrix, which differs from the coupling operator for swapped
    /// formulations.
    LeastSquares {
        matrix: LinearOperator,
        b: Vec<f64>,
        l1_weight: f64,
        nonneg: bool,
        side: Side,
    },
    /// Reference-free primal-dual gap `max(Kx) − min(K*y)`.
    MatrixGame,
    None,
}

/// `min_x max_y g(x) + ⟨Kx, y⟩ − f*(y)`
#[derive(Debug, Clone)]
pub struct SaddleProblem {
    pub g: ProxFn,
    pub fstar: ProxFn,
    pub op: LinearOperator,
    /// Strong-convexity modulus of `g` (0 if none).
    pub gamma: f64,
    pub objective: Objective,
    pub label: String,
}

impl SaddleProblem {
    pub fn new(g: ProxFn, fstar: ProxFn, op: LinearOperator, gamma: f64, label: impl Into<String>) -> Result<Self> {
        if let Some(d) = g.fixed_dim() {
            check_len("primal function domain", op.cols(), d)?;
        }
        if let Some(d) = fstar.fixed_dim() {
            check_len("dual function domain", op.rows(), d)?;
        }
        if !(gamma >= 0.0) {
            return Err(Error::Argument(format!("gamma must be >= 0, got {gamma}")));
        }
        Ok(Self {
            g,
            fstar,
            op,
            gamma,
            objective: Objective::None,
            label: label.into(),
        })
    }

    pub fn with_objective(mut self, objective: Objective) -> Self {
        self.objective = objective;
        self
    }

    pub fn primal_dim(&self) -> usize {
        self.op.cols()
    }

    pub fn dual_dim(&self) -> usize {
        self.op.rows()
    }

    /// Starting point used in the experiments: `x₀ = 0, y₀ = Kx₀ − b` for
    /// least squares (mirrored for swapped forms), simplex centres for games,
    /// zeros otherwise.
    pub fn default_start(&self) -> (Vec<f64>, Vec<f64>) {
        let (n, m) = (self.primal_dim(), self.dual_dim());
        match &self.objective {
            Objective::LeastSquares { b, side, .. } => {
                let minus_b: Vec<f64> = b.iter().map(|v| -v).collect();
                match side {
                    Side::Primal => (vec![0.0; n], minus_b),
                    Side::Dual => (minus_b, vec![0.0; m]),
                }
            }
            Objective::MatrixGame => (vec![1.0 / n as f64; n], vec![1.0 / m as f64; m]),
            Objective::None => (vec![0.0; n], vec![0.0; m]),
        }
    }
}

/// LASSO ground truth: sparse signal and observations.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// Random LASSO instance `½‖Kx − b‖² + μ‖x‖₁` with `b = Kw + ν`.
pub fn gen_lasso(spec: &ProblemSpec) -> Result<(SaddleProblem, GroundTruth)> {
    if !spec.family.is_lasso() {
        return Err(Error::Argument(format!("{:?} is not a LASSO family", spec.family)));
    }
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let entries: Vec<f64> = (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let k = DenseMatrix::new(m, n, entries)?;

    let mut support = index::sample(&mut rng, n, spec.s).into_vec();
    support.sort_unstable();
    let mut w = vec![0.0; n];
    match spec.family {
        Family::LassoWay1 => {
            let dist = Uniform::new_inclusive(-10.0, 10.0).expect("valid bounds");
            for &i in &support {
                w[i] = dist.sample(&mut rng);
            }
        }
        _ => {
            for &i in &support {
                w[i] = StandardNormal.sample(&mut rng);
            }
        }
    }
    // a zero draw would leave fewer than s nonzeros
    for &i in &support {
        while w[i] == 0.0 {
            w[i] = rng.random_range(-1.0..1.0);
        }
    }

    let op = LinearOperator::from(k);
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::Argument(e.to_string()))?;
    let kw = op.apply(&w)?;
    let b: Vec<f64> = kw.iter().map(|v| v + noise.sample(&mut rng)).collect();

    let problem = SaddleProblem::new(
        ProxFn::scaled_l1(spec.weight)?,
        ProxFn::quad_shift(b.clone())?,
        op.clone(),
        0.0,
        format!("lasso {:?} {}x{} seed {}", spec.family, m, n, spec.seed),
    )?
    .with_objective(Objective::LeastSquares {
        matrix: op,
        b: b.clone(),
        l1_weight: spec.weight,
        nonneg: false,
        side: Side::Primal,
    });
    Ok((problem, GroundTruth { w, b }))
}

/// `min_{x∈Δn} max_{y∈Δm} ⟨Kx, y⟩`
pub fn gen_matrix_game(spec: &ProblemSpec) -> Result<SaddleProblem> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let entries: Vec<f64> = match spec.family {
        Family::GameInstance1 => {
            let d = Uniform::new_inclusive(-1.0, 1.0).expect("valid bounds");
            (0..m * n).map(|_| d.sample(&mut rng)).collect()
        }
        Family::GameInstance2 => (0..m * n).map(|_| StandardNormal.sample(&mut rng)).collect(),
        Family::GameInstance3 => {
            let d = Normal::new(0.0, 10.0).expect("valid deviation");
            (0..m * n).map(|_| d.sample(&mut rng)).collect()
        }
        Family::GameInstance4 => {
            let d = Uniform::new_inclusive(0.0, 1.0).expect("valid bounds");
            (0..m * n).map(|_| d.sample(&mut rng)).collect()
        }
        other => return Err(Error::Argument(format!("{other:?} is not a matrix game"))),
    };
    let op = LinearOperator::from(DenseMatrix::new(m, n, entries)?);
    Ok(SaddleProblem::new(
        ProxFn::IndSimplex,
        ProxFn::IndSimplex,
        op,
        0.0,
        format!("game {:?} {}x{} seed {}", spec.family, m, n, spec.seed),
    )?
    .with_objective(Objective::MatrixGame))
}

/// NNLS instance from a Matrix Market file with `b ~ N(0, I)`.
pub fn load_nnls(spec: &ProblemSpec, swapped: bool) -> Result<SaddleProblem> {
    if !spec.family.is_nnls() {
        return Err(Error::Argument(format!("{:?} is not an NNLS family", spec.family)));
    }
    let path = spec.resolve_data_path()?;
    let k = read_matrix_market(&path)?;
    nnls_from_matrix(k, spec.seed, swapped)
}

/// Strong-convexity modulus used for the swapped NNLS form.
pub const SWAPPED_NNLS_GAMMA: f64 = 0.5;

/// `min_{x≥0} ½‖Kx − b‖²` with `b` drawn from `N(0, I)` under `seed`.
///
/// Unswapped: `g = δ₊`, `f* = ½‖· + b‖²`, coupling `K`.
/// Swapped: the roles of primal and dual are exchanged, giving
/// `g = ½‖· + b‖²` (strongly convex), `f* = δ₊`, coupling `−K*`. The original
/// `x` is then the dual iterate.
pub fn nnls_from_matrix(k: SparseMatrix, seed: u64, swapped: bool) -> Result<SaddleProblem> {
    let (m, n) = (k.rows(), k.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let data = LinearOperator::from(k);
    let label = format!(
        "nnls {}x{} seed {}{}",
        m,
        n,
        seed,
        if swapped { " swapped" } else { "" }
    );
    let problem = if swapped {
        SaddleProblem::new(
            ProxFn::quad_shift(b.clone())?,
            ProxFn::IndNonneg,
            data.adjoint().negated(),
            SWAPPED_NNLS_GAMMA,
            label,
        )?
    } else {
        SaddleProblem::new(
            ProxFn::IndNonneg,
            ProxFn::quad_shift(b.clone())?,
            data.clone(),
            0.0,
            label,
        )?
    };
    Ok(problem.with_objective(Objective::LeastSquares {
        matrix: data,
        b,
        l1_weight: 0.0,
        nonneg: true,
        side: if swapped { Side::Dual } else { Side::Primal },
    }))
}

/// `½‖Kx − b‖² + μ‖x‖₁`, or `+∞` when a nonnegativity constraint is violated.
pub fn primal_objective(problem: &SaddleProblem, x: &[f64]) -> Result<f64> {
    match &problem.objective {
        Objective::LeastSquares {
            matrix,
            b,
            l1_weight,
            nonneg,
            ..
        } => {
            let r = vector::sub(&matrix.apply(x)?, b);
            if *nonneg && x.iter().any(|&v| v < -crate::prox::NONNEG_TOL) {
                return Ok(f64::INFINITY);
            }
            Ok(0.5 * vector::norm_sq(&r) + l1_weight * vector::norm1(x))
        }
        Objective::MatrixGame => Err(Error::UnsupportedMetric(
            "matrix games have no primal objective; use the primal-dual gap".into(),
        )),
        Objective::None => Err(Error::UnsupportedMetric(format!(
            "problem '{}' has no objective",
            problem.label
        ))),
    }
}

/// Matrix-game gap `max_i (Kx)_i − min_j (K*y)_j` for feasible `x`, `y`.
pub fn pd_gap_game(k: &LinearOperator, x: &[f64], y: &[f64]) -> Result<f64> {
    if let Some(why) = simplex_violation(x) {
        return Err(Error::Infeasible(format!("x: {why}")));
    }
    if let Some(why) = simplex_violation(y) {
        return Err(Error::Infeasible(format!("y: {why}")));
    }
    let kx = k.apply(x)?;
    let kty = k.adjoint_apply(y)?;
    let max = kx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = kty.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(family: Family) -> ProblemSpec {
        ProblemSpec::standard(family).with_dims(12, 30).with_sparsity(4)
    }

    #[test]
    fn lasso_way1_standard_shape() {
        let (p, gt) = gen_lasso(&ProblemSpec::standard(Family::LassoWay1)).unwrap();
        assert_eq!((p.op.rows(), p.op.cols()), (200, 1000));
        assert_eq!(gt.w.iter().filter(|v| **v != 0.0).count(), 10);
        assert!(gt.w.iter().all(|v| v.abs() <= 10.0));
        assert_eq!(p.g, ProxFn::ScaledL1 { weight: 0.1 });
        assert_eq!(p.gamma, 0.0);
    }

    #[test]
    fn lasso_way2_standard_shape() {
        let spec = ProblemSpec::standard(Family::LassoWay2);
        assert_eq!((spec.m, spec.n, spec.s), (1000, 2000, 100));
        let (p, gt) = gen_lasso(&spec).unwrap();
        assert_eq!((p.op.rows(), p.op.cols()), (1000, 2000));
        assert_eq!(gt.w.iter().filter(|v| **v != 0.0).count(), 100);
    }

    #[test]
    fn lasso_is_deterministic() {
        let spec = small(Family::LassoWay1);
        let (p1, g1) = gen_lasso(&spec).unwrap();
        let (p2, g2) = gen_lasso(&spec).unwrap();
        assert_eq!(g1, g2);
        assert_eq!(p1.op.to_dense(), p2.op.to_dense());
        let (_, g3) = gen_lasso(&spec.clone().with_seed(2)).unwrap();
        assert_ne!(g1, g3);
    }

    #[test]
    fn lasso_rejects_bad_specs() {
        assert!(gen_lasso(&ProblemSpec::standard(Family::GameInstance1)).is_err());
        assert!(gen_lasso(&small(Family::LassoWay1).with_sparsity(31)).is_err());
        assert!(gen_lasso(&small(Family::LassoWay1).with_dims(0, 3)).is_err());
    }

    #[test]
    fn games_have_expected_shapes_and_ranges() {
        let g3 = gen_matrix_game(&ProblemSpec::standard(Family::GameInstance3)).unwrap();
        assert_eq!((g3.op.rows(), g3.op.cols()), (500, 100));
        let g1 = gen_matrix_game(&ProblemSpec::standard(Family::GameInstance1)).unwrap();
        assert!(g1.op.to_dense().entries().iter().all(|v| (-1.0..=1.0).contains(v)));
        let g4 = gen_matrix_game(&ProblemSpec::standard(Family::GameInstance4)).unwrap();
        assert_eq!((g4.op.rows(), g4.op.cols()), (100, 200));
        assert!(g4.op.to_dense().entries().iter().all(|v| (0.0..=1.0).contains(v)));
        let again = gen_matrix_game(&ProblemSpec::standard(Family::GameInstance1)).unwrap();
        assert_eq!(g1.op.to_dense(), again.op.to_dense());
        assert!(gen_matrix_game(&ProblemSpec::standard(Family::LassoWay1)).is_err());
    }

    #[test]
    fn lasso_objective_examples() {
        let op = LinearOperator::from(DenseMatrix::identity(1));
        let p = SaddleProblem::new(
            ProxFn::scaled_l1(0.1).unwrap(),
            ProxFn::quad_shift(vec![1.0]).unwrap(),
            op.clone(),
            0.0,
            "1d",
        )
        .unwrap()
        .with_objective(Objective::LeastSquares {
            matrix: op,
            b: vec![1.0],
            l1_weight: 0.1,
            nonneg: false,
            side: Side::Primal,
        });
        assert_eq!(primal_objective(&p, &[0.0]).unwrap(), 0.5);
    }

    #[test]
    fn objective_at_truth_without_noise() {
        let mut spec = small(Family::LassoWay1);
        spec.noise_std = 0.0;
        let (p, gt) = gen_lasso(&spec).unwrap();
        let phi = primal_objective(&p, &gt.w).unwrap();
        assert!((phi - 0.1 * vector::norm1(&gt.w)).abs() <= 1e-9);
    }

    #[test]
    fn nnls_objective_and_swapped_structure() {
        let k = SparseMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, -1.0)]).unwrap();
        let p = nnls_from_matrix(k.clone(), 4, false).unwrap();
        assert_eq!(p.g, ProxFn::IndNonneg);
        assert_eq!(primal_objective(&p, &[-1.0, 0.0]).unwrap(), f64::INFINITY);
        assert!(primal_objective(&p, &[1.0, 0.0]).unwrap().is_finite());
        let again = nnls_from_matrix(k.clone(), 4, false).unwrap();
        let (_, y0) = p.default_start();
        assert_eq!(y0, again.default_start().1);

        let s = nnls_from_matrix(k, 4, true).unwrap();
        assert_eq!(s.gamma, 0.5);
        assert_eq!(s.fstar, ProxFn::IndNonneg);
        assert_eq!((s.op.rows(), s.op.cols()), (2, 3));
        let (u0, v0) = s.default_start();
        assert_eq!(u0, y0);
        assert_eq!(v0, vec![0.0, 0.0]);
    }

    #[test]
    fn nnls_requires_a_file() {
        let mut spec = ProblemSpec::standard(Family::NnlsWell);
        spec.data_path = Some("/nonexistent/well1033.mtx".into());
        assert!(matches!(load_nnls(&spec, false), Err(Error::Io { .. })));
    }

    #[test]
    fn game_gap_examples() {
        let id = LinearOperator::from(DenseMatrix::identity(2));
        assert_eq!(pd_gap_game(&id, &[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        let k = LinearOperator::from(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        assert_eq!(pd_gap_game(&k, &[1.0, 0.0], &[1.0, 0.0]).unwrap(), 2.0);
        assert!(matches!(
            pd_gap_game(&k, &[1.0, 1.0], &[1.0, 0.0]),
            Err(Error::Infeasible(_))
        ));
        assert!(primal_objective(
            &gen_matrix_game(&ProblemSpec::standard(Family::GameInstance1)).unwrap(),
            &[0.0; 100]
        )
        .is_err());
    }

    #[test]
    fn game_gap_bounds_duality_violation() {
        // gap(x, y) = max over vertices minus min over vertices, which dominates
        // ⟨Kx', y⟩ − ⟨Kx, y'⟩ for every feasible x', y'
        let spec = ProblemSpec::standard(Family::GameInstance2).with_dims(5, 4);
        let p = gen_matrix_game(&spec).unwrap();
        let d = p.op.to_dense();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x =
                crate::prox::proj_simplex(&(0..4).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap();
            let y =
                crate::prox::proj_simplex(&(0..5).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap();
            let gap = pd_gap_game(&p.op, &x, &y).unwrap();
            let mut brute_max = f64::NEG_INFINITY;
            for i in 0..5 {
                brute_max = brute_max.max((0..4).map(|j| d.get(i, j) * x[j]).sum());
            }
            let mut brute_min = f64::INFINITY;
            for j in 0..4 {
                brute_min = brute_min.min((0..5).map(|i| d.get(i, j) * y[i]).sum());
            }
            assert!((gap - (brute_max - brute_min)).abs() <= 1e-12);
            assert!(gap >= -1e-9);
            let kxy = vector::dot(&p.op.apply(&x).unwrap(), &y);
            assert!(brute_max >= kxy - 1e-12 && brute_min <= kxy + 1e-12);
        }
    }
}
