//! Coupling operators: dense or CSR-backed matrices with forward and adjoint
//! products, norm estimates, and Matrix Market ingestion.

mod market;
mod matrix;

use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::vector;

pub use market::{read_matrix_market, read_matrix_market_str};
pub use matrix::{DenseMatrix, SparseMatrix};

/// Seed of the power-iteration start vector.
pub const POWER_ITERATION_SEED: u64 = 0x5add1e;
pub const DEFAULT_NORM_TOL: f64 = 1e-10;
pub const DEFAULT_NORM_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Backing {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

/// A linear map `K` together with its adjoint. Cloning is cheap: the matrix
/// is shared. `adjoint()` and `negated()` produce views over the same storage.
#[derive(Debug, Clone)]
pub struct LinearOperator {
    backing: Arc<Backing>,
    transposed: bool,
    scale: f64,
    cached_norm: OnceLock<f64>,
}

impl From<DenseMatrix> for LinearOperator {
    fn from(m: DenseMatrix) -> Self {
        Self::new(Backing::Dense(m))
    }
}

impl From<SparseMatrix> for LinearOperator {
    fn from(m: SparseMatrix) -> Self {
        Self::new(Backing::Sparse(m))
    }
}

impl LinearOperator {
    pub fn new(backing: Backing) -> Self {
        Self {
            backing: Arc::new(backing),
            transposed: false,
            scale: 1.0,
            cached_norm: OnceLock::new(),
        }
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    fn stored_shape(&self) -> (usize, usize) {
        match &*self.backing {
            Backing::Dense(m) => (m.rows(), m.cols()),
            Backing::Sparse(m) => (m.rows(), m.cols()),
        }
    }

    /// Output dimension of `apply`.
    pub fn rows(&self) -> usize {
        let (r, c) = self.stored_shape();
        if self.transposed {
            c
        } else {
            r
        }
    }

    /// Input dimension of `apply`.
    pub fn cols(&self) -> usize {
        let (r, c) = self.stored_shape();
        if self.transposed {
            r
        } else {
            c
        }
    }

    /// The adjoint `K*` as an operator in its own right.
    pub fn adjoint(&self) -> Self {
        let cached_norm = OnceLock::new();
        if let Some(v) = self.cached_norm.get() {
            let _ = cached_norm.set(*v);
        }
        Self {
            backing: Arc::clone(&self.backing),
            transposed: !self.transposed,
            scale: self.scale,
            cached_norm,
        }
    }

    /// `−K`
    pub fn negated(&self) -> Self {
        let mut op = self.clone();
        op.scale = -self.scale;
        op
    }

    fn raw_forward(&self, x: &[f64], out: &mut [f64]) {
        match &*self.backing {
            Backing::Dense(m) => m.mul_vec(x, out),
            Backing::Sparse(m) => m.mul_vec(x, out),
        }
    }

    fn raw_transpose(&self, y: &[f64], out: &mut [f64]) {
        match &*self.backing {
            Backing::Dense(m) => m.mul_transpose_vec(y, out),
            Backing::Sparse(m) => m.mul_transpose_vec(y, out),
        }
    }

    fn rescale(&self, out: &mut [f64]) {
        if self.scale != 1.0 {
            out.iter_mut().for_each(|v| *v *= self.scale);
        }
    }

    /// `Kx`
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("operator apply", self.cols(), x.len())?;
        let mut out = vec![0.0; self.rows()];
        if self.transposed {
            self.raw_transpose(x, &mut out);
        } else {
            self.raw_forward(x, &mut out);
        }
        self.rescale(&mut out);
        Ok(out)
    }

    /// `K*y`
    pub fn adjoint_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len("operator adjoint apply", self.rows(), y.len())?;
        let mut out = vec![0.0; self.cols()];
        if self.transposed {
            self.raw_forward(y, &mut out);
        } else {
            self.raw_transpose(y, &mut out);
        }
        self.rescale(&mut out);
        Ok(out)
    }

    /// Spectral norm estimated by power iteration on `K*K` with the default
    /// tolerance, cached after the first call.
    pub fn norm(&self) -> Result<f64> {
        if let Some(v) = self.cached_norm.get() {
            return Ok(*v);
        }
        let v = operator_norm(self, DEFAULT_NORM_TOL, DEFAULT_NORM_MAX_ITER)?;
        Ok(*self.cached_norm.get_or_init(|| v))
    }

    pub fn cached_norm(&self) -> Option<f64> {
        self.cached_norm.get().copied()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let sum_sq = match &*self.backing {
            Backing::Dense(m) => vector::norm_sq(m.entries()),
            Backing::Sparse(m) => vector::norm_sq(m.values()),
        };
        self.scale.abs() * sum_sq.sqrt()
    }

    /// `√(‖K‖₁‖K‖∞)`, an upper bound on the spectral norm that costs one pass
    /// over the entries.
    pub fn norm_upper_bound(&self) -> f64 {
        let (r, c) = self.stored_shape();
        let mut row_sums = vec![0.0; r];
        let mut col_sums = vec![0.0; c];
        let mut add = |i: usize, j: usize, v: f64| {
            row_sums[i] += v.abs();
            col_sums[j] += v.abs();
        };
        match &*self.backing {
            Backing::Dense(m) => {
                for i in 0..r {
                    for j in 0..c {
                        add(i, j, m.get(i, j));
                    }
                }
            }
            Backing::Sparse(m) => m.iter().for_each(|(i, j, v)| add(i, j, v)),
        }
        let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
        self.scale.abs() * (max(row_sums) * max(col_sums)).sqrt()
    }

    /// Dense copy of the operator as seen through `apply` (transposition and
    /// sign included).
    pub fn to_dense(&self) -> DenseMatrix {
        let stored = match &*self.backing {
            Backing::Dense(m) => m.clone(),
            Backing::Sparse(m) => m.to_dense(),
        };
        let (r, c) = (self.rows(), self.cols());
        let mut entries = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                let v = if self.transposed {
                    stored.get(j, i)
                } else {
                    stored.get(i, j)
                };
                entries[i * c + j] = self.scale * v;
            }
        }
        DenseMatrix::new(r, c, entries).expect("dense expansion keeps shape")
    }
}

/// Largest singular value of `op` by power iteration on `K*K`, started from a
/// fixed seeded vector. Stops once the relative change of the Rayleigh
/// quotient `‖Kv‖²` falls to `tol`. Returns 0 for an operator that annihilates
/// the start vector.
pub fn operator_norm(op: &LinearOperator, tol: f64, max_iter: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "power iteration tolerance must be positive, got {tol}"
        )));
    }
    let n = op.cols();
    if n == 0 || op.rows() == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_ITERATION_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut estimate = 0.0;
    for _ in 0..max_iter {
        let nv = vector::norm(&v);
        if nv == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|a| *a /= nv);
        let kv = op.apply(&v)?;
        let rayleigh = vector::norm_sq(&kv);
        let w = op.adjoint_apply(&kv)?;
        let change = (rayleigh - estimate).abs();
        estimate = rayleigh;
        if change <= tol * rayleigh || rayleigh == 0.0 {
            return Ok(estimate.sqrt());
        }
        v = w;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_estimate: estimate.sqrt(),
    })
}
