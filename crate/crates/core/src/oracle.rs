//! Brute-force reference implementations for tests. Everything here favours
//! obvious correctness over speed and caps dimensions where it enumerates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linop::DenseMatrix;
use crate::problems::{gen_lasso, Family, ProblemSpec};

pub use crate::diagnostics::saddle_residual;
pub use crate::solvers::{solve_reference, Reference, ReferenceOptions};

/// Largest dimension accepted by the enumeration oracles.
pub const MAX_ENUM_DIM: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub value: T,
    /// KKT or stationarity residual of `value`.
    pub certificate: f64,
}

fn enum_guard(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ENUM_DIM {
        return Err(Error::Argument(format!(
            "enumeration oracle needs 1..={MAX_ENUM_DIM} coordinates, got {n}"
        )));
    }
    Ok(())
}

/// Double loop over rows and columns.
pub fn naive_matvec(m: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.rows()];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, xj) in x.iter().enumerate() {
            *o += m.get(i, j) * xj;
        }
    }
    out
}

pub fn naive_matvec_transpose(m: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; m.cols()];
    for (j, o) in out.iter_mut().enumerate() {
        for (i, yi) in y.iter().enumerate() {
            *o += m.get(i, j) * yi;
        }
    }
    out
}

/// Characteristic polynomial coefficients `c₀..cₙ` (with `cₙ = 1`) of a
/// square matrix by the Faddeev–LeVerrier recursion.
pub fn char_poly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1}·I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += a[i][l] * m[l][j];
                }
                next[i][j] = s;
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let mut tr = 0.0;
        for i in 0..n {
            for l in 0..n {
                tr += a[i][l] * m[l][i];
            }
        }
        c[n - k] = -tr / k as f64;
    }
    c
}

fn poly_eval(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ci in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ci;
    }
    (p, dp)
}

/// `‖M‖` from the largest root of the Gram matrix's characteristic
/// polynomial. Newton from the trace descends monotonically onto the largest
/// root because all roots are real.
pub fn gram_norm_oracle(m: &DenseMatrix) -> Result<OracleResult<f64>> {
    let n = m.cols();
    enum_guard(n)?;
    let mut g = vec![vec![0.0; n]; n];
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..m.rows()).map(|r| m.get(r, i) * m.get(r, j)).sum();
        }
    }
    let c = char_poly(&g);
    let mut x: f64 = (0..n).map(|i| g[i][i]).sum();
    if x == 0.0 {
        return Ok(OracleResult {
            value: 0.0,
            certificate: 0.0,
        });
    }
    for _ in 0..500 {
        let (p, dp) = poly_eval(&c, x);
        if dp == 0.0 {
            break;
        }
        let step = p / dp;
        x -= step;
        if step.abs() <= 1e-16 * x.abs() {
            break;
        }
    }
    let (p, _) = poly_eval(&c, x);
    Ok(OracleResult {
        value: x.max(0.0).sqrt(),
        certificate: p.abs(),
    })
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Projection onto the unit simplex by enumerating all nonempty supports.
pub fn qp_project_simplex_oracle(v: &[f64]) -> Result<OracleResult<Vec<f64>>> {
    let n = v.len();
    enum_guard(n)?;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let shift = (1.0 - support.iter().map(|&i| v[i]).sum::<f64>()) / support.len() as f64;
        let mut x = vec![0.0; n];
        for &i in &support {
            x[i] = v[i] + shift;
        }
        if x.iter().any(|&c| c < 0.0) {
            continue;
        }
        // multiplier of the inactive bounds must be nonnegative
        let kkt = (0..n)
            .filter(|i| mask >> i & 1 == 0)
            .map(|i| (v[i] + shift).max(0.0))
            .fold(0.0, f64::max);
        let d = dist_sq(&x, v);
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            best = Some((d, x, kkt));
        }
    }
    let (_, value, certificate) = best.expect("the full support with the largest entry is always feasible");
    Ok(OracleResult { value, certificate })
}

/// Projection onto the nonnegative orthant by enumerating active sets.
pub fn qp_project_nonneg_oracle(v: &[f64]) -> Result<OracleResult<Vec<f64>>> {
    let n = v.len();
    enum_guard(n)?;
    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for mask in 0u32..(1 << n) {
        let x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { 0.0 } else { v[i] }).collect();
        if x.iter().any(|&c| c < 0.0) {
            continue;
        }
        let kkt = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| v[i].max(0.0))
            .fold(0.0, f64::max);
        let d = dist_sq(&x, v);
        if best.as_ref().is_none_or(|(bd, _, _)| d < *bd) {
            best = Some((d, x, kkt));
        }
    }
    let (_, value, certificate) = best.expect("the all-active set is feasible");
    Ok(OracleResult { value, certificate })
}

/// `argmin_p t|p| + ½(p − x)²` per coordinate over the three smooth pieces.
pub fn prox_l1_oracle(x: &[f64], t: f64) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let obj = |p: f64| t * p.abs() + 0.5 * (p - xi) * (p - xi);
            let mut cands = vec![0.0];
            if xi - t > 0.0 {
                cands.push(xi - t);
            }
            if xi + t < 0.0 {
                cands.push(xi + t);
            }
            cands
                .into_iter()
                .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
                .expect("nonempty")
        })
        .collect()
}

/// `argmin_y ½(y + b)² + (y − v)²/(2s)` per coordinate by bisection on the
/// sign of the derivative.
pub fn prox_quad_oracle(v: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(b)
        .map(|(&vi, &bi)| {
            let deriv = |y: f64| (y + bi) + (y - vi) / s;
            let r = 1.0 + vi.abs() + bi.abs();
            let (mut lo, mut hi) = (-r, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                if deriv(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// Dense accumulation of a coordinate Matrix Market text, written
/// independently of the CSR reader.
pub fn dense_from_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines();
    let banner = lines.next().unwrap_or("").to_ascii_lowercase();
    let symmetric = banner.contains("symmetric");
    let mut data = lines.map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('%'));
    let bad = |m: &str| Error::Argument(format!("oracle parse: {m}"));
    let dims: Vec<usize> = data
        .next()
        .ok_or_else(|| bad("missing size line"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("size token")))
        .collect::<Result<_>>()?;
    let (r, c) = (dims[0], dims[1]);
    let mut dense = vec![0.0; r * c];
    for line in data {
        let t: Vec<&str> = line.split_whitespace().collect();
        let i: usize = t[0].parse().map_err(|_| bad("row"))?;
        let j: usize = t[1].parse().map_err(|_| bad("col"))?;
        let v: f64 = t[2].parse().map_err(|_| bad("value"))?;
        dense[(i - 1) * c + (j - 1)] += v;
        if symmetric && i != j {
            dense[(j - 1) * c + (i - 1)] += v;
        }
    }
    DenseMatrix::new(r, c, dense)
}

/// Seeded `N(0, 1)` matrix, row-major.
pub fn seeded_dense(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = (0..rows * cols).map(|_| StandardNormal.sample(&mut rng)).collect();
    DenseMatrix::new(rows, cols, e).expect("sizes match")
}

/// Seeded uniform vector on `[-lo, lo]`.
pub fn seeded_vector(n: usize, lo: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-lo..lo)).collect()
}

/// One record of the fixtures file.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: String,
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
    pub tol: f64,
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(";")
}

impl Fixture {
    fn new(name: &str, inputs: Vec<f64>, outputs: Vec<f64>, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            inputs,
            outputs,
            tol,
        }
    }

    /// `name,in;in;…,out;out;…,tol` with round-trip float formatting.
    pub fn to_line(&self) -> String {
        format!(
            "{},{},{},{:e}",
            self.name,
            fmt_list(&self.inputs),
            fmt_list(&self.outputs),
            self.tol
        )
    }
}

fn parse_list(field: &str) -> std::result::Result<Vec<f64>, String> {
    if field.is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|t| t.parse::<f64>().map_err(|e| format!("bad number '{t}': {e}")))
        .collect()
}

/// Parses a fixtures file; `#` starts a comment line.
pub fn parse_fixtures(text: &str) -> Result<Vec<Fixture>> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: "fixtures".into(),
            line: k + 1,
            message,
        };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", f.len())));
        }
        out.push(Fixture {
            name: f[0].to_string(),
            inputs: parse_list(f[1]).map_err(err)?,
            outputs: parse_list(f[2]).map_err(err)?,
            tol: f[3].parse().map_err(|e| err(format!("bad tolerance: {e}")))?,
        });
    }
    Ok(out)
}

/// Scalar rewrite of one outer iteration on `g = f* = 0, K = 1` with constant
/// steps: `(x₁, z₁, y₁)`.
fn bilinear_adaptive(x0: f64, y0: f64, lam: f64, delta: f64, beta: f64) -> [f64; 3] {
    let x1 = x0 - lam * y0;
    let z1 = x1 + delta * (x1 - x0);
    let y1 = y0 + beta * lam * z1;
    [x1, z1, y1]
}

/// Two fixed-step PDA iterations on the same toy: `(y₁, x₁, y₂, x₂)`.
fn bilinear_pda(x0: f64, y0: f64, tau: f64, sigma: f64) -> [f64; 4] {
    let mut out = [0.0; 4];
    let (mut x, mut y, mut z) = (x0, y0, x0);
    for k in 0..2 {
        y += sigma * z;
        let xn = x - tau * y;
        z = 2.0 * xn - x;
        x = xn;
        out[2 * k] = y;
        out[2 * k + 1] = x;
    }
    out
}

/// Shrinks needed when `ζ(λ) = λc`: counted by repeated multiplication.
fn shrink_count(c: f64, lam: f64, zeta0: f64, zeta_n: f64, mu: f64, nu: f64, rho: f64) -> f64 {
    let bound = (mu * zeta0).min(nu * zeta_n);
    let mut k = 0;
    let mut l = lam;
    while l * c > bound {
        l *= rho;
        k += 1;
    }
    k as f64
}

/// `ζ₀` for a seeded LASSO from dense loops and the prox oracles.
fn lasso_zeta0(spec: &ProblemSpec, lambda0: f64, beta: f64) -> Result<f64> {
    let (p, gt) = gen_lasso(spec)?;
    let k = p.op.to_dense();
    let b = gt.b;
    let x0 = vec![0.0; spec.n];
    let y0: Vec<f64> = b.iter().map(|v| -v).collect();
    let kty = naive_matvec_transpose(&k, &y0);
    let arg: Vec<f64> = x0.iter().zip(&kty).map(|(x, g)| x - lambda0 * g).collect();
    let xp = prox_l1_oracle(&arg, lambda0 * spec.weight);
    let kx = naive_matvec(&k, &x0);
    let s = beta * lambda0;
    let arg: Vec<f64> = y0.iter().zip(&kx).map(|(y, v)| y + s * v).collect();
    let yp = prox_quad_oracle(&arg, s, &b);
    Ok(dist_sq(&x0, &xp).sqrt().max(dist_sq(&y0, &yp).sqrt()))
}

/// Lyapunov decrement summands on a 1-D window, term by term.
#[allow(clippy::too_many_arguments)]
fn lyapunov_terms(x: [f64; 3], y: [f64; 2], l: [f64; 3], delta: f64, alpha: f64, beta: f64) -> [f64; 5] {
    let eps = 1.0 / delta.sqrt();
    let z1 = x[1] + delta * (x[1] - x[0]);
    let t1 = (l[1] / (delta * l[0]) - alpha * eps * l[1] / l[2]) * (x[2] - z1).powi(2);
    let t2 = (1.0 - l[1] / (delta * l[0])) * (x[2] - x[1]).powi(2);
    let t3 = (delta * l[1] / l[0]) * (x[1] - x[0]).powi(2);
    let t4 = (1.0 / beta) * (1.0 - alpha * l[1] / (eps * l[2])) * (y[1] - y[0]).powi(2);
    [t1, t2, t3, t4, t1 + t2 + t3 + t4]
}

/// Every derived example, recomputed from the oracles above.
pub fn derived_fixtures() -> Result<Vec<Fixture>> {
    let mut f = Vec::new();

    let m = seeded_dense(3, 2, 11);
    let x = [0.7, -1.3];
    let mut inputs = m.entries().to_vec();
    inputs.extend_from_slice(&x);
    f.push(Fixture::new("linop_matvec_3x2", inputs, naive_matvec(&m, &x), 1e-14));

    let m = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]])?;
    let mut inputs = m.entries().to_vec();
    inputs.extend_from_slice(&[1.0, 0.0]);
    f.push(Fixture::new(
        "linop_adjoint_2x2",
        inputs,
        naive_matvec_transpose(&m, &[1.0, 0.0]),
        0.0,
    ));

    let g = seeded_dense(5, 4, 5);
    let nrm = gram_norm_oracle(&g)?.value;
    f.push(Fixture::new(
        "linop_norm_5x4",
        g.entries().to_vec(),
        vec![nrm],
        1e-8 * nrm,
    ));

    let fro: f64 = m.entries().iter().map(|v| v * v).sum::<f64>().sqrt();
    f.push(Fixture::new(
        "linop_frobenius_2x2",
        m.entries().to_vec(),
        vec![fro],
        1e-15,
    ));

    let dup = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 2.0\n1 1 3.0\n";
    let d = dense_from_matrix_market(dup)?;
    f.push(Fixture::new(
        "market_duplicates",
        vec![2.0, 3.0],
        d.entries().to_vec(),
        0.0,
    ));

    f.push(Fixture::new(
        "prox_quad_3_1_2",
        vec![3.0, 1.0, 2.0],
        prox_quad_oracle(&[3.0], 2.0, &[1.0]),
        1e-12,
    ));

    let v = seeded_vector(4, 3.0, 21);
    let o = qp_project_nonneg_oracle(&v)?;
    f.push(Fixture::new("prox_nonneg_random4", v, o.value, 1e-12));

    let l1_in = seeded_vector(4, 2.0, 22);
    f.push(Fixture::new(
        "prox_l1_random4_t05",
        {
            let mut i = l1_in.clone();
            i.push(0.5);
            i
        },
        prox_l1_oracle(&l1_in, 0.5),
        1e-12,
    ));

    for (name, v) in [
        ("prox_simplex_2_0", vec![2.0, 0.0]),
        ("prox_simplex_03_01", vec![0.3, 0.1]),
    ] {
        let o = qp_project_simplex_oracle(&v)?;
        f.push(Fixture::new(name, v, o.value, 1e-12));
    }

    f.push(Fixture::new(
        "problems_lasso_objective_1d",
        vec![1.0, 1.0, 0.1, 0.0],
        vec![0.5 * 1.0 + 0.1 * 0.0],
        0.0,
    ));
    f.push(Fixture::new(
        "problems_game_gap_identity",
        vec![0.5, 0.5, 0.5, 0.5],
        vec![0.0],
        0.0,
    ));
    {
        // vertices: rows of Kx and columns of K*y
        let k: [[f64; 2]; 2] = [[1.0, 2.0], [3.0, 4.0]];
        let (x, y) = ([1.0, 0.0], [1.0, 0.0]);
        let kx = [k[0][0] * x[0] + k[0][1] * x[1], k[1][0] * x[0] + k[1][1] * x[1]];
        let kty = [k[0][0] * y[0] + k[1][0] * y[1], k[0][1] * y[0] + k[1][1] * y[1]];
        let gap = kx[0].max(kx[1]) - kty[0].min(kty[1]);
        f.push(Fixture::new(
            "problems_game_gap_1234",
            vec![1.0, 2.0, 3.0, 4.0, 1.0, 0.0, 1.0, 0.0],
            vec![gap],
            0.0,
        ));
    }

    let spec = ProblemSpec::standard(Family::LassoWay1)
        .with_dims(8, 12)
        .with_sparsity(3)
        .with_seed(7);
    f.push(Fixture::new(
        "solvers_init_zeta0_lasso",
        vec![7.0, 8.0, 12.0, 3.0, 1.0, 1.0],
        vec![lasso_zeta0(&spec, 1.0, 1.0)?],
        1e-12,
    ));

    let phi = |n: f64, d: f64, nh: f64, n0: f64| {
        if n <= nh {
            (1.0 + d) / d
        } else if n <= n0 {
            (1.0 + d + n - nh) / (d + n - nh)
        } else {
            1.0
        }
    };
    f.push(Fixture::new(
        "solvers_phi_n1",
        vec![1.0, 0.62, 2.0, 5.0],
        vec![phi(1.0, 0.62, 2.0, 5.0)],
        1e-15,
    ));
    f.push(Fixture::new(
        "solvers_phi_n4",
        vec![4.0, 0.62, 2.0, 5.0],
        vec![phi(4.0, 0.62, 2.0, 5.0)],
        1e-15,
    ));
    f.push(Fixture::new(
        "solvers_predict_step",
        vec![1.27, 1.0, 1.0, 2.0, 1.0],
        vec![(1.27 * 1.0 / (1.0f64.sqrt() * 2.0)).min(1.0)],
        1e-15,
    ));
    f.push(Fixture::new(
        "solvers_pdac_bilinear",
        vec![1.0, 1.0, 0.5, 1.0, 1.0],
        bilinear_adaptive(1.0, 1.0, 0.5, 1.0, 1.0).to_vec(),
        1e-15,
    ));
    f.push(Fixture::new(
        "solvers_correction_shrinks",
        vec![4.0, 1.0, 1.0, 0.1, 10.0, 1.5, 0.5],
        vec![shrink_count(4.0, 1.0, 1.0, 0.1, 10.0, 1.5, 0.5)],
        0.0,
    ));
    let beta_next = 1.0 * (1.0 + 1.0 * 1.0);
    f.push(Fixture::new(
        "solvers_apdac_beta",
        vec![1.0, 1.0, 1.0],
        vec![beta_next, (1.0f64 / beta_next).sqrt()],
        1e-15,
    ));
    f.push(Fixture::new(
        "solvers_pda_bilinear",
        vec![1.0, 1.0, 0.5, 0.5],
        bilinear_pda(1.0, 1.0, 0.5, 0.5).to_vec(),
        1e-15,
    ));
    let holds = 1.0f64.sqrt() * 1.0 * 0.5 <= 0.99 * 1.0;
    f.push(Fixture::new(
        "solvers_pdal_condition",
        vec![1.0, 1.0, 0.5, 1.0, 0.99],
        vec![if holds { 1.0 } else { 0.0 }],
        0.0,
    ));
    f.push(Fixture::new(
        "solvers_fista_t2",
        vec![1.0],
        vec![(1.0 + (1.0f64 + 4.0).sqrt()) / 2.0],
        1e-15,
    ));

    let win = ([1.0, 2.0, 4.0], [1.0, -1.0], [1.0, 1.0, 1.0]);
    f.push(Fixture::new(
        "diagnostics_lyapunov_terms",
        vec![1.0, 2.0, 4.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 2.0],
        lyapunov_terms(win.0, win.1, win.2, 1.0, 0.5, 2.0).to_vec(),
        1e-15,
    ));
    let win = ([0.3, -0.2, 0.5], [0.7, 0.1], [0.8, 0.9, 0.85]);
    f.push(Fixture::new(
        "diagnostics_lyapunov_terms_varying",
        vec![0.3, -0.2, 0.5, 0.7, 0.1, 0.8, 0.9, 0.85, 0.62, 1.27, 0.0025],
        lyapunov_terms(win.0, win.1, win.2, 0.62, 1.27, 0.0025).to_vec(),
        1e-12,
    ));
    let (lam, delta, head, z) = (0.5, 0.62, 1.0, 3.0);
    f.push(Fixture::new(
        "diagnostics_ergodic_single",
        vec![lam, delta, head, z],
        vec![(lam * delta * head + lam * z) / (lam * delta + lam)],
        1e-15,
    ));
    Ok(f)
}
