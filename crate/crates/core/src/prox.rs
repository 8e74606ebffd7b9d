//! Proximal operators and projections for the function catalog used by the
//! solvers: `μ‖·‖₁`, `½‖· + b‖²`, the nonnegative orthant, the unit simplex,
//! and the zero function.

use crate::error::{check_len, Error, Result};
use crate::vector;

/// Componentwise slack allowed when evaluating the nonnegativity indicator.
pub const NONNEG_TOL: f64 = 1e-12;
/// Componentwise slack allowed when evaluating the simplex indicator.
pub const SIMPLEX_COMPONENT_TOL: f64 = 1e-10;
/// Slack on `Σxᵢ = 1` when evaluating the simplex indicator.
pub const SIMPLEX_SUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum ProxFn {
    /// `μ‖x‖₁`
    ScaledL1 {
        weight: f64,
    },
    /// `½‖x + b‖²`
    QuadShift {
        shift: Vec<f64>,
    },
    /// Indicator of `ℝⁿ₊`.
    IndNonneg,
    /// Indicator of the standard unit simplex.
    IndSimplex,
    Zero,
}

impl ProxFn {
    pub fn scaled_l1(weight: f64) -> Result<Self> {
        if !(weight >= 0.0) || !weight.is_finite() {
            return Err(Error::Argument(format!(
                "l1 weight must be finite and >= 0, got {weight}"
            )));
        }
        Ok(Self::ScaledL1 { weight })
    }

    pub fn quad_shift(shift: Vec<f64>) -> Result<Self> {
        if !vector::all_finite(&shift) {
            return Err(Error::Argument("quadratic shift must be finite".into()));
        }
        Ok(Self::QuadShift { shift })
    }

    /// Dimension the function is tied to, if any.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Self::QuadShift { shift } => Some(shift.len()),
            _ => None,
        }
    }

    /// `Prox_{t·h}(v)`. Indicators ignore `t`.
    pub fn prox(&self, v: &[f64], t: f64) -> Result<Vec<f64>> {
        if !(t > 0.0) {
            return Err(Error::Argument(format!("prox step must be positive, got {t}")));
        }
        match self {
            Self::ScaledL1 { weight } => Ok(prox_l1(v, t * weight)),
            Self::QuadShift { shift } => prox_quad_shift(v, t, shift),
            Self::IndNonneg => Ok(proj_nonneg(v)),
            Self::IndSimplex => proj_simplex(v),
            Self::Zero => Ok(v.to_vec()),
        }
    }

    /// Function value; `+∞` outside the domain of an indicator.
    pub fn value(&self, x: &[f64]) -> f64 {
        match self {
            Self::ScaledL1 { weight } => weight * vector::norm1(x),
            Self::QuadShift { shift } => {
                if shift.len() != x.len() {
                    return f64::INFINITY;
                }
                0.5 * x.iter().zip(shift).map(|(a, b)| (a + b) * (a + b)).sum::<f64>()
            }
            Self::IndNonneg => {
                if x.iter().all(|&v| v >= -NONNEG_TOL) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::IndSimplex => {
                if simplex_violation(x).is_none() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Self::Zero => 0.0,
        }
    }
}

/// Describes why `x` is outside the unit simplex, if it is.
pub fn simplex_violation(x: &[f64]) -> Option<String> {
    if x.is_empty() {
        return Some("empty vector".into());
    }
    if let Some((i, v)) = x.iter().enumerate().find(|(_, v)| !(**v >= -SIMPLEX_COMPONENT_TOL)) {
        return Some(format!("component {i} = {v} is negative"));
    }
    let s: f64 = x.iter().sum();
    if (s - 1.0).abs() > SIMPLEX_SUM_TOL {
        return Some(format!("components sum to {s}, not 1"));
    }
    None
}

/// Soft thresholding: `sign(xᵢ)·max(|xᵢ| − t, 0)`. Exactly 0 when `|xᵢ| = t`.
pub fn prox_l1(x: &[f64], t: f64) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            if v > t {
                v - t
            } else if v < -t {
                v + t
            } else {
                0.0
            }
        })
        .collect()
}

/// Prox of `s·½‖· + b‖²`: `(v − s·b)/(1 + s)`.
pub fn prox_quad_shift(v: &[f64], s: f64, b: &[f64]) -> Result<Vec<f64>> {
    check_len("quadratic prox shift", v.len(), b.len())?;
    let d = 1.0 + s;
    Ok(v.iter().zip(b).map(|(vi, bi)| (vi - s * bi) / d).collect())
}

pub fn proj_nonneg(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

/// Euclidean projection onto `{y ≥ 0, Σyᵢ = 1}` by sorting and thresholding.
pub fn proj_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Length {
            context: "simplex projection",
            expected: 1,
            found: 0,
        });
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        } else {
            break;
        }
    }
    Ok(v.iter().map(|&x| (x - tau).max(0.0)).collect())
}
