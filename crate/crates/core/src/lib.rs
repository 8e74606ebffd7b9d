//! First-order primal-dual solvers for convex-concave saddle problems
//! `min_x max_y g(x) + ⟨Kx, y⟩ − f*(y)` with predicted and corrected step
//! sizes, together with the comparison methods, problem generators, and
//! diagnostics used to study them.

// `!(v > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod linop;
pub mod problems;
pub mod prox;
pub mod solvers;
pub mod vector;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use error::{Error, Result};
