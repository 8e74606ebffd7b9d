//! Adaptive primal-dual methods with correction and their comparison
//! methods, plus the driver loop that records traces.

mod adaptive;
mod baselines;
mod config;
mod driver;
mod reference;

pub use adaptive::{
    apdac_iterate, correction_pass, init_state, pdac_iterate, primal_candidate, PrimalCandidate, SolverState,
    MAX_CORRECTION_SHRINKS,
};
pub use baselines::{
    fista_iterate, fista_momentum, init_baseline, pda_iterate, pdal_initial_step, pdal_iterate, pgm_iterate,
    BaselineState, SmoothSplit, MAX_LINESEARCH_SHRINKS,
};
pub use config::{delta_lower_bound, phi_schedule, predict_step, BaselineConfig, SolverConfig, STEP_PRODUCT_TOL};
pub use driver::{
    default_lambda0, default_pdal_tau, run, Budget, IterationTrace, RunFailure, RunSpec, SolverKind, TraceRow,
};
pub use reference::{solve_reference, Reference, ReferenceOptions};
