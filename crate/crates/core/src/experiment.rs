//! The `saddle-solve` command line: problem construction, per-family
//! defaults, CSV traces, and reference solves.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::read_matrix_market;
use crate::problems::{gen_lasso, gen_matrix_game, load_nnls, nnls_from_matrix, Family, ProblemSpec, SaddleProblem};
use crate::solvers::{
    default_lambda0, default_pdal_tau, run, solve_reference, BaselineConfig, Budget, IterationTrace, Reference,
    ReferenceOptions, RunSpec, SolverConfig, SolverKind, TraceRow,
};

/// Exit status when a run stops on a non-finite iterate.
pub const EXIT_DIVERGENCE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemName {
    Lasso1,
    Lasso2,
    Game1,
    Game2,
    Game3,
    Game4,
    Well,
    Illc,
}

impl ProblemName {
    pub fn family(self) -> Family {
        match self {
            Self::Lasso1 => Family::LassoWay1,
            Self::Lasso2 => Family::LassoWay2,
            Self::Game1 => Family::GameInstance1,
            Self::Game2 => Family::GameInstance2,
            Self::Game3 => Family::GameInstance3,
            Self::Game4 => Family::GameInstance4,
            Self::Well => Family::NnlsWell,
            Self::Illc => Family::NnlsIllc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverName {
    Pdac,
    Apdac,
    Pda,
    Pdal,
    Pgm,
    Fista,
}

impl SolverName {
    pub fn kind(self) -> SolverKind {
        match self {
            Self::Pdac => SolverKind::PdaC,
            Self::Apdac => SolverKind::ApdaC,
            Self::Pda => SolverKind::Pda,
            Self::Pdal => SolverKind::PdaL,
            Self::Pgm => SolverKind::Pgm,
            Self::Fista => SolverKind::Fista,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "saddle-solve",
    version,
    about = "Adaptive primal-dual solvers for saddle problems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one solver and write its CSV trace (the default command).
    Run(Box<RunArgs>),
    /// Compute a high-accuracy reference solution for a least-squares family.
    Reference(ReferenceArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_enum)]
    pub problem: ProblemName,
    /// Data seed (default: 1 for LASSO and NNLS, 100 for games).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Matrix Market file for the NNLS families.
    #[arg(long)]
    pub matrix_file: Option<PathBuf>,
    /// Exchange primal and dual roles (NNLS only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub swapped: Option<bool>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    /// Nonzeros in the LASSO ground truth.
    #[arg(long)]
    pub sparsity: Option<usize>,
    /// `μ` in `μ‖x‖₁`.
    #[arg(long)]
    pub l1_weight: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "pdac")]
    pub solver: SolverName,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub max_seconds: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub trace_every: usize,
    /// CSV destination (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Reference file from the `reference` command; its `phi_star` is
    /// subtracted from the objective.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda_cap: Option<f64>,
    #[arg(long)]
    pub mu_corr: Option<f64>,
    #[arg(long)]
    pub nu_corr: Option<f64>,
    #[arg(long)]
    pub n_hat: Option<usize>,
    #[arg(long)]
    pub n_zero: Option<usize>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub nonmonotone: Option<bool>,
    /// Skip the correction loop even when delta < 1. No convergence
    /// guarantee is known in that case.
    #[arg(long)]
    pub no_correction: bool,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub alpha_ls: Option<f64>,
    #[arg(long)]
    pub mu_ls: Option<f64>,
    #[arg(long)]
    pub fista_beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReferenceArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub residual_target: f64,
    /// Start from a random point drawn with this seed.
    #[arg(long)]
    pub start_seed: Option<u64>,
    /// JSON destination (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Fully resolved run: problem, solver settings, and outputs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: ProblemSpec,
    pub swapped: bool,
    pub matrix_file: Option<PathBuf>,
    pub kind: SolverKind,
    pub cfg: SolverConfig,
    pub bcfg: BaselineConfig,
    pub budget: Budget,
    pub trace_every: usize,
    pub output: Option<PathBuf>,
    pub reference: Option<PathBuf>,
}

/// Contents of a reference file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceFile {
    pub problem: String,
    pub phi_star: f64,
    pub residual: f64,
    pub iterations: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl From<(&SaddleProblem, Reference)> for ReferenceFile {
    fn from((p, r): (&SaddleProblem, Reference)) -> Self {
        Self {
            problem: p.label.clone(),
            phi_star: r.phi_star,
            residual: r.residual,
            iterations: r.iterations,
            x: r.x,
            y: r.y,
        }
    }
}

impl ReferenceFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

fn problem_spec(args: &ProblemArgs) -> Result<(ProblemSpec, bool)> {
    let family = args.problem.family();
    let mut spec = ProblemSpec::standard(family);
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if args.rows.is_some() || args.cols.is_some() {
        if family.is_nnls() {
            return Err(Error::Argument(
                "--rows/--cols do not apply to file-based problems".into(),
            ));
        }
        spec = spec
            .clone()
            .with_dims(args.rows.unwrap_or(spec.m), args.cols.unwrap_or(spec.n));
    }
    if let Some(s) = args.sparsity {
        spec = spec.with_sparsity(s);
    }
    if let Some(w) = args.l1_weight {
        spec.weight = w;
    }
    spec.data_path.clone_from(&args.matrix_file);
    let swapped = args.swapped.unwrap_or(false);
    if swapped && !family.is_nnls() {
        return Err(Error::Argument("--swapped applies to the NNLS problems only".into()));
    }
    spec.validate()?;
    Ok((spec, swapped))
}

/// Builds the saddle problem for a spec.
pub fn build_problem(spec: &ProblemSpec, swapped: bool) -> Result<SaddleProblem> {
    if spec.family.is_lasso() {
        Ok(gen_lasso(spec)?.0)
    } else if spec.family.is_game() {
        gen_matrix_game(spec)
    } else if let Some(path) = &spec.data_path {
        nnls_from_matrix(read_matrix_market(path)?, spec.seed, swapped)
    } else {
        load_nnls(spec, swapped)
    }
}

/// Applies the per-family defaults and flag overrides.
pub fn resolve(args: &RunArgs, problem: &SaddleProblem, spec: &ProblemSpec) -> Result<ExperimentConfig> {
    let family = spec.family;
    let kind = args.solver.kind();
    let swapped = args.problem.swapped.unwrap_or(false);
    let (max_iter, beta, n_hat) = if family.is_lasso() {
        (30_000, 1.0 / 400.0, 5000)
    } else if family.is_game() {
        (100_000, 1.0, 40_000)
    } else {
        (30_000, 1.0, 5000)
    };
    let (delta, alpha) = if kind == SolverKind::ApdaC || family.is_game() {
        (1.0, 0.99)
    } else {
        (0.62, 1.27)
    };
    let beta = args.beta.unwrap_or(beta);
    let n_hat = args.n_hat.unwrap_or(n_hat);
    let mut cfg = SolverConfig {
        delta: args.delta.unwrap_or(delta),
        alpha: args.alpha.unwrap_or(alpha),
        rho: args.rho.unwrap_or(0.7),
        mu_corr: args.mu_corr.unwrap_or(10.0),
        nu_corr: args.nu_corr.unwrap_or(1.5),
        beta0: beta,
        gamma: args.gamma.unwrap_or(problem.gamma),
        lambda0: 1.0,
        lambda_cap: args.lambda_cap.unwrap_or(1e6),
        n_hat,
        n_zero: args.n_zero.unwrap_or(2 * n_hat),
        max_iter: args.max_iters.unwrap_or(max_iter),
        nonmonotone: args.nonmonotone.unwrap_or(kind == SolverKind::PdaC),
        correction: !args.no_correction,
        seed: spec.seed,
    };
    cfg.lambda0 = match args.lambda0 {
        Some(l) => l,
        None if beta > 0.0 => default_lambda0(problem, beta),
        None => 1.0,
    };

    let needs_norm = matches!(kind, SolverKind::Pda | SolverKind::Pgm)
        && (args.tau.is_none() || args.sigma.is_none() || args.step.is_none());
    let l = if needs_norm { problem.op.norm()? } else { 1.0 };
    let inv = |v: f64| if v > 0.0 { 1.0 / v } else { 1.0 };
    let (tau, sigma) = match kind {
        SolverKind::Pda if family.is_lasso() => (20.0 * inv(l), inv(20.0 * l)),
        SolverKind::Pda => (inv(l), inv(l)),
        SolverKind::PdaL => (default_pdal_tau(problem), 1.0),
        _ => (1.0, 1.0),
    };
    let bcfg = BaselineConfig {
        tau: args.tau.unwrap_or(tau),
        sigma: args.sigma.unwrap_or(sigma),
        theta: 1.0,
        beta,
        alpha_ls: args.alpha_ls.unwrap_or(0.99),
        mu_ls: args.mu_ls.unwrap_or(0.7),
        fista_beta: args.fista_beta.unwrap_or(0.7),
        fista_lambda0: 1.0,
        step: args.step.unwrap_or(inv(l * l)),
    };
    if args.trace_every == 0 {
        return Err(Error::Argument("--trace-every must be at least 1".into()));
    }
    Ok(ExperimentConfig {
        spec: spec.clone(),
        swapped,
        matrix_file: args.problem.matrix_file.clone(),
        kind,
        budget: Budget {
            max_iter: cfg.max_iter,
            max_seconds: args.max_seconds,
        },
        cfg,
        bcfg,
        trace_every: args.trace_every,
        output: args.output.clone(),
        reference: args.reference.clone(),
    })
}

/// Writes trace rows as CSV with the fixed header.
pub fn write_trace<W: Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Io {
        path: "<trace>".into(),
        source: io::Error::other(e),
    };
    if rows.is_empty() {
        w.write_record(["iter", "seconds", "metric", "lambda", "beta", "corrections"])
            .map_err(io_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: "<trace>".into(),
        source,
    })
}

/// Reads a CSV trace back.
pub fn read_trace(path: &Path) -> Result<Vec<TraceRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: io::Error::other(e),
    })?;
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

fn open_output<'a>(path: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    match path {
        Some(p) => Ok(Box::new(File::create(p).map_err(|source| Error::Io {
            path: p.clone(),
            source,
        })?)),
        None => Ok(Box::new(stdout)),
    }
}

fn describe(e: &Error) -> String {
    match e {
        Error::Config { param, bound, value } => format!("invalid --{param}: {bound} (got {value})"),
        other => other.to_string(),
    }
}

fn summary(trace: &IterationTrace) -> String {
    format!(
        "final metric {:.6e}, corrections {}, iterations {}, wall time {:.3}s",
        trace.final_metric(),
        trace.corrections,
        trace.iterations,
        trace.seconds
    )
}

fn run_command(args: &RunArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let (spec, swapped) = problem_spec(&args.problem)?;
    let problem = build_problem(&spec, swapped)?;
    let exp = resolve(args, &problem, &spec)?;
    let phi_star = match &exp.reference {
        Some(p) => Some(ReferenceFile::read(p)?.phi_star),
        None => None,
    };
    let run_spec = RunSpec {
        kind: exp.kind,
        cfg: exp.cfg.clone(),
        bcfg: exp.bcfg.clone(),
        budget: exp.budget,
        trace_every: exp.trace_every,
        phi_star,
    };
    let (x0, y0) = problem.default_start();
    let outcome = run(&run_spec, &problem, &x0, &y0);
    let out = open_output(&exp.output, stdout)?;
    match outcome {
        Ok(trace) => {
            write_trace(&trace.rows, out)?;
            let _ = writeln!(stderr, "{}", summary(&trace));
            Ok(0)
        }
        Err(failure) => {
            write_trace(&failure.trace.rows, out)?;
            let _ = writeln!(stderr, "error: {}", describe(&failure.error));
            let _ = writeln!(stderr, "{}", summary(&failure.trace));
            Ok(if matches!(failure.error, Error::Divergence { .. }) {
                EXIT_DIVERGENCE
            } else {
                1
            })
        }
    }
}

fn reference_command(args: &ReferenceArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let (spec, swapped) = problem_spec(&args.problem)?;
    let problem = build_problem(&spec, swapped)?;
    let opts = ReferenceOptions {
        max_iter: args.max_iters,
        residual_target: args.residual_target,
        start_seed: args.start_seed,
        ..ReferenceOptions::default()
    };
    let r = solve_reference(&problem, &opts)?;
    if r.residual > args.residual_target {
        let _ = writeln!(
            stderr,
            "warning: reference residual {:.3e} above target {:.3e} after {} iterations",
            r.residual, args.residual_target, r.iterations
        );
    }
    let file = ReferenceFile::from((&problem, r));
    let mut out = open_output(&args.output, stdout)?;
    serde_json::to_writer(&mut out, &file).map_err(|e| Error::Io {
        path: args.output.clone().unwrap_or_else(|| "<stdout>".into()),
        source: io::Error::other(e),
    })?;
    let _ = writeln!(out);
    let _ = writeln!(
        stderr,
        "phi* {:.12e}, residual {:.3e}, iterations {}",
        file.phi_star, file.residual, file.iterations
    );
    Ok(0)
}

/// `run` is implied when the first argument is a flag.
fn with_default_command(argv: Vec<OsString>) -> Vec<OsString> {
    let implied = argv
        .get(1)
        .and_then(|a| a.to_str())
        .is_some_and(|a| a.starts_with("--") && !matches!(a, "--help" | "--version"));
    if implied {
        let mut v = argv;
        v.insert(1, "run".into());
        v
    } else {
        argv
    }
}

/// Entry point shared by the binary and the tests. Returns the exit code.
pub fn run_experiment<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv = with_default_command(argv.into_iter().map(Into::into).collect());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 2;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run_command(a, stdout, stderr),
        Command::Reference(a) => reference_command(a, stdout, stderr),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", describe(&e));
            1
        }
    }
}
