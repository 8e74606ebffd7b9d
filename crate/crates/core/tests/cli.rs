//! The `saddle-solve` binary end to end.

use std::fmt::Write as _;
use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saddle_core::experiment::{read_trace, ReferenceFile};
use saddle_core::linop::read_matrix_market;
use saddle_core::oracle::dense_from_matrix_market;

fn solve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_saddle-solve"))
        .args(args)
        .env_remove("SADDLE_SOLVE_DATA")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const SMALL_LASSO: [&str; 8] = ["--problem", "lasso1", "--rows", "20", "--cols", "40", "--sparsity", "4"];

#[test]
fn help_lists_subcommands() {
    let out = solve(&["--help"]);
    assert!(out.status.success());
    let s = text(&out.stdout);
    assert!(s.contains("run") && s.contains("reference"), "{s}");
}

#[test]
fn trace_goes_to_stdout_with_header() {
    let mut args = SMALL_LASSO.to_vec();
    args.extend(["--max-iters", "50", "--trace-every", "10"]);
    let out = solve(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let s = text(&out.stdout);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines[0], "iter,seconds,metric,lambda,beta,corrections");
    let iters: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(iters, ["0", "10", "20", "30", "40", "50"]);
    assert!(text(&out.stderr).contains("final metric"));
}

#[test]
fn explicit_run_matches_implied_run() {
    let mut args = SMALL_LASSO.to_vec();
    args.extend(["--solver", "pdal", "--max-iters", "30"]);
    let implied = solve(&args);
    let mut explicit = vec!["run"];
    explicit.extend(&args);
    let explicit = solve(&explicit);
    assert!(implied.status.success());
    let metric = |o: &Output| -> Vec<String> {
        text(&o.stdout)
            .lines()
            .map(|l| l.split(',').nth(2).unwrap().to_string())
            .collect()
    };
    assert_eq!(metric(&implied), metric(&explicit));
}

#[test]
fn every_solver_runs_on_lasso() {
    for solver in ["pdac", "apdac", "pda", "pdal", "pgm", "fista"] {
        let mut args = SMALL_LASSO.to_vec();
        args.extend(["--solver", solver, "--max-iters", "200", "--trace-every", "200"]);
        let out = solve(&args);
        assert!(out.status.success(), "{solver}: {}", text(&out.stderr));
        assert_eq!(text(&out.stdout).lines().count(), 3, "{solver}");
    }
}

#[test]
fn games_report_the_gap_and_reject_primal_methods() {
    let base = [
        "--problem",
        "game2",
        "--rows",
        "30",
        "--cols",
        "20",
        "--max-iters",
        "500",
        "--trace-every",
        "500",
    ];
    let mut args = base.to_vec();
    args.extend(["--solver", "pdac"]);
    let out = solve(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let rows: Vec<String> = text(&out.stdout).lines().skip(1).map(String::from).collect();
    let gap = |r: &str| r.split(',').nth(2).unwrap().parse::<f64>().unwrap();
    assert!(gap(&rows[1]) < gap(&rows[0]));

    let mut args = base.to_vec();
    args.extend(["--solver", "fista"]);
    let out = solve(&args);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_parameter_names_the_flag() {
    let mut args = SMALL_LASSO.to_vec();
    args.extend(["--delta", "0.5"]);
    let out = solve(&args);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("invalid --delta"), "{}", text(&out.stderr));

    let mut args = SMALL_LASSO.to_vec();
    args.extend(["--delta", "0.62", "--alpha", "1.28"]);
    let out = solve(&args);
    assert!(text(&out.stderr).contains("invalid --alpha"), "{}", text(&out.stderr));
}

#[test]
fn unknown_problem_is_a_usage_error() {
    let out = solve(&["--problem", "lasso9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn divergence_exits_2_and_keeps_partial_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let mut args = SMALL_LASSO.to_vec();
    let t = trace.to_string_lossy().into_owned();
    args.extend([
        "--solver",
        "pgm",
        "--step",
        "1e6",
        "--max-iters",
        "1000",
        "--output",
        &t,
    ]);
    let out = solve(&args);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    let rows = read_trace(&trace).unwrap();
    assert!(!rows.is_empty() && rows.len() < 1001);
    assert!(text(&out.stderr).contains("non-finite"), "{}", text(&out.stderr));
}

#[test]
fn reference_then_run_reports_suboptimality() {
    let dir = tempfile::tempdir().unwrap();
    let r = dir.path().join("ref.json").to_string_lossy().into_owned();
    let mut args = vec!["reference"];
    args.extend(SMALL_LASSO);
    args.extend(["--output", &r]);
    let out = solve(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let reference = ReferenceFile::read(Path::new(&r)).unwrap();
    assert!(reference.residual <= 1e-10);
    assert_eq!(reference.x.len(), 40);

    let csv = dir.path().join("run.csv").to_string_lossy().into_owned();
    let mut args = SMALL_LASSO.to_vec();
    args.extend([
        "--solver",
        "fista",
        "--max-iters",
        "3000",
        "--reference",
        &r,
        "--output",
        &csv,
    ]);
    let out = solve(&args);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let rows = read_trace(Path::new(&csv)).unwrap();
    assert_eq!(rows.len(), 3001);
    let last = rows.last().unwrap().metric;
    assert!(last.abs() < 1e-9, "{last}");
    assert!(rows[0].metric > 1.0);
}

#[test]
fn runs_are_reproducible() {
    let mut args = SMALL_LASSO.to_vec();
    args.extend(["--max-iters", "300", "--trace-every", "50"]);
    let a = solve(&args);
    let b = solve(&args);
    let metrics = |o: &Output| -> Vec<String> {
        text(&o.stdout)
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(1);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(metrics(&a), metrics(&b));
}

#[test]
fn nnls_needs_a_data_file() {
    let out = solve(&["--problem", "well", "--max-iters", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("SADDLE_SOLVE_DATA"), "{}", text(&out.stderr));
}

/// Pseudo-random sparse matrix in coordinate format with some repeated
/// entries, shaped like the NNLS test matrices.
fn synthetic_market(rows: usize, cols: usize) -> String {
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n% synthetic\n");
    let mut entries = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1033);
    for j in 0..cols {
        for _ in 0..4 {
            let i = rng.random_range(0..rows);
            let v: f64 = rng.random_range(-1.0..1.0);
            entries.push((i + 1, j + 1, v));
        }
    }
    writeln!(s, "{rows} {cols} {}", entries.len()).unwrap();
    for (i, j, v) in entries {
        writeln!(s, "{i} {j} {v:e}").unwrap();
    }
    s
}

#[test]
fn matrix_market_file_round_trips_and_solves() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("toy1033.mtx");
    let body = synthetic_market(1033, 320);
    std::fs::write(&path, &body).unwrap();
    let m = read_matrix_market(&path).unwrap();
    assert_eq!((m.rows(), m.cols()), (1033, 320));
    assert_eq!(m.to_dense(), dense_from_matrix_market(&body).unwrap());

    let p = path.to_string_lossy().into_owned();
    for (solver, swapped) in [("pdac", "false"), ("apdac", "true"), ("fista", "false")] {
        let out = solve(&[
            "--problem",
            "well",
            "--matrix-file",
            &p,
            "--swapped",
            swapped,
            "--solver",
            solver,
            "--max-iters",
            "300",
            "--trace-every",
            "300",
        ]);
        assert!(out.status.success(), "{solver}: {}", text(&out.stderr));
        let s = text(&out.stdout);
        let rows: Vec<f64> = s
            .lines()
            .skip(1)
            .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
            .collect();
        assert!(rows[1] < rows[0], "{solver}: {rows:?}");
    }
}
