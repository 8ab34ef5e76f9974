//! End-to-end checks of the command-line surface: flags, exit codes, and
//! the CSV/JSON output contracts.

use std::fs;
use std::path::PathBuf;
use std::process::Command;

use qgn::solver::{q_gauss_newton, SolveConfig};
use qgn::DilationParams;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = qgn::cli::run(&owned, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn tmp_path(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn csv_output_is_bit_stable() {
    let args = [
        "solve",
        "--problem",
        "example3",
        "--q",
        "0.95",
        "--x0",
        "0,0",
        "--format",
        "csv",
    ];
    let (code_a, out_a, _) = run_cli(&args);
    let (code_b, out_b, _) = run_cli(&args);
    assert_eq!(code_a, 0);
    assert_eq!(code_b, 0);
    assert_eq!(
        out_a, out_b,
        "identical inputs must produce identical bytes"
    );
    assert!(out_a.ends_with('\n'));
    // Fixed six-decimal fields.
    let row = out_a.lines().nth(1).unwrap();
    for field in row.split(',').skip(1) {
        let (_, frac) = field.split_once('.').expect("decimal point");
        assert_eq!(frac.trim_start_matches('-').len(), 6, "field {field}");
    }
}

#[test]
fn json_summary_matches_schema_and_full_precision() {
    let (code, out, _) = run_cli(&[
        "solve",
        "--problem",
        "example1",
        "--q",
        "0.9995",
        "--x0",
        "2.1",
        "--tol",
        "1e-3",
        "--max-iter",
        "25",
        "--format",
        "json",
    ]);
    assert_eq!(code, 0);
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    let object = value.as_object().unwrap();
    let mut keys: Vec<&str> = object.keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        vec![
            "final_norm",
            "final_x",
            "iterations",
            "problem",
            "q",
            "status",
            "trace"
        ]
    );
    assert_eq!(object["problem"], "example1");
    assert_eq!(object["status"], "converged");
    assert_eq!(object["iterations"], 8);
    assert!(object["final_norm"].is_number());
    let trace = object["trace"].as_array().unwrap();
    assert_eq!(trace.len(), 8);
    for rec in trace {
        let rec = rec.as_object().unwrap();
        let mut keys: Vec<&str> = rec.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, vec!["k", "residuals", "sse", "step_norm", "x"]);
    }

    // Seventeen significant digits reproduce the in-process f64 exactly.
    let cfg = SolveConfig::default().with_stop_tol(1e-3).with_max_iter(25);
    let reference = q_gauss_newton(
        &qgn::model::builtin_example1(),
        &[2.1],
        &DilationParams::uniform(0.9995, 1).unwrap(),
        &cfg,
    );
    let json_x = object["final_x"].as_array().unwrap()[0].as_f64().unwrap();
    assert_eq!(
        json_x, reference.final_x[0],
        "JSON numbers round-trip bitwise"
    );
    let json_norm = object["final_norm"].as_f64().unwrap();
    assert_eq!(json_norm, reference.final_norm);
}

#[test]
fn sweep_counts_fall_as_q_rises() {
    let (code, out, _) = run_cli(&[
        "sweep",
        "--problem",
        "example1",
        "--q",
        "0.9,0.95,0.99,0.9995",
        "--x0",
        "2.1",
        "--tol",
        "1e-3",
        "--max-iter",
        "25",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0);
    let mut counts = Vec::new();
    for line in out.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[2], "converged");
        counts.push(fields[1].parse::<i64>().unwrap());
    }
    assert_eq!(counts.len(), 4);
    for pair in counts.windows(2) {
        assert!(pair[1] < pair[0], "counts {counts:?}");
    }
}

#[test]
fn sweep_reports_failing_q_without_aborting() {
    // Under q = 0.9 the dilated first coordinate lands on the pole of the
    // second residual, so that run is rejected; q = 0.95 still converges.
    let (code, out, _) = run_cli(&[
        "sweep",
        "--problem",
        "example2",
        "--q",
        "0.9,0.95",
        "--x0",
        "-0.111111111111,1",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 3);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].contains("invalid_point"));
    assert!(lines[2].contains("converged"));
}

#[test]
fn compare_nm_reproduces_the_reference_comparison() {
    let (code, out, _) = run_cli(&[
        "compare-nm",
        "--problem",
        "example1",
        "--q",
        "0.9,0.95,0.99,0.9995",
        "--x0",
        "2.1",
        "--tol",
        "1e-3",
        "--max-iter",
        "100",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "output:\n{out}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 6, "header, four q rows, one Nelder-Mead row");
    let expected_counts: [i64; 4] = [19, 15, 10, 8];
    for (line, expected) in lines[1..5].iter().zip(expected_counts) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "q-gauss-newton");
        let iters: i64 = fields[2].parse().unwrap();
        assert!((iters - expected).abs() <= 2, "{line}");
    }
    let nm: Vec<&str> = lines[5].split(',').collect();
    assert_eq!(nm[0], "nelder-mead");
    let nm_x: f64 = nm[4].parse().unwrap();
    assert!((nm_x - 2.9998).abs() < 2e-3, "Nelder-Mead x = {nm_x}");
}

#[test]
fn compare_nm_agrees_on_a_quadratic_bowl() {
    let path = tmp_path("bowl.prob");
    fs::write(&path, "name = bowl\nn = 1\nresidual = (x1-3)^2\nx0 = 2.1\n").unwrap();
    // q = 1 keeps Gauss-Newton on the classical halving steps; smaller q
    // crawls on this quartic objective once the Jacobian flattens.
    let (code, out, _) = run_cli(&[
        "compare-nm",
        "--file",
        path.to_str().unwrap(),
        "--q",
        "1",
        "--tol",
        "1e-8",
        "--max-iter",
        "300",
        "--format",
        "csv",
    ]);
    assert_eq!(code, 0, "output:\n{out}");
    for line in out.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let x: f64 = fields[4].parse().unwrap();
        assert!((x - 3.0).abs() <= 1e-3, "{line}");
    }
}

#[test]
fn file_problem_reproduces_builtin_run() {
    let path = tmp_path("mirror3.prob");
    fs::write(
        &path,
        "name = mirror3\nn = 2\nresidual = x1 - 0.4\nresidual = x2 - 8\nresidual = x1^2 + x2^2 - 1\nx0 = 0,0\n",
    )
    .unwrap();
    // The 1e-3 tolerance stops inside the stable regime; tighter stops sit
    // past the point where differencing noise grows on this large-residual
    // problem.
    let (code_file, out_file, _) = run_cli(&[
        "solve",
        "--file",
        path.to_str().unwrap(),
        "--q",
        "0.95",
        "--jacobian",
        "numeric",
        "--tol",
        "1e-3",
        "--format",
        "csv",
    ]);
    let (code_builtin, out_builtin, _) = run_cli(&[
        "solve",
        "--problem",
        "example3",
        "--q",
        "0.95",
        "--x0",
        "0,0",
        "--jacobian",
        "numeric",
        "--tol",
        "1e-3",
        "--format",
        "csv",
    ]);
    assert_eq!(code_file, 0);
    assert_eq!(code_builtin, 0);
    let rows = |s: &str| -> Vec<Vec<f64>> {
        s.lines()
            .skip(1)
            .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
            .collect()
    };
    let (a, b) = (rows(&out_file), rows(&out_builtin));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        for (va, vb) in ra.iter().zip(rb) {
            assert!((va - vb).abs() <= 1e-6, "{va} vs {vb}");
        }
    }
}

#[test]
fn output_flag_writes_the_report_to_a_file() {
    let path = tmp_path("trace.csv");
    let (code, out, _) = run_cli(&[
        "solve",
        "--problem",
        "example3",
        "--q",
        "0.9",
        "--x0",
        "0,0",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty(), "report goes to the file, not stdout");
    let written = fs::read_to_string(&path).unwrap();
    let (_, stdout_run, _) = run_cli(&[
        "solve",
        "--problem",
        "example3",
        "--q",
        "0.9",
        "--x0",
        "0,0",
        "--format",
        "csv",
    ]);
    assert_eq!(written, stdout_run);
}

#[test]
fn process_exit_codes_follow_the_contract() {
    let binary = env!("CARGO_BIN_EXE_qgn");

    let ok = Command::new(binary)
        .args([
            "solve",
            "--problem",
            "example1",
            "--q",
            "0.9995",
            "--x0",
            "2.1",
            "--tol",
            "1e-3",
        ])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));

    let max_iter = Command::new(binary)
        .args([
            "solve",
            "--problem",
            "example1",
            "--q",
            "0.9",
            "--x0",
            "2.1",
            "--tol",
            "1e-12",
            "--max-iter",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(max_iter.status.code(), Some(2));

    let failing = tmp_path("failing.prob");
    fs::write(
        &failing,
        "name = failing\nn = 1\nresidual = ln(x1)\nx0 = -1\n",
    )
    .unwrap();
    let solver_error = Command::new(binary)
        .args(["solve", "--file", failing.to_str().unwrap(), "--q", "0.9"])
        .output()
        .unwrap();
    assert_eq!(solver_error.status.code(), Some(3));

    let usage = Command::new(binary)
        .args(["solve", "--bogus"])
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(1));
    assert!(!usage.stderr.is_empty());

    let help = Command::new(binary).args(["help"]).output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}

#[test]
fn singular_problem_exits_three() {
    let path = tmp_path("singular.prob");
    fs::write(
        &path,
        "name = singular\nn = 2\nresidual = x1 + x2\nresidual = 2*x1 + 2*x2\nx0 = 1,1\n",
    )
    .unwrap();
    let (code, out, _) = run_cli(&[
        "solve",
        "--file",
        path.to_str().unwrap(),
        "--q",
        "0.9",
        "--format",
        "table",
    ]);
    assert_eq!(code, 3);
    assert!(out.contains("singular_system"));
}
