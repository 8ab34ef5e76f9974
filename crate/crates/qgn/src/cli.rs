//! Command-line harness for single solves, q-sweeps, and the Nelder-Mead
//! comparison.
//!
//! Exit codes: 0 converged, 1 usage or input error, 2 iteration limit
//! reached, 3 solver failure (singular system, non-finite values, domain
//! guard violation). Sweeps and comparisons report the worst status across
//! their runs.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::exprparse::{self, ParsedProblem};
use crate::model::{self, ResidualProblem};
use crate::qcalc::{DilationParams, ScalarField};
use crate::solver::{self, JacobianMode, SolveConfig, SolveResult, SolveStatus, StoppingNorm};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

const USAGE: &str = "\
usage: qgn <command> [flags]

commands:
  solve        run one solve and print the iteration trace
  sweep        run one solve per q value and print a summary table
  compare-nm   run q-Gauss-Newton and Nelder-Mead side by side (m = 1 only)
  help         print this message

flags:
  --problem <name>        built-in problem: example1, example2, example3
  --file <path>           problem file (keys: name, n, residual, x0, notes)
  --q <list>              dilation parameter(s) in (0, 1], comma separated;
                          solve takes exactly one value
  --x0 <list>             starting point, comma separated; required unless
                          the problem file provides one
  --tol <float>           stopping tolerance (default 1e-6)
  --max-iter <int>        iteration limit (default 100)
  --alpha <float>         step factor in (0, 1] (default 1)
  --jacobian <mode>       analytic | numeric (default analytic)
  --stop-on <norm>        step | sse (default step)
  --format <fmt>          table | csv | json (default table)
  --output <path>         write the report to a file instead of stdout

exit codes: 0 converged, 1 usage error, 2 iteration limit, 3 solver failure
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    Solve,
    Sweep,
    CompareNm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug)]
struct CliArgs {
    command: Command,
    problem: Option<String>,
    file: Option<PathBuf>,
    qs: Vec<f64>,
    x0: Option<Vec<f64>>,
    tol: f64,
    max_iter: usize,
    alpha: f64,
    jacobian: JacobianMode,
    stop_on: StoppingNorm,
    format: OutputFormat,
    output: Option<PathBuf>,
}

struct UsageError(String);

impl From<String> for UsageError {
    fn from(msg: String) -> Self {
        UsageError(msg)
    }
}

/// Runs the harness on `args` (without the program name), writing reports to
/// `stdout` and diagnostics to `stderr`. Returns the process exit code.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run_inner(args, stdout) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            let _ = write!(stderr, "{USAGE}");
            EXIT_USAGE
        }
    }
}

fn run_inner(args: &[String], stdout: &mut dyn Write) -> Result<i32, UsageError> {
    if args.is_empty() {
        return Err("missing command".to_string().into());
    }
    if matches!(args[0].as_str(), "help" | "--help" | "-h") {
        let _ = write!(stdout, "{USAGE}");
        return Ok(EXIT_OK);
    }
    let cli = parse_args(args)?;
    let (problem, file_x0) = load_problem(&cli)?;
    let x0 = match cli.x0.clone().or(file_x0) {
        Some(x0) => x0,
        None => {
            return Err("missing --x0 (and the problem file provides none)"
                .to_string()
                .into())
        }
    };
    if x0.len() != problem.parameter_count() {
        return Err(format!(
            "--x0 has {} components but problem '{}' has n = {}",
            x0.len(),
            problem.name(),
            problem.parameter_count()
        )
        .into());
    }
    let cfg = SolveConfig::default()
        .with_stop_tol(cli.tol)
        .with_max_iter(cli.max_iter)
        .with_alpha(cli.alpha)
        .with_jacobian_mode(cli.jacobian)
        .with_stopping_norm(cli.stop_on);

    let report = match cli.command {
        Command::Solve => {
            if cli.qs.len() != 1 {
                return Err(
                    format!("solve takes exactly one --q value, got {}", cli.qs.len()).into(),
                );
            }
            let q = cli.qs[0];
            let dilation =
                DilationParams::uniform(q, problem.parameter_count()).expect("q already validated");
            let result = solver::q_gauss_newton(&problem, &x0, &dilation, &cfg);
            let text = render_solve(&problem, q, &result, cli.format);
            (text, status_exit_code(result.status))
        }
        Command::Sweep => {
            let results = run_sweep(&problem, &x0, &cli.qs, &cfg);
            let mut text = String::new();
            // A one-value sweep degenerates to a solve, so the table form
            // shows the trace ahead of its summary row.
            if cli.qs.len() == 1 && cli.format == OutputFormat::Table {
                text.push_str(&trace_table(&problem, cli.qs[0], &results[0]));
                text.push('\n');
            }
            text.push_str(&render_sweep(&problem, &cli.qs, &results, cli.format));
            let code = worst_exit_code(results.iter().map(|r| r.status));
            (text, code)
        }
        Command::CompareNm => {
            if problem.residual_count() != 1 {
                return Err(format!(
                    "compare-nm needs a scalar problem (m = 1); '{}' has m = {}",
                    problem.name(),
                    problem.residual_count()
                )
                .into());
            }
            let gn_results = run_sweep(&problem, &x0, &cli.qs, &cfg);
            let residuals = problem.residuals().clone();
            let objective =
                ScalarField::new(problem.parameter_count(), move |x| residuals.eval(x)[0]);
            let nm_result = solver::nelder_mead(&objective, &x0, &cfg);
            let text = render_compare(&problem, &cli.qs, &gn_results, &nm_result, cli.format);
            let code = worst_exit_code(
                gn_results
                    .iter()
                    .map(|r| r.status)
                    .chain([nm_result.status]),
            );
            (text, code)
        }
    };

    let (text, code) = report;
    match &cli.output {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
        }
        None => {
            let _ = write!(stdout, "{text}");
        }
    }
    Ok(code)
}

fn status_exit_code(status: SolveStatus) -> i32 {
    match status {
        SolveStatus::Converged => EXIT_OK,
        SolveStatus::MaxIterationsReached => EXIT_MAX_ITER,
        _ => EXIT_SOLVER,
    }
}

fn worst_exit_code(statuses: impl Iterator<Item = SolveStatus>) -> i32 {
    statuses.map(status_exit_code).max().unwrap_or(EXIT_OK)
}

fn parse_args(args: &[String]) -> Result<CliArgs, UsageError> {
    let command = match args[0].as_str() {
        "solve" => Command::Solve,
        "sweep" => Command::Sweep,
        "compare-nm" => Command::CompareNm,
        other => return Err(format!("unknown command '{other}'").into()),
    };
    let mut cli = CliArgs {
        command,
        problem: None,
        file: None,
        qs: Vec::new(),
        x0: None,
        tol: 1e-6,
        max_iter: 100,
        alpha: 1.0,
        jacobian: JacobianMode::AnalyticIfAvailable,
        stop_on: StoppingNorm::StepNorm,
        format: OutputFormat::Table,
        output: None,
    };
    let mut i = 1;
    while i < args.len() {
        let (flag, inline_value) = match args[i].split_once('=') {
            Some((f, v)) => (f.to_string(), Some(v.to_string())),
            None => (args[i].clone(), None),
        };
        let mut take_value = || -> Result<String, UsageError> {
            if let Some(v) = inline_value.clone() {
                return Ok(v);
            }
            i += 1;
            args.get(i)
                .cloned()
                .ok_or_else(|| UsageError(format!("flag {flag} needs a value")))
        };
        match flag.as_str() {
            "--problem" => cli.problem = Some(take_value()?),
            "--file" => cli.file = Some(PathBuf::from(take_value()?)),
            "--q" => {
                let raw = take_value()?;
                cli.qs = parse_float_list(&raw, "--q")?;
                for &q in &cli.qs {
                    if !(q > 0.0 && q <= 1.0) {
                        return Err(format!("--q value {q} is outside (0, 1]").into());
                    }
                }
                if cli.qs.is_empty() {
                    return Err("--q needs at least one value".to_string().into());
                }
            }
            "--x0" => cli.x0 = Some(parse_float_list(&take_value()?, "--x0")?),
            "--tol" => {
                cli.tol = parse_float(&take_value()?, "--tol")?;
                if !(cli.tol > 0.0 && cli.tol.is_finite()) {
                    return Err("--tol must be a positive number".to_string().into());
                }
            }
            "--max-iter" => {
                let raw = take_value()?;
                cli.max_iter = raw.parse::<usize>().map_err(|_| {
                    UsageError(format!("--max-iter got '{raw}', expected an integer"))
                })?;
                if cli.max_iter == 0 {
                    return Err("--max-iter must be at least 1".to_string().into());
                }
            }
            "--alpha" => {
                cli.alpha = parse_float(&take_value()?, "--alpha")?;
                if !(cli.alpha > 0.0 && cli.alpha <= 1.0) {
                    return Err("--alpha must lie in (0, 1]".to_string().into());
                }
            }
            "--jacobian" => {
                cli.jacobian = match take_value()?.as_str() {
                    "analytic" => JacobianMode::AnalyticIfAvailable,
                    "numeric" => JacobianMode::ForceNumeric,
                    other => {
                        return Err(format!(
                            "--jacobian got '{other}', expected 'analytic' or 'numeric'"
                        )
                        .into())
                    }
                };
            }
            "--stop-on" => {
                cli.stop_on = match take_value()?.as_str() {
                    "step" => StoppingNorm::StepNorm,
                    "sse" => StoppingNorm::Sse,
                    other => {
                        return Err(
                            format!("--stop-on got '{other}', expected 'step' or 'sse'").into()
                        )
                    }
                };
            }
            "--format" => {
                cli.format = match take_value()?.as_str() {
                    "table" => OutputFormat::Table,
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => {
                        return Err(format!(
                            "--format got '{other}', expected 'table', 'csv' or 'json'"
                        )
                        .into())
                    }
                };
            }
            "--output" => cli.output = Some(PathBuf::from(take_value()?)),
            other => return Err(format!("unknown flag '{other}'").into()),
        }
        i += 1;
    }
    if cli.qs.is_empty() {
        return Err("missing --q".to_string().into());
    }
    match (&cli.problem, &cli.file) {
        (None, None) => Err("one of --problem or --file is required".to_string().into()),
        (Some(_), Some(_)) => Err("--problem and --file are mutually exclusive"
            .to_string()
            .into()),
        _ => Ok(cli),
    }
}

fn parse_float(raw: &str, flag: &str) -> Result<f64, UsageError> {
    raw.trim()
        .parse::<f64>()
        .map_err(|_| UsageError(format!("{flag} got '{raw}', expected a number")))
}

fn parse_float_list(raw: &str, flag: &str) -> Result<Vec<f64>, UsageError> {
    raw.split(',').map(|part| parse_float(part, flag)).collect()
}

fn load_problem(cli: &CliArgs) -> Result<(ResidualProblem, Option<Vec<f64>>), UsageError> {
    if let Some(name) = &cli.problem {
        let problem = model::builtin(name).ok_or_else(|| {
            UsageError(format!(
                "unknown problem '{name}'; built-ins are: {}",
                model::BUILTIN_NAMES.join(", ")
            ))
        })?;
        return Ok((problem, None));
    }
    let path = cli.file.as_ref().expect("parse_args guarantees a source");
    let text = fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let file = ProblemFile::parse(&text, path)?;
    let parsed = file.to_parsed_problem()?;
    let problem = exprparse::to_vector_field(&parsed)
        .map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
    Ok((problem, file.x0))
}

/// A line-oriented problem description: `key = value` pairs with `#`
/// comments. Keys: `name`, `n`, `residual` (repeatable), `x0`, `notes`.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub name: String,
    pub n: usize,
    /// Residual expression sources with their 1-based line numbers.
    pub residuals: Vec<(usize, String)>,
    pub x0: Option<Vec<f64>>,
    pub notes: Option<String>,
}

impl ProblemFile {
    /// Parses the document; `path` only labels error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self, String> {
        let label = path.display();
        let mut name: Option<String> = None;
        let mut n: Option<usize> = None;
        let mut residuals: Vec<(usize, String)> = Vec::new();
        let mut x0: Option<Vec<f64>> = None;
        let mut notes: Option<String> = None;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| format!("{label}:{lineno}: expected 'key = value'"))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "name" => name = Some(value.to_string()),
                "n" => {
                    let parsed = value.parse::<usize>().map_err(|_| {
                        format!("{label}:{lineno}: n got '{value}', expected an integer")
                    })?;
                    if parsed == 0 {
                        return Err(format!("{label}:{lineno}: n must be at least 1"));
                    }
                    n = Some(parsed);
                }
                "residual" => residuals.push((lineno, value.to_string())),
                "x0" => {
                    let values = parse_float_list(value, "x0")
                        .map_err(|UsageError(m)| format!("{label}:{lineno}: {m}"))?;
                    x0 = Some(values);
                }
                "notes" => notes = Some(value.to_string()),
                other => {
                    return Err(format!("{label}:{lineno}: unknown key '{other}'"));
                }
            }
        }
        let n = n.ok_or_else(|| format!("{label}: missing 'n'"))?;
        if residuals.is_empty() {
            return Err(format!("{label}: at least one 'residual' line is required"));
        }
        if let Some(x0) = &x0 {
            if x0.len() != n {
                return Err(format!(
                    "{label}: x0 has {} components but n = {n}",
                    x0.len()
                ));
            }
        }
        let name = name.unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "user-defined".to_string())
        });
        // Validate the expressions now so errors carry line and offset.
        for (lineno, source) in &residuals {
            if let Err(e) = exprparse::parse(source, n) {
                return Err(format!("{label}:{lineno}: {e}"));
            }
        }
        Ok(Self {
            name,
            n,
            residuals,
            x0,
            notes,
        })
    }

    pub fn to_parsed_problem(&self) -> Result<ParsedProblem, String> {
        let exprs = self
            .residuals
            .iter()
            .map(|(_, source)| exprparse::parse(source, self.n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        ParsedProblem::new(self.n, exprs)
            .map(|p| p.with_name(self.name.clone()))
            .map_err(|e| e.to_string())
    }
}

fn run_sweep(
    problem: &ResidualProblem,
    x0: &[f64],
    qs: &[f64],
    cfg: &SolveConfig,
) -> Vec<SolveResult> {
    // One solve per q value; runs are independent, output order follows the
    // declared q order.
    let mut results: Vec<Option<SolveResult>> = vec![None; qs.len()];
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(qs.len());
        for &q in qs {
            handles.push(scope.spawn(move || {
                let dilation = DilationParams::uniform(q, problem.parameter_count())
                    .expect("q validated by the flag parser");
                solver::q_gauss_newton(problem, x0, &dilation, cfg)
            }));
        }
        for (slot, handle) in results.iter_mut().zip(handles) {
            *slot = Some(handle.join().expect("solver threads do not panic"));
        }
    });
    results
        .into_iter()
        .map(|r| r.expect("all slots filled"))
        .collect()
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Fixed six-decimal form used by all CSV output; bit-stable across runs.
fn csv_num(v: f64) -> String {
    format!("{v:.6}")
}

/// Seventeen significant digits, enough to reproduce the f64 exactly.
fn json_num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn json_array(values: &[f64]) -> String {
    let inner: Vec<String> = values.iter().map(|&v| json_num(v)).collect();
    format!("[{}]", inner.join(","))
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn trace_csv(problem: &ResidualProblem, result: &SolveResult) -> String {
    let mut out = String::new();
    let mut header = vec!["k".to_string()];
    header.extend((1..=problem.parameter_count()).map(|i| format!("x_{i}")));
    header.extend((1..=problem.residual_count()).map(|i| format!("f_{i}")));
    header.push("sse".to_string());
    header.push("step_norm".to_string());
    out.push_str(&header.join(","));
    out.push('\n');
    for rec in &result.trace {
        let mut fields = vec![rec.k.to_string()];
        fields.extend(rec.x.iter().map(|&v| csv_num(v)));
        fields.extend(rec.residuals.iter().map(|&v| csv_num(v)));
        fields.push(csv_num(rec.sse));
        fields.push(csv_num(rec.step_norm));
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn solve_json(problem: &ResidualProblem, q: f64, result: &SolveResult) -> String {
    let mut trace_items = Vec::with_capacity(result.trace.len());
    for rec in &result.trace {
        trace_items.push(format!(
            "{{\"k\":{},\"x\":{},\"residuals\":{},\"sse\":{},\"step_norm\":{}}}",
            rec.k,
            json_array(&rec.x),
            json_array(&rec.residuals),
            json_num(rec.sse),
            json_num(rec.step_norm)
        ));
    }
    format!(
        "{{\"problem\":{},\"q\":{},\"status\":{},\"iterations\":{},\"final_norm\":{},\"final_x\":{},\"trace\":[{}]}}\n",
        json_string(problem.name()),
        json_num(q),
        json_string(result.status.as_str()),
        result.iterations,
        json_num(result.final_norm),
        json_array(&result.final_x),
        trace_items.join(",")
    )
}

fn trace_table(problem: &ResidualProblem, q: f64, result: &SolveResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "problem: {}   q = {}", problem.name(), q);
    let mut header = format!("{:>4}", "k");
    for i in 1..=problem.parameter_count() {
        let _ = write!(header, " {:>12}", format!("x_{i}"));
    }
    for i in 1..=problem.residual_count() {
        let _ = write!(header, " {:>12}", format!("f_{i}"));
    }
    let _ = write!(header, " {:>12} {:>12}", "sse", "step_norm");
    let _ = writeln!(out, "{header}");
    for rec in &result.trace {
        let mut line = format!("{:>4}", rec.k);
        for &v in &rec.x {
            let _ = write!(line, " {v:>12.4}");
        }
        for &v in &rec.residuals {
            let _ = write!(line, " {v:>12.4}");
        }
        let _ = write!(line, " {:>12.4e} {:>12.4e}", rec.sse, rec.step_norm);
        let _ = writeln!(out, "{line}");
    }
    let _ = writeln!(
        out,
        "status: {}   iterations: {}   final norm: {:.4e}",
        result.status.as_str(),
        result.iterations,
        result.final_norm
    );
    out
}

fn render_solve(
    problem: &ResidualProblem,
    q: f64,
    result: &SolveResult,
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Csv => trace_csv(problem, result),
        OutputFormat::Json => solve_json(problem, q, result),
        OutputFormat::Table => trace_table(problem, q, result),
    }
}

fn render_sweep(
    problem: &ResidualProblem,
    qs: &[f64],
    results: &[SolveResult],
    format: OutputFormat,
) -> String {
    match format {
        OutputFormat::Json => {
            let items: Vec<String> = qs
                .iter()
                .zip(results)
                .map(|(&q, r)| solve_json(problem, q, r).trim_end().to_string())
                .collect();
            format!("[{}]\n", items.join(","))
        }
        OutputFormat::Csv => {
            let mut out = String::new();
            let mut header = vec![
                "q".to_string(),
                "iterations".to_string(),
                "status".to_string(),
                "final_norm".to_string(),
            ];
            header.extend((1..=problem.parameter_count()).map(|i| format!("x_{i}")));
            header.extend((1..=problem.residual_count()).map(|i| format!("f_{i}")));
            out.push_str(&header.join(","));
            out.push('\n');
            for (&q, r) in qs.iter().zip(results) {
                let residuals = final_residuals(r, problem.residual_count());
                let mut fields = vec![
                    csv_num(q),
                    r.iterations.to_string(),
                    r.status.as_str().to_string(),
                    format!("{:.6e}", r.final_norm),
                ];
                fields.extend(r.final_x.iter().map(|&v| csv_num(v)));
                fields.extend(residuals.iter().map(|&v| csv_num(v)));
                out.push_str(&fields.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "problem: {}   sweep over q", problem.name());
            let mut header = format!(
                "{:>8} {:>10} {:>24} {:>12}",
                "q", "iterations", "status", "final_norm"
            );
            for i in 1..=problem.parameter_count() {
                let _ = write!(header, " {:>12}", format!("x_{i}"));
            }
            for i in 1..=problem.residual_count() {
                let _ = write!(header, " {:>12}", format!("f_{i}"));
            }
            let _ = writeln!(out, "{header}");
            for (&q, r) in qs.iter().zip(results) {
                let mut line = format!(
                    "{:>8} {:>10} {:>24} {:>12.4e}",
                    q,
                    r.iterations,
                    r.status.as_str(),
                    r.final_norm
                );
                for &v in &r.final_x {
                    let _ = write!(line, " {v:>12.4}");
                }
                for &v in &final_residuals(r, problem.residual_count()) {
                    let _ = write!(line, " {v:>12.4}");
                }
                let _ = writeln!(out, "{line}");
            }
            out
        }
    }
}

fn final_residuals(result: &SolveResult, m: usize) -> Vec<f64> {
    result
        .trace
        .last()
        .map(|rec| rec.residuals.clone())
        .unwrap_or_else(|| vec![f64::NAN; m])
}

fn render_compare(
    problem: &ResidualProblem,
    qs: &[f64],
    gn_results: &[SolveResult],
    nm_result: &SolveResult,
    format: OutputFormat,
) -> String {
    // Final objective value f(x) of the single residual, per method.
    let gn_objective = |r: &SolveResult| final_residuals(r, 1)[0];
    match format {
        OutputFormat::Json => {
            let mut items: Vec<String> = qs
                .iter()
                .zip(gn_results)
                .map(|(&q, r)| {
                    format!(
                        "{{\"method\":\"q-gauss-newton\",\"q\":{},\"status\":{},\"iterations\":{},\"final_x\":{},\"objective\":{}}}",
                        json_num(q),
                        json_string(r.status.as_str()),
                        r.iterations,
                        json_array(&r.final_x),
                        json_num(gn_objective(r))
                    )
                })
                .collect();
            items.push(format!(
                "{{\"method\":\"nelder-mead\",\"status\":{},\"iterations\":{},\"final_x\":{},\"objective\":{}}}",
                json_string(nm_result.status.as_str()),
                nm_result.iterations,
                json_array(&nm_result.final_x),
                json_num(nm_result.final_sse)
            ));
            format!(
                "{{\"problem\":{},\"runs\":[{}]}}\n",
                json_string(problem.name()),
                items.join(",")
            )
        }
        OutputFormat::Csv => {
            let mut out = String::from("method,q,iterations,status,final_x,objective\n");
            for (&q, r) in qs.iter().zip(gn_results) {
                let _ = writeln!(
                    out,
                    "q-gauss-newton,{},{},{},{},{}",
                    csv_num(q),
                    r.iterations,
                    r.status.as_str(),
                    csv_num(r.final_x[0]),
                    csv_num(gn_objective(r))
                );
            }
            let _ = writeln!(
                out,
                "nelder-mead,,{},{},{},{}",
                nm_result.iterations,
                nm_result.status.as_str(),
                csv_num(nm_result.final_x[0]),
                csv_num(nm_result.final_sse)
            );
            out
        }
        OutputFormat::Table => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "problem: {}   q-Gauss-Newton vs Nelder-Mead",
                problem.name()
            );
            let _ = writeln!(
                out,
                "{:>16} {:>8} {:>10} {:>24} {:>12} {:>14}",
                "method", "q", "iterations", "status", "final_x", "objective"
            );
            for (&q, r) in qs.iter().zip(gn_results) {
                let _ = writeln!(
                    out,
                    "{:>16} {:>8} {:>10} {:>24} {:>12.4} {:>14.4e}",
                    "q-gauss-newton",
                    q,
                    r.iterations,
                    r.status.as_str(),
                    r.final_x[0],
                    gn_objective(r)
                );
            }
            let _ = writeln!(
                out,
                "{:>16} {:>8} {:>10} {:>24} {:>12.4} {:>14.4e}",
                "nelder-mead",
                "-",
                nm_result.iterations,
                nm_result.status.as_str(),
                nm_result.final_x[0],
                nm_result.final_sse
            );
            out
        }
    }
}
