//! Command-line surface: argument definitions, the pipeline driver and
//! report rendering.
//!
//! Every report is assembled as one structured document; the text output is
//! rendered from the same document, so both formats carry the same fields.
//! Indices in reports are 1-based.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::closure::{
    analyze, build_extension, closure_generators, minplus_membership, ClosureAnalysis,
};
use crate::error::{PipelineError, TropError};
use crate::io::{literal_tokens, parse_matrix, parse_vector, parse_vectors, serialize_vectors};
use crate::linearity::{row_diagnostics, RowDiagnostic};
use crate::matrix::{validate_system, TropMatrix, TropVector, TwoSidedSystem};
use crate::oracle::{span_grid_points, verify_closure, GridSpec, DEFAULT_BUDGET};
use crate::semiring::{Approx, ExtScalar, Int, Number, Rational};
use crate::solver::{alternating_homogeneous, SolverConfig, Status};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_SOLUTION: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_CAP: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "maxplus",
    version,
    about = "Max-plus two-sided systems and their min-plus closure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Include the iterate trace of the alternating method.
    #[arg(long, global = true)]
    pub trace: bool,
    /// Iteration cap for every alternating-method run.
    #[arg(long = "max-iter", global = true, value_name = "N")]
    pub max_iter: Option<u64>,
    /// Use floating point with this comparison tolerance (not certifying).
    #[arg(long = "float-tol", global = true, value_name = "T")]
    pub float_tol: Option<f64>,
    /// Report wall-clock time (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// Left-hand matrix A.
    #[arg(long = "a", value_name = "FILE")]
    pub a: PathBuf,
    /// Right-hand matrix B.
    #[arg(long = "b", value_name = "FILE")]
    pub b: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the alternating method from a start vector.
    Solve {
        #[command(flatten)]
        system: SystemArgs,
        /// Start vector; defaults to the zero vector.
        #[arg(long = "x0", value_name = "FILE")]
        x0: Option<PathBuf>,
    },
    /// Compute the min-plus closure of the solution set.
    Closure {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_name = "N")]
        alpha: Option<String>,
        /// Write the grid points of the closure span to FILE.
        #[arg(long, value_name = "FILE")]
        points: Option<PathBuf>,
        /// Grid half-width for --points.
        #[arg(long, value_name = "R", default_value_t = 6)]
        range: i64,
    },
    /// Test whether the solution set is certifiably min-plus linear.
    CheckLinearity {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_name = "N")]
        alpha: Option<String>,
    },
    /// Test membership of x in the min-plus span of the given generators.
    Member {
        /// Generators, one per line.
        #[arg(long, value_name = "FILE")]
        generators: PathBuf,
        #[arg(long, value_name = "FILE")]
        x: PathBuf,
    },
    /// Compare the closure with an exhaustive grid search.
    Verify {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_name = "N")]
        alpha: Option<String>,
        #[arg(long, value_name = "R", default_value_t = 6)]
        range: i64,
        /// Maximum number of grid candidates.
        #[arg(long, value_name = "N", default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve { .. } => "solve",
            Command::Closure { .. } => "closure",
            Command::CheckLinearity { .. } => "check-linearity",
            Command::Member { .. } => "member",
            Command::Verify { .. } => "verify",
        }
    }
}

/// A failure, tagged with where it happened.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub stage: String,
    pub error: TropError,
}

impl CliError {
    fn input(what: impl Into<String>, error: TropError) -> Self {
        CliError {
            stage: what.into(),
            error,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.error.root() {
            TropError::NoFiniteSolution { .. } => EXIT_NO_SOLUTION,
            TropError::IterationCap { .. } => EXIT_CAP,
            _ => EXIT_INPUT,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

impl std::error::Error for CliError {}

fn step_name(step: u8) -> &'static str {
    match step {
        1 => "extension",
        2 => "epsilon replacement",
        3 => "generators",
        4 => "boundedness",
        5 => "linearity certificate",
        _ => "span",
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        CliError {
            stage: format!("step {} ({})", e.step, step_name(e.step)),
            error: e.source,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub number_type: &'static str,
    pub exact: bool,
    pub iterations: u64,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    #[serde(skip)]
    pub exit_code: u8,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let value = serde_json::to_value(self).expect("reports serialize");
        let mut out = String::new();
        render(&mut out, &value, 0);
        out
    }
}

struct Input {
    role: &'static str,
    path: PathBuf,
    text: String,
}

impl Input {
    fn read(role: &'static str, path: &Path) -> Result<Input, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::input(
                format!("reading {role}"),
                TropError::Config(format!("{}: {e}", path.display())),
            )
        })?;
        Ok(Input {
            role,
            path: path.to_path_buf(),
            text,
        })
    }

    fn digest(&self) -> InputDigest {
        InputDigest {
            role: self.role,
            path: self.path.display().to_string(),
            sha256: hex::encode(Sha256::digest(self.text.as_bytes())),
        }
    }

    fn matrix<N: Number>(&self, tol: Option<f64>) -> Result<TropMatrix<N>, CliError> {
        let m = parse_matrix::<N>(&self.text)
            .map_err(|e| CliError::input(format!("parsing {}", self.role), e))?;
        Ok(match tol {
            Some(t) => m.map(|e| match e {
                ExtScalar::Finite(v) => ExtScalar::Finite(v.clone().with_tolerance(t)),
                other => other.clone(),
            }),
            None => m,
        })
    }

    fn vector<N: Number>(&self) -> Result<TropVector<N>, CliError> {
        parse_vector(&self.text).map_err(|e| CliError::input(format!("parsing {}", self.role), e))
    }

    fn vectors<N: Number>(&self) -> Result<Vec<TropVector<N>>, CliError> {
        parse_vectors(&self.text).map_err(|e| CliError::input(format!("parsing {}", self.role), e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Integer,
    Rational,
    Float,
}

impl Mode {
    fn name(self) -> &'static str {
        match self {
            Mode::Integer => "integer",
            Mode::Rational => "rational",
            Mode::Float => "float",
        }
    }
}

fn choose_mode<'a>(float_tol: Option<f64>, tokens: impl Iterator<Item = &'a str>) -> Mode {
    if float_tol.is_some() {
        return Mode::Float;
    }
    let mut mode = Mode::Integer;
    for t in tokens {
        if Int::parse_literal(t).is_none() {
            mode = Mode::Rational;
        }
    }
    mode
}

struct Outcome {
    result: Value,
    oracle: Option<Value>,
    iterations: u64,
    exit_code: u8,
}

/// Runs one subcommand and assembles its report.
pub fn run_pipeline(cli: &Cli) -> Result<RunReport, CliError> {
    let started = Instant::now();
    if let Some(t) = cli.float_tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(CliError::input(
                "arguments",
                TropError::Config(format!("invalid --float-tol {t}")),
            ));
        }
    }
    let inputs = read_inputs(&cli.command)?;
    let alpha = match &cli.command {
        Command::Closure { alpha, .. }
        | Command::CheckLinearity { alpha, .. }
        | Command::Verify { alpha, .. } => alpha.as_deref(),
        _ => None,
    };
    let tokens = inputs
        .iter()
        .flat_map(|i| literal_tokens(&i.text))
        .chain(alpha);
    let mode = choose_mode(cli.float_tol, tokens);
    let outcome = match mode {
        Mode::Integer => execute::<Int>(cli, &inputs, alpha),
        Mode::Rational => execute::<Rational>(cli, &inputs, alpha),
        Mode::Float => execute::<Approx>(cli, &inputs, alpha),
    }?;
    Ok(RunReport {
        command: command_line(cli),
        inputs: inputs.iter().map(Input::digest).collect(),
        number_type: mode.name(),
        exact: mode != Mode::Float,
        iterations: outcome.iterations,
        result: outcome.result,
        oracle: outcome.oracle,
        elapsed_ms: cli.timing.then(|| started.elapsed().as_secs_f64() * 1e3),
        exit_code: outcome.exit_code,
    })
}

fn read_inputs(cmd: &Command) -> Result<Vec<Input>, CliError> {
    let mut out = Vec::new();
    match cmd {
        Command::Solve { system, x0 } => {
            out.push(Input::read("A", &system.a)?);
            out.push(Input::read("B", &system.b)?);
            if let Some(p) = x0 {
                out.push(Input::read("x0", p)?);
            }
        }
        Command::Closure { system, .. }
        | Command::CheckLinearity { system, .. }
        | Command::Verify { system, .. } => {
            out.push(Input::read("A", &system.a)?);
            out.push(Input::read("B", &system.b)?);
        }
        Command::Member { generators, x } => {
            out.push(Input::read("generators", generators)?);
            out.push(Input::read("x", x)?);
        }
    }
    Ok(out)
}

fn command_line(cli: &Cli) -> String {
    let mut parts = vec![cli.command.name().to_string()];
    let mut push = |flag: &str, value: String| parts.push(format!("{flag} {value}"));
    match &cli.command {
        Command::Solve { system, x0 } => {
            push("--a", system.a.display().to_string());
            push("--b", system.b.display().to_string());
            if let Some(p) = x0 {
                push("--x0", p.display().to_string());
            }
        }
        Command::Closure {
            system,
            alpha,
            points,
            range,
        } => {
            push("--a", system.a.display().to_string());
            push("--b", system.b.display().to_string());
            if let Some(a) = alpha {
                push("--alpha", a.clone());
            }
            if let Some(p) = points {
                push("--points", p.display().to_string());
                push("--range", range.to_string());
            }
        }
        Command::CheckLinearity { system, alpha } => {
            push("--a", system.a.display().to_string());
            push("--b", system.b.display().to_string());
            if let Some(a) = alpha {
                push("--alpha", a.clone());
            }
        }
        Command::Member { generators, x } => {
            push("--generators", generators.display().to_string());
            push("--x", x.display().to_string());
        }
        Command::Verify {
            system,
            alpha,
            range,
            budget,
        } => {
            push("--a", system.a.display().to_string());
            push("--b", system.b.display().to_string());
            if let Some(a) = alpha {
                push("--alpha", a.clone());
            }
            push("--range", range.to_string());
            push("--budget", budget.to_string());
        }
    }
    if let Some(n) = cli.max_iter {
        parts.push(format!("--max-iter {n}"));
    }
    if let Some(t) = cli.float_tol {
        parts.push(format!("--float-tol {t}"));
    }
    if cli.trace {
        parts.push("--trace".into());
    }
    parts.join(" ")
}

fn solver_config(cli: &Cli) -> SolverConfig {
    SolverConfig {
        iteration_cap: cli.max_iter,
        trace: cli.trace,
        float_tolerance: cli.float_tol,
    }
}

fn system<N: Number>(inputs: &[Input], tol: Option<f64>) -> Result<TwoSidedSystem<N>, CliError> {
    let a = inputs[0].matrix::<N>(tol)?;
    let b = inputs[1].matrix::<N>(tol)?;
    validate_system(a, b).map_err(|e| CliError::input("validating the system", e))
}

fn parse_alpha<N: Number>(alpha: Option<&str>) -> Result<Option<N>, CliError> {
    alpha
        .map(|s| {
            N::parse_literal(s).ok_or_else(|| {
                CliError::input(
                    "arguments",
                    TropError::Token {
                        line: 1,
                        column: 1,
                        token: s.to_string(),
                    },
                )
            })
        })
        .transpose()
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn one_based(set: &std::collections::BTreeSet<usize>) -> Vec<usize> {
    set.iter().map(|k| k + 1).collect()
}

fn diagnostics_value(diags: &[RowDiagnostic]) -> Value {
    Value::Array(
        diags
            .iter()
            .map(|d| {
                json!({
                    "row": d.row + 1,
                    "k_a": one_based(&d.k_a),
                    "k_b": one_based(&d.k_b),
                    "in_r": d.in_r,
                    "case": d.case,
                })
            })
            .collect(),
    )
}

fn closure_value<N: Number>(analysis: &ClosureAnalysis<N>) -> Value {
    let r = &analysis.report;
    let generators: Vec<Value> = analysis
        .generators
        .iter()
        .map(|g| {
            json!({
                "row": g.row + 1,
                "start": to_value(&g.start),
                "generator": to_value(&g.vector),
                "shift": g.shift.to_string(),
                "iterations": g.iterations,
            })
        })
        .collect();
    json!({
        "alpha": r.alpha.to_string(),
        "beta": r.beta.as_ref().map(ToString::to_string),
        "base_rows": analysis.extension.base_rows(),
        "extended_rows": analysis.extension.rows(),
        "generators": generators,
        "projectively_bounded": r.projectively_bounded,
        "approximation": r.is_approximation(),
        "condition_holds": r.condition_holds,
        "certified_minplus_linear": r.certified_minplus_linear,
        "row_diagnostics": diagnostics_value(&r.row_diagnostics),
        "span": to_value(&r.generators),
        "iterations_total": r.iterations_total,
    })
}

fn execute<N: Number>(
    cli: &Cli,
    inputs: &[Input],
    alpha: Option<&str>,
) -> Result<Outcome, CliError> {
    let cfg = solver_config(cli);
    let tol = cli.float_tol;
    match &cli.command {
        Command::Solve { .. } => {
            let sys = system::<N>(inputs, tol)?;
            let x0 = match inputs.get(2) {
                Some(input) => input.vector::<N>()?,
                None => TropVector::new(vec![ExtScalar::Finite(N::zero()); sys.cols()])
                    .map_err(|e| CliError::input("x0", e))?,
            };
            let out = alternating_homogeneous(&sys, &x0, &cfg)
                .map_err(|e| CliError::input("solve", e))?;
            let exit_code = match out.status {
                Status::Solution => EXIT_OK,
                Status::NoFiniteSolution => EXIT_NO_SOLUTION,
                Status::IterationCap => EXIT_CAP,
            };
            Ok(Outcome {
                result: to_value(&out),
                oracle: None,
                iterations: out.iterations,
                exit_code,
            })
        }
        Command::Closure { points, range, .. } => {
            let sys = system::<N>(inputs, tol)?;
            let analysis = analyze(&sys, parse_alpha::<N>(alpha)?, &cfg)?;
            let mut result = closure_value(&analysis);
            if let Some(path) = points {
                let spec = GridSpec::new(sys.cols(), *range).map_err(PipelineError::at(6))?;
                let pts = span_grid_points(&analysis.report.generators, &spec)
                    .map_err(PipelineError::at(6))?;
                std::fs::write(path, serialize_vectors(&pts)).map_err(|e| {
                    CliError::input(
                        "writing points",
                        TropError::Config(format!("{}: {e}", path.display())),
                    )
                })?;
                result["span_points"] = json!({
                    "file": path.display().to_string(),
                    "range": range,
                    "count": pts.len(),
                });
            }
            Ok(Outcome {
                iterations: analysis.report.iterations_total,
                result,
                oracle: None,
                exit_code: EXIT_OK,
            })
        }
        Command::CheckLinearity { .. } => {
            let sys = system::<N>(inputs, tol)?;
            let ext =
                build_extension(&sys, parse_alpha::<N>(alpha)?).map_err(PipelineError::at(1))?;
            let gens = closure_generators(&ext, &cfg).map_err(PipelineError::at(3))?;
            let vectors: Vec<_> = gens.iter().map(|g| g.vector.clone()).collect();
            let diags = row_diagnostics(&ext.extended, &vectors).map_err(PipelineError::at(5))?;
            let holds = diags.iter().all(|d| d.in_r);
            Ok(Outcome {
                iterations: gens.iter().map(|g| g.iterations).sum(),
                result: json!({
                    "alpha": ext.alpha.to_string(),
                    "generators": to_value(&vectors),
                    "condition_holds": holds,
                    "certified_minplus_linear": holds && N::CERTIFYING,
                    "row_diagnostics": diagnostics_value(&diags),
                }),
                oracle: None,
                exit_code: EXIT_OK,
            })
        }
        Command::Member { .. } => {
            let gens = inputs[0].vectors::<N>()?;
            let x = inputs[1].vector::<N>()?;
            let coefficients =
                minplus_membership(&gens, &x).map_err(|e| CliError::input("membership", e))?;
            Ok(Outcome {
                result: json!({
                    "x": to_value(&x),
                    "member": coefficients.is_some(),
                    "coefficients": coefficients.map(|t| t.iter().map(ToString::to_string).collect::<Vec<_>>()),
                }),
                oracle: None,
                iterations: 0,
                exit_code: EXIT_OK,
            })
        }
        Command::Verify { range, budget, .. } => {
            let sys = system::<N>(inputs, tol)?;
            let analysis = analyze(&sys, parse_alpha::<N>(alpha)?, &cfg)?;
            let spec = GridSpec::new(sys.cols(), *range)
                .map_err(|e| CliError::input("oracle", e))?
                .with_budget(*budget);
            let verdict = verify_closure(
                &analysis.extension.extended,
                &analysis.report.generators,
                &spec,
            )
            .map_err(|e| CliError::input("oracle", e))?;
            let mut oracle = to_value(&verdict);
            oracle["inclusion_holds"] = json!(verdict.inclusion_holds());
            oracle["sets_coincide"] = json!(verdict.sets_coincide());
            oracle["consistent_with_certificate"] = json!(
                verdict.inclusion_holds()
                    && (!analysis.report.certified_minplus_linear || verdict.sets_coincide())
            );
            Ok(Outcome {
                iterations: analysis.report.iterations_total,
                result: closure_value(&analysis),
                oracle: Some(oracle),
                exit_code: EXIT_OK,
            })
        }
    }
}

fn scalar_text(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("none".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Arrays of scalars print inline as `(a, b, c)`, sets of indices as `{1, 2}`.
fn inline_text(key: &str, v: &Value) -> Option<String> {
    if let Some(s) = scalar_text(v) {
        return Some(s);
    }
    let items = v.as_array()?;
    let parts: Option<Vec<String>> = items
        .iter()
        .map(|x| {
            if x.is_array() || x.is_object() {
                None
            } else {
                scalar_text(x)
            }
        })
        .collect();
    let parts = parts?;
    Some(if key.starts_with("k_") {
        format!("{{{}}}", parts.join(", "))
    } else {
        format!("({})", parts.join(", "))
    })
}

fn render(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => render_object(out, map, indent),
        Value::Array(items) => {
            for item in items {
                match inline_text("", item) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        render(out, item, indent + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar_text(other).unwrap_or_default());
        }
    }
}

fn render_object(out: &mut String, map: &Map<String, Value>, indent: usize) {
    let pad = "  ".repeat(indent);
    for (key, value) in map {
        if let Value::Object(inner) = value {
            // rows of a diagnostic table fit on one line
            if inner.values().all(|x| inline_text("k_", x).is_some()) && inner.contains_key("row") {
                let fields: Vec<String> = inner
                    .iter()
                    .map(|(k, x)| format!("{k}={}", inline_text(k, x).unwrap_or_default()))
                    .collect();
                let _ = writeln!(out, "{pad}{key}: {}", fields.join(" "));
                continue;
            }
        }
        if value.as_array().is_some_and(|a| a.is_empty()) {
            let _ = writeln!(out, "{pad}{key}: (none)");
            continue;
        }
        match inline_text(key, value) {
            Some(s) => {
                let _ = writeln!(out, "{pad}{key}: {s}");
            }
            None => {
                let _ = writeln!(out, "{pad}{key}:");
                match value {
                    Value::Array(items) => {
                        for item in items {
                            render_item(out, item, indent + 1);
                        }
                    }
                    _ => render(out, value, indent + 1),
                }
            }
        }
    }
}

fn render_item(out: &mut String, item: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    if let Some(s) = inline_text("", item) {
        let _ = writeln!(out, "{pad}- {s}");
        return;
    }
    if let Value::Object(map) = item {
        let flat: Option<Vec<String>> = map
            .iter()
            .map(|(k, x)| inline_text(k, x).map(|s| format!("{k}={s}")))
            .collect();
        if let Some(fields) = flat {
            let _ = writeln!(out, "{pad}- {}", fields.join(" "));
            return;
        }
    }
    let _ = writeln!(out, "{pad}-");
    render(out, item, indent + 1);
}

/// Runs the CLI and returns the process exit code.
pub fn main_with(cli: &Cli) -> u8 {
    match run_pipeline(cli) {
        Ok(report) => {
            let text = if cli.json {
                report.to_json()
            } else {
                report.to_text()
            };
            print!("{text}");
            report.exit_code
        }
        Err(err) => {
            if cli.json {
                let doc = json!({
                    "command": command_line(cli),
                    "error": { "stage": err.stage, "message": err.error.to_string() },
                });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&doc).expect("errors serialize")
                );
            }
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
