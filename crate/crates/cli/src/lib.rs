//! Scenario runner behind the `qpb` binary.
//!
//! Every command returns an [`Outcome`]: the exit code, the report bytes and
//! any diagnostics. Exit codes: 0 passed or converged, 1 witnesses found,
//! 2 no convergence, 3 configuration or evaluation error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use qpb_core::catalog::{find, listing};
use qpb_core::hypothesis::{check_all_with, CompositeReport, Verdict};
use qpb_core::solver::{
    cauchy_diagnostics, iterate, verify_ledger, CauchyDiagnostics, Residuals, SolveResult, SolveStatus,
    TraceRecord, TrajectoryRecord,
};
use qpb_core::{left_closed_ball, QpbError, Scenario, ViolationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WITNESSES: i32 = 1;
pub const EXIT_NO_CONVERGENCE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

const CAUCHY_TAIL: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "qpb", version, about = "Check hypotheses and compute common fixed points for catalog scenarios")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List catalog scenarios.
    List(ListArgs),
    /// Check every hypothesis on the materialized ball.
    Check(RunConfig),
    /// Run the alternating iteration.
    Solve(RunConfig),
    /// Run the iteration and dump one record per step.
    Trace(RunConfig),
    /// Materialize a left closed ball.
    Ball(BallArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long = "scenario", default_value = "example1")]
    pub scenario_name: String,
    /// Grid points per unit interval.
    #[arg(long, default_value_t = 41)]
    pub resolution: usize,
    /// Stopping tolerance on successive distances.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 64)]
    pub j_max: usize,
    #[arg(long = "format", value_enum, default_value_t = Format::Json)]
    pub output_format: Format,
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    /// Witnesses listed per report in JSON output; 0 lists all. `witness_count` keeps the total.
    #[arg(long, default_value_t = 100)]
    pub max_witnesses: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario_name: "example1".into(),
            resolution: 41,
            tol: 1e-9,
            max_iter: 10_000,
            j_max: 64,
            output_format: Format::Json,
            output_path: None,
            max_witnesses: 100,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BallArgs {
    #[command(flatten)]
    pub run: RunConfig,
    /// Defaults to the scenario start point.
    #[arg(long, allow_negative_numbers = true)]
    pub center: Option<f64>,
    /// Defaults to the scenario radius.
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub report: Vec<u8>,
    pub diagnostics: String,
}

impl Outcome {
    fn error(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            report: Vec::new(),
            diagnostics: message.into(),
        }
    }
}

pub fn run(cli: &Cli) -> Outcome {
    let result = match &cli.command {
        Command::List(args) => cmd_list(args.format),
        Command::Check(cfg) => cmd_check(cfg),
        Command::Solve(cfg) => cmd_solve(cfg),
        Command::Trace(cfg) => cmd_trace(cfg),
        Command::Ball(args) => cmd_ball(&args.run, args.center, args.radius),
    };
    result.unwrap_or_else(|e| Outcome::error(format!("error: {e}")))
}

/// Writes the report to `out` when given; the returned outcome then carries no report bytes.
pub fn deliver(mut outcome: Outcome, out: Option<&PathBuf>) -> Outcome {
    if let Some(path) = out {
        if outcome.code == EXIT_CONFIG {
            return outcome;
        }
        if let Err(e) = std::fs::write(path, &outcome.report) {
            return Outcome::error(format!("error: cannot write {}: {e}", path.display()));
        }
        outcome.report.clear();
    }
    outcome
}

pub fn out_path(cli: &Cli) -> Option<&PathBuf> {
    match &cli.command {
        Command::List(args) => args.out.as_ref(),
        Command::Check(cfg) | Command::Solve(cfg) | Command::Trace(cfg) => cfg.output_path.as_ref(),
        Command::Ball(args) => args.run.output_path.as_ref(),
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Eval(QpbError),
    Output(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) | CliError::Output(m) => f.write_str(m),
            CliError::Eval(e) => write!(f, "{e}"),
        }
    }
}

impl From<QpbError> for CliError {
    fn from(e: QpbError) -> Self {
        CliError::Eval(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn validate(cfg: &RunConfig) -> CliResult<Scenario<f64>> {
    if cfg.resolution < 2 {
        return Err(CliError::Config(format!("--resolution must be >= 2, got {}", cfg.resolution)));
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(CliError::Config(format!("--tol must be positive and finite, got {}", cfg.tol)));
    }
    if cfg.max_iter == 0 {
        return Err(CliError::Config("--max-iter must be >= 1".into()));
    }
    if cfg.j_max < 2 {
        return Err(CliError::Config(format!("--j-max must be >= 2, got {}", cfg.j_max)));
    }
    Ok(find::<f64>(&cfg.scenario_name)?.scenario)
}

fn json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Output(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Adds `witness_count` to every report object and keeps the first `max` witnesses.
fn limit_witnesses(value: &mut Value, max: usize) {
    match value {
        Value::Object(map) => {
            if let Some(Value::Array(witnesses)) = map.get_mut("witnesses") {
                let total = witnesses.len();
                if max > 0 {
                    witnesses.truncate(max);
                }
                map.insert("witness_count".into(), total.into());
            }
            for (_, v) in map.iter_mut() {
                limit_witnesses(v, max);
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| limit_witnesses(v, max)),
        _ => {}
    }
}

fn report_json<T: Serialize>(value: &T, max_witnesses: usize) -> CliResult<Vec<u8>> {
    let mut tree = serde_json::to_value(value).map_err(|e| CliError::Output(e.to_string()))?;
    limit_witnesses(&mut tree, max_witnesses);
    json(&tree)
}

fn csv_rows(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .into_iter()
            .map(|c| if c.contains([',', '"', '\n']) { format!("\"{}\"", c.replace('"', "\"\"")) } else { c })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn cmd_list(format: Format) -> CliResult<Outcome> {
    let entries = listing();
    let report = match format {
        Format::Json => json(&entries)?,
        Format::Csv => csv_rows(
            &["name", "domain", "s", "epsilon", "notes"],
            entries
                .iter()
                .map(|e| vec![e.name.clone(), e.domain.clone(), e.s.to_string(), e.epsilon.to_string(), e.notes.join("; ")]),
        ),
    };
    Ok(Outcome {
        code: EXIT_OK,
        report,
        diagnostics: String::new(),
    })
}

fn report_row(name: &str, r: &ViolationReport<f64>) -> Vec<String> {
    vec![
        name.to_string(),
        r.passed.to_string(),
        r.checked.to_string(),
        r.witnesses.len().to_string(),
        r.skipped.map(|s| s.to_string()).unwrap_or_default(),
    ]
}

fn check_csv(report: &CompositeReport<f64>) -> Vec<u8> {
    let mut rows = vec![
        report_row("axioms", &report.axioms),
        report_row("dominance_U", &report.dominance_u),
        report_row("dominance_V", &report.dominance_v),
        report_row("triangular", &report.triangular),
        report_row("psi_monotone", &report.psi.monotone),
        report_row("psi_strict_contraction", &report.psi.strict_contraction),
    ];
    let series_ok = report.summary().iter().any(|&(n, ok)| n == "psi_series" && ok);
    rows.push(vec![
        "psi_series".into(),
        series_ok.to_string(),
        report.psi.series.partial_sums.len().to_string(),
        String::new(),
        String::new(),
    ]);
    rows.push(report_row("cond1", &report.cond1));
    rows.push(report_row("cond2", &report.cond2));
    rows.push(vec![
        "cond3".into(),
        report.cond3.passed.to_string(),
        report.cond3.partial_sums.len().to_string(),
        String::new(),
        String::new(),
    ]);
    csv_rows(&["check", "passed", "checked", "witnesses", "skipped"], rows)
}

pub fn cmd_check(cfg: &RunConfig) -> CliResult<Outcome> {
    let scenario = validate(cfg)?;
    let report = check_all_with(&scenario, cfg.resolution, cfg.j_max)?;
    let failing: Vec<&str> = report.summary().into_iter().filter(|(_, ok)| !ok).map(|(n, _)| n).collect();
    let (code, diagnostics) = if report.verdict == Verdict::Passed {
        (EXIT_OK, String::new())
    } else {
        (EXIT_WITNESSES, format!("witnesses found: {}", failing.join(", ")))
    };
    let bytes = match cfg.output_format {
        Format::Json => report_json(&report, cfg.max_witnesses)?,
        Format::Csv => check_csv(&report),
    };
    Ok(Outcome {
        code,
        report: bytes,
        diagnostics,
    })
}

#[derive(Debug, Serialize)]
struct SolveSummary<'a> {
    scenario: &'a str,
    status: SolveStatus,
    limit: Option<f64>,
    iterations: usize,
    residuals: Residuals<f64>,
    escape_index: Option<usize>,
    trajectory: &'a TrajectoryRecord<f64>,
    cauchy: CauchyDiagnostics<f64>,
    ledger: ViolationReport<f64>,
    trace: Vec<TraceRecord<f64>>,
}

fn solve(cfg: &RunConfig) -> CliResult<(Scenario<f64>, SolveResult<f64>)> {
    let scenario = validate(cfg)?;
    let result = iterate(&scenario, cfg.max_iter, cfg.tol)?;
    Ok((scenario, result))
}

fn solve_code(result: &SolveResult<f64>) -> (i32, String) {
    match result.status {
        SolveStatus::CommonFixedPoint => (EXIT_OK, String::new()),
        status => (
            EXIT_NO_CONVERGENCE,
            format!("{} after {} iterations", serde_json::to_string(&status).unwrap_or_default(), result.iterations),
        ),
    }
}

fn trace_csv(result: &SolveResult<f64>) -> CliResult<Vec<u8>> {
    let mut bytes = Vec::new();
    result.trace.write_csv(&mut bytes).map_err(|e| CliError::Output(e.to_string()))?;
    Ok(bytes)
}

pub fn cmd_solve(cfg: &RunConfig) -> CliResult<Outcome> {
    let (scenario, result) = solve(cfg)?;
    let (code, diagnostics) = solve_code(&result);
    let report = match cfg.output_format {
        Format::Csv => trace_csv(&result)?,
        Format::Json => report_json(
            &SolveSummary {
            scenario: &scenario.name,
            status: result.status,
            limit: result.limit,
            iterations: result.iterations,
            residuals: result.residuals,
            escape_index: result.escape_index,
            trajectory: &result.trajectory,
            cauchy: cauchy_diagnostics(&result.trace, &scenario.space, CAUCHY_TAIL, cfg.tol)?,
            ledger: verify_ledger(&result.trace, &scenario.psi, &scenario.tol)?,
            trace: result.trace.records(),
            },
            cfg.max_witnesses,
        )?,
    };
    Ok(Outcome {
        code,
        report,
        diagnostics,
    })
}

pub fn cmd_trace(cfg: &RunConfig) -> CliResult<Outcome> {
    let (_, result) = solve(cfg)?;
    let (code, diagnostics) = solve_code(&result);
    let report = match cfg.output_format {
        Format::Csv => trace_csv(&result)?,
        Format::Json => {
            let mut bytes = Vec::new();
            result.trace.write_jsonl(&mut bytes).map_err(|e| CliError::Output(e.to_string()))?;
            bytes
        }
    };
    Ok(Outcome {
        code,
        report,
        diagnostics,
    })
}

#[derive(Debug, Serialize)]
struct BallReport<'a> {
    scenario: &'a str,
    center: f64,
    radius: f64,
    resolution: usize,
    size: usize,
    points: &'a [f64],
    center_included: bool,
    note: Option<String>,
}

pub fn cmd_ball(cfg: &RunConfig, center: Option<f64>, radius: Option<f64>) -> CliResult<Outcome> {
    let scenario = validate(cfg)?;
    let center = center.unwrap_or(scenario.x0);
    let radius = radius.unwrap_or(scenario.epsilon);
    if !scenario.domain.contains(center) {
        return Err(CliError::Config(format!("--center {center} outside the domain {}", scenario.domain)));
    }
    let grid = scenario.domain.sample(cfg.resolution, scenario.tol.eq)?;
    let ball = left_closed_ball(&scenario.space, center, radius, &grid, &scenario.tol)?;
    let self_distance = scenario.q(center, center)?;
    let center_included = self_distance <= radius + scenario.tol.slack;
    let note = if ball.is_empty() {
        Some(format!("empty ball: q(c,c) = {self_distance} exceeds the radius"))
    } else if !center_included {
        Some(format!("center excluded: q(c,c) = {self_distance} exceeds the radius"))
    } else {
        None
    };
    let report = match cfg.output_format {
        Format::Json => json(&BallReport {
            scenario: &scenario.name,
            center,
            radius,
            resolution: cfg.resolution,
            size: ball.len(),
            points: ball.points(),
            center_included,
            note: note.clone(),
        })?,
        Format::Csv => csv_rows(&["x"], ball.points().iter().map(|p| vec![p.to_string()])),
    };
    Ok(Outcome {
        code: EXIT_OK,
        report,
        diagnostics: note.unwrap_or_default(),
    })
}
