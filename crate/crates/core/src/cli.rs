//! Command-line surface. Machine-readable output (JSON or CSV) goes to
//! standard output; diagnostics go to standard error.
//!
//! Exit codes: 0 success, 1 other failure, 2 malformed input, 3 duplicate `x`,
//! 4 confidence level unattainable.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use num::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use crate::asymptotics::{builtin_model, efficiency_report, DesignSequence};
use crate::baselines::fit_baselines;
use crate::error::Error;
use crate::estimator::{confidence_interval_with, point_estimate, CiOptions, ConfidenceInterval, NullPolicy};
use crate::montecarlo::{run_simulation, SimulationConfig};
use crate::null::{exact_null_with_ceiling, DEFAULT_CEILING};
use crate::process::{build_step_function, BuildMethod, GiniStepFunction};
use crate::ranks::Sample;
use crate::scalar::{format_rational, Scalar};

pub const SCHEMA_VERSION: u32 = 1;
pub const CEILING_ENV: &str = "COGRAD_NULL_CEILING";

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DUPLICATE_X: i32 = 3;
pub const EXIT_UNATTAINABLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cograd", version, about = "Slope estimation through Gini's cograduation index")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Copy, Default)]
pub struct Arithmetic {
    /// Parse inputs as exact decimals (default).
    #[arg(long, conflicts_with = "float")]
    pub exact: bool,
    /// Parse inputs as binary floating point.
    #[arg(long)]
    pub float: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the slope; optionally add a distribution-free confidence interval.
    Fit {
        csv: PathBuf,
        #[arg(long)]
        level: Option<f64>,
        #[command(flatten)]
        arithmetic: Arithmetic,
        /// Use a Monte Carlo null with this seed when n exceeds the ceiling.
        #[arg(long)]
        seed: Option<u64>,
        /// Monte Carlo replications for the null when n exceeds the ceiling.
        #[arg(long)]
        reps: Option<usize>,
        /// Accepted for symmetry; output is always JSON.
        #[arg(long)]
        json: bool,
    },
    /// Export the step function b -> G(y; b).
    Gtrace {
        csv: PathBuf,
        #[command(flatten)]
        arithmetic: Arithmetic,
        #[arg(long)]
        json: bool,
    },
    /// Exact null distribution of the index for n observations.
    Nulltable {
        n: usize,
        #[arg(long)]
        json: bool,
    },
    /// Asymptotic efficiency constants for an error law.
    Are {
        model: String,
        /// `linear` or `geometric`.
        #[arg(long, default_value = "linear")]
        design: String,
        #[arg(long)]
        json: bool,
    },
    /// Run a seeded simulation described by a `key = value` config file.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: 0, stdout, stderr: String::new() }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Self { code, stdout: String::new(), stderr: message.into() }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::DuplicateX { .. } => EXIT_DUPLICATE_X,
        Error::LevelUnattainable { .. } => EXIT_UNATTAINABLE,
        Error::Parse(_)
        | Error::Config(_)
        | Error::LengthMismatch { .. }
        | Error::TooFewPoints(_)
        | Error::NonFinite { .. } => EXIT_MALFORMED,
        _ => EXIT_FAILURE,
    }
}

fn failure(err: Error) -> Outcome {
    Outcome::fail(exit_code(&err), format!("error: {err}\n"))
}

pub fn null_ceiling() -> usize {
    std::env::var(CEILING_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_CEILING)
}

pub fn run(cli: Cli) -> Outcome {
    let result = match cli.command {
        Command::Fit { csv, level, arithmetic, seed, reps, .. } => {
            let policy = match (seed, reps) {
                (None, None) => NullPolicy::Normal,
                (seed, reps) => NullPolicy::MonteCarlo { reps: reps.unwrap_or(100_000), seed: seed.unwrap_or(0) },
            };
            let options = CiOptions { ceiling: null_ceiling(), policy, ..CiOptions::default() };
            if arithmetic.float {
                cmd_fit::<f64>(&csv, level, &options)
            } else {
                cmd_fit::<BigRational>(&csv, level, &options)
            }
        }
        Command::Gtrace { csv, arithmetic, json } => {
            if arithmetic.float {
                cmd_gtrace::<f64>(&csv, json)
            } else {
                cmd_gtrace::<BigRational>(&csv, json)
            }
        }
        Command::Nulltable { n, json } => cmd_nulltable(n, json),
        Command::Are { model, design, .. } => cmd_are(&model, &design),
        Command::Simulate { config, seed, reps, .. } => cmd_simulate(&config, seed, reps),
    };
    result.unwrap_or_else(|outcome| outcome)
}

type CmdResult = std::result::Result<Outcome, Outcome>;

fn read_input(path: &Path) -> std::result::Result<String, Outcome> {
    let mut text = String::new();
    let read = if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    read.map_err(|e| Outcome::fail(EXIT_MALFORMED, format!("error: cannot read {}: {e}\n", path.display())))?;
    Ok(text)
}

/// Parse a CSV with columns `x` and `y` (any order, any row order).
pub fn parse_sample<S: Scalar>(text: &str) -> crate::error::Result<Sample<S>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse(format!("missing column {name:?} in header")))
    };
    let (xi, yi) = (column("x")?, column("y")?);
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| {
            record
                .get(i)
                .ok_or_else(|| Error::Parse(format!("row {} is missing a field", line + 2)))
                .and_then(S::parse_decimal)
        };
        rows.push((field(xi)?, field(yi)?));
    }
    Sample::from_unsorted(rows)
}

fn exact_json(value: &BigRational) -> Value {
    json!({ "num": value.numer().to_string(), "den": value.denom().to_string() })
}

trait Render: Scalar {
    fn render(&self) -> String;
    fn exact(&self) -> Option<Value>;
}

impl Render for f64 {
    fn render(&self) -> String {
        format!("{self}")
    }
    fn exact(&self) -> Option<Value> {
        None
    }
}

impl Render for BigRational {
    fn render(&self) -> String {
        format_rational(self)
    }
    fn exact(&self) -> Option<Value> {
        Some(exact_json(self))
    }
}

#[derive(Serialize)]
struct FitOutput {
    schema_version: u32,
    arithmetic: &'static str,
    n: usize,
    breakpoint_count: usize,
    beta_tilde: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_tilde_exact: Option<Value>,
    zero_plateau: Option<[f64; 2]>,
    beta_hat: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_hat_exact: Option<Value>,
    beta_star: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta_star_exact: Option<Value>,
    ci: Option<Value>,
}

fn ci_json<S: Render>(ci: &ConfidenceInterval<S>) -> Value {
    json!({
        "lower": ci.lower.as_f64(),
        "upper": ci.upper.as_f64(),
        "lower_exact": ci.lower.exact(),
        "upper_exact": ci.upper.exact(),
        "g_star": ci.g_star,
        "achieved_level": ci.achieved_level,
        "achieved_level_exact": ci.achieved_level_exact.map(|r| json!({ "num": r.numer(), "den": r.denom() })),
        "target_level": ci.target_level,
        "null": ci.null,
    })
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

fn cmd_fit<S: Render>(path: &Path, level: Option<f64>, options: &CiOptions) -> CmdResult {
    let text = read_input(path)?;
    let sample: Sample<S> = parse_sample(&text).map_err(failure)?;
    let step: GiniStepFunction<S> = build_step_function(&sample, BuildMethod::Incremental).map_err(failure)?;
    let estimate = point_estimate(&step);
    let baselines = fit_baselines(&sample);
    let mut output = FitOutput {
        schema_version: SCHEMA_VERSION,
        arithmetic: if S::EXACT { "exact" } else { "float" },
        n: sample.len(),
        breakpoint_count: step.breakpoint_count(),
        beta_tilde: estimate.beta_tilde.as_f64(),
        beta_tilde_exact: estimate.beta_tilde.exact(),
        zero_plateau: estimate.zero_plateau.as_ref().map(|(a, b)| [a.as_f64(), b.as_f64()]),
        beta_hat: baselines.beta_hat.as_f64(),
        beta_hat_exact: baselines.beta_hat.exact(),
        beta_star: baselines.beta_star.as_f64(),
        beta_star_exact: baselines.beta_star.exact(),
        ci: None,
    };
    let mut stderr = format!(
        "n = {}, {} breakpoints, beta_tilde = {}\n",
        sample.len(),
        step.breakpoint_count(),
        estimate.beta_tilde.render()
    );
    if let Some(level) = level {
        match confidence_interval_with(&sample, level, options) {
            Ok(ci) => {
                stderr.push_str(&format!(
                    "interval ({}, {}) at achieved level {:.6}\n",
                    ci.lower.render(),
                    ci.upper.render(),
                    ci.achieved_level
                ));
                output.ci = Some(ci_json(&ci));
            }
            Err(err) => {
                let code = exit_code(&err);
                return Err(Outcome { code, stdout: to_json(&output), stderr: format!("{stderr}error: {err}\n") });
            }
        }
    }
    Ok(Outcome { code: 0, stdout: to_json(&output), stderr })
}

fn cmd_gtrace<S: Render>(path: &Path, json: bool) -> CmdResult {
    let text = read_input(path)?;
    let sample: Sample<S> = parse_sample(&text).map_err(failure)?;
    let step: GiniStepFunction<S> = build_step_function(&sample, BuildMethod::Incremental).map_err(failure)?;
    let end = |v: &Option<S>, inf: &str| v.as_ref().map_or_else(|| inf.to_string(), Render::render);
    let rows = step.trace();
    if json {
        let rows: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "interval_left": end(&r.interval_left, "-inf"),
                    "interval_right": end(&r.interval_right, "+inf"),
                    "value_num": r.value.numer(),
                    "value_den": r.value.denom(),
                })
            })
            .collect();
        return Ok(Outcome::ok(to_json(&json!({ "schema_version": SCHEMA_VERSION, "rows": rows }))));
    }
    let mut writer = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Outcome::fail(EXIT_FAILURE, format!("error: {e}\n"));
    writer.write_record(["interval_left", "interval_right", "value_num", "value_den"]).map_err(io)?;
    for r in &rows {
        writer
            .write_record([
                end(&r.interval_left, "-inf"),
                end(&r.interval_right, "+inf"),
                r.value.numer().to_string(),
                r.value.denom().to_string(),
            ])
            .map_err(io)?;
    }
    let bytes = writer.into_inner().map_err(|e| Outcome::fail(EXIT_FAILURE, format!("error: {e}\n")))?;
    Ok(Outcome::ok(String::from_utf8(bytes).expect("utf-8 csv")))
}

fn cmd_nulltable(n: usize, json: bool) -> CmdResult {
    let dist = exact_null_with_ceiling(n, null_ceiling()).map_err(failure)?;
    if json {
        let rows: Vec<Value> = dist
            .support
            .iter()
            .zip(&dist.counts)
            .map(|(g, c)| json!({ "value_num": g.numer(), "value_den": g.denom(), "count": c }))
            .collect();
        return Ok(Outcome::ok(to_json(
            &json!({ "schema_version": SCHEMA_VERSION, "n": n, "n_factorial": dist.total, "rows": rows }),
        )));
    }
    let mut out = String::from("value_num,value_den,count,n_factorial\n");
    for (g, c) in dist.support.iter().zip(&dist.counts) {
        out.push_str(&format!("{},{},{},{}\n", g.numer(), g.denom(), c, dist.total));
    }
    Ok(Outcome::ok(out))
}

fn design_by_name(name: &str) -> std::result::Result<DesignSequence, Error> {
    match name.trim().to_ascii_lowercase().as_str() {
        "linear" => Ok(DesignSequence::linear()),
        "geometric" => Ok(DesignSequence::geometric(2.0)),
        other => match other.strip_prefix("geometric:").map(str::parse::<f64>) {
            Some(Ok(ratio)) if ratio > 1.0 => Ok(DesignSequence::geometric(ratio)),
            _ => Err(Error::Config(format!("unknown design {name:?} (expected linear or geometric[:ratio])"))),
        },
    }
}

fn model_by_name(name: &str) -> std::result::Result<Arc<dyn crate::asymptotics::DistributionModel>, Error> {
    builtin_model(name.trim())
        .ok_or_else(|| Error::Config(format!("unknown model {name:?} (expected normal, laplace, cauchy or uniform)")))
}

#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

fn cmd_are(model: &str, design: &str) -> CmdResult {
    let model = model_by_name(model).map_err(failure)?;
    let design = design_by_name(design).map_err(failure)?;
    let report = efficiency_report(model.as_ref(), &design).map_err(failure)?;
    Ok(Outcome::ok(to_json(&Versioned { schema_version: SCHEMA_VERSION, body: report })))
}

/// Parse the `key = value` simulation config. Blank lines and `#` comments are ignored.
pub fn parse_simulation_config(text: &str) -> crate::error::Result<SimulationConfig> {
    let mut model = None;
    let mut design = DesignSequence::linear();
    let (mut n, mut reps, mut seed) = (None, None, 0u64);
    let (mut alpha, mut beta, mut level) = (0.0, 0.0, None);
    let mut full_step = false;
    let num = |key: &str, v: &str| Error::Config(format!("invalid value {v:?} for {key}"));
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "model" => model = Some(model_by_name(value)?),
            "design" => design = design_by_name(value)?,
            "n" => n = Some(value.parse().map_err(|_| num(key, value))?),
            "reps" => reps = Some(value.parse().map_err(|_| num(key, value))?),
            "seed" => seed = value.parse().map_err(|_| num(key, value))?,
            "alpha" => alpha = value.parse().map_err(|_| num(key, value))?,
            "beta" => beta = value.parse().map_err(|_| num(key, value))?,
            "level" => level = Some(value.parse().map_err(|_| num(key, value))?),
            "step_function" => full_step = value.parse().map_err(|_| num(key, value))?,
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
    }
    let model = model.ok_or_else(|| Error::Config("missing key: model".into()))?;
    let n = n.ok_or_else(|| Error::Config("missing key: n".into()))?;
    let reps = reps.ok_or_else(|| Error::Config("missing key: reps".into()))?;
    let mut config = SimulationConfig::new(model, design, n, reps, seed).with_truth(alpha, beta);
    if let Some(level) = level {
        config = config.with_interval(level);
    }
    config.full_step_function = full_step;
    config.null_ceiling = null_ceiling();
    Ok(config)
}

fn cmd_simulate(path: &Path, seed: Option<u64>, reps: Option<usize>) -> CmdResult {
    let text = read_input(path)?;
    let mut config = parse_simulation_config(&text).map_err(failure)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(reps) = reps {
        config.reps = reps;
    }
    let report = run_simulation(&config).map_err(failure)?;
    let stderr = format!("simulated {} replications in {:.2} s\n", report.reps, report.runtime_seconds);
    Ok(Outcome { code: 0, stdout: to_json(&Versioned { schema_version: SCHEMA_VERSION, body: report }), stderr })
}
