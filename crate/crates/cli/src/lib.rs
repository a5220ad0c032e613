//! Command-line front end: argument parsing, file input, report output and
//! exit-code mapping.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use zerorate::acceptance::{run_all, run_criterion, CriterionResult, CRITERIA};
use zerorate::decoder::DecodingOutcome;
use zerorate::exponent::{DEFAULT_SUBSET_GUARD, ZeroRateMethod};
use zerorate::halving::TheoremReport;
use zerorate::ramsey::{SearchMode, SubcodeReport};
use zerorate::types::DEFAULT_ENUMERATION_GUARD;
use zerorate::{
    d_min, ensemble_from_code, error_probabilities, error_probabilities_direct, error_probabilities_pair,
    error_probabilities_via_types, extract_subcode, plotkin_upper_bound, theorem_check, verify_lower_bound,
    zero_rate_exponent, BoundReport, Channel, Code, LowerBoundReport,
};

/// Environment variable overriding every enumeration size guard.
pub const GUARD_ENV: &str = "ZR_GUARD";

#[derive(Parser, Debug)]
#[command(name = "zerorate", version, about = "Zero-rate list-decoding exponents and exact error probabilities")]
pub struct Cli {
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Channel files.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Single-letter exponents.
    #[command(subcommand)]
    Exponent(ExponentCommand),
    /// Code-level exponents.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Exact maximum-likelihood list decoding.
    #[command(subcommand)]
    Decode(DecodeCommand),
    /// Finite-n lower bound and averaging upper bound on one code.
    #[command(subcommand)]
    Bound(BoundCommand),
    /// Monochromatic subcode extraction.
    #[command(subcommand)]
    Ramsey(RamseyCommand),
    /// Halving procedure on the ensemble of a code.
    #[command(subcommand)]
    Halving(HalvingCommand),
    /// Built-in check suites.
    #[command(subcommand)]
    Suite(SuiteCommand),
}

#[derive(Subcommand, Debug)]
pub enum ChannelCommand {
    Validate {
        #[arg(long)]
        channel: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OptimizerKind {
    Multistart,
    Grid,
}

#[derive(Subcommand, Debug)]
pub enum ExponentCommand {
    ZeroRate {
        #[arg(long)]
        channel: PathBuf,
        #[arg(long)]
        list_size: usize,
        #[arg(long, value_enum, default_value_t = OptimizerKind::Multistart)]
        method: OptimizerKind,
        /// Grid step, also used to polish multistart results when |X| <= 3.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Skip the grid polish in multistart mode.
        #[arg(long)]
        no_polish: bool,
    },
}

#[derive(Args, Debug)]
pub struct ChannelCode {
    #[arg(long)]
    pub channel: PathBuf,
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub list_size: usize,
}

#[derive(Subcommand, Debug)]
pub enum CodeCommand {
    Dmin(ChannelCode),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DecodeKind {
    Auto,
    Direct,
    Types,
    Pair,
}

#[derive(Subcommand, Debug)]
pub enum DecodeCommand {
    Exact {
        #[command(flatten)]
        input: ChannelCode,
        #[arg(long, value_enum, default_value_t = DecodeKind::Auto)]
        method: DecodeKind,
    },
}

#[derive(Subcommand, Debug)]
pub enum BoundCommand {
    Verify {
        #[command(flatten)]
        input: ChannelCode,
        /// Quantization used by the averaging bound.
        #[arg(long, default_value_t = 1_000_000)]
        t: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Greedy,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SearchMode::Exact,
            ModeArg::Greedy => SearchMode::Greedy,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum RamseyCommand {
    Extract {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        t: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
        mode: ModeArg,
        #[arg(long)]
        target: Option<usize>,
        /// Largest code the exact search accepts.
        #[arg(long)]
        exact_limit: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum HalvingCommand {
    Run {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        t: u64,
        /// Arithmetic is always exact; accepted for compatibility.
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t = ModeArg::Greedy)]
        mode: ModeArg,
        #[arg(long)]
        exact_limit: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
pub enum SuiteCommand {
    Acceptance {
        /// Run a single criterion (1 to 10).
        #[arg(long)]
        criterion: Option<usize>,
    },
}

#[derive(Error, Debug)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] zerorate::Error),
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("writing report: {0}")]
    Write(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad argument: {0}")]
    Argument(String),
    #[error("acceptance criteria failed: {0:?}")]
    Failed(Vec<usize>),
}

impl CliError {
    /// 1 for invalid input, 2 for a size guard, 3 for a failed check.
    pub fn exit_code(&self) -> i32 {
        use zerorate::Error as E;
        match self {
            CliError::Core(E::SizeGuardExceeded { .. }) => 2,
            CliError::Core(
                E::BoundViolation(_)
                | E::HypothesisFails(..)
                | E::NotMonochromatic(_)
                | E::SignMismatch(..)
                | E::NonConvergence { .. }
                | E::NoSubsetOfTargetSize { .. },
            )
            | CliError::Failed(_) => 3,
            _ => 1,
        }
    }
}

/// Shape of `channel validate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub inputs: usize,
    pub outputs: usize,
    pub matrix: Vec<Vec<f64>>,
}

/// Shape of `exponent zero-rate` and `code dmin`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub value_nats: f64,
    pub argmax: Vec<f64>,
    pub gap: f64,
    pub witness_subset: Option<Vec<usize>>,
}

/// Shape of `bound verify`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundVerifyReport {
    pub lower: LowerBoundReport,
    pub upper: BoundReport,
}

/// Shape of `suite acceptance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Everything a command can emit.
#[derive(Clone, Debug, PartialEq)]
pub enum Report {
    Channel(ChannelReport),
    Exponent(ExponentReport),
    Decoding(DecodingOutcome),
    Bound(Box<BoundVerifyReport>),
    Subcode(SubcodeReport),
    Halving(Box<TheoremReport>),
    Acceptance(AcceptanceReport),
}

fn guard(default: f64) -> Result<f64, CliError> {
    match std::env::var(GUARD_ENV) {
        Ok(v) => v
            .parse::<f64>()
            .ok()
            .filter(|g| *g > 0.0)
            .ok_or_else(|| CliError::Argument(format!("{GUARD_ENV}={v} is not a positive number"))),
        Err(_) => Ok(default),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn load_channel(path: &Path) -> Result<Channel, CliError> {
    Ok(Channel::from_json(&read(path)?)?)
}

fn load_code(path: &Path) -> Result<Code, CliError> {
    Ok(Code::from_text(&read(path)?)?)
}

/// Runs one command and returns its report.
pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Channel(ChannelCommand::Validate { channel }) => {
            let ch = load_channel(channel)?;
            Ok(Report::Channel(ChannelReport {
                inputs: ch.input_size(),
                outputs: ch.output_size(),
                matrix: ch.to_file().matrix,
            }))
        }
        Command::Exponent(ExponentCommand::ZeroRate {
            channel,
            list_size,
            method,
            step,
            starts,
            seed,
            no_polish,
        }) => {
            let ch = load_channel(channel)?;
            let method = match method {
                OptimizerKind::Grid => ZeroRateMethod::Grid { step: *step },
                OptimizerKind::Multistart => ZeroRateMethod::Multistart {
                    starts: *starts,
                    seed: *seed,
                    grid_step: (!no_polish).then_some(*step),
                },
            };
            let r = zero_rate_exponent(&ch, *list_size, &method)?;
            Ok(Report::Exponent(ExponentReport {
                value_nats: r.value,
                argmax: r.argmax.into_inner(),
                gap: r.gap,
                witness_subset: None,
            }))
        }
        Command::Code(CodeCommand::Dmin(input)) => {
            let ch = load_channel(&input.channel)?;
            let code = load_code(&input.code)?;
            let r = d_min(&ch, &code, input.list_size, guard(DEFAULT_SUBSET_GUARD)?)?;
            Ok(Report::Exponent(ExponentReport {
                value_nats: r.d_min,
                argmax: r.optimum.argmax.into_inner(),
                gap: r.optimum.gap,
                witness_subset: Some(r.witness),
            }))
        }
        Command::Decode(DecodeCommand::Exact { input, method }) => {
            let ch = load_channel(&input.channel)?;
            let code = load_code(&input.code)?;
            let g = guard(DEFAULT_ENUMERATION_GUARD)?;
            let l = input.list_size;
            let outcome = match method {
                DecodeKind::Auto => error_probabilities(&ch, &code, l, g)?,
                DecodeKind::Direct => error_probabilities_direct(&ch, &code, l, g)?,
                DecodeKind::Pair => error_probabilities_pair(&ch, &code)?,
                DecodeKind::Types => {
                    let all: Vec<usize> = (0..code.size()).collect();
                    error_probabilities_via_types(&ch, &code, &all, l, g)?
                }
            };
            Ok(Report::Decoding(outcome))
        }
        Command::Bound(BoundCommand::Verify { input, t }) => {
            let ch = load_channel(&input.channel)?;
            let code = load_code(&input.code)?;
            let lower = verify_lower_bound(&ch, &code, input.list_size)?;
            let upper = plotkin_upper_bound(&ch, &code, input.list_size, *t)?;
            Ok(Report::Bound(Box::new(BoundVerifyReport { lower, upper })))
        }
        Command::Ramsey(RamseyCommand::Extract {
            code,
            k,
            t,
            mode,
            target,
            exact_limit,
        }) => {
            let code = load_code(code)?;
            Ok(Report::Subcode(extract_subcode(&code, *k, *t, (*mode).into(), *target, *exact_limit)?))
        }
        Command::Halving(HalvingCommand::Run {
            code,
            t,
            mode,
            exact_limit,
            ..
        }) => {
            let code = load_code(code)?;
            let ens = ensemble_from_code(&code);
            Ok(Report::Halving(Box::new(theorem_check(&ens, *t, (*mode).into(), *exact_limit)?)))
        }
        Command::Suite(SuiteCommand::Acceptance { criterion }) => {
            let criteria = match criterion {
                Some(id) if (1..=CRITERIA.len()).contains(id) => vec![run_criterion(*id)],
                Some(id) => return Err(CliError::Argument(format!("no criterion {id}"))),
                None => run_all(),
            };
            Ok(Report::Acceptance(AcceptanceReport {
                passed: criteria.iter().all(|c| c.passed),
                criteria,
            }))
        }
    }
}

/// Pretty JSON with fields in declaration order.
pub fn emit_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    Ok(serde_json::from_str(text)?)
}

/// `%.12g`-style formatting.
pub fn format_float(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{v:.11e}")
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) if n.is_f64() => format_float(n.as_f64().unwrap_or(f64::NAN)),
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(cell).collect();
            format!("[{}]", parts.join(" "))
        }
        Value::Object(_) => v.to_string(),
    }
}

/// One CSV row per object, columns from the first object's keys.
fn rows_csv(rows: &[Value]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Some(Value::Object(first)) = rows.first() {
        w.write_record(first.keys())?;
        for row in rows {
            if let Value::Object(map) = row {
                w.write_record(first.keys().map(|k| map.get(k).map(cell).unwrap_or_default()))?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| CliError::Write(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

/// CSV rendering with a header row.
pub fn emit_csv(report: &Report) -> Result<String, CliError> {
    match report {
        Report::Decoding(o) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["m", "P_e_m"])?;
            for (m, p) in o.per_message_error.iter().enumerate() {
                w.write_record([m.to_string(), format_float(*p)])?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Write(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
        }
        Report::Halving(r) => {
            let rows = r.trace.steps.iter().map(to_value).collect::<Result<Vec<_>, _>>()?;
            rows_csv(&rows)
        }
        Report::Acceptance(a) => {
            let rows = a.criteria.iter().map(to_value).collect::<Result<Vec<_>, _>>()?;
            rows_csv(&rows)
        }
        Report::Channel(r) => rows_csv(&[to_value(r)?]),
        Report::Exponent(r) => rows_csv(&[to_value(r)?]),
        Report::Bound(r) => {
            // Flatten the two halves into one row with prefixed columns.
            let mut row = serde_json::Map::new();
            for (prefix, part) in [("lower", to_value(&r.lower)?), ("upper", to_value(&r.upper)?)] {
                if let Value::Object(map) = part {
                    for (k, v) in map {
                        row.insert(format!("{prefix}_{k}"), v);
                    }
                }
            }
            rows_csv(&[Value::Object(row)])
        }
        Report::Subcode(r) => rows_csv(&[to_value(r)?]),
    }
}

pub fn emit(report: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => emit_csv(report),
        Format::Json => match report {
            Report::Channel(r) => emit_json(r),
            Report::Exponent(r) => emit_json(r),
            Report::Decoding(r) => emit_json(r),
            Report::Bound(r) => emit_json(r),
            Report::Subcode(r) => emit_json(r),
            Report::Halving(r) => emit_json(r),
            Report::Acceptance(r) => emit_json(r),
        },
    }
}

/// Runs the parsed command line and writes its report; returns the exit code.
pub fn dispatch(cli: &Cli) -> i32 {
    let result = run(&cli.command).and_then(|report| {
        let text = emit(&report, cli.format)?;
        match &cli.output {
            Some(path) => std::fs::write(path, &text)?,
            None => print!("{text}"),
        }
        match report {
            Report::Acceptance(a) if !a.passed => Err(CliError::Failed(
                a.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect(),
            )),
            _ => Ok(()),
        }
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
