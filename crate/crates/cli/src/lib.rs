//! `workbench` command line: cache classification and interval analysis on
//! toy programs (`.toy`, or any other extension) and access graphs (`.ag`).
//!
//! Exit codes: 0 success, 1 input error, 2 budget exceeded, 3 unproved assert.

mod cache_cmd;
mod intervals_cmd;
pub mod report;

use std::ffi::OsString;
use std::path::Path;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use workbench_core::intervals::{Bound, Interval};
use workbench_core::ir::{build_cfg, parse_access_graph, parse_program, Cfg};
use workbench_core::symrewrite::RewriteMode;

use report::Report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_UNPROVED: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Budget(_) => EXIT_BUDGET,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "workbench", version, about = "Exact and approximate static analyses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify every cache access as always-hit, always-miss or variable.
    Cache(CacheArgs),
    /// Interval invariants per location and assert verdicts.
    Intervals(IntervalArgs),
    /// Every cache method side by side, with disagreements listed.
    CompareCache(CacheArgs),
    /// Every interval method side by side, with disagreements listed.
    CompareIntervals(IntervalArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Toy program, or access graph when the extension is `.ag`.
    pub input: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Report per-phase timings (makes the output run-dependent).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CacheMethod {
    Approx,
    Exact,
    Oracle,
    Pipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Empty,
    Unknown,
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    #[command(flatten)]
    pub common: Common,
    /// Ways of the cache set.
    #[arg(long, default_value_t = 4)]
    pub assoc: usize,
    #[arg(long, value_enum, default_value_t = CacheMethod::Pipeline)]
    pub method: CacheMethod,
    #[arg(long, value_enum, default_value_t = InitArg::Empty)]
    pub init: InitArg,
    /// Distinct (location, cache state) pairs the oracle may visit.
    #[arg(long, default_value_t = workbench_core::cache::DEFAULT_STATE_BUDGET)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntervalMethod {
    Widen,
    WidenNarrow,
    Policy,
    Exhaustive,
    Oracle,
}

#[derive(Debug, Clone, Args)]
pub struct IntervalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value_t = IntervalMethod::WidenNarrow)]
    pub method: IntervalMethod,
    /// Plain joins at a loop head before widening.
    #[arg(long, default_value_t = 0)]
    pub widen_delay: usize,
    /// Decreasing passes for `widen-narrow`.
    #[arg(long, default_value_t = 1)]
    pub narrow_passes: usize,
    /// `off`, `full` or `truncated:<depth>`; widening methods only.
    #[arg(long, default_value = "off", value_parser = parse_rewrites)]
    pub rewrites: Rewrites,
    /// Entry range `var=lo:hi` or `var=c`; ends may be `-oo`/`+oo`.
    #[arg(long = "entry", value_parser = parse_entry)]
    pub entries: Vec<(String, Interval)>,
    /// Variable for `policy`/`exhaustive`; defaults to the only one declared.
    #[arg(long)]
    pub var: Option<String>,
    /// Case splits the exhaustive solver may make.
    #[arg(long, default_value_t = workbench_core::bounds::DEFAULT_SPLIT_CAP)]
    pub split_cap: usize,
    /// Value range `lo:hi` the oracle explores.
    #[arg(long, default_value = "-1000000:1000000", value_parser = parse_range, allow_hyphen_values = true)]
    pub range: (i64, i64),
    /// Distinct (location, store) pairs the oracle may visit.
    #[arg(long, default_value_t = 1_000_000)]
    pub budget: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rewrites(pub Option<RewriteMode>);

fn parse_rewrites(s: &str) -> Result<Rewrites, String> {
    match s {
        "off" => Ok(Rewrites(None)),
        "full" => Ok(Rewrites(Some(RewriteMode::Full))),
        _ => s
            .strip_prefix("truncated:")
            .and_then(|d| d.parse().ok())
            .map(|d| Rewrites(Some(RewriteMode::Truncated(d))))
            .ok_or_else(|| format!("expected `off`, `full` or `truncated:<depth>`, got `{s}`")),
    }
}

fn parse_bound(s: &str) -> Result<Bound, String> {
    s.parse().map_err(|_| format!("`{}` is not an integer or infinity", s.trim()))
}

fn parse_entry(s: &str) -> Result<(String, Interval), String> {
    let (var, range) = s.split_once('=').ok_or_else(|| format!("expected `var=lo:hi` or `var=c`, got `{s}`"))?;
    let (lo, hi) = match range.split_once(':') {
        Some((lo, hi)) => (parse_bound(lo)?, parse_bound(hi)?),
        None => {
            let b = parse_bound(range)?;
            (b, b)
        }
    };
    match Interval::new(lo, hi) {
        Interval::Bottom => Err(format!("empty entry range `{range}`")),
        i => Ok((var.trim().to_string(), i)),
    }
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected `lo:hi`, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<i64>().map_err(|_| format!("`{t}` is not an integer"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok((lo, hi))
}

/// Output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Per-phase stopwatch that records nothing unless enabled.
pub(crate) struct Timer {
    enabled: bool,
    phases: Vec<(&'static str, u64)>,
}

impl Timer {
    pub(crate) fn new(enabled: bool) -> Self {
        Timer { enabled, phases: Vec::new() }
    }

    pub(crate) fn time<T>(&mut self, phase: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        if self.enabled {
            self.phases.push((phase, start.elapsed().as_micros() as u64));
        }
        out
    }

    pub(crate) fn finish(self, r: &mut Report) {
        for (k, v) in self.phases {
            *r.timings.entry(k).or_insert(0) += v;
        }
    }
}

pub(crate) fn load(path: &str) -> Result<Cfg, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read `{path}`: {e}")))?;
    let is_graph = Path::new(path).extension().is_some_and(|e| e == "ag");
    let parsed = if is_graph {
        parse_access_graph(&text)
    } else {
        parse_program(&text).map(|p| build_cfg(&p))
    };
    parsed.map_err(|e| CliError::Input(format!("{path}:{e}")))
}

fn render(r: &Report, f: Format) -> String {
    match f {
        Format::Text => r.to_text(),
        Format::Json => r.to_json(),
    }
}

/// Runs one command line (including the program name) to completion.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: text, code }
            } else {
                Outcome { stdout: text, stderr: String::new(), code }
            };
        }
    };
    let (result, format) = match &cli.command {
        Command::Cache(a) => (cache_cmd::run(a), a.common.format),
        Command::CompareCache(a) => (cache_cmd::compare(a), a.common.format),
        Command::Intervals(a) => (intervals_cmd::run(a), a.common.format),
        Command::CompareIntervals(a) => (intervals_cmd::compare(a), a.common.format),
    };
    match result {
        Ok((report, code)) => Outcome { stdout: render(&report, format), stderr: String::new(), code },
        Err(e) => Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.exit_code() },
    }
}
