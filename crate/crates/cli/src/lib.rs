//! Command-line front end: ingestion, orchestration and report emission.
//!
//! Every subcommand reads a JSON [`config::RunConfig`], applies flag
//! overrides, writes its artifacts under `--out` and prints one summary line.

pub mod commands;
pub mod config;
pub mod ingest;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{MessageFormat, RunConfig};

/// Exit status for invalid invocations or configuration.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for failures while running a valid command.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl From<causecommit::Error> for CliError {
    fn from(e: causecommit::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "causecommit", version, about = "Cause-commitment classification of public messages")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relevance gate threshold [default: 0.3].
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Confidence threshold for confident predictions [default: 0.7].
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    /// Size of each audit top-k set [default: 50].
    #[arg(long = "top-k", global = true)]
    pub top_k: Option<usize>,
    /// Cross-validation folds [default: 10].
    #[arg(long, global = true)]
    pub folds: Option<usize>,
    /// Message input format [default: jsonl].
    #[arg(long, global = true, value_enum)]
    pub format: Option<MessageFormat>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Record the wall-clock time in run_manifest.json.
    #[arg(long, global = true)]
    pub timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Score messages for cause relevance and keep those above the threshold.
    Filter,
    /// Write the manual-annotation worksheet of each entity's most relevant messages.
    Template,
    /// Train the support and commitment classifiers.
    Train,
    /// Cross-validate both stage classifiers.
    Cv,
    /// Classify every message with the trained models.
    Classify,
    /// Per-entity counts of each commitment level.
    Aggregate,
    /// Regress ratings on log class counts.
    Correlate,
    /// Flag entities whose high-commitment messaging exceeds their rating.
    Audit,
    /// Sentiment ratios per annotated commitment label.
    SentimentReport,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Filter => "filter",
            Command::Template => "template",
            Command::Train => "train",
            Command::Cv => "cv",
            Command::Classify => "classify",
            Command::Aggregate => "aggregate",
            Command::Correlate => "correlate",
            Command::Audit => "audit",
            Command::SentimentReport => "sentiment-report",
        }
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit status. The summary goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(rendered.as_bytes()) } else { stderr.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match commands::execute(&cli) {
        Ok(summary) => {
            let _ = writeln!(stdout, "{summary}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "causecommit {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
