//! The `fixline` command line.

mod commands;
pub mod config;
mod eval;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use fixline_mining::MiningError;
use fixline_model::ModelError;
use thiserror::Error;

pub use config::{load_config, ConfigError, Settings, SplitName};

#[derive(Debug, Parser)]
#[command(name = "fixline", version, about = "Classify and repair single-statement defects in changed functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML file of settings (flat `key = value` pairs).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input: a manifest for `mine`, triples (JSONL) for `train` and `eval`.
    #[arg(long, global = true)]
    pub data: Option<PathBuf>,
    /// Output file; stdout when omitted (required for `train`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub ckpt: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub repo: Option<PathBuf>,
    /// Revision to analyze; defaults to HEAD.
    #[arg(long, global = true)]
    pub commit: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub task: Option<Task>,
    #[arg(long, global = true)]
    pub beam_width: Option<usize>,
    /// Repair candidates for `eval --task repair`, one JSON string per line,
    /// in place of generating them.
    #[arg(long, global = true)]
    pub candidates: Option<PathBuf>,
    /// Overrides one setting; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mine function triples from the repositories in a manifest.
    Mine,
    /// Generate a synthetic corpus of triples.
    Synth,
    /// Train a model and write its checkpoint and epoch log.
    Train,
    /// Score a checkpoint on one split of a triple file.
    Eval,
    /// Classify and repair the functions changed by one commit.
    Predict,
    /// Check the model's gradients against finite differences.
    Gradcheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Identify,
    Classify,
    Repair,
}

/// A problem with the invocation or its inputs rather than with running it.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct Invalid(pub String);

pub(crate) fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

fn exit_code(e: &anyhow::Error) -> i32 {
    let validation = e.downcast_ref::<Invalid>().is_some()
        || e.downcast_ref::<ConfigError>().is_some()
        || matches!(e.downcast_ref::<ModelError>(), Some(ModelError::Config(_) | ModelError::RatioError(_)))
        || matches!(e.downcast_ref::<MiningError>(), Some(MiningError::Manifest(_)));
    if validation {
        1
    } else {
        2
    }
}

/// Runs one invocation and returns its exit code: 0 on success, 1 for
/// usage and validation errors, 2 for failures while running.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{text}");
                0
            } else {
                let _ = write!(err, "{text}");
                1
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            exit_code(&e)
        }
    }
}

fn settings(cli: &Cli) -> anyhow::Result<Settings> {
    let mut overrides = cli.set.clone();
    if let Some(s) = cli.seed {
        overrides.push(format!("seed={s}"));
    }
    if let Some(b) = cli.beam_width {
        overrides.push(format!("beam_width={b}"));
    }
    Ok(load_config(cli.config.as_deref(), &overrides)?)
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let settings = settings(cli)?;
    match cli.command {
        Command::Mine => commands::mine(cli, out, err),
        Command::Synth => commands::synth(cli, &settings, out),
        Command::Train => commands::train(cli, &settings, out, err),
        Command::Eval => eval::eval(cli, &settings, out, err),
        Command::Predict => commands::predict(cli, &settings, out, err),
        Command::Gradcheck => commands::gradcheck(&settings, out),
    }
}
