//! Command-line front-end for `hhbox`.
//!
//! Exit codes: 0 when every requested check passes, 1 when at least one
//! fails, 2 for usage errors and for runs where the function could not be
//! evaluated on the box.

pub mod analysis;
pub mod config;
pub mod corpus;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use hhbox::Function;
use thiserror::Error;

use analysis::{analyze, Plan, Status};
use config::{Cli, CommandKind, RunConfig};
use report::{Report, SCHEMA_VERSION};

/// Environment variable naming the default report directory.
pub const OUT_DIR_ENV: &str = "HHBOX_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] hhbox::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl From<hhbox::expr::ParseError> for CliError {
    fn from(e: hhbox::expr::ParseError) -> Self {
        CliError::Core(e.into())
    }
}

pub fn exit_code(status: &Status) -> i32 {
    match status {
        Status::Pass => 0,
        Status::Fail => 1,
        Status::Inconclusive => 2,
    }
}

/// Builds the report for a validated configuration.
pub fn execute(config: &RunConfig) -> Result<Report, CliError> {
    let (analysis, corpus, verdict) = match config.command {
        CommandKind::Corpus => {
            let (summary, status) = corpus::run_corpus(config)?;
            (None, Some(summary), status)
        }
        kind => {
            let source = config.function.as_ref().expect("function resolved");
            let bx = config.bx.as_ref().expect("box resolved");
            let f = Function::new(source.expr.clone());
            let plan = Plan {
                convexity: config.convexity,
                chain: kind == CommandKind::Verify,
                intermediates: config.intermediates,
                hgrid: config.hgrid,
                h_nodes: true,
            };
            let a = analyze(&f, bx, &config.settings, &plan, config.timings)?;
            let status = a.status();
            (Some(a), None, status)
        }
    };
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        config: config.clone(),
        analysis,
        corpus,
        verdict,
    })
}

/// Report destination: `--out` (relative to the output directory variable
/// when set), else a file named after the command in that directory, else
/// stdout (`None`).
pub fn destination(config: &RunConfig, out_dir: Option<&Path>) -> Option<PathBuf> {
    match (&config.out, out_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => Some(dir.join(format!(
            "hhbox-{}.{}",
            config.command.name(),
            config.format.extension()
        ))),
        (None, None) => None,
    }
}

fn summary_line(report: &Report) -> String {
    let verdict = match report.verdict {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Inconclusive => "inconclusive",
    };
    let mut line = format!("{}: {verdict}", report.config.command.name());
    if let Some(c) = &report.corpus {
        line += &format!(" ({}/{} members passed)", c.passed, c.total);
        for m in c.members.iter().filter(|m| !m.passed) {
            let failed: Vec<_> = m.failed_checks().collect();
            line += &format!(
                "\n  {} on {}: {}",
                m.function,
                m.box_name,
                failed.join(", ")
            );
        }
    }
    if let Some(a) = &report.analysis {
        for e in &a.errors {
            line += &format!("\n  {e}");
        }
    }
    line
}

fn run_inner(args: Vec<OsString>) -> Result<i32, CliError> {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(code);
        }
    };
    let config = RunConfig::from_command(&cli.command)?;
    let report = execute(&config)?;
    let text = report.render()?;
    let out_dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match destination(&config, out_dir.as_deref()) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, text)?;
            eprintln!("{} (report: {})", summary_line(&report), path.display());
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            eprintln!("{}", summary_line(&report));
        }
    }
    Ok(exit_code(&report.verdict))
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match run_inner(args.into_iter().map(Into::into).collect()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
