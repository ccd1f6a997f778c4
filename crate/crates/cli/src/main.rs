//! `igwave`: far-field internal gravity waves behind a moving source.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 partial
//! result (more than half of the field samples masked).

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use igwave::config::RunConfig;
use igwave::error::ErrorClass;
use igwave::pipeline::{self, Report, RunStatus};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "igwave",
    version,
    about = "Internal gravity wave far field from a moving point source"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for dumps and report.json [default: igwave-out].
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Reserved; the pipeline is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check special functions, modes and source constants against closed forms.
    Selftest,
    /// Tabulate the dispersion surface of each configured mode.
    Dispersion,
    /// Trace the ray fan and synthesize the far field at t_obs.
    Field,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_PARTIAL: u8 = 4;

impl Common {
    fn out_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("igwave-out"))
    }
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let path = common
        .config
        .as_deref()
        .context("--config is required for this subcommand")?;
    Ok(RunConfig::load(path)?)
}

fn finish(mut report: Report, common: &Common, write: bool) -> anyhow::Result<RunStatus> {
    if let Some(m) = report.json.as_object_mut() {
        m.insert("threads".into(), common.threads.into());
        m.insert("seed".into(), common.seed.into());
    }
    if write {
        let dir = common.out_dir();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = report.write(&dir)?;
        println!("report: {}", path.display());
    }
    Ok(report.status)
}

fn run(cli: &Cli) -> anyhow::Result<RunStatus> {
    let common = &cli.common;
    match cli.command {
        Command::Selftest => {
            let scale = match &common.config {
                Some(_) => load(common)?.numerics.selftest_tolerance_scale,
                None => 1.0,
            };
            let report = pipeline::with_threads(common.threads, || pipeline::cmd_selftest(scale))??;
            for c in report.json["checks"].as_array().into_iter().flatten() {
                let verdict = if c["passed"] == true { "pass" } else { "FAIL" };
                println!(
                    "{verdict} {:<36} measured {:.3e} tolerance {:.3e}",
                    c["name"].as_str().unwrap_or(""),
                    c["measured"].as_f64().unwrap_or(f64::NAN),
                    c["tolerance"].as_f64().unwrap_or(f64::NAN)
                );
            }
            finish(report, common, common.output.is_some())
        }
        Command::Dispersion => {
            let cfg = load(common)?;
            let out = common.out_dir();
            let out: &Path = &out;
            let report = pipeline::with_threads(common.threads, || pipeline::cmd_dispersion(&cfg, out))??;
            finish(report, common, true)
        }
        Command::Field => {
            let cfg = load(common)?;
            let out = common.out_dir();
            let out: &Path = &out;
            let report = pipeline::with_threads(common.threads, || pipeline::cmd_field(&cfg, out))??;
            if let Some(m) = report.json["samples"]["masked_fraction"].as_f64() {
                println!("masked fraction: {m:.4}");
            }
            finish(report, common, true)
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<igwave::Error>() {
        Some(e) if e.class() == ErrorClass::Numerical => EXIT_NUMERICAL,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(RunStatus::Success) => ExitCode::SUCCESS,
        Ok(RunStatus::Partial) => {
            eprintln!("partial result: more than half of the field samples are masked");
            ExitCode::from(EXIT_PARTIAL)
        }
        Ok(RunStatus::Failed) => {
            eprintln!("selftest failed");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
