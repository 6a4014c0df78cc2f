use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod report;

use commands::{CliError, Outcome};
use config::{ExperimentConfig, RawConfig};

#[derive(Parser)]
#[command(name = "sphere-approx", version, about = "Counting rational approximations on spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One CSV row per (alpha, c, T).
    Count,
    /// Growth slopes of the counts in T, per target and aggregated.
    Sweep,
    /// Fraction of solutions per direction set.
    Spiral,
    /// Cone-measure volumes of E and F.
    Volume,
    /// Orbit integrals and their chain inequalities.
    Orbit,
    /// Estimate kappa from counts.
    Calibrate,
    /// Deterministic invariant suite; exits 1 on any failure.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Comma-separated qualities.
    #[arg(long, global = true)]
    c: Option<String>,
    /// Comma-separated increasing times.
    #[arg(long = "T", global = true)]
    t: Option<String>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Record wall-clock time per count row.
    #[arg(long, global = true)]
    timing: bool,
    /// Any other configuration key, as KEY=VALUE.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut raw = match &common.config {
        Some(p) => RawConfig::load(p)?,
        None => RawConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| config::ConfigError::Value {
            key: kv.clone(),
            msg: "expected KEY=VALUE".into(),
        })?;
        raw.set(k.trim(), v.trim())?;
    }
    let flags = [
        ("seed", common.seed.map(|s| s.to_string())),
        ("out", common.out.as_ref().map(|p| p.display().to_string())),
        ("n", common.n.map(|n| n.to_string())),
        ("c", common.c.clone()),
        ("T", common.t.clone()),
        ("threads", common.threads.map(|t| t.to_string())),
        ("timing", common.timing.then(|| "true".to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            raw.set(k, &v)?;
        }
    }
    Ok(ExperimentConfig::from_raw(&raw)?)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(&cli.common)?;
    if let Some(t) = cfg.threads {
        // a second initialization only happens in tests; keep the existing pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let Outcome { report, violation } = match cli.command {
        Command::Count => commands::count(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Spiral => commands::spiral(&cfg)?,
        Command::Volume => commands::volume(&cfg)?,
        Command::Orbit => commands::orbit(&cfg)?,
        Command::Calibrate => commands::calibrate(&cfg)?,
        Command::Selftest => commands::selftest(&cfg)?,
    };
    report.write(&cfg, cfg.output_path.as_deref())?;
    Ok(violation)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: invariant violation (see report)");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
