use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kqpd::harness::{cmd_estimate, cmd_exact, cmd_reproduce_fig2, cmd_simulate, cmd_sweep, ExperimentConfig, Panel, RunManifest};
use kqpd::KqpdError;

/// Simulate weak measurements and estimate the quasi-probability functional K.
#[derive(Debug, Parser)]
#[command(name = "kqpd", version)]
struct Cli {
    /// TOML experiment configuration (required except for reproduce-*).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form K on a probe grid and along a strength curve.
    Exact,
    /// Sample and save measurement records.
    Simulate,
    /// Repeat-trial estimates of K at the configured probes.
    Estimate,
    /// Estimates and exact values across the strength list.
    Sweep,
    /// Canned position/momentum bundle (chi' = 5, c_o = 0.011, lambda_c = 10).
    #[command(name = "reproduce-fig2a")]
    ReproduceFig2a,
    /// Canned spin bundle (chi' = 3, c_o = 0.01, lambda_c = 12).
    #[command(name = "reproduce-fig2b")]
    ReproduceFig2b,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, KqpdError> {
    let path = cli.config.as_ref().ok_or_else(|| KqpdError::Config("--config <path> is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<RunManifest, KqpdError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(KqpdError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| KqpdError::Config(e.to_string()))?;
    }
    let out_or_default = || cli.out.clone().unwrap_or_else(|| PathBuf::from("kqpd-out"));
    match cli.command {
        Command::ReproduceFig2a => cmd_reproduce_fig2(Panel::A, cli.seed, &out_or_default()),
        Command::ReproduceFig2b => cmd_reproduce_fig2(Panel::B, cli.seed, &out_or_default()),
        _ => {
            let cfg = load_config(cli)?;
            let out = cfg.output_dir.clone();
            match cli.command {
                Command::Exact => cmd_exact(&cfg, &out),
                Command::Simulate => cmd_simulate(&cfg, &out),
                Command::Estimate => cmd_estimate(&cfg, &out),
                Command::Sweep => cmd_sweep(&cfg, &out),
                Command::ReproduceFig2a | Command::ReproduceFig2b => unreachable!(),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match run(&cli) {
        Ok(manifest) => {
            println!(
                "{}: {} files in {:.1} s",
                manifest.command,
                manifest.files.len(),
                manifest.wall_clock_seconds
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                KqpdError::Config(_) => ExitCode::from(2),
                e if e.is_numerical() => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
