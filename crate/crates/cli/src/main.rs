use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use g2p::harness::{self, parse_overrides, ExperimentConfig};
use g2p::Error;

/// Babbling, inverse-map learning and limit-cycle search on a simulated
/// tendon-driven limb.
#[derive(Parser)]
#[command(name = "g2p", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Configuration file of `section.key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (same as `--run.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (same as `--run.out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replicate count (same as `--run.replicates`).
    #[arg(long)]
    replicates: Option<usize>,
    /// `section.key=value` assignment; repeatable. Any configuration key
    /// can also be given directly as `--section.key value`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Five minutes of motor babbling in the air.
    Babble(Common),
    /// Treadmill locomotion runs.
    Locomotion {
        /// Calibrate the reward threshold before the runs.
        #[arg(long)]
        calibrate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Repeated refinement on one fixed trajectory in the air.
    TrackFixed(Common),
    /// Refined versus babble-only maps on unseen trajectories.
    TrackGeneral(Common),
    /// Maximum downward force over the stroke postures.
    Feasibility(Common),
    /// Set the reward threshold from random probe attempts.
    CalibrateThreshold(Common),
    /// Cross-run statistics over locomotion run directories.
    Summarize {
        /// Run directories, each holding a `run_summary.json`.
        #[arg(required = true)]
        dirs: Vec<PathBuf>,
        /// Where to write `summary.json`.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

/// Pull `--section.key value` and `--section.key=value` out of the raw
/// arguments; clap sees the rest.
fn split_dotted(args: Vec<String>) -> (Vec<String>, Vec<String>) {
    let mut rest = Vec::new();
    let mut dotted = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let name = arg.strip_prefix("--").map(|b| b.split('=').next().unwrap_or(b));
        if name.is_some_and(|n| n.contains('.')) {
            let has_value = arg.contains('=');
            dotted.push(arg);
            if !has_value {
                dotted.extend(it.next());
            }
        } else {
            rest.push(arg);
        }
    }
    (rest, dotted)
}

fn build_config(c: &Common, dotted: &[String]) -> g2p::Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    for (k, v) in parse_overrides(dotted)? {
        cfg.set(&k, &v)?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    if let Some(r) = c.replicates {
        cfg.replicates = Some(r);
    }
    Ok(cfg)
}

fn print_json<T: serde::Serialize>(value: &T) -> g2p::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn run(cli: Cli, dotted: &[String]) -> g2p::Result<()> {
    match cli.command {
        Command::Babble(c) => print_json(&harness::cmd_babble(&build_config(&c, dotted)?)?),
        Command::Locomotion { calibrate, common } => {
            let s = harness::cmd_locomotion(&build_config(&common, dotted)?, calibrate)?;
            print_json(&serde_json::json!({
                "runs": s.runs.len(),
                "crossed_runs": s.crossed_runs,
                "crossing_attempt": s.crossing_attempt,
                "best_reward_mm": s.best_reward_mm,
                "exploitation_improvement_mm": s.exploitation_improvement_mm,
            }))
        }
        Command::TrackFixed(c) => {
            let s = harness::cmd_track_fixed(&build_config(&c, dotted)?)?;
            print_json(&serde_json::json!({
                "median_mse": s.median_mse,
                "improved_replicates": s.improved_replicates,
                "replicates": s.replicates.len(),
            }))
        }
        Command::TrackGeneral(c) => print_json(&harness::cmd_track_general(&build_config(&c, dotted)?)?),
        Command::Feasibility(c) => print_json(&harness::cmd_feasibility(&build_config(&c, dotted)?)?),
        Command::CalibrateThreshold(c) => {
            let (_, cal) = harness::cmd_calibrate_threshold(&build_config(&c, dotted)?)?;
            print_json(&serde_json::json!({ "threshold_mm": cal.threshold_mm, "percentile": cal.percentile }))
        }
        Command::Summarize { dirs, out } => print_json(&harness::cmd_summarize(&dirs, &out)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (rest, dotted) = split_dotted(std::env::args().collect());
    match run(Cli::parse_from(rest), &dotted) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
