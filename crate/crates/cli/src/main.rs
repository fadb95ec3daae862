//! `silcr` — train and probe self-imitation agents on the built-in
//! continuous-control environments.
//!
//! Subcommands: `train` runs one seeded training loop and leaves a metrics
//! file plus checkpoint; `eval` scores a checkpoint's deterministic policy;
//! `record-demos` saves its evaluation episodes as a demonstration file;
//! `ablate` sweeps expert-buffer capacities; `aggregate` folds per-seed
//! metrics files into a mean ± std curve.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use silcr_core::agents::TrainCheckpoint;
use silcr_core::harness::{
    aggregate_seeds, evaluate, population_stats, read_metrics, record_demos, render_aggregate,
    run_ablation, train,
};
use silcr_core::replay::write_demos;
use std::path::PathBuf;
use std::process::ExitCode;

mod settings;
use settings::{build_run_config, parse_capacities};

#[derive(Parser)]
#[command(
    name = "silcr",
    version,
    about = "Self-imitation learning with constant-reward relabeling, plus SAC and SQIL baselines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one seeded training loop and write metrics plus a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint's deterministic policy.
    Eval(EvalArgs),
    /// Record deterministic evaluation episodes to a demonstration file.
    RecordDemos(RecordDemosArgs),
    /// Rerun one configuration across several expert-buffer capacities.
    Ablate(AblateArgs),
    /// Fold per-seed metrics files into a mean ± std curve.
    Aggregate(AggregateArgs),
}

/// Flags mirror the run-configuration fields; anything not given falls back
/// to the config file, then to the built-in defaults.
#[derive(Args, Clone)]
pub(crate) struct TrainArgs {
    /// Flat `key = value` config file; explicit flags override its entries.
    #[arg(long)]
    pub(crate) config: Option<PathBuf>,
    /// Agent to train: silcr, sac, or sqil.
    #[arg(long)]
    pub(crate) agent: Option<String>,
    /// Environment: pointgoal, pendulum, or mountaincar.
    #[arg(long)]
    pub(crate) env: Option<String>,
    /// Deliver the summed reward only at episode end (true/false).
    #[arg(long)]
    pub(crate) episodic: Option<bool>,
    #[arg(long)]
    pub(crate) total_steps: Option<u64>,
    #[arg(long)]
    pub(crate) seed: Option<u64>,
    #[arg(long)]
    pub(crate) batch_size: Option<usize>,
    #[arg(long)]
    pub(crate) gamma: Option<f64>,
    #[arg(long)]
    pub(crate) tau: Option<f64>,
    #[arg(long)]
    pub(crate) alpha: Option<f64>,
    #[arg(long)]
    pub(crate) lr_actor: Option<f64>,
    #[arg(long)]
    pub(crate) lr_critic: Option<f64>,
    #[arg(long)]
    pub(crate) online_capacity: Option<usize>,
    #[arg(long)]
    pub(crate) expert_capacity: Option<usize>,
    /// Hidden layer widths, comma-separated (e.g. 800,400).
    #[arg(long)]
    pub(crate) hidden_dims: Option<String>,
    #[arg(long)]
    pub(crate) warmup_steps: Option<u64>,
    #[arg(long)]
    pub(crate) eval_interval: Option<u64>,
    #[arg(long)]
    pub(crate) eval_episodes: Option<u64>,
    /// Number of critics: 2 for clipped double-Q, 1 for a single critic.
    #[arg(long)]
    pub(crate) q_count: Option<usize>,
    /// Demonstration file recorded with record-demos (sqil only).
    #[arg(long, alias = "demo-path")]
    pub(crate) demos: Option<PathBuf>,
    /// Output directory; defaults to runs/<agent>-<env>-seed<seed>.
    #[arg(long, alias = "out-dir")]
    pub(crate) out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint written by train (final.ckpt).
    #[arg(long)]
    checkpoint: PathBuf,
    /// Environment to evaluate on.
    #[arg(long)]
    env: String,
    #[arg(long, default_value_t = 10)]
    episodes: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RecordDemosArgs {
    /// Checkpoint written by train (final.ckpt).
    #[arg(long)]
    checkpoint: PathBuf,
    /// Environment to roll out on.
    #[arg(long)]
    env: String,
    #[arg(long, default_value_t = 20)]
    episodes: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Demonstration file to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    #[command(flatten)]
    train: TrainArgs,
    /// Expert-buffer capacities to sweep, comma-separated.
    #[arg(long)]
    capacities: String,
}

#[derive(Args)]
struct AggregateArgs {
    /// Two or more metrics files from runs of the same configuration.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Write the curve here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            // One diagnostic line, naming the offending token.
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Train(args) => cmd_train(&args),
        Command::Eval(args) => cmd_eval(&args),
        Command::RecordDemos(args) => cmd_record_demos(&args),
        Command::Ablate(args) => cmd_ablate(&args),
        Command::Aggregate(args) => cmd_aggregate(&args),
    }
}

fn cmd_train(args: &TrainArgs) -> anyhow::Result<()> {
    let config = build_run_config(args)?;
    let mode = if config.episodic { " (episodic)" } else { "" };
    println!(
        "training {} on {}{} for {} steps, seed {}",
        config.agent, config.env, mode, config.total_steps, config.seed
    );
    let result = train(&config)?;
    match result.records.last() {
        Some(last) => println!(
            "final eval return {} at step {}",
            last.return_eval, last.env_step
        ),
        None => println!("no evaluation intervals elapsed"),
    }
    let out = config
        .out_dir
        .as_ref()
        .expect("the cli always sets an output directory");
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> anyhow::Result<()> {
    let checkpoint = TrainCheckpoint::load(&args.checkpoint)?;
    let summary = evaluate(&checkpoint.core, &args.env, args.episodes, args.seed)?;
    println!(
        "mean {} std {} over {} episodes",
        summary.mean, summary.std, args.episodes
    );
    Ok(())
}

fn cmd_record_demos(args: &RecordDemosArgs) -> anyhow::Result<()> {
    let checkpoint = TrainCheckpoint::load(&args.checkpoint)?;
    let demos = record_demos(&checkpoint.core, &args.env, args.episodes, args.seed)?;
    write_demos(&args.out, &demos)?;
    let returns: Vec<f64> = demos.iter().map(|t| t.episodic_return()).collect();
    let (mean, _) = population_stats(&returns);
    println!(
        "recorded {} demos to {} (mean return {})",
        demos.len(),
        args.out.display(),
        mean
    );
    Ok(())
}

fn cmd_ablate(args: &AblateArgs) -> anyhow::Result<()> {
    let base = build_run_config(&args.train)?;
    let capacities = parse_capacities(&args.capacities)?;
    let arms = run_ablation(&base, &capacities)?;
    println!("expert_capacity final_eval_return");
    for arm in &arms {
        let final_eval = arm
            .result
            .records
            .last()
            .map_or(f64::NAN, |r| r.return_eval);
        println!("{} {}", arm.expert_capacity, final_eval);
    }
    Ok(())
}

fn cmd_aggregate(args: &AggregateArgs) -> anyhow::Result<()> {
    let curve = aggregate_seeds(&args.files)?;
    let digest = read_metrics(&args.files[0])?.digest;
    let text = render_aggregate(digest, args.files.len(), &curve);
    match &args.out {
        Some(path) => {
            std::fs::write(path, text)
                .with_context(|| format!("cannot write {}", path.display()))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_cover_every_config_field() {
        use clap::CommandFactory;
        let command = Cli::command();
        let train = command
            .get_subcommands()
            .find(|c| c.get_name() == "train")
            .unwrap();
        let flags: Vec<String> = train
            .get_arguments()
            .map(|a| a.get_id().to_string())
            .collect();
        for expected in [
            "config",
            "agent",
            "env",
            "episodic",
            "total_steps",
            "seed",
            "batch_size",
            "gamma",
            "tau",
            "alpha",
            "lr_actor",
            "lr_critic",
            "online_capacity",
            "expert_capacity",
            "hidden_dims",
            "warmup_steps",
            "eval_interval",
            "eval_episodes",
            "q_count",
            "demos",
            "out",
        ] {
            assert!(flags.iter().any(|f| f == expected), "missing flag {expected}");
        }
    }

    #[test]
    fn argument_structure_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
