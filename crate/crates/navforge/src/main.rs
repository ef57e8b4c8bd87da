//! `navforge`: train, evaluate, replay, and report on the planar
//! navigation suite.
//!
//! Exit codes: 0 success, 2 user/config error, 3 runtime fault.

use clap::{Args, Parser, Subcommand};
use navforge::config::{self, Overrides};
use navforge::error::{CliError, Result};
use navforge::manifest::RunManifest;
use navforge::run;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "navforge", version, about = "Planar multi-robot navigation RL suite")]
struct Cli {
    /// Worker threads for batch stepping (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRun {
    /// Robot registry name (floating_platform, kingfisher, turtlebot2).
    #[arg(long)]
    robot: Option<String>,
    /// Task registry name (goto_position, goto_pose, goto_position_obstacles,
    /// go_through_positions, track_velocities).
    #[arg(long)]
    task: Option<String>,
    /// TOML config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Global seed (falls back to the config file, then $NAVFORGE_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Parallel environments.
    #[arg(long)]
    num_envs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "runs/latest")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train a policy for one robot/task pair.
    Train {
        #[command(flatten)]
        common: CommonRun,
        /// Training epochs (PPO iterations).
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Evaluate a checkpoint with the deterministic policy.
    Eval {
        #[command(flatten)]
        common: CommonRun,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Episodes to evaluate.
        #[arg(long)]
        episodes: Option<usize>,
        /// Also dump a per-step trajectory CSV to this path.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Plot paths from a trajectory dump.
    Replay {
        #[arg(long)]
        trajectory: PathBuf,
        #[arg(long, default_value = "runs/latest")]
        out: PathBuf,
    },
    /// Combine evaluation summaries into a comparison table.
    Report {
        /// Directories containing summary.json files.
        #[arg(long = "eval-dirs", num_args = 1.., required = true)]
        eval_dirs: Vec<PathBuf>,
        #[arg(long, default_value = "runs/latest")]
        out: PathBuf,
    },
}

fn env_seed() -> Option<u64> {
    std::env::var("NAVFORGE_SEED").ok().and_then(|s| s.parse().ok())
}

fn prepare_out(out: &PathBuf) -> Result<()> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::Fault(format!("cannot create {}: {e}", out.display())))
}

fn resolve_common(common: &CommonRun, epochs: Option<usize>, episodes: Option<usize>) -> Result<(config::Resolved, Vec<PathBuf>)> {
    let file = match &common.config {
        Some(path) => config::load_file(path)?,
        None => config::FileConfig::default(),
    };
    let flags = Overrides {
        robot: common.robot.clone(),
        task: common.task.clone(),
        seed: common.seed,
        epochs,
        num_envs: common.num_envs,
        episodes,
    };
    let resolved = config::resolve(&file, &flags, env_seed())?;
    Ok((resolved, common.config.iter().cloned().collect()))
}

fn real_main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build_global()
            .map_err(|e| CliError::Fault(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Train { common, epochs } => {
            let (resolved, config_paths) = resolve_common(&common, epochs, None)?;
            prepare_out(&common.out)?;
            let mut manifest = RunManifest::new("train", config_paths, resolved.seed, &common.out);
            manifest.write(&common.out)?;
            let outcome = run::train(&resolved, &common.out)?;
            manifest.finish(&common.out)?;
            println!(
                "trained {}/{} for {} epochs (final mean reward {:.3}) -> {}",
                resolved.robot_name,
                resolved.task_name,
                resolved.epochs,
                outcome.final_mean_reward,
                outcome.checkpoint.display()
            );
        }
        Command::Eval { common, checkpoint, episodes, trajectory } => {
            let (mut resolved, mut config_paths) = resolve_from_checkpoint(&common, &checkpoint, episodes)?;
            config_paths.push(checkpoint.clone());
            prepare_out(&common.out)?;
            let mut manifest = RunManifest::new("eval", config_paths, resolved.seed, &common.out);
            manifest.write(&common.out)?;
            if let Some(e) = episodes {
                resolved.episodes = e;
            }
            let summary = run::eval(&resolved, &checkpoint, &common.out, trajectory.as_deref())?;
            manifest.finish(&common.out)?;
            println!(
                "evaluated {} episodes: success rate {:.3}, final distance {:.3} m",
                summary.episodes, summary.success_rate, summary.final_distance.mean
            );
        }
        Command::Replay { trajectory, out } => {
            prepare_out(&out)?;
            let mut manifest = RunManifest::new("replay", vec![trajectory.clone()], 0, &out);
            manifest.write(&out)?;
            let svg = run::replay(&trajectory, &out)?;
            manifest.finish(&out)?;
            println!("wrote {}", svg.display());
        }
        Command::Report { eval_dirs, out } => {
            prepare_out(&out)?;
            let mut manifest = RunManifest::new("report", eval_dirs.clone(), 0, &out);
            manifest.write(&out)?;
            let text = run::report_cmd(&eval_dirs, &out)?;
            manifest.finish(&out)?;
            print!("{text}");
        }
    }
    Ok(())
}

/// Eval can run without --robot/--task: they default to what the
/// checkpoint was trained for.
fn resolve_from_checkpoint(
    common: &CommonRun,
    checkpoint: &PathBuf,
    episodes: Option<usize>,
) -> Result<(config::Resolved, Vec<PathBuf>)> {
    let mut common_filled = CommonRun {
        robot: common.robot.clone(),
        task: common.task.clone(),
        config: common.config.clone(),
        seed: common.seed,
        num_envs: common.num_envs,
        out: common.out.clone(),
    };
    if common_filled.robot.is_none() || common_filled.task.is_none() {
        let header = navforge::checkpoint::load(checkpoint)?.header;
        common_filled.robot.get_or_insert(header.robot);
        common_filled.task.get_or_insert(header.task);
    }
    resolve_common(&common_filled, None, episodes)
}

fn main() {
    match real_main() {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
