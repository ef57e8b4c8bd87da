//! Command implementations: training, evaluation, replay plotting, and
//! report assembly. The binary in `main.rs` is a thin argument layer over
//! these functions so integration tests can drive them directly.

use crate::checkpoint;
use crate::config::Resolved;
use crate::error::{write_err, CliError, Result};
use crate::report::{self, EvalSummary};
use crate::svg;
use crate::trainlog::TrainLog;
use crate::trajectory::{self, Row, Sidecar, TrajectoryWriter};
use navforge_core::envman::EnvBatch;
use navforge_core::metrics::{aggregate, EpisodeRecord};
use navforge_core::ppo::Trainer;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Serializable echo of the resolved run settings, embedded in
/// checkpoints, sidecars, and summaries.
pub fn config_echo(r: &Resolved) -> serde_json::Value {
    serde_json::json!({
        "robot": r.robot_name,
        "task": r.task_name,
        "seed": r.seed,
        "num_envs": r.num_envs,
        "epochs": r.epochs,
        "episodes": r.episodes,
        "physics_dt": r.env.physics_dt,
        "decimation": r.env.decimation,
        "max_episode_steps": r.env.max_episode_steps,
        "arena_radius": r.env.arena.radius,
        "spawn_radius": r.env.arena.spawn_radius,
        "hidden_sizes": r.ppo.hidden_sizes,
        "lr": r.ppo.lr,
        "gamma": r.ppo.gamma,
        "gae_lambda": r.ppo.gae_lambda,
        "kl_threshold": r.ppo.kl_threshold,
        "randomization_enabled": r.env.randomization.any_enabled(),
    })
}

pub struct TrainOutcome {
    pub checkpoint: PathBuf,
    pub final_mean_reward: f64,
}

/// Trains for `resolved.epochs` iterations, streaming the learning curve
/// to `curve.csv` and writing `checkpoint.bin` at the end. On a training
/// fault the current parameters are dumped to `checkpoint_fault.bin` and
/// the fault carries that path.
pub fn train(resolved: &Resolved, out_dir: &Path) -> Result<TrainOutcome> {
    let mut env = EnvBatch::new(resolved.env.clone(), resolved.num_envs, resolved.seed)?;
    let mut trainer = Trainer::new(resolved.ppo.clone(), &env, resolved.seed);
    let echo = config_echo(resolved);

    let curve_path = out_dir.join("curve.csv");
    let mut log = TrainLog::create(&curve_path)?;
    let start = Instant::now();
    let mut last_mean = 0.0;

    for warning in navforge_core::randomization::placeholder_warnings(&resolved.env.randomization) {
        eprintln!("warning: {warning}");
    }
    for epoch in 0..resolved.epochs {
        match trainer.train_iteration(&mut env) {
            Ok(stats) => {
                last_mean = stats.mean_reward;
                log.push(epoch, &stats, start.elapsed().as_secs_f64())?;
            }
            Err(e) => {
                let dump = out_dir.join("checkpoint_fault.bin");
                checkpoint::save(
                    &dump,
                    &trainer,
                    &resolved.robot_name,
                    &resolved.task_name,
                    echo.clone(),
                )?;
                return Err(CliError::Fault(format!(
                    "training failed at epoch {epoch}: {e}; parameters dumped to {}",
                    dump.display()
                )));
            }
        }
    }

    let ck_path = out_dir.join("checkpoint.bin");
    checkpoint::save(&ck_path, &trainer, &resolved.robot_name, &resolved.task_name, echo)?;

    let curve = crate::trainlog::read_curve(&curve_path)?;
    let svg_path = out_dir.join("learning_curve.svg");
    let title = format!("{} / {}", resolved.robot_name, resolved.task_name);
    std::fs::write(&svg_path, svg::learning_curve(&curve, &title))
        .map_err(|e| write_err(&svg_path, e))?;

    Ok(TrainOutcome { checkpoint: ck_path, final_mean_reward: last_mean })
}

fn episode_csv(records: &[EpisodeRecord], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| write_err(path, e))?;
    writeln!(
        f,
        "env,episode,length,return,success,early_termination,goals_reached,\
         final_distance,final_heading_error_deg,lin_vel_error,ang_vel_error_deg,\
         ctrl_variation,time_to_success"
    )
    .map_err(|e| write_err(path, e))?;
    let deg = 180.0 / std::f64::consts::PI;
    for r in records {
        writeln!(
            f,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.env_index,
            r.episode,
            r.length,
            r.return_sum,
            r.success as u8,
            r.early_termination as u8,
            r.goals_reached,
            r.final_distance,
            r.final_heading_error * deg,
            r.mean_lin_vel_error,
            r.mean_ang_vel_error * deg,
            r.ctrl_variation,
            r.time_to_success.map_or(String::from(""), |t| t.to_string()),
        )
        .map_err(|e| write_err(path, e))?;
    }
    Ok(())
}

/// Deterministic-policy evaluation of `episodes` episodes; writes
/// `episodes.csv` and `summary.json`, plus a trajectory dump when
/// `trajectory` is set.
pub fn eval(
    resolved: &Resolved,
    checkpoint_path: &Path,
    out_dir: &Path,
    trajectory: Option<&Path>,
) -> Result<EvalSummary> {
    let mut env = EnvBatch::new(resolved.env.clone(), resolved.num_envs, resolved.seed)?;
    let trainer = checkpoint::load(checkpoint_path)?.into_trainer(&env)?;
    if !env.recorder.is_attached() {
        env.recorder.attach()?;
    }

    let mut traj = match trajectory {
        Some(p) => Some(TrajectoryWriter::create(p, env.action_dim())?),
        None => None,
    };
    let mut seen_goals: Vec<[f64; 3]> = Vec::new();
    let mut seen_obstacles: Vec<[f64; 3]> = Vec::new();
    let note_goals = |env: &EnvBatch, seen: &mut Vec<[f64; 3]>| {
        if traj_goal_capacity(seen) {
            for g in env.goals() {
                seen.push([g.x, g.y, g.yaw]);
            }
        }
    };
    note_goals(&env, &mut seen_goals);
    for i in 0..env.num_envs() {
        for &(c, r) in env.obstacles(i) {
            if seen_obstacles.len() < 512 {
                seen_obstacles.push([c[0], c[1], r]);
            }
        }
    }

    let mut records: Vec<EpisodeRecord> = Vec::new();
    let mut t_wall = 0usize;
    let max_steps = resolved.env.max_episode_steps;
    let step_budget = (resolved.episodes / env.num_envs() + 2) * max_steps;
    while records.len() < resolved.episodes && t_wall < step_budget {
        let obs = env.observations();
        let actions = trainer.act_deterministic(&obs, env.num_envs());
        let result = env.step(&actions)?;
        if let Some(w) = traj.as_mut() {
            let states = env.states();
            let ad = env.action_dim();
            for (i, st) in states.iter().enumerate() {
                let mut events = Vec::new();
                if result.terminated[i] {
                    events.push("terminated");
                }
                if result.truncated[i] {
                    events.push("truncated");
                }
                if result.success[i] {
                    events.push("success");
                }
                w.push(&Row {
                    env: i,
                    t: t_wall,
                    x: st.pose.x,
                    y: st.pose.y,
                    yaw: st.pose.yaw,
                    vx: st.twist.vx,
                    vy: st.twist.vy,
                    omega: st.twist.omega,
                    actions: actions[i * ad..(i + 1) * ad].to_vec(),
                    reward: result.rewards[i],
                    events: events.join(";"),
                })?;
            }
        }
        if !result.finished.is_empty() {
            note_goals(&env, &mut seen_goals);
        }
        records.extend(env.recorder.drain());
        t_wall += 1;
    }
    records.truncate(resolved.episodes);
    if records.is_empty() {
        return Err(CliError::Fault("no episodes finished within the step budget".into()));
    }

    let echo = config_echo(resolved);
    if let Some(w) = traj {
        w.finish(&Sidecar {
            robot: resolved.robot_name.clone(),
            task: resolved.task_name.clone(),
            arena_radius: resolved.env.arena.radius,
            num_envs: resolved.num_envs,
            action_dim: resolved.env.action_dim(),
            goals: seen_goals,
            obstacles: seen_obstacles,
            config: echo.clone(),
        })?;
    }

    episode_csv(&records, &out_dir.join("episodes.csv"))?;
    let agg = aggregate(&records)?;
    let summary = EvalSummary::from_aggregate(
        &resolved.robot_name,
        &resolved.task_name,
        resolved.seed,
        &agg,
        echo,
    );
    let path = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Fault(format!("summary encode: {e}")))?;
    std::fs::write(&path, text).map_err(|e| write_err(&path, e))?;
    Ok(summary)
}

fn traj_goal_capacity(seen: &[[f64; 3]]) -> bool {
    seen.len() < 512
}

/// Renders `paths.svg` from a trajectory dump. Paths are split at episode
/// boundaries (terminated/truncated events) so each episode gets its own
/// polyline color.
pub fn replay(trajectory_path: &Path, out_dir: &Path) -> Result<PathBuf> {
    let rows = trajectory::read(trajectory_path)?;
    let sidecar = trajectory::read_sidecar(trajectory_path)?;

    let mut per_env: std::collections::BTreeMap<usize, Vec<&Row>> = Default::default();
    for row in &rows {
        per_env.entry(row.env).or_default().push(row);
    }
    let mut paths: Vec<Vec<(f64, f64)>> = Vec::new();
    for (_, rows) in per_env {
        let mut current = Vec::new();
        for row in rows {
            current.push((row.x, row.y));
            let done = row.events.split(';').any(|e| e == "terminated" || e == "truncated");
            if done {
                paths.push(std::mem::take(&mut current));
            }
        }
        if !current.is_empty() {
            paths.push(current);
        }
    }

    let (arena_radius, goals, obstacles, title) = match &sidecar {
        Some(s) => (
            s.arena_radius,
            s.goals.iter().map(|g| (g[0], g[1])).collect::<Vec<_>>(),
            s.obstacles.iter().map(|o| (o[0], o[1], o[2])).collect::<Vec<_>>(),
            format!("{} / {}", s.robot, s.task),
        ),
        None => {
            let r = rows
                .iter()
                .map(|r| r.x.hypot(r.y))
                .fold(1.0f64, f64::max);
            (r * 1.05, Vec::new(), Vec::new(), "trajectories".to_string())
        }
    };

    let svg_text = svg::path_plot(arena_radius, &paths, &goals, &obstacles, &title);
    let out = out_dir.join("paths.svg");
    std::fs::write(&out, svg_text).map_err(|e| write_err(&out, e))?;
    Ok(out)
}

/// Builds the comparison report from evaluation directories; writes
/// `report.txt` and `report.json` and returns the rendered text.
pub fn report_cmd(eval_dirs: &[PathBuf], out_dir: &Path) -> Result<String> {
    let summaries: Vec<EvalSummary> = eval_dirs
        .iter()
        .map(|d| report::read_summary(d))
        .collect::<Result<_>>()?;
    let (text, json) = report::render(&summaries)?;
    let txt_path = out_dir.join("report.txt");
    std::fs::write(&txt_path, &text).map_err(|e| write_err(&txt_path, e))?;
    let json_path = out_dir.join("report.json");
    std::fs::write(
        &json_path,
        serde_json::to_string_pretty(&json)
            .map_err(|e| CliError::Fault(format!("report encode: {e}")))?,
    )
    .map_err(|e| write_err(&json_path, e))?;
    Ok(text)
}
