//! TOML run configuration with three-way layering: built-in defaults,
//! then the config file, then command-line flags.
//!
//! Built-in defaults reproduce the published training setup, so a bare
//! `train --robot turtlebot2 --task goto_position` needs no file at all.

use crate::error::{read_err, CliError, Result};
use navforge_core::envman::EnvConfig;
use navforge_core::ppo::PpoConfig;
use navforge_core::randomization::{
    parse_mode, ComMode, InertiaMode, MassMode, NoiseMode, RandomizationConfig, WrenchMode,
};
use navforge_core::robots::RobotKind;
use serde::Deserialize;
use std::path::Path;

pub const DEFAULT_EPOCHS: usize = 3200;
pub const DEFAULT_NUM_ENVS: usize = 1024;
pub const DEFAULT_EVAL_EPISODES: usize = 4096;

/// On-disk schema. Every field is optional; absent fields keep the
/// built-in defaults for the selected robot/task pair.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub robot: Option<String>,
    pub task: Option<String>,
    pub num_envs: Option<usize>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub episodes: Option<usize>,
    /// Physics step [s].
    pub dt: Option<f64>,
    pub decimation: Option<usize>,
    pub max_episode_steps: Option<usize>,
    pub allow_incompatible: Option<bool>,
    #[serde(default)]
    pub arena: ArenaSection,
    #[serde(default)]
    pub thresholds: ThresholdsSection,
    #[serde(default)]
    pub reward: RewardSection,
    #[serde(default)]
    pub task_params: TaskSection,
    #[serde(default)]
    pub ppo: PpoSection,
    #[serde(default)]
    pub randomization: RandSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaSection {
    pub radius: Option<f64>,
    pub spawn_radius: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdsSection {
    pub eps_p: Option<f64>,
    pub eps_theta: Option<f64>,
    pub eps_tp: Option<f64>,
    pub eps_v: Option<f64>,
    pub eps_w: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardSection {
    pub w_pos: Option<f64>,
    pub w_head: Option<f64>,
    pub w_pose_align: Option<f64>,
    pub w_lin_vel: Option<f64>,
    pub w_ang_vel: Option<f64>,
    pub w_lin_vel_err: Option<f64>,
    pub w_ang_vel_err: Option<f64>,
    pub w_progress: Option<f64>,
    pub w_boundary: Option<f64>,
    pub w_goal_bonus: Option<f64>,
    pub lambda_dist: Option<f64>,
    pub lambda_head: Option<f64>,
    pub lambda_bnd: Option<f64>,
    pub lambda_vel: Option<f64>,
    pub lin_vel_clip: Option<f64>,
    pub ang_vel_clip: Option<f64>,
    pub exp_vel_form: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSection {
    pub hold_window: Option<usize>,
    pub endpoint_success: Option<bool>,
    pub min_goals_for_success: Option<usize>,
    pub future_goal_count: Option<usize>,
    pub num_waypoints: Option<usize>,
    pub waypoint_dist: Option<(f64, f64)>,
    pub vref_bounds: Option<(f64, f64)>,
    pub vref_resample: Option<(f64, f64)>,
    pub vref_ramp: Option<f64>,
    pub num_obstacles: Option<usize>,
    pub obstacle_radius: Option<(f64, f64)>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PpoSection {
    pub rollout_steps: Option<usize>,
    pub epochs: Option<usize>,
    pub minibatches: Option<usize>,
    pub gamma: Option<f64>,
    pub gae_lambda: Option<f64>,
    pub lr: Option<f64>,
    pub kl_threshold: Option<f64>,
    pub ratio_clip: Option<f64>,
    pub value_clip: Option<f64>,
    pub value_loss_coef: Option<f64>,
    pub entropy_coef: Option<f64>,
    pub grad_norm_clip: Option<f64>,
    pub normalize_advantages: Option<bool>,
    pub hidden_sizes: Option<Vec<usize>>,
}

/// Domain-randomization overrides. The baseline is the selected robot's
/// published randomization setup; `enable = false` switches everything off.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandSection {
    pub enable: Option<bool>,
    #[serde(default)]
    pub mass: MassSection,
    #[serde(default)]
    pub com: ComSection,
    #[serde(default)]
    pub inertia: InertiaSection,
    #[serde(default)]
    pub actions: NoiseSection,
    #[serde(default)]
    pub rescaler: RescalerSection,
    #[serde(default)]
    pub observations: ObsNoiseSection,
    #[serde(default)]
    pub wrench: WrenchSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassSection {
    pub enable: Option<bool>,
    pub randomization_modes: Option<Vec<String>>,
    pub max_delta: Option<f64>,
    pub std: Option<f64>,
    pub mass_change_rate: Option<f64>,
    pub mass_floor: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComSection {
    pub enable: Option<bool>,
    pub randomization_modes: Option<Vec<String>>,
    pub max_delta: Option<f64>,
    pub std: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InertiaSection {
    pub enable: Option<bool>,
    pub randomization_modes: Option<Vec<String>>,
    pub max_delta: Option<f64>,
    pub std: Option<f64>,
    pub decay_rate: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub enable: Option<bool>,
    pub randomization_modes: Option<Vec<String>>,
    pub slices: Option<Vec<(usize, usize)>>,
    pub max_delta: Option<Vec<f64>>,
    pub clip_actions: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescalerSection {
    pub enable: Option<bool>,
    pub slices: Option<Vec<(usize, usize)>>,
    pub rescaling_ranges: Option<Vec<(f64, f64)>>,
    pub clip_actions: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObsNoiseSection {
    pub enable: Option<bool>,
    pub randomization_modes: Option<Vec<String>>,
    pub slices: Option<Vec<(usize, usize)>>,
    pub max_delta: Option<Vec<f64>>,
    pub renormalize_angle_pairs: Option<bool>,
    pub per_step_draws: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WrenchSection {
    pub enable: Option<bool>,
    pub randomization_modes: Option<Vec<String>>,
    pub uniform_force: Option<(f64, f64)>,
    pub uniform_torque: Option<(f64, f64)>,
    pub normal_force_std: Option<f64>,
    pub normal_torque_std: Option<f64>,
    pub push_interval: Option<usize>,
    pub frequency_range: Option<(f64, f64)>,
}

/// Command-line overrides, the highest-priority layer.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub robot: Option<String>,
    pub task: Option<String>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub num_envs: Option<usize>,
    pub episodes: Option<usize>,
}

/// Fully layered run settings.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub env: EnvConfig,
    pub ppo: PpoConfig,
    pub robot_name: String,
    pub task_name: String,
    pub num_envs: usize,
    pub seed: u64,
    pub epochs: usize,
    pub episodes: usize,
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| read_err(path, e))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

fn default_randomization(robot: RobotKind) -> RandomizationConfig {
    match robot {
        RobotKind::FloatingPlatform => RandomizationConfig::floating_platform_defaults(),
        RobotKind::Kingfisher => RandomizationConfig::kingfisher_defaults(),
        RobotKind::Turtlebot2 => RandomizationConfig::turtlebot2_defaults(),
    }
}

fn modes<T: navforge_core::randomization::ModeName>(
    names: &Option<Vec<String>>,
    current: Vec<T>,
) -> Result<Vec<T>> {
    match names {
        None => Ok(current),
        Some(list) => list
            .iter()
            .map(|n| parse_mode::<T>(n).map_err(CliError::from))
            .collect(),
    }
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

fn apply_randomization(
    base: &mut RandomizationConfig,
    sec: &RandSection,
) -> Result<()> {
    if sec.enable == Some(false) {
        *base = RandomizationConfig::disabled();
    }
    let m = &sec.mass;
    base.mass.modes = modes::<MassMode>(&m.randomization_modes, std::mem::take(&mut base.mass.modes))?;
    set!(base.mass.enable, m.enable);
    set!(base.mass.max_delta, m.max_delta);
    set!(base.mass.std, m.std);
    set!(base.mass.mass_change_rate, m.mass_change_rate);
    set!(base.mass.mass_floor, m.mass_floor);

    let c = &sec.com;
    base.com.modes = modes::<ComMode>(&c.randomization_modes, std::mem::take(&mut base.com.modes))?;
    set!(base.com.enable, c.enable);
    set!(base.com.max_delta, c.max_delta);
    set!(base.com.std, c.std);

    let i = &sec.inertia;
    base.inertia.modes =
        modes::<InertiaMode>(&i.randomization_modes, std::mem::take(&mut base.inertia.modes))?;
    set!(base.inertia.enable, i.enable);
    set!(base.inertia.max_delta, i.max_delta);
    set!(base.inertia.std, i.std);
    if i.decay_rate.is_some() {
        base.inertia.decay_rate = i.decay_rate;
    }

    let a = &sec.actions;
    base.actions.modes =
        modes::<NoiseMode>(&a.randomization_modes, std::mem::take(&mut base.actions.modes))?;
    set!(base.actions.enable, a.enable);
    set!(base.actions.slices, a.slices.clone());
    set!(base.actions.max_delta, a.max_delta.clone());
    set!(base.actions.clip_actions, a.clip_actions.clone());

    let r = &sec.rescaler;
    set!(base.rescaler.enable, r.enable);
    set!(base.rescaler.slices, r.slices.clone());
    set!(base.rescaler.rescaling_ranges, r.rescaling_ranges.clone());
    set!(base.rescaler.clip_actions, r.clip_actions.clone());

    let o = &sec.observations;
    base.observations.modes =
        modes::<NoiseMode>(&o.randomization_modes, std::mem::take(&mut base.observations.modes))?;
    set!(base.observations.enable, o.enable);
    set!(base.observations.slices, o.slices.clone());
    set!(base.observations.max_delta, o.max_delta.clone());
    set!(base.observations.renormalize_angle_pairs, o.renormalize_angle_pairs);
    set!(base.observations.per_step_draws, o.per_step_draws);

    let w = &sec.wrench;
    base.wrench.modes =
        modes::<WrenchMode>(&w.randomization_modes, std::mem::take(&mut base.wrench.modes))?;
    set!(base.wrench.enable, w.enable);
    set!(base.wrench.uniform_force, w.uniform_force);
    set!(base.wrench.uniform_torque, w.uniform_torque);
    set!(base.wrench.normal_force_std, w.normal_force_std);
    set!(base.wrench.normal_torque_std, w.normal_torque_std);
    set!(base.wrench.push_interval, w.push_interval);
    set!(base.wrench.frequency_range, w.frequency_range);
    Ok(())
}

/// Layers defaults < `file` < `flags` into one resolved configuration.
///
/// `env_seed` is the NAVFORGE_SEED fallback, consulted only when neither
/// the flag nor the file provides a seed.
pub fn resolve(
    file: &FileConfig,
    flags: &Overrides,
    env_seed: Option<u64>,
) -> Result<Resolved> {
    let robot_name = flags
        .robot
        .clone()
        .or_else(|| file.robot.clone())
        .ok_or_else(|| CliError::Usage("no robot selected (use --robot or the config file)".into()))?;
    let task_name = flags
        .task
        .clone()
        .or_else(|| file.task.clone())
        .ok_or_else(|| CliError::Usage("no task selected (use --task or the config file)".into()))?;

    let mut env = EnvConfig::new(&robot_name, &task_name)?;
    env.randomization = default_randomization(env.robot.kind);

    set!(env.physics_dt, file.dt);
    set!(env.decimation, file.decimation);
    set!(env.max_episode_steps, file.max_episode_steps);
    set!(env.allow_incompatible, file.allow_incompatible);
    set!(env.arena.radius, file.arena.radius);
    set!(env.arena.spawn_radius, file.arena.spawn_radius);

    let th = &file.thresholds;
    set!(env.task.thresholds.eps_p, th.eps_p);
    set!(env.task.thresholds.eps_theta, th.eps_theta);
    set!(env.task.thresholds.eps_tp, th.eps_tp);
    set!(env.task.thresholds.eps_v, th.eps_v);
    set!(env.task.thresholds.eps_w, th.eps_w);

    let rw = &file.reward;
    set!(env.task.reward.w_pos, rw.w_pos);
    set!(env.task.reward.w_head, rw.w_head);
    set!(env.task.reward.w_pose_align, rw.w_pose_align);
    set!(env.task.reward.w_lin_vel, rw.w_lin_vel);
    set!(env.task.reward.w_ang_vel, rw.w_ang_vel);
    set!(env.task.reward.w_lin_vel_err, rw.w_lin_vel_err);
    set!(env.task.reward.w_ang_vel_err, rw.w_ang_vel_err);
    set!(env.task.reward.w_progress, rw.w_progress);
    set!(env.task.reward.w_boundary, rw.w_boundary);
    set!(env.task.reward.w_goal_bonus, rw.w_goal_bonus);
    set!(env.task.reward.lambda_dist, rw.lambda_dist);
    set!(env.task.reward.lambda_head, rw.lambda_head);
    set!(env.task.reward.lambda_bnd, rw.lambda_bnd);
    set!(env.task.reward.lambda_vel, rw.lambda_vel);
    set!(env.task.reward.lin_vel_clip, rw.lin_vel_clip);
    set!(env.task.reward.ang_vel_clip, rw.ang_vel_clip);
    set!(env.task.reward.exp_vel_form, rw.exp_vel_form);

    let tp = &file.task_params;
    set!(env.task.hold_window, tp.hold_window);
    set!(env.task.endpoint_success, tp.endpoint_success);
    set!(env.task.min_goals_for_success, tp.min_goals_for_success);
    set!(env.task.future_goal_count, tp.future_goal_count);
    set!(env.task.num_waypoints, tp.num_waypoints);
    set!(env.task.waypoint_dist, tp.waypoint_dist);
    set!(env.task.vref_bounds, tp.vref_bounds);
    set!(env.task.vref_resample, tp.vref_resample);
    set!(env.task.vref_ramp, tp.vref_ramp);
    set!(env.task.num_obstacles, tp.num_obstacles);
    set!(env.task.obstacle_radius, tp.obstacle_radius);

    apply_randomization(&mut env.randomization, &file.randomization)?;

    let mut ppo = PpoConfig::default();
    let ps = &file.ppo;
    set!(ppo.rollout_steps, ps.rollout_steps);
    set!(ppo.epochs, ps.epochs);
    set!(ppo.minibatches, ps.minibatches);
    set!(ppo.gamma, ps.gamma);
    set!(ppo.gae_lambda, ps.gae_lambda);
    set!(ppo.lr, ps.lr);
    set!(ppo.kl_threshold, ps.kl_threshold);
    set!(ppo.ratio_clip, ps.ratio_clip);
    set!(ppo.value_clip, ps.value_clip);
    set!(ppo.value_loss_coef, ps.value_loss_coef);
    set!(ppo.entropy_coef, ps.entropy_coef);
    set!(ppo.grad_norm_clip, ps.grad_norm_clip);
    set!(ppo.normalize_advantages, ps.normalize_advantages);
    set!(ppo.hidden_sizes, ps.hidden_sizes.clone());

    let resolved = Resolved {
        num_envs: flags.num_envs.or(file.num_envs).unwrap_or(DEFAULT_NUM_ENVS),
        seed: flags.seed.or(file.seed).or(env_seed).unwrap_or(0),
        epochs: flags.epochs.or(file.epochs).unwrap_or(DEFAULT_EPOCHS),
        episodes: flags
            .episodes
            .or(file.episodes)
            .unwrap_or(DEFAULT_EVAL_EPISODES),
        robot_name,
        task_name,
        env,
        ppo,
    };
    resolved.env.check_compatibility()?;
    Ok(resolved)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve_str(text: &str, flags: &Overrides, env_seed: Option<u64>) -> Result<Resolved> {
        let file: FileConfig = toml::from_str(text).map_err(|e| CliError::Usage(e.to_string()))?;
        resolve(&file, flags, env_seed)
    }

    #[test]
    fn bare_flags_reproduce_paper_defaults() {
        let flags = Overrides {
            robot: Some("turtlebot2".into()),
            task: Some("goto_position".into()),
            ..Default::default()
        };
        let r = resolve(&FileConfig::default(), &flags, None).unwrap();
        assert_eq!(r.num_envs, 1024);
        assert_eq!(r.epochs, 3200);
        assert_eq!(r.ppo.lr, 5e-4);
        assert_eq!(r.ppo.kl_threshold, 0.008);
        assert_eq!(r.env.max_episode_steps, 300);
        assert!(r.env.randomization.mass.enable);
        assert_eq!(r.env.randomization.mass.max_delta, 0.1);
    }

    #[test]
    fn file_overrides_defaults_and_flags_override_file() {
        let text = r#"
            robot = "kingfisher"
            task = "goto_position"
            seed = 7
            num_envs = 16

            [ppo]
            lr = 1e-3
            hidden_sizes = [64, 64]

            [randomization.wrench]
            uniform_force = [0.0, 0.5]
        "#;
        let flags = Overrides { seed: Some(9), ..Default::default() };
        let r = resolve_str(text, &flags, Some(3)).unwrap();
        assert_eq!(r.seed, 9, "flag beats file and env var");
        assert_eq!(r.num_envs, 16);
        assert_eq!(r.ppo.lr, 1e-3);
        assert_eq!(r.ppo.hidden_sizes, vec![64, 64]);
        assert_eq!(r.env.randomization.wrench.uniform_force, (0.0, 0.5));
        // untouched fields keep the robot's published randomization setup
        assert_eq!(r.env.randomization.wrench.uniform_torque, (0.0, 0.05));
    }

    #[test]
    fn env_var_seed_is_a_fallback_only() {
        let flags = Overrides {
            robot: Some("turtlebot2".into()),
            task: Some("goto_position".into()),
            ..Default::default()
        };
        let r = resolve(&FileConfig::default(), &flags, Some(11)).unwrap();
        assert_eq!(r.seed, 11);
    }

    #[test]
    fn unknown_names_are_rejected() {
        let flags = Overrides {
            robot: Some("roomba".into()),
            task: Some("goto_position".into()),
            ..Default::default()
        };
        assert!(resolve(&FileConfig::default(), &flags, None).is_err());

        let bad_mode = r#"
            robot = "turtlebot2"
            task = "goto_position"
            [randomization.mass]
            randomization_modes = ["lognormal"]
        "#;
        assert!(resolve_str(bad_mode, &Overrides::default(), None).is_err());

        let typo = "robot = \"turtlebot2\"\ntask = \"goto_position\"\nnum_env = 4\n";
        assert!(resolve_str(typo, &Overrides::default(), None).is_err());
    }

    #[test]
    fn master_switch_disables_all_randomization() {
        let text = r#"
            robot = "turtlebot2"
            task = "goto_position"
            [randomization]
            enable = false
        "#;
        let r = resolve_str(text, &Overrides::default(), None).unwrap();
        assert!(!r.env.randomization.any_enabled());
    }
}
