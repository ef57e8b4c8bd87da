//! Vectorized environment manager.
//!
//! An [`EnvBatch`] owns N independent environment slots sharing one robot,
//! task, arena, and randomization configuration. Each control step processes
//! the policy action, applies action randomization, runs `decimation` physics
//! substeps with the disturbance wrench, computes the reward and termination
//! flags, perturbs the observation, and auto-resets finished slots. All
//! randomness is addressed by `(global_seed, env_index, episode, stream)`, so
//! a slot's trajectory is bit-identical whether it is stepped alone or inside
//! a larger batch.

use crate::error::{Error, Result};
use crate::math;
use crate::metrics::{EpisodeAccumulator, EpisodeRecord, Recorder};
use crate::planar::{integrate_step, normalize_angle, PlanarState, Pose2, PI};
use crate::randomization::{self, RandomizationConfig, RandomizationPlan};
use crate::rng::{StreamId, StreamRng};
use crate::robots::{
    apply_actions, enforce_constraints, process_actions, registry_listing, robot_get_dones,
    robot_shaping_reward, ActuatorState, ProcessedAction, RobotKind, RobotSpec,
};
use crate::tasks::{
    advance_velocity_reference, build_observation, compute_reward, sample_goals, task_get_dones,
    ArenaSpec, TaskConfig, TaskKind, TaskState,
};
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

/// Whether a robot-task pair is enabled. The surface vessel cannot hold a
/// commanded pose without station-keeping actuation, so that pair is off by
/// default.
pub fn pair_enabled(robot: RobotKind, task: TaskKind) -> bool {
    !(robot == RobotKind::Kingfisher && task == TaskKind::GoToPose)
}

/// Static configuration shared by every slot in a batch.
#[derive(Clone, Debug)]
pub struct EnvConfig {
    pub robot: RobotSpec,
    pub task: TaskConfig,
    pub arena: ArenaSpec,
    pub randomization: RandomizationConfig,
    /// Physics substep [s].
    pub physics_dt: f64,
    /// Physics substeps per control step.
    pub decimation: usize,
    /// Control steps per episode.
    pub max_episode_steps: usize,
    /// Bypass the compatibility matrix.
    pub allow_incompatible: bool,
}

impl EnvConfig {
    /// Builds a configuration from registry names, rejecting unknown names
    /// and disabled pairs.
    pub fn new(robot_name: &str, task_name: &str) -> Result<Self> {
        let robot = RobotSpec::by_name(robot_name).ok_or_else(|| Error::Registry {
            name: robot_name.to_string(),
            available: registry_listing(),
        })?;
        let task_kind = TaskKind::by_name(task_name).ok_or_else(|| Error::Registry {
            name: task_name.to_string(),
            available: TaskKind::registry_names().join(", "),
        })?;
        let cfg = EnvConfig::from_parts(robot, TaskConfig::defaults_for(task_kind));
        cfg.check_compatibility()?;
        Ok(cfg)
    }

    pub fn from_parts(robot: RobotSpec, task: TaskConfig) -> Self {
        EnvConfig {
            robot,
            task,
            arena: ArenaSpec::default(),
            randomization: RandomizationConfig::disabled(),
            physics_dt: 0.02,
            decimation: 5,
            max_episode_steps: 300,
            allow_incompatible: false,
        }
    }

    pub fn check_compatibility(&self) -> Result<()> {
        if !self.allow_incompatible && !pair_enabled(self.robot.kind, self.task.kind) {
            return Err(Error::Incompatible {
                robot: self.robot.kind.name().to_string(),
                task: self.task.kind.name().to_string(),
            });
        }
        Ok(())
    }

    /// Control period [s].
    pub fn control_dt(&self) -> f64 {
        self.physics_dt * self.decimation as f64
    }

    pub fn action_dim(&self) -> usize {
        self.robot.action_dim()
    }

    /// Observation dimension including the appended previous action.
    pub fn obs_dim(&self) -> usize {
        self.task.core_obs_dim() + self.robot.action_dim()
    }

    fn validate(&self) -> Result<()> {
        if self.physics_dt <= 0.0 || self.decimation == 0 || self.max_episode_steps == 0 {
            return Err(Error::Config(format!(
                "physics_dt {}, decimation {}, max_episode_steps {} must all be positive",
                self.physics_dt, self.decimation, self.max_episode_steps
            )));
        }
        self.randomization.validate(self.action_dim(), self.obs_dim())
    }
}

/// `(cos, sin)` index pairs in the observation, renormalized after noise.
fn angle_pair_indices(task: &TaskConfig) -> Vec<(usize, usize)> {
    match task.kind {
        TaskKind::GoToPosition | TaskKind::GoToPositionObstacles => vec![(4, 5)],
        TaskKind::GoToPose => vec![(4, 5), (6, 7)],
        TaskKind::GoThroughPositions => {
            let mut pairs = vec![(4, 5)];
            for i in 0..task.future_goal_count {
                let base = 6 + 3 * i;
                pairs.push((base + 1, base + 2));
            }
            pairs
        }
        TaskKind::TrackVelocities => Vec::new(),
    }
}

/// One independent environment instance.
#[derive(Clone, Debug)]
struct EnvSlot {
    env_index: u64,
    episode: u64,
    /// Control step within the episode.
    t: usize,
    state: PlanarState,
    act_state: ActuatorState,
    task: TaskState,
    plan: RandomizationPlan,
    /// Effective mass properties after reset randomization and decay.
    props: crate::planar::MassProps,
    prev_processed: ProcessedAction,
    acc: EpisodeAccumulator,
    obs: Vec<f64>,
}

/// Outcome of stepping one slot.
struct SlotOutcome {
    reward: f64,
    terminated: bool,
    truncated: bool,
    success: bool,
    record: Option<EpisodeRecord>,
}

/// Result of stepping the whole batch. Observations for finished slots are
/// the first observation of the new episode.
#[derive(Clone, Debug)]
pub struct StepResult {
    pub observations: Vec<f64>,
    pub rewards: Vec<f64>,
    /// Early termination (boundary, collision, runaway).
    pub terminated: Vec<bool>,
    /// Time-limit termination.
    pub truncated: Vec<bool>,
    /// The instantaneous success condition held this step.
    pub success: Vec<bool>,
    /// Episodes that finished on this step.
    pub finished: Vec<EpisodeRecord>,
}

impl StepResult {
    pub fn done(&self, i: usize) -> bool {
        self.terminated[i] || self.truncated[i]
    }
}

/// A batch of N identical environments stepped in lockstep.
#[derive(Clone, Debug)]
pub struct EnvBatch {
    cfg: EnvConfig,
    global_seed: u64,
    angle_pairs: Vec<(usize, usize)>,
    slots: Vec<EnvSlot>,
    pub recorder: Recorder,
}

impl EnvBatch {
    pub fn new(cfg: EnvConfig, num_envs: usize, global_seed: u64) -> Result<Self> {
        Self::with_offset(cfg, num_envs, global_seed, 0)
    }

    /// Like [`new`](Self::new) but slot `i` gets environment index
    /// `offset + i`, so a sub-batch reproduces the corresponding slice of a
    /// larger batch exactly.
    pub fn with_offset(
        cfg: EnvConfig,
        num_envs: usize,
        global_seed: u64,
        offset: u64,
    ) -> Result<Self> {
        if num_envs == 0 {
            return Err(Error::Config("batch needs at least one environment".into()));
        }
        cfg.check_compatibility()?;
        cfg.validate()?;
        let angle_pairs = angle_pair_indices(&cfg.task);
        let mut slots = Vec::with_capacity(num_envs);
        for i in 0..num_envs {
            let mut slot = EnvSlot {
                env_index: offset + i as u64,
                episode: 0,
                t: 0,
                state: PlanarState::at_rest(Pose2::ORIGIN),
                act_state: ActuatorState::for_robot(&cfg.robot),
                task: blank_task_state(&cfg)?,
                plan: RandomizationPlan::empty(offset + i as u64, 0),
                props: cfg.robot.mass_props,
                prev_processed: ProcessedAction::zero(cfg.robot.action_dim()),
                acc: EpisodeAccumulator::new(cfg.robot.action_dim()),
                obs: Vec::new(),
            };
            reset_slot(&cfg, global_seed, &angle_pairs, &mut slot, 0)?;
            slots.push(slot);
        }
        Ok(EnvBatch {
            cfg,
            global_seed,
            angle_pairs,
            slots,
            recorder: Recorder::attached(),
        })
    }

    pub fn num_envs(&self) -> usize {
        self.slots.len()
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn global_seed(&self) -> u64 {
        self.global_seed
    }

    pub fn obs_dim(&self) -> usize {
        self.cfg.obs_dim()
    }

    pub fn action_dim(&self) -> usize {
        self.cfg.action_dim()
    }

    /// Current observations, flattened `[num_envs * obs_dim]`.
    pub fn observations(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.slots.len() * self.obs_dim());
        for slot in &self.slots {
            out.extend_from_slice(&slot.obs);
        }
        out
    }

    /// Poses of every slot, for trajectory recording.
    pub fn poses(&self) -> Vec<Pose2> {
        self.slots.iter().map(|s| s.state.pose).collect()
    }

    /// Full kinematic state of every slot (pose plus body twist).
    pub fn states(&self) -> Vec<PlanarState> {
        self.slots.iter().map(|s| s.state).collect()
    }

    /// Active goals of every slot.
    pub fn goals(&self) -> Vec<Pose2> {
        self.slots.iter().map(|s| s.task.goal).collect()
    }

    /// Obstacles of one slot (empty for obstacle-free tasks).
    pub fn obstacles(&self, i: usize) -> &[([f64; 2], f64)] {
        &self.slots[i].task.obstacles
    }

    /// Current velocity reference of one slot (TrackVelocities).
    pub fn current_reference(&self, i: usize) -> (f64, f64) {
        self.slots[i].task.current_ref
    }

    /// Restarts every environment with a fresh episode.
    pub fn reset_all(&mut self) -> Result<()> {
        for i in 0..self.slots.len() {
            let ep = self.slots[i].episode + 1;
            reset_slot(&self.cfg, self.global_seed, &self.angle_pairs, &mut self.slots[i], ep)?;
        }
        Ok(())
    }

    /// Restarts the environments selected by `mask`.
    pub fn reset_where(&mut self, mask: &[bool]) -> Result<()> {
        if mask.len() != self.slots.len() {
            return Err(Error::Contract(format!(
                "reset mask length {} does not match batch size {}",
                mask.len(),
                self.slots.len()
            )));
        }
        for (i, &m) in mask.iter().enumerate() {
            if m {
                let ep = self.slots[i].episode + 1;
                reset_slot(
                    &self.cfg,
                    self.global_seed,
                    &self.angle_pairs,
                    &mut self.slots[i],
                    ep,
                )?;
            }
        }
        Ok(())
    }

    /// Steps every environment with the flattened action batch
    /// `[num_envs * action_dim]`.
    pub fn step(&mut self, actions: &[f64]) -> Result<StepResult> {
        let n = self.slots.len();
        let ad = self.cfg.action_dim();
        if actions.len() != n * ad {
            return Err(Error::Contract(format!(
                "action batch length {} does not match {} envs x {} dims",
                actions.len(),
                n,
                ad
            )));
        }

        let outcomes = self.step_all(actions)?;

        let mut result = StepResult {
            observations: Vec::with_capacity(n * self.obs_dim()),
            rewards: Vec::with_capacity(n),
            terminated: Vec::with_capacity(n),
            truncated: Vec::with_capacity(n),
            success: Vec::with_capacity(n),
            finished: Vec::new(),
        };
        for (slot, out) in self.slots.iter().zip(outcomes) {
            result.observations.extend_from_slice(&slot.obs);
            result.rewards.push(out.reward);
            result.terminated.push(out.terminated);
            result.truncated.push(out.truncated);
            result.success.push(out.success);
            if let Some(record) = out.record {
                self.recorder.push(record.clone());
                result.finished.push(record);
            }
        }
        Ok(result)
    }

    #[cfg(feature = "parallel")]
    fn step_all(&mut self, actions: &[f64]) -> Result<Vec<SlotOutcome>> {
        use rayon::prelude::*;
        let cfg = &self.cfg;
        let seed = self.global_seed;
        let pairs = &self.angle_pairs;
        let ad = cfg.action_dim();
        self.slots
            .par_iter_mut()
            .zip(actions.par_chunks(ad))
            .map(|(slot, a)| step_one(cfg, seed, pairs, slot, a))
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn step_all(&mut self, actions: &[f64]) -> Result<Vec<SlotOutcome>> {
        let cfg = &self.cfg;
        let seed = self.global_seed;
        let pairs = &self.angle_pairs;
        let ad = cfg.action_dim();
        self.slots
            .iter_mut()
            .zip(actions.chunks(ad))
            .map(|(slot, a)| step_one(cfg, seed, pairs, slot, a))
            .collect()
    }
}

fn blank_task_state(cfg: &EnvConfig) -> Result<TaskState> {
    let mut rng = StreamRng::from_key(0);
    sample_goals(&cfg.task, &mut rng, &cfg.arena, &Pose2::ORIGIN)
}

fn reset_slot(
    cfg: &EnvConfig,
    seed: u64,
    angle_pairs: &[(usize, usize)],
    slot: &mut EnvSlot,
    episode: u64,
) -> Result<()> {
    slot.episode = episode;
    slot.t = 0;

    let mut pose_rng = StreamRng::for_env(seed, slot.env_index, episode, StreamId::InitialPose);
    let r = cfg.arena.spawn_radius * math::sqrt(pose_rng.next_f64());
    let ang = pose_rng.uniform(-PI, PI);
    let yaw = pose_rng.uniform(-PI, PI);
    let start = Pose2::new(r * math::cos(ang), r * math::sin(ang), yaw);
    slot.state = PlanarState::at_rest(start);

    let mut goal_rng = StreamRng::for_env(seed, slot.env_index, episode, StreamId::Goals);
    slot.task = sample_goals(&cfg.task, &mut goal_rng, &cfg.arena, &start)?;

    let (plan, props) = randomization::on_reset(
        &cfg.randomization,
        seed,
        slot.env_index,
        episode,
        &cfg.robot.mass_props,
    );
    slot.plan = plan;
    slot.props = props;

    slot.act_state.reset();
    slot.prev_processed = ProcessedAction::zero(cfg.robot.action_dim());
    slot.acc.reset();

    let mut obs = build_observation(&cfg.task, &slot.state, &slot.task, &slot.prev_processed.normalized)?;
    randomization::on_observation(
        &mut slot.plan,
        &mut obs,
        cfg.randomization.observations.renormalize_angle_pairs,
        angle_pairs,
    );
    slot.obs = obs;
    Ok(())
}

fn step_one(
    cfg: &EnvConfig,
    seed: u64,
    angle_pairs: &[(usize, usize)],
    slot: &mut EnvSlot,
    action: &[f64],
) -> Result<SlotOutcome> {
    let env = slot.env_index as usize;
    let tag_env = |e: Error| match e {
        Error::SimFault { env: None, detail } => Error::SimFault { env: Some(env), detail },
        other => other,
    };

    // action randomization, then mapping into the command space
    let mut raw = action.to_vec();
    if cfg.randomization.actions.enable || cfg.randomization.rescaler.enable {
        let (slices, clip) = if cfg.randomization.rescaler.enable {
            (&cfg.randomization.rescaler.slices, &cfg.randomization.rescaler.clip_actions)
        } else {
            (&cfg.randomization.actions.slices, &cfg.randomization.actions.clip_actions)
        };
        randomization::on_action(&mut slot.plan, &mut raw, clip, slices);
    }
    let processed = process_actions(&cfg.robot, &raw)?;

    // reference generation happens once per control step
    if cfg.task.kind == TaskKind::TrackVelocities {
        advance_velocity_reference(&cfg.task, &mut slot.task, cfg.control_dt())?;
    }

    // external disturbance and property decay for this control step
    let action_l1: f64 = processed.normalized.iter().map(|a| math::abs(*a)).sum();
    let (disturbance, props) = randomization::on_step(
        &slot.plan,
        &cfg.randomization,
        slot.t,
        cfg.control_dt(),
        action_l1,
        &slot.props,
    );
    slot.props = props;

    for _ in 0..cfg.decimation {
        let mut wrench =
            apply_actions(&cfg.robot, &processed, &slot.state, &mut slot.act_state, cfg.physics_dt);
        wrench += disturbance;
        slot.state =
            integrate_step(&slot.state, wrench, &slot.props, &cfg.robot.damping, cfg.physics_dt)
                .map_err(tag_env)?;
        enforce_constraints(&cfg.robot, &mut slot.state);
    }

    // boundary/collision check feeds the one-shot penalty
    let outside =
        math::hypot(slot.state.pose.x, slot.state.pose.y) > cfg.arena.radius;
    let collided = cfg.task.kind.has_obstacles()
        && slot.task.obstacles.iter().any(|(c, r)| {
            math::hypot(slot.state.pose.x - c[0], slot.state.pose.y - c[1]) < *r
        });
    let boundary = outside || collided;

    let shaping = robot_shaping_reward(&cfg.robot, &processed, &slot.prev_processed);
    let reward = compute_reward(&cfg.task, &slot.state, &mut slot.task, shaping, boundary);

    let (task_early, clean, success_event) = task_get_dones(
        &cfg.task,
        &slot.state,
        &mut slot.task,
        &cfg.arena,
        slot.t,
        cfg.max_episode_steps,
    );
    let (robot_early, _) = robot_get_dones(&cfg.robot, &slot.state);
    let terminated = task_early || robot_early;
    let truncated = clean && !terminated;

    slot.acc.on_step(reward, &processed.normalized);
    slot.prev_processed = processed;
    slot.t += 1;

    let mut record = None;
    if terminated || truncated {
        record = Some(finish_episode(cfg, slot, terminated, clean));
        let episode = slot.episode + 1;
        reset_slot(cfg, seed, angle_pairs, slot, episode)?;
    } else {
        let mut obs = build_observation(
            &cfg.task,
            &slot.state,
            &slot.task,
            &slot.prev_processed.normalized,
        )?;
        randomization::on_observation(
            &mut slot.plan,
            &mut obs,
            cfg.randomization.observations.renormalize_angle_pairs,
            angle_pairs,
        );
        slot.obs = obs;
    }

    Ok(SlotOutcome {
        reward,
        terminated,
        truncated,
        success: success_event,
        record,
    })
}

/// Episode-level success rule.
fn episode_success(cfg: &EnvConfig, slot: &EnvSlot, clean: bool) -> bool {
    match cfg.task.kind {
        TaskKind::GoThroughPositions => {
            slot.task.goals_reached >= cfg.task.min_goals_for_success
        }
        TaskKind::TrackVelocities => {
            let (ev, ew) = slot.task.mean_tracking_errors();
            clean && ev < cfg.task.thresholds.eps_v && ew < cfg.task.thresholds.eps_w
        }
        _ => {
            slot.task.held_success
                || (cfg.task.endpoint_success && slot.task.consecutive_success > 0)
        }
    }
}

fn finish_episode(cfg: &EnvConfig, slot: &EnvSlot, terminated: bool, clean: bool) -> EpisodeRecord {
    let (d, _) = {
        let b = slot.state.pose.world_to_body([slot.task.goal.x, slot.task.goal.y]);
        (math::hypot(b[0], b[1]), ())
    };
    let heading_err = match cfg.task.kind {
        TaskKind::GoToPose => {
            math::abs(normalize_angle(slot.task.goal.yaw - slot.state.pose.yaw))
        }
        _ => 0.0,
    };
    let (ev, ew) = slot.task.mean_tracking_errors();
    EpisodeRecord {
        env_index: slot.env_index,
        episode: slot.episode,
        length: slot.acc.steps,
        return_sum: slot.acc.return_sum,
        success: episode_success(cfg, slot, clean),
        early_termination: terminated,
        goals_reached: slot.task.goals_reached
            + usize::from(
                !matches!(cfg.task.kind, TaskKind::GoThroughPositions) && slot.task.held_success,
            ),
        final_distance: if cfg.task.kind == TaskKind::TrackVelocities { 0.0 } else { d },
        final_heading_error: heading_err,
        mean_lin_vel_error: ev,
        mean_ang_vel_error: ew,
        ctrl_variation: slot.acc.ctrl_variation(),
        time_to_success: slot.task.first_success_step,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn tb_goto() -> EnvConfig {
        EnvConfig::new("turtlebot2", "goto_position").unwrap()
    }

    #[test]
    fn registry_errors_list_available_names() {
        let err = EnvConfig::new("hovercraft", "goto_position").unwrap_err();
        match err {
            Error::Registry { name, available } => {
                assert_eq!(name, "hovercraft");
                assert!(available.contains("turtlebot2"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = EnvConfig::new("turtlebot2", "fly_to_moon").unwrap_err();
        assert!(matches!(err, Error::Registry { .. }));
    }

    #[test]
    fn disabled_pair_is_rejected_and_overridable() {
        let err = EnvConfig::new("kingfisher", "goto_pose").unwrap_err();
        assert!(matches!(err, Error::Incompatible { .. }));
        let mut cfg = EnvConfig::from_parts(
            RobotSpec::kingfisher(),
            TaskConfig::defaults_for(TaskKind::GoToPose),
        );
        cfg.allow_incompatible = true;
        assert!(EnvBatch::new(cfg, 1, 0).is_ok());
    }

    #[test]
    fn every_enabled_pair_constructs() {
        for robot in RobotSpec::registry_names() {
            for task in TaskKind::registry_names() {
                match EnvConfig::new(robot, task) {
                    Ok(cfg) => {
                        EnvBatch::new(cfg, 2, 7).unwrap();
                    }
                    Err(Error::Incompatible { .. }) => {}
                    Err(other) => panic!("{robot}/{task}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn observation_dimensions_match_layouts() {
        // core dims + previous action
        let cases = [
            ("goto_position", 6 + 2),
            ("goto_pose", 8 + 2),
            ("go_through_positions", 9 + 2),
            ("track_velocities", 6 + 2),
            ("goto_position_obstacles", 12 + 2),
        ];
        for (task, dim) in cases {
            let cfg = EnvConfig::new("turtlebot2", task).unwrap();
            let batch = EnvBatch::new(cfg, 3, 1).unwrap();
            assert_eq!(batch.obs_dim(), dim, "{task}");
            assert_eq!(batch.observations().len(), 3 * dim);
        }
    }

    #[test]
    fn step_rejects_wrong_action_length() {
        let mut batch = EnvBatch::new(tb_goto(), 2, 0).unwrap();
        assert!(batch.step(&[0.0; 3]).is_err());
    }

    #[test]
    fn timeout_truncates_and_auto_resets() {
        let mut batch = EnvBatch::new(tb_goto(), 1, 5).unwrap();
        let first_obs = batch.observations();
        let mut result = None;
        for _ in 0..300 {
            result = Some(batch.step(&[0.0, 0.0]).unwrap());
        }
        let result = result.unwrap();
        assert!(result.truncated[0] && !result.terminated[0]);
        assert_eq!(result.finished.len(), 1);
        let rec = &result.finished[0];
        assert_eq!(rec.length, 300);
        assert_eq!(rec.episode, 0);
        assert!(!rec.early_termination);
        // auto-reset: slot is on a fresh episode with a new observation
        assert_eq!(batch.slots[0].episode, 1);
        assert_eq!(batch.slots[0].t, 0);
        assert_ne!(batch.observations(), first_obs);
    }

    #[test]
    fn full_throttle_exits_arena_with_penalty() {
        let mut cfg = tb_goto();
        cfg.arena.spawn_radius = 0.0; // start at the center
        let mut batch = EnvBatch::new(cfg, 1, 3).unwrap();
        let mut saw_early = false;
        for _ in 0..200 {
            let r = batch.step(&[1.0, 0.0]).unwrap();
            if r.terminated[0] {
                saw_early = true;
                // the terminal step carries the boundary penalty
                assert!(r.rewards[0] < -5.0, "terminal reward {}", r.rewards[0]);
                assert!(r.finished[0].early_termination);
                break;
            }
        }
        assert!(saw_early, "robot never left the arena");
    }

    #[test]
    fn same_seed_is_bit_reproducible() {
        let mut a = EnvBatch::new(tb_goto(), 4, 11).unwrap();
        let mut b = EnvBatch::new(tb_goto(), 4, 11).unwrap();
        assert_eq!(a.observations(), b.observations());
        let mut rng = StreamRng::from_key(7);
        for _ in 0..50 {
            let actions: Vec<f64> = (0..8).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let ra = a.step(&actions).unwrap();
            let rb = b.step(&actions).unwrap();
            assert_eq!(ra.observations, rb.observations);
            assert_eq!(ra.rewards, rb.rewards);
        }
    }

    #[test]
    fn batch_slice_matches_offset_single_env() {
        // env 2 of a 4-env batch versus a 1-env batch with offset 2
        let mut big = EnvBatch::new(tb_goto(), 4, 21).unwrap();
        let mut small = EnvBatch::with_offset(tb_goto(), 1, 21, 2).unwrap();
        let dim = big.obs_dim();
        assert_eq!(&big.observations()[2 * dim..3 * dim], &small.observations()[..]);
        let mut rng = StreamRng::from_key(99);
        for _ in 0..120 {
            let mut actions = Vec::new();
            for _ in 0..4 {
                actions.push(rng.uniform(-1.0, 1.0));
                actions.push(rng.uniform(-1.0, 1.0));
            }
            let rb = big.step(&actions).unwrap();
            let rs = small.step(&actions[4..6]).unwrap();
            assert_eq!(&rb.observations[2 * dim..3 * dim], &rs.observations[..]);
            assert_eq!(rb.rewards[2], rs.rewards[0]);
            assert_eq!(rb.terminated[2], rs.terminated[0]);
        }
    }

    #[test]
    fn randomization_changes_trajectories() {
        let mut plain = EnvBatch::new(tb_goto(), 1, 13).unwrap();
        let mut cfg = tb_goto();
        cfg.randomization = RandomizationConfig::turtlebot2_defaults();
        let mut randomized = EnvBatch::new(cfg, 1, 13).unwrap();
        let mut diverged = false;
        for _ in 0..20 {
            let ra = plain.step(&[0.5, 0.1]).unwrap();
            let rb = randomized.step(&[0.5, 0.1]).unwrap();
            if ra.observations != rb.observations {
                diverged = true;
                break;
            }
        }
        assert!(diverged);
    }

    #[test]
    fn sim_fault_reports_env_index() {
        let mut batch = EnvBatch::with_offset(tb_goto(), 1, 0, 3).unwrap();
        let err = batch.step(&[f64::NAN, 0.0]).unwrap_err();
        match err {
            Error::SimFault { env, .. } => assert_eq!(env, Some(3)),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn reset_where_respects_mask() {
        let mut batch = EnvBatch::new(tb_goto(), 3, 1).unwrap();
        batch.step(&[0.2, 0.0, 0.2, 0.0, 0.2, 0.0]).unwrap();
        batch.reset_where(&[true, false, true]).unwrap();
        assert_eq!(batch.slots[0].episode, 1);
        assert_eq!(batch.slots[1].episode, 0);
        assert_eq!(batch.slots[2].episode, 1);
        assert_eq!(batch.slots[1].t, 1);
        assert!(batch.reset_where(&[true]).is_err());
    }

    #[test]
    fn recorder_detach_suppresses_records() {
        let mut batch = EnvBatch::new(tb_goto(), 1, 5).unwrap();
        batch.recorder.detach();
        for _ in 0..300 {
            batch.step(&[0.0, 0.0]).unwrap();
        }
        assert!(batch.recorder.is_empty());
    }

    #[test]
    fn success_episode_reports_hold_and_time() {
        // plant the goal on top of the robot so the success condition holds
        let mut batch = EnvBatch::new(tb_goto(), 1, 2).unwrap();
        let pose = batch.slots[0].state.pose;
        batch.slots[0].task.goal = Pose2::new(pose.x, pose.y, 0.0);
        for _ in 0..300 {
            batch.step(&[0.0, 0.0]).unwrap();
        }
        let records = batch.recorder.drain();
        assert_eq!(records.len(), 1);
        let rec = &records[0];
        assert!(rec.success);
        assert_eq!(rec.time_to_success, Some(0));
        assert_eq!(rec.goals_reached, 1);
    }

    #[test]
    fn track_velocities_reference_is_bounded_during_stepping() {
        let cfg = EnvConfig::new("turtlebot2", "track_velocities").unwrap();
        let caps = cfg.task.vref_bounds;
        let mut batch = EnvBatch::new(cfg, 2, 8).unwrap();
        for _ in 0..600 {
            batch.step(&[0.0; 4]).unwrap();
            for i in 0..2 {
                let (v, w) = batch.current_reference(i);
                assert!(math::abs(v) <= caps.0 + 1e-12);
                assert!(math::abs(w) <= caps.1 + 1e-12);
            }
        }
    }

    #[test]
    fn terminal_reward_includes_goal_kernel_at_goal() {
        let mut batch = EnvBatch::new(tb_goto(), 1, 2).unwrap();
        let pose = batch.slots[0].state.pose;
        batch.slots[0].task.goal = Pose2::new(pose.x, pose.y, 0.0);
        let r = batch.step(&[0.0, 0.0]).unwrap();
        // position kernel 1.0 at d=0 plus heading kernel somewhere in (0, 0.25]
        assert!(r.rewards[0] > 0.9, "reward {}", r.rewards[0]);
        assert_abs_diff_eq!(r.rewards[0].min(1.25), r.rewards[0], epsilon = 1e-12);
    }
}
