//! Navigation tasks: GoToPosition (with an obstacle variant), GoToPose,
//! GoThroughPositions, and TrackVelocities.
//!
//! A task owns goal sampling, the observation layout, the reward, and the
//! termination/success logic. All relative quantities in observations are
//! expressed in the robot's body frame, and angles enter observations as
//! `(cos, sin)` pairs so they stay continuous.

use crate::error::{Error, Result};
use crate::math;
use crate::planar::{normalize_angle, PlanarState, Pose2, PI};
use crate::rng::StreamRng;
use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    GoToPosition,
    GoToPose,
    GoThroughPositions,
    TrackVelocities,
    /// GoToPosition with static disc obstacles; collisions terminate.
    GoToPositionObstacles,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::GoToPosition => "goto_position",
            TaskKind::GoToPose => "goto_pose",
            TaskKind::GoThroughPositions => "go_through_positions",
            TaskKind::TrackVelocities => "track_velocities",
            TaskKind::GoToPositionObstacles => "goto_position_obstacles",
        }
    }

    pub fn by_name(name: &str) -> Option<TaskKind> {
        match name {
            "goto_position" => Some(TaskKind::GoToPosition),
            "goto_pose" => Some(TaskKind::GoToPose),
            "go_through_positions" => Some(TaskKind::GoThroughPositions),
            "track_velocities" => Some(TaskKind::TrackVelocities),
            "goto_position_obstacles" => Some(TaskKind::GoToPositionObstacles),
            _ => None,
        }
    }

    pub fn registry_names() -> &'static [&'static str] {
        &[
            "goto_position",
            "goto_pose",
            "go_through_positions",
            "track_velocities",
            "goto_position_obstacles",
        ]
    }

    pub fn has_obstacles(&self) -> bool {
        matches!(self, TaskKind::GoToPositionObstacles)
    }
}

/// Circular arena. Leaving the disc of `radius` terminates the episode with
/// the boundary penalty; goals are drawn within `spawn_radius`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArenaSpec {
    pub radius: f64,
    pub spawn_radius: f64,
}

impl Default for ArenaSpec {
    fn default() -> Self {
        Self { radius: 6.0, spawn_radius: 3.0 }
    }
}

/// Success thresholds per task.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuccessThresholds {
    /// Position tolerance [m].
    pub eps_p: f64,
    /// Orientation tolerance [rad].
    pub eps_theta: f64,
    /// Waypoint capture tolerance [m].
    pub eps_tp: f64,
    /// Mean linear velocity error tolerance [m/s].
    pub eps_v: f64,
    /// Mean angular velocity error tolerance [rad/s].
    pub eps_w: f64,
}

impl Default for SuccessThresholds {
    fn default() -> Self {
        Self {
            eps_p: 0.1,
            eps_theta: 10.0 * PI / 180.0,
            eps_tp: 0.2,
            eps_v: 0.2,
            eps_w: 10.0 * PI / 180.0,
        }
    }
}

/// Reward weights and decay constants. Field names follow the unified reward
/// form; the per-task defaults carry the shipped coefficient table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardParams {
    /// Position kernel weight.
    pub w_pos: f64,
    /// Heading kernel weight.
    pub w_head: f64,
    /// Joint pose-alignment kernel weight (GoToPose).
    pub w_pose_align: f64,
    /// Linear velocity penalty weight (applied to clipped |v|).
    pub w_lin_vel: f64,
    /// Angular velocity penalty weight (applied to clipped |omega|).
    pub w_ang_vel: f64,
    /// Linear velocity tracking error weight (TrackVelocities).
    pub w_lin_vel_err: f64,
    /// Angular velocity tracking error weight (TrackVelocities).
    pub w_ang_vel_err: f64,
    /// Progress weight on the signed distance decrease per step.
    pub w_progress: f64,
    /// One-shot penalty on boundary violation.
    pub w_boundary: f64,
    /// Per-waypoint bonus (GoThroughPositions; not paper-anchored).
    pub w_goal_bonus: f64,
    pub lambda_dist: f64,
    pub lambda_head: f64,
    pub lambda_bnd: f64,
    pub lambda_vel: f64,
    /// Clip bound for |v| in the velocity penalty.
    pub lin_vel_clip: f64,
    /// Clip bound for |omega| in the velocity penalty.
    pub ang_vel_clip: f64,
    /// Use the exponential velocity-error kernel instead of linear penalties.
    pub exp_vel_form: bool,
}

impl RewardParams {
    pub fn defaults_for(kind: TaskKind) -> Self {
        let base = RewardParams {
            w_pos: 0.0,
            w_head: 0.0,
            w_pose_align: 0.0,
            w_lin_vel: 0.0,
            w_ang_vel: 0.0,
            w_lin_vel_err: 0.0,
            w_ang_vel_err: 0.0,
            w_progress: 0.0,
            w_boundary: -10.0,
            w_goal_bonus: 0.0,
            lambda_dist: 1.0,
            lambda_head: 0.25,
            lambda_bnd: 1.0,
            lambda_vel: 1.0,
            lin_vel_clip: 1.0,
            ang_vel_clip: 1.0,
            exp_vel_form: false,
        };
        match kind {
            TaskKind::GoToPosition | TaskKind::GoToPositionObstacles => RewardParams {
                w_pos: 1.0,
                w_head: 0.25,
                w_lin_vel: -0.05,
                w_ang_vel: -0.1,
                ..base
            },
            TaskKind::GoToPose => RewardParams {
                w_pose_align: 1.0,
                w_lin_vel: -0.05,
                w_ang_vel: -0.05,
                w_progress: 0.2,
                ..base
            },
            TaskKind::GoThroughPositions => RewardParams {
                w_progress: 1.0,
                w_head: 0.05,
                w_lin_vel: 0.0,
                w_ang_vel: -0.05,
                w_goal_bonus: 10.0,
                ..base
            },
            TaskKind::TrackVelocities => RewardParams {
                w_lin_vel_err: -1.0,
                w_ang_vel_err: -0.5,
                ..base
            },
        }
    }
}

/// Task configuration beyond the reward weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskConfig {
    pub kind: TaskKind,
    pub reward: RewardParams,
    pub thresholds: SuccessThresholds,
    /// Number of future goals in the observation (GoThroughPositions).
    pub future_goal_count: usize,
    /// Waypoints spawned per episode (GoThroughPositions).
    pub num_waypoints: usize,
    /// Distance range between consecutive waypoints.
    pub waypoint_dist: (f64, f64),
    /// |v_ref| and |omega_ref| caps for the reference generator.
    pub vref_bounds: (f64, f64),
    /// Seconds between reference target resamples (uniform range).
    pub vref_resample: (f64, f64),
    /// Linear ramp duration between reference targets [s].
    pub vref_ramp: f64,
    /// Obstacle count for the obstacle variant.
    pub num_obstacles: usize,
    /// Obstacle radius range.
    pub obstacle_radius: (f64, f64),
    /// Steps the success condition must hold continuously to count as
    /// "reached" before episode end.
    pub hold_window: usize,
    /// Also count the episode as a success when the condition holds on the
    /// final step, even if the hold window was never filled.
    pub endpoint_success: bool,
    /// Waypoints required for a GoThroughPositions episode to count as a
    /// success.
    pub min_goals_for_success: usize,
}

impl TaskConfig {
    pub fn defaults_for(kind: TaskKind) -> Self {
        TaskConfig {
            kind,
            reward: RewardParams::defaults_for(kind),
            thresholds: SuccessThresholds::default(),
            future_goal_count: 1,
            num_waypoints: 20,
            waypoint_dist: (1.0, 2.0),
            vref_bounds: (0.3, 0.5),
            vref_resample: (2.0, 4.0),
            vref_ramp: 0.5,
            num_obstacles: 4,
            obstacle_radius: (0.3, 0.6),
            hold_window: 10,
            endpoint_success: true,
            min_goals_for_success: 1,
        }
    }

    /// Observation dimension excluding the appended previous action.
    pub fn core_obs_dim(&self) -> usize {
        let base = match self.kind {
            TaskKind::GoToPosition => 6,
            TaskKind::GoToPose => 8,
            TaskKind::GoThroughPositions => 6 + 3 * self.future_goal_count,
            TaskKind::TrackVelocities => 6,
            TaskKind::GoToPositionObstacles => 6,
        };
        if self.kind.has_obstacles() {
            base + 6
        } else {
            base
        }
    }
}

/// Piecewise-smooth random velocity reference: piecewise-constant targets
/// with linear ramps between them.
#[derive(Clone, Debug, PartialEq)]
pub struct VelRefState {
    rng: StreamRng,
    prev: (f64, f64),
    target: (f64, f64),
    /// Seconds until the next target resample.
    time_left: f64,
    /// Seconds left on the current ramp.
    ramp_left: f64,
    ramp_len: f64,
}

impl VelRefState {
    fn new(mut rng: StreamRng, cfg: &TaskConfig) -> Self {
        let (v_cap, w_cap) = cfg.vref_bounds;
        let target = (rng.uniform(-v_cap, v_cap), rng.uniform(-w_cap, w_cap));
        let time_left = rng.uniform(cfg.vref_resample.0, cfg.vref_resample.1);
        VelRefState {
            rng,
            prev: target,
            target,
            time_left,
            ramp_left: 0.0,
            ramp_len: cfg.vref_ramp,
        }
    }

    fn advance(&mut self, cfg: &TaskConfig, dt: f64) -> (f64, f64) {
        self.time_left -= dt;
        if self.time_left <= 0.0 {
            let (v_cap, w_cap) = cfg.vref_bounds;
            self.prev = self.target;
            self.target =
                (self.rng.uniform(-v_cap, v_cap), self.rng.uniform(-w_cap, w_cap));
            self.time_left = self.rng.uniform(cfg.vref_resample.0, cfg.vref_resample.1);
            self.ramp_left = self.ramp_len;
        }
        if self.ramp_left > 0.0 {
            self.ramp_left = (self.ramp_left - dt).max(0.0);
            let a = if self.ramp_len > 0.0 { 1.0 - self.ramp_left / self.ramp_len } else { 1.0 };
            (
                self.prev.0 + a * (self.target.0 - self.prev.0),
                self.prev.1 + a * (self.target.1 - self.prev.1),
            )
        } else {
            self.target
        }
    }
}

/// Per-episode task state.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskState {
    /// Active goal. Heading is only meaningful for GoToPose.
    pub goal: Pose2,
    /// Remaining waypoints after the active goal, consumed in order.
    pub waypoints: VecDeque<[f64; 2]>,
    pub goals_reached: usize,
    pub goals_spawned: usize,
    /// Distance to the active goal at the previous step, for progress terms.
    pub prev_distance: f64,
    pub obstacles: Vec<([f64; 2], f64)>,
    pub vref: Option<VelRefState>,
    /// Reference pair for the current control step.
    pub current_ref: (f64, f64),
    /// First step at which the success condition held.
    pub first_success_step: Option<usize>,
    /// Consecutive steps the success condition has held.
    pub consecutive_success: usize,
    /// Success condition held for at least `hold_window` consecutive steps.
    pub held_success: bool,
    /// Set by the reward pass when a waypoint was consumed this step.
    pub waypoint_consumed: bool,
    /// Running sums of tracking errors (TrackVelocities).
    pub sum_abs_ev: f64,
    pub sum_abs_ew: f64,
    pub err_steps: usize,
}

impl TaskState {
    pub fn mean_tracking_errors(&self) -> (f64, f64) {
        if self.err_steps == 0 {
            (0.0, 0.0)
        } else {
            let n = self.err_steps as f64;
            (self.sum_abs_ev / n, self.sum_abs_ew / n)
        }
    }
}

fn sample_in_disk(rng: &mut StreamRng, radius: f64) -> [f64; 2] {
    let r = radius * math::sqrt(rng.next_f64());
    let ang = rng.uniform(-PI, PI);
    [r * math::cos(ang), r * math::sin(ang)]
}

/// Samples a fresh episode state: goals, waypoint chain, obstacles, or the
/// velocity reference generator, depending on the task.
pub fn sample_goals(
    cfg: &TaskConfig,
    rng: &mut StreamRng,
    arena: &ArenaSpec,
    start: &Pose2,
) -> Result<TaskState> {
    let mut state = TaskState {
        goal: Pose2::ORIGIN,
        waypoints: VecDeque::new(),
        goals_reached: 0,
        goals_spawned: 0,
        prev_distance: 0.0,
        obstacles: Vec::new(),
        vref: None,
        current_ref: (0.0, 0.0),
        first_success_step: None,
        consecutive_success: 0,
        held_success: false,
        waypoint_consumed: false,
        sum_abs_ev: 0.0,
        sum_abs_ew: 0.0,
        err_steps: 0,
    };

    match cfg.kind {
        TaskKind::GoToPosition | TaskKind::GoToPositionObstacles => {
            let p = sample_in_disk(rng, arena.spawn_radius);
            state.goal = Pose2::new(p[0], p[1], 0.0);
            state.goals_spawned = 1;
        }
        TaskKind::GoToPose => {
            let p = sample_in_disk(rng, arena.spawn_radius);
            state.goal = Pose2::new(p[0], p[1], rng.uniform(-PI, PI));
            state.goals_spawned = 1;
        }
        TaskKind::GoThroughPositions => {
            let first = sample_in_disk(rng, arena.spawn_radius);
            state.goal = Pose2::new(first[0], first[1], 0.0);
            let keep_within = arena.radius - 0.5;
            let mut prev = first;
            for _ in 1..cfg.num_waypoints {
                let mut placed = false;
                for _ in 0..200 {
                    let d = rng.uniform(cfg.waypoint_dist.0, cfg.waypoint_dist.1);
                    let bearing = rng.uniform(-PI, PI);
                    let cand =
                        [prev[0] + d * math::cos(bearing), prev[1] + d * math::sin(bearing)];
                    if math::hypot(cand[0], cand[1]) <= keep_within {
                        state.waypoints.push_back(cand);
                        prev = cand;
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(Error::Config(format!(
                        "waypoint sampling failed: distance range {:?} does not fit arena \
                         radius {}",
                        cfg.waypoint_dist, arena.radius
                    )));
                }
            }
            state.goals_spawned = cfg.num_waypoints;
        }
        TaskKind::TrackVelocities => {
            let vref = VelRefState::new(rng.clone(), cfg);
            state.current_ref = vref.target;
            state.vref = Some(vref);
            // burn the parent stream so obstacles/other draws stay distinct
            rng.next_u64();
        }
    }

    if cfg.kind.has_obstacles() {
        let clearance = 0.35;
        for _ in 0..cfg.num_obstacles {
            let mut placed = false;
            for _ in 0..500 {
                let c = sample_in_disk(rng, arena.spawn_radius);
                let r = rng.uniform(cfg.obstacle_radius.0, cfg.obstacle_radius.1);
                let clear_of_goal =
                    math::hypot(c[0] - state.goal.x, c[1] - state.goal.y) > r + clearance;
                let clear_of_start =
                    math::hypot(c[0] - start.x, c[1] - start.y) > r + clearance;
                let clear_of_others = state
                    .obstacles
                    .iter()
                    .all(|(oc, or)| math::hypot(c[0] - oc[0], c[1] - oc[1]) > r + or);
                if clear_of_goal && clear_of_start && clear_of_others {
                    state.obstacles.push((c, r));
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::Config(format!(
                    "obstacle sampling failed after bounded attempts ({} obstacles, radius \
                     range {:?})",
                    cfg.num_obstacles, cfg.obstacle_radius
                )));
            }
        }
    }

    state.prev_distance = math::hypot(state.goal.x - start.x, state.goal.y - start.y);
    Ok(state)
}

/// Distance and body-frame bearing to a world point.
fn relative_goal(state: &PlanarState, point: [f64; 2]) -> (f64, f64) {
    let b = state.pose.world_to_body(point);
    (math::hypot(b[0], b[1]), math::atan2(b[1], b[0]))
}

/// Builds the observation vector: task core block, then obstacle block when
/// present, then the previous action.
pub fn build_observation(
    cfg: &TaskConfig,
    state: &PlanarState,
    tstate: &TaskState,
    prev_action: &[f64],
) -> Result<Vec<f64>> {
    let mut obs = Vec::with_capacity(cfg.core_obs_dim() + prev_action.len());
    let tw = state.twist;

    match cfg.kind {
        TaskKind::GoToPosition | TaskKind::GoToPositionObstacles => {
            let (d, theta) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            obs.extend_from_slice(&[tw.vx, tw.vy, tw.omega]);
            obs.extend_from_slice(&[d, math::cos(theta), math::sin(theta)]);
        }
        TaskKind::GoToPose => {
            let (d, theta) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            let psi = normalize_angle(tstate.goal.yaw - state.pose.yaw);
            obs.extend_from_slice(&[tw.vx, tw.vy, tw.omega]);
            obs.extend_from_slice(&[d, math::cos(theta), math::sin(theta)]);
            obs.extend_from_slice(&[math::cos(psi), math::sin(psi)]);
        }
        TaskKind::GoThroughPositions => {
            let (d, theta) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            obs.extend_from_slice(&[tw.vx, tw.vy, tw.omega]);
            obs.extend_from_slice(&[d, math::cos(theta), math::sin(theta)]);
            // future goals; the last available repeats when the queue runs short
            let mut last = [tstate.goal.x, tstate.goal.y];
            for i in 0..cfg.future_goal_count {
                let p = tstate.waypoints.get(i).copied().unwrap_or(last);
                last = p;
                let (di, ti) = relative_goal(state, p);
                obs.extend_from_slice(&[di, math::cos(ti), math::sin(ti)]);
            }
        }
        TaskKind::TrackVelocities => {
            let (v_ref, w_ref) = tstate.current_ref;
            obs.extend_from_slice(&[v_ref - tw.vx, -tw.vy, w_ref - tw.omega]);
            obs.extend_from_slice(&[tw.vx, tw.vy, tw.omega]);
        }
    }

    if cfg.kind.has_obstacles() {
        if tstate.obstacles.is_empty() && cfg.num_obstacles > 0 {
            return Err(Error::Contract("obstacle variant without sampled obstacles".into()));
        }
        let mut by_dist: Vec<[f64; 2]> = tstate.obstacles.iter().map(|(c, _)| *c).collect();
        by_dist.sort_by(|a, b| {
            let da = math::hypot(a[0] - state.pose.x, a[1] - state.pose.y);
            let db = math::hypot(b[0] - state.pose.x, b[1] - state.pose.y);
            da.partial_cmp(&db).unwrap()
        });
        for i in 0..3 {
            let c = by_dist.get(i).copied().unwrap_or_else(|| by_dist[by_dist.len() - 1]);
            let b = state.pose.world_to_body(c);
            obs.extend_from_slice(&b);
        }
    }

    obs.extend_from_slice(prev_action);
    Ok(obs)
}

fn clip_abs(v: f64, bound: f64) -> f64 {
    math::abs(v).min(bound)
}

/// Computes the per-step reward and updates the task bookkeeping (progress
/// baseline, waypoint consumption, tracking error sums).
///
/// `shaping` is the robot-specific shaping term; `boundary_violation` adds
/// the one-shot boundary penalty on the terminal step.
pub fn compute_reward(
    cfg: &TaskConfig,
    state: &PlanarState,
    tstate: &mut TaskState,
    shaping: f64,
    boundary_violation: bool,
) -> f64 {
    let p = &cfg.reward;
    tstate.waypoint_consumed = false;

    let mut reward = shaping;
    if boundary_violation {
        reward += p.w_boundary;
    }

    match cfg.kind {
        TaskKind::GoToPosition | TaskKind::GoToPositionObstacles => {
            let (d, theta) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            reward += p.w_pos * math::exp(-d / p.lambda_dist);
            reward += p.w_head * math::exp(-math::abs(theta) / p.lambda_head);
            reward += p.w_lin_vel * clip_abs(state.twist.speed(), p.lin_vel_clip);
            reward += p.w_ang_vel * clip_abs(state.twist.omega, p.ang_vel_clip);
            tstate.prev_distance = d;
        }
        TaskKind::GoToPose => {
            let (d, _) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            let psi = normalize_angle(tstate.goal.yaw - state.pose.yaw);
            reward += p.w_pose_align
                * math::exp(-d / p.lambda_dist)
                * math::exp(-math::abs(psi) / p.lambda_head);
            reward += p.w_lin_vel * clip_abs(state.twist.speed(), p.lin_vel_clip);
            reward += p.w_ang_vel * clip_abs(state.twist.omega, p.ang_vel_clip);
            reward += p.w_progress * (tstate.prev_distance - d);
            tstate.prev_distance = d;
        }
        TaskKind::GoThroughPositions => {
            let (d, theta) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            reward += p.w_progress * (tstate.prev_distance - d);
            reward += p.w_head * math::exp(-math::abs(theta) / p.lambda_head);
            reward += p.w_lin_vel * clip_abs(state.twist.speed(), p.lin_vel_clip);
            reward += p.w_ang_vel * clip_abs(state.twist.omega, p.ang_vel_clip);
            if d < cfg.thresholds.eps_tp {
                tstate.goals_reached += 1;
                tstate.waypoint_consumed = true;
                reward += p.w_goal_bonus;
                if let Some(next) = tstate.waypoints.pop_front() {
                    tstate.goal = Pose2::new(next[0], next[1], 0.0);
                }
            }
            let (d_new, _) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            tstate.prev_distance = d_new;
        }
        TaskKind::TrackVelocities => {
            let (v_ref, w_ref) = tstate.current_ref;
            let e_v = math::abs(v_ref - state.twist.vx);
            let e_w = math::abs(w_ref - state.twist.omega);
            if p.exp_vel_form {
                reward += p.w_lin_vel_err * math::exp(-e_v / p.lambda_vel);
                reward += p.w_ang_vel_err * math::exp(-e_w / p.lambda_vel);
            } else {
                reward += p.w_lin_vel_err * e_v;
                reward += p.w_ang_vel_err * e_w;
            }
            tstate.sum_abs_ev += e_v;
            tstate.sum_abs_ew += e_w;
            tstate.err_steps += 1;
        }
    }

    reward
}

/// Instantaneous success predicate, strict inequalities throughout.
fn success_condition(cfg: &TaskConfig, state: &PlanarState, tstate: &TaskState) -> bool {
    let th = &cfg.thresholds;
    match cfg.kind {
        TaskKind::GoToPosition | TaskKind::GoToPositionObstacles => {
            let (d, _) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            d < th.eps_p
        }
        TaskKind::GoToPose => {
            let (d, _) = relative_goal(state, [tstate.goal.x, tstate.goal.y]);
            let psi = normalize_angle(tstate.goal.yaw - state.pose.yaw);
            d < th.eps_p && math::abs(psi) < th.eps_theta
        }
        TaskKind::GoThroughPositions => tstate.waypoint_consumed,
        TaskKind::TrackVelocities => false, // evaluated at episode end
    }
}

/// Task-side termination and success events.
///
/// Returns `(early, clean, success_event)`. Also advances the success hold
/// bookkeeping on `tstate`.
pub fn task_get_dones(
    cfg: &TaskConfig,
    state: &PlanarState,
    tstate: &mut TaskState,
    arena: &ArenaSpec,
    t: usize,
    t_max: usize,
) -> (bool, bool, bool) {
    let dist_from_origin = math::hypot(state.pose.x, state.pose.y);
    let mut early = dist_from_origin > arena.radius;
    if cfg.kind.has_obstacles() {
        for (c, r) in &tstate.obstacles {
            if math::hypot(state.pose.x - c[0], state.pose.y - c[1]) < *r {
                early = true;
                break;
            }
        }
    }
    let clean = t + 1 >= t_max;

    let cond = success_condition(cfg, state, tstate);
    if cond {
        if tstate.first_success_step.is_none() {
            tstate.first_success_step = Some(t);
        }
        tstate.consecutive_success += 1;
        if tstate.consecutive_success >= cfg.hold_window {
            tstate.held_success = true;
        }
    } else {
        tstate.consecutive_success = 0;
    }

    let success_event = match cfg.kind {
        TaskKind::TrackVelocities => {
            if clean {
                let (ev, ew) = tstate.mean_tracking_errors();
                ev < cfg.thresholds.eps_v && ew < cfg.thresholds.eps_w
            } else {
                false
            }
        }
        _ => cond,
    };

    (early, clean, success_event)
}

/// Steps the velocity reference generator and stores the new pair on the
/// task state. TrackVelocities only.
pub fn advance_velocity_reference(
    cfg: &TaskConfig,
    tstate: &mut TaskState,
    dt: f64,
) -> Result<(f64, f64)> {
    let vref = tstate.vref.as_mut().ok_or_else(|| {
        Error::Contract(format!(
            "advance_velocity_reference called on task {}",
            cfg.kind.name()
        ))
    })?;
    let pair = vref.advance(cfg, dt);
    tstate.current_ref = pair;
    Ok(pair)
}
