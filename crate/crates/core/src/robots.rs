//! Robot models: FloatingPlatform, Kingfisher, Turtlebot2.
//!
//! Each robot defines its control space, how raw policy actions are turned
//! into physical commands, how commands become body wrenches, an optional
//! shaping penalty on rapid actuation changes, and a runaway-dynamics
//! termination check. The physical parameters of the real platforms are not
//! published; every value here is a configurable default.

use crate::error::{Error, Result};
use crate::math;
use crate::planar::{MassProps, DampingSpec, PlanarState, Wrench2};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

/// Hard clamp on the twist after integration, as a multiple of the nominal
/// velocity limits. Keeps runaway states finite; well above the runaway
/// termination threshold so `get_dones` can still observe the excursion.
const SAFETY_CLAMP_FACTOR: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RobotKind {
    FloatingPlatform,
    Kingfisher,
    Turtlebot2,
}

impl RobotKind {
    pub fn name(&self) -> &'static str {
        match self {
            RobotKind::FloatingPlatform => "floating_platform",
            RobotKind::Kingfisher => "kingfisher",
            RobotKind::Turtlebot2 => "turtlebot2",
        }
    }
}

/// Action space of the policy head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ControlSpace {
    /// Binary vector, one bit per thruster.
    Binary(usize),
    /// Continuous vector in [-1, 1]^dim.
    Continuous(usize),
}

impl ControlSpace {
    pub fn dim(&self) -> usize {
        match *self {
            ControlSpace::Binary(d) | ControlSpace::Continuous(d) => d,
        }
    }
}

/// Per-robot actuation parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum ActuationParams {
    /// Fixed-force binary thrusters (FloatingPlatform).
    Thrusters {
        positions: Vec<[f64; 2]>,
        directions: Vec<[f64; 2]>,
        thrust_force: f64,
    },
    /// Two fixed propellers with first-order thrust lag and asymmetric
    /// reverse thrust (Kingfisher).
    Propellers {
        positions: [[f64; 2]; 2],
        max_thrust_fwd: f64,
        max_thrust_rev: f64,
        lag_tau: f64,
    },
    /// Velocity-servo differential drive (Turtlebot2).
    DiffDrive {
        wheel_base: f64,
        v_cmd_max: f64,
        omega_cmd_max: f64,
        tracking_gain: f64,
    },
}

/// Full robot definition. Immutable after construction; per-env mutable
/// actuation state lives in [`ActuatorState`].
#[derive(Clone, Debug)]
pub struct RobotSpec {
    pub kind: RobotKind,
    pub control_space: ControlSpace,
    pub mass_props: MassProps,
    pub damping: DampingSpec,
    pub actuation: ActuationParams,
    /// Nominal (v_max, omega_max).
    pub vel_limits: (f64, f64),
    /// Shaping weight, <= 0 (penalty only).
    pub shaping_weight: f64,
    /// Early termination when the twist exceeds this multiple of the limits.
    pub runaway_factor: f64,
}

impl RobotSpec {
    /// Air-bearing platform: frictionless planar body, 8 binary thrusters in
    /// 4 balanced pairs on an octagonal body. Each body location carries a
    /// CW and a CCW tangential thruster, so firing all 8 nets zero wrench.
    pub fn floating_platform() -> Self {
        let r = 0.25;
        let mass = 5.0;
        let mut positions = Vec::with_capacity(8);
        let mut directions = Vec::with_capacity(8);
        for k in 0..4 {
            let ang = k as f64 * core::f64::consts::FRAC_PI_2;
            let pos = [r * math::cos(ang), r * math::sin(ang)];
            let ccw = [-math::sin(ang), math::cos(ang)];
            positions.push(pos);
            directions.push(ccw);
            positions.push(pos);
            directions.push([-ccw[0], -ccw[1]]);
        }
        RobotSpec {
            kind: RobotKind::FloatingPlatform,
            control_space: ControlSpace::Binary(8),
            mass_props: MassProps::new(mass, 0.5 * mass * r * r, [0.0, 0.0]).unwrap(),
            damping: DampingSpec::ZERO,
            actuation: ActuationParams::Thrusters {
                positions,
                directions,
                thrust_force: 1.0,
            },
            vel_limits: (1.0, 2.0),
            shaping_weight: -0.02,
            runaway_factor: 5.0,
        }
    }

    /// Catamaran surface vessel: two stern propellers, first-order thrust
    /// lag, strong lateral drag. Coefficients tuned for a terminal speed of
    /// roughly 2 m/s under full forward thrust.
    pub fn kingfisher() -> Self {
        RobotSpec {
            kind: RobotKind::Kingfisher,
            control_space: ControlSpace::Continuous(2),
            mass_props: MassProps::new(28.0, 6.5, [0.0, 0.0]).unwrap(),
            damping: DampingSpec {
                linear: [2.0, 30.0, 4.0],
                quadratic: [8.0, 80.0, 4.0],
            },
            actuation: ActuationParams::Propellers {
                positions: [[-0.35, 0.25], [-0.35, -0.25]],
                max_thrust_fwd: 19.0,
                max_thrust_rev: 9.5,
                lag_tau: 0.2,
            },
            vel_limits: (2.5, 2.0),
            shaping_weight: -0.02,
            runaway_factor: 5.0,
        }
    }

    /// Differential-drive ground robot modeled as a velocity servo toward
    /// commanded (v, omega); no lateral motion.
    pub fn turtlebot2() -> Self {
        RobotSpec {
            kind: RobotKind::Turtlebot2,
            control_space: ControlSpace::Continuous(2),
            mass_props: MassProps::new(6.3, 0.1, [0.0, 0.0]).unwrap(),
            damping: DampingSpec::ZERO,
            actuation: ActuationParams::DiffDrive {
                wheel_base: 0.23,
                v_cmd_max: 0.5,
                omega_cmd_max: core::f64::consts::PI,
                tracking_gain: 20.0,
            },
            vel_limits: (0.5, core::f64::consts::PI),
            shaping_weight: -0.02,
            runaway_factor: 5.0,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "floating_platform" => Some(Self::floating_platform()),
            "kingfisher" => Some(Self::kingfisher()),
            "turtlebot2" => Some(Self::turtlebot2()),
            _ => None,
        }
    }

    pub fn registry_names() -> &'static [&'static str] {
        &["floating_platform", "kingfisher", "turtlebot2"]
    }

    pub fn action_dim(&self) -> usize {
        self.control_space.dim()
    }

    /// Upper bound on `||(fx, fy)||` and `|tau|` for any admissible action.
    pub fn wrench_bound(&self) -> (f64, f64) {
        match &self.actuation {
            ActuationParams::Thrusters { positions, thrust_force, .. } => {
                let n = positions.len() as f64;
                let max_arm = positions
                    .iter()
                    .map(|p| math::hypot(p[0], p[1]))
                    .fold(0.0, f64::max);
                (n * thrust_force, n * thrust_force * max_arm)
            }
            ActuationParams::Propellers { positions, max_thrust_fwd, .. } => {
                let max_arm = positions
                    .iter()
                    .map(|p| math::hypot(p[0], p[1]))
                    .fold(0.0, f64::max);
                (2.0 * max_thrust_fwd, 2.0 * max_thrust_fwd * max_arm)
            }
            ActuationParams::DiffDrive { v_cmd_max, omega_cmd_max, tracking_gain, .. } => {
                // servo force against the clamped velocity range
                let v_span = v_cmd_max + SAFETY_CLAMP_FACTOR * self.vel_limits.0;
                let w_span = omega_cmd_max + SAFETY_CLAMP_FACTOR * self.vel_limits.1;
                (
                    self.mass_props.mass * tracking_gain * v_span,
                    self.mass_props.inertia_zz * tracking_gain * w_span,
                )
            }
        }
    }
}

/// Raw action mapped into robot command space.
///
/// `normalized` is the thresholded/clipped action in policy units (bits in
/// {0,1} or components in [-1,1]); `command` is the physical command
/// (thrust in N, or commanded velocities).
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessedAction {
    pub normalized: Vec<f64>,
    pub command: Vec<f64>,
}

impl ProcessedAction {
    pub fn zero(dim: usize) -> Self {
        Self { normalized: vec![0.0; dim], command: vec![0.0; dim] }
    }
}

/// Per-environment mutable actuation state (thrust lag filters).
#[derive(Clone, Debug, Default)]
pub struct ActuatorState {
    pub lag: Vec<f64>,
}

impl ActuatorState {
    pub fn for_robot(spec: &RobotSpec) -> Self {
        match spec.actuation {
            ActuationParams::Propellers { .. } => Self { lag: vec![0.0; 2] },
            _ => Self { lag: Vec::new() },
        }
    }

    pub fn reset(&mut self) {
        for v in &mut self.lag {
            *v = 0.0;
        }
    }
}

/// Maps a raw policy action into the robot's command space.
pub fn process_actions(spec: &RobotSpec, raw: &[f64]) -> Result<ProcessedAction> {
    let dim = spec.action_dim();
    if raw.len() != dim {
        return Err(Error::Contract(format!(
            "action dimension {} does not match control space {}",
            raw.len(),
            dim
        )));
    }
    match &spec.actuation {
        ActuationParams::Thrusters { thrust_force, .. } => {
            let bits: Vec<f64> =
                raw.iter().map(|&a| if a >= 0.5 { 1.0 } else { 0.0 }).collect();
            let command = bits.iter().map(|&b| b * thrust_force).collect();
            Ok(ProcessedAction { normalized: bits, command })
        }
        ActuationParams::Propellers { max_thrust_fwd, max_thrust_rev, .. } => {
            let clipped: Vec<f64> = raw.iter().map(|&a| a.clamp(-1.0, 1.0)).collect();
            let command = clipped
                .iter()
                .map(|&c| if c >= 0.0 { c * max_thrust_fwd } else { c * max_thrust_rev })
                .collect();
            Ok(ProcessedAction { normalized: clipped, command })
        }
        ActuationParams::DiffDrive { v_cmd_max, omega_cmd_max, .. } => {
            let clipped: Vec<f64> = raw.iter().map(|&a| a.clamp(-1.0, 1.0)).collect();
            let command = vec![clipped[0] * v_cmd_max, clipped[1] * omega_cmd_max];
            Ok(ProcessedAction { normalized: clipped, command })
        }
    }
}

/// Converts a processed command into a body wrench for one physics substep.
/// Advances the actuator lag state where the robot has one.
pub fn apply_actions(
    spec: &RobotSpec,
    processed: &ProcessedAction,
    state: &PlanarState,
    act_state: &mut ActuatorState,
    dt: f64,
) -> Wrench2 {
    match &spec.actuation {
        ActuationParams::Thrusters { positions, directions, .. } => {
            let mut w = Wrench2::ZERO;
            for i in 0..positions.len() {
                let f = processed.command[i];
                if f != 0.0 {
                    let d = directions[i];
                    let p = positions[i];
                    w.fx += f * d[0];
                    w.fy += f * d[1];
                    w.tau += p[0] * f * d[1] - p[1] * f * d[0];
                }
            }
            w
        }
        ActuationParams::Propellers { positions, lag_tau, .. } => {
            let alpha = 1.0 - math::exp(-dt / lag_tau);
            let mut w = Wrench2::ZERO;
            for i in 0..2 {
                act_state.lag[i] += alpha * (processed.command[i] - act_state.lag[i]);
                let t = act_state.lag[i];
                // thrust acts along +x at the propeller position
                w.fx += t;
                w.tau += -positions[i][1] * t;
            }
            w
        }
        ActuationParams::DiffDrive { tracking_gain, .. } => {
            let (v_cmd, w_cmd) = (processed.command[0], processed.command[1]);
            Wrench2 {
                fx: spec.mass_props.mass * tracking_gain * (v_cmd - state.twist.vx),
                fy: 0.0,
                tau: spec.mass_props.inertia_zz * tracking_gain * (w_cmd - state.twist.omega),
            }
        }
    }
}

/// Penalty on actuation change between consecutive control steps: Hamming
/// distance for binary thrusters, squared L2 in normalized units otherwise.
/// Zero when the action repeats.
pub fn robot_shaping_reward(
    spec: &RobotSpec,
    processed: &ProcessedAction,
    prev: &ProcessedAction,
) -> f64 {
    debug_assert_eq!(processed.normalized.len(), prev.normalized.len());
    let change: f64 = match spec.control_space {
        ControlSpace::Binary(_) => processed
            .normalized
            .iter()
            .zip(&prev.normalized)
            .filter(|(a, b)| a != b)
            .count() as f64,
        ControlSpace::Continuous(_) => processed
            .normalized
            .iter()
            .zip(&prev.normalized)
            .map(|(a, b)| (a - b) * (a - b))
            .sum(),
    };
    spec.shaping_weight * change
}

/// Robot-side termination: early when the twist leaves the safety envelope.
/// Robots never request a clean termination in this suite.
pub fn robot_get_dones(spec: &RobotSpec, state: &PlanarState) -> (bool, bool) {
    let (v_max, w_max) = spec.vel_limits;
    let early = state.twist.speed() > spec.runaway_factor * v_max
        || math::abs(state.twist.omega) > spec.runaway_factor * w_max;
    (early, false)
}

/// Post-integration hook: enforces the non-holonomic constraint for the
/// differential drive and clamps the twist into the hard safety envelope.
pub fn enforce_constraints(spec: &RobotSpec, state: &mut PlanarState) {
    if matches!(spec.actuation, ActuationParams::DiffDrive { .. }) {
        state.twist.vy = 0.0;
    }
    let (v_max, w_max) = spec.vel_limits;
    let v_cap = SAFETY_CLAMP_FACTOR * v_max;
    let w_cap = SAFETY_CLAMP_FACTOR * w_max;
    let speed = state.twist.speed();
    if speed > v_cap {
        let s = v_cap / speed;
        state.twist.vx *= s;
        state.twist.vy *= s;
    }
    state.twist.omega = state.twist.omega.clamp(-w_cap, w_cap);
}

/// Human-readable robot registry listing for error messages.
pub fn registry_listing() -> String {
    let mut s = String::new();
    for (i, name) in RobotSpec::registry_names().iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        s.push_str(name);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar::{integrate_step, Pose2, Twist2};
    use approx::assert_abs_diff_eq;

    #[test]
    fn floating_platform_layout_is_balanced() {
        let spec = RobotSpec::floating_platform();
        let all_on = vec![1.0; 8];
        let processed = process_actions(&spec, &all_on).unwrap();
        let mut act = ActuatorState::for_robot(&spec);
        let state = PlanarState::at_rest(Pose2::ORIGIN);
        let w = apply_actions(&spec, &processed, &state, &mut act, 0.02);
        assert_abs_diff_eq!(w.fx, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.fy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.tau, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn floating_platform_null_action() {
        let spec = RobotSpec::floating_platform();
        let processed = process_actions(&spec, &[0.0; 8]).unwrap();
        assert!(processed.command.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn floating_platform_opposing_pair_is_pure_torque() {
        let spec = RobotSpec::floating_platform();
        // CCW thrusters at opposite body locations: indices 0 (angle 0) and 4 (angle pi)
        let mut raw = vec![0.0; 8];
        raw[0] = 1.0;
        raw[4] = 1.0;
        let processed = process_actions(&spec, &raw).unwrap();
        let mut act = ActuatorState::for_robot(&spec);
        let state = PlanarState::at_rest(Pose2::ORIGIN);
        let w = apply_actions(&spec, &processed, &state, &mut act, 0.02);
        assert_abs_diff_eq!(w.fx, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.fy, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.tau, 2.0 * 0.25 * 1.0, epsilon = 1e-12);
    }

    #[test]
    fn turtlebot_saturates_to_max_command() {
        let spec = RobotSpec::turtlebot2();
        let processed = process_actions(&spec, &[1.0, 0.0]).unwrap();
        assert_eq!(processed.command, vec![0.5, 0.0]);
        let over = process_actions(&spec, &[3.0, 0.0]).unwrap();
        assert_eq!(over.command, vec![0.5, 0.0]);
    }

    #[test]
    fn kingfisher_symmetric_thrust_has_no_torque() {
        let spec = RobotSpec::kingfisher();
        let processed = process_actions(&spec, &[0.5, 0.5]).unwrap();
        assert_eq!(processed.command[0], processed.command[1]);
        assert_abs_diff_eq!(processed.command[0], 0.5 * 19.0, epsilon = 1e-12);
        let mut act = ActuatorState::for_robot(&spec);
        let state = PlanarState::at_rest(Pose2::ORIGIN);
        let w = apply_actions(&spec, &processed, &state, &mut act, 0.02);
        assert_abs_diff_eq!(w.tau, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kingfisher_first_step_lag() {
        let spec = RobotSpec::kingfisher();
        let dt = 0.02;
        let processed = process_actions(&spec, &[1.0, 1.0]).unwrap();
        let mut act = ActuatorState::for_robot(&spec);
        let state = PlanarState::at_rest(Pose2::ORIGIN);
        let w = apply_actions(&spec, &processed, &state, &mut act, dt);
        let alpha = 1.0 - (-dt / 0.2f64).exp();
        assert_abs_diff_eq!(w.fx, 2.0 * 19.0 * alpha, epsilon = 1e-12);
        assert_abs_diff_eq!(w.fy, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kingfisher_asymmetric_reverse() {
        let spec = RobotSpec::kingfisher();
        let fwd = process_actions(&spec, &[1.0, 1.0]).unwrap();
        let rev = process_actions(&spec, &[-1.0, -1.0]).unwrap();
        assert_abs_diff_eq!(rev.command[0], -0.5 * fwd.command[0], epsilon = 1e-12);
    }

    #[test]
    fn turtlebot_at_setpoint_yields_near_zero_wrench() {
        let spec = RobotSpec::turtlebot2();
        let processed = process_actions(&spec, &[0.6, 0.2]).unwrap();
        let state = PlanarState {
            pose: Pose2::ORIGIN,
            twist: Twist2::new(processed.command[0], 0.0, processed.command[1]),
        };
        let mut act = ActuatorState::for_robot(&spec);
        let w = apply_actions(&spec, &processed, &state, &mut act, 0.02);
        assert_abs_diff_eq!(w.fx, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.tau, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_a_contract_error() {
        let spec = RobotSpec::turtlebot2();
        assert!(process_actions(&spec, &[0.1]).is_err());
        let fp = RobotSpec::floating_platform();
        assert!(process_actions(&fp, &[0.0; 7]).is_err());
    }

    #[test]
    fn shaping_zero_when_action_repeats() {
        let spec = RobotSpec::turtlebot2();
        let a = process_actions(&spec, &[0.3, -0.4]).unwrap();
        assert_eq!(robot_shaping_reward(&spec, &a, &a), 0.0);
    }

    #[test]
    fn shaping_hamming_for_binary() {
        let mut spec = RobotSpec::floating_platform();
        spec.shaping_weight = -0.1;
        let prev = process_actions(&spec, &[0.0; 8]).unwrap();
        let mut raw = vec![0.0; 8];
        raw[1] = 1.0;
        raw[4] = 1.0;
        raw[6] = 1.0;
        let cur = process_actions(&spec, &raw).unwrap();
        assert_abs_diff_eq!(robot_shaping_reward(&spec, &cur, &prev), -0.3, epsilon = 1e-12);
    }

    #[test]
    fn shaping_squared_l2_for_continuous() {
        let mut spec = RobotSpec::turtlebot2();
        spec.shaping_weight = -0.1;
        let prev = process_actions(&spec, &[0.0, 0.0]).unwrap();
        let cur = process_actions(&spec, &[0.1, 0.0]).unwrap();
        assert_abs_diff_eq!(robot_shaping_reward(&spec, &cur, &prev), -0.001, epsilon = 1e-12);
    }

    #[test]
    fn dones_nominal_and_runaway() {
        let spec = RobotSpec::turtlebot2();
        let nominal = PlanarState {
            pose: Pose2::ORIGIN,
            twist: Twist2::new(0.3, 0.0, 0.5),
        };
        assert_eq!(robot_get_dones(&spec, &nominal), (false, false));
        let runaway = PlanarState {
            pose: Pose2::ORIGIN,
            twist: Twist2::new(0.0, 0.0, 10.0 * spec.vel_limits.1),
        };
        assert_eq!(robot_get_dones(&spec, &runaway), (true, false));
        let rest = PlanarState::at_rest(Pose2::ORIGIN);
        assert_eq!(robot_get_dones(&spec, &rest), (false, false));
    }

    #[test]
    fn frictionless_platform_drifts_forever() {
        let spec = RobotSpec::floating_platform();
        let mut state = PlanarState {
            pose: Pose2::ORIGIN,
            twist: Twist2::new(0.4, -0.2, 0.3),
        };
        let twist0 = state.twist;
        let processed = ProcessedAction::zero(8);
        let mut act = ActuatorState::for_robot(&spec);
        for _ in 0..1000 {
            let w = apply_actions(&spec, &processed, &state, &mut act, 0.02);
            state =
                integrate_step(&state, w, &spec.mass_props, &spec.damping, 0.02).unwrap();
        }
        assert_eq!(state.twist, twist0);
    }

    #[test]
    fn kingfisher_reaches_finite_terminal_speed() {
        let spec = RobotSpec::kingfisher();
        let processed = process_actions(&spec, &[1.0, 1.0]).unwrap();
        let mut act = ActuatorState::for_robot(&spec);
        let mut state = PlanarState::at_rest(Pose2::ORIGIN);
        let mut prev_v = 0.0;
        for _ in 0..5000 {
            let w = apply_actions(&spec, &processed, &state, &mut act, 0.02);
            state =
                integrate_step(&state, w, &spec.mass_props, &spec.damping, 0.02).unwrap();
            prev_v = state.twist.vx;
        }
        // converged and in a plausible band around 2 m/s
        assert!((state.twist.vx - prev_v).abs() < 1e-6);
        assert!(state.twist.vx > 1.0 && state.twist.vx < 3.0, "v = {}", state.twist.vx);
    }

    #[test]
    fn wrench_stays_within_precomputed_bound() {
        for spec in [
            RobotSpec::floating_platform(),
            RobotSpec::kingfisher(),
            RobotSpec::turtlebot2(),
        ] {
            let (f_bound, tau_bound) = spec.wrench_bound();
            let mut rng = crate::rng::StreamRng::from_key(99);
            let dim = spec.action_dim();
            let state = PlanarState {
                pose: Pose2::ORIGIN,
                twist: Twist2::new(0.5, 0.0, -0.5),
            };
            let mut act = ActuatorState::for_robot(&spec);
            for _ in 0..200 {
                let raw: Vec<f64> = (0..dim).map(|_| rng.uniform(-2.0, 2.0)).collect();
                let p = process_actions(&spec, &raw).unwrap();
                let w = apply_actions(&spec, &p, &state, &mut act, 0.02);
                assert!(math::hypot(w.fx, w.fy) <= f_bound + 1e-9);
                assert!(math::abs(w.tau) <= tau_bound + 1e-9);
            }
        }
    }

    #[test]
    fn diff_drive_constraint_zeroes_lateral_velocity() {
        let spec = RobotSpec::turtlebot2();
        let mut state = PlanarState {
            pose: Pose2::ORIGIN,
            twist: Twist2::new(0.2, 0.15, 0.0),
        };
        enforce_constraints(&spec, &mut state);
        assert_eq!(state.twist.vy, 0.0);
    }
}
