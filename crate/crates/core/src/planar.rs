//! Planar rigid-body math shared by every robot model.
//!
//! A body is a single 3-DoF rigid body: world-frame pose `(x, y, yaw)` and
//! body-frame twist `(vx, vy, omega)`. Forces and torques are expressed in
//! the body frame. Integration is semi-implicit (symplectic) Euler: the twist
//! is updated from accelerations at the current state, then the pose is
//! advanced with the *new* twist. With zero wrench and zero damping the twist
//! is bit-unchanged, so frictionless drift is exact.

use crate::error::{Error, Result};
use crate::math;
use alloc::format;

pub const PI: f64 = core::f64::consts::PI;
pub const TWO_PI: f64 = 2.0 * PI;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    debug_assert!(theta.is_finite(), "normalize_angle: non-finite input");
    let mut r = theta - TWO_PI * math::floor((theta + PI) / TWO_PI);
    // floor form yields [-pi, pi); fold the open end onto +pi
    if r <= -PI {
        r += TWO_PI;
    }
    r
}

/// World-frame pose. `yaw` is kept in `(-pi, pi]` by every constructor and
/// by the integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2 {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw: normalize_angle(yaw) }
    }

    pub const ORIGIN: Pose2 = Pose2 { x: 0.0, y: 0.0, yaw: 0.0 };

    /// Expresses a world point in this pose's body frame.
    pub fn world_to_body(&self, point: [f64; 2]) -> [f64; 2] {
        let dx = point[0] - self.x;
        let dy = point[1] - self.y;
        let (s, c) = (math::sin(self.yaw), math::cos(self.yaw));
        [c * dx + s * dy, -s * dx + c * dy]
    }

    /// Inverse of [`world_to_body`](Self::world_to_body).
    pub fn body_to_world(&self, point: [f64; 2]) -> [f64; 2] {
        let (s, c) = (math::sin(self.yaw), math::cos(self.yaw));
        [self.x + c * point[0] - s * point[1], self.y + s * point[0] + c * point[1]]
    }

    /// Rotates a body-frame vector into the world frame (no translation).
    pub fn rotate_body_to_world(&self, v: [f64; 2]) -> [f64; 2] {
        let (s, c) = (math::sin(self.yaw), math::cos(self.yaw));
        [c * v[0] - s * v[1], s * v[0] + c * v[1]]
    }
}

/// Body-frame twist: forward, lateral, angular velocity.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Twist2 {
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
}

impl Twist2 {
    pub const ZERO: Twist2 = Twist2 { vx: 0.0, vy: 0.0, omega: 0.0 };

    pub fn new(vx: f64, vy: f64, omega: f64) -> Self {
        Self { vx, vy, omega }
    }

    pub fn speed(&self) -> f64 {
        math::hypot(self.vx, self.vy)
    }
}

/// Body-frame force and torque. Accumulation is plain component addition.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Wrench2 {
    pub fx: f64,
    pub fy: f64,
    pub tau: f64,
}

impl Wrench2 {
    pub const ZERO: Wrench2 = Wrench2 { fx: 0.0, fy: 0.0, tau: 0.0 };

    pub fn new(fx: f64, fy: f64, tau: f64) -> Self {
        Self { fx, fy, tau }
    }
}

impl core::ops::Add for Wrench2 {
    type Output = Wrench2;
    fn add(self, rhs: Wrench2) -> Wrench2 {
        Wrench2 { fx: self.fx + rhs.fx, fy: self.fy + rhs.fy, tau: self.tau + rhs.tau }
    }
}

impl core::ops::AddAssign for Wrench2 {
    fn add_assign(&mut self, rhs: Wrench2) {
        self.fx += rhs.fx;
        self.fy += rhs.fy;
        self.tau += rhs.tau;
    }
}

/// Mass, planar inertia, and body-frame center-of-mass offset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassProps {
    pub mass: f64,
    pub inertia_zz: f64,
    pub com_offset: [f64; 2],
}

impl MassProps {
    pub fn new(mass: f64, inertia_zz: f64, com_offset: [f64; 2]) -> Result<Self> {
        if !(mass > 0.0) || !(inertia_zz > 0.0) {
            return Err(Error::Config(format!(
                "mass and inertia must be positive, got mass={mass}, inertia={inertia_zz}"
            )));
        }
        Ok(Self { mass, inertia_zz, com_offset })
    }
}

/// Diagonal linear + quadratic damping on `(vx, vy, omega)`.
///
/// Zero damping reproduces frictionless planar motion; nonzero values model
/// hydrodynamic drag.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DampingSpec {
    pub linear: [f64; 3],
    pub quadratic: [f64; 3],
}

impl DampingSpec {
    pub const ZERO: DampingSpec = DampingSpec { linear: [0.0; 3], quadratic: [0.0; 3] };
}

/// Pose and twist of one body.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanarState {
    pub pose: Pose2,
    pub twist: Twist2,
}

impl PlanarState {
    pub fn at_rest(pose: Pose2) -> Self {
        Self { pose, twist: Twist2::ZERO }
    }

    pub fn is_finite(&self) -> bool {
        self.pose.x.is_finite()
            && self.pose.y.is_finite()
            && self.pose.yaw.is_finite()
            && self.twist.vx.is_finite()
            && self.twist.vy.is_finite()
            && self.twist.omega.is_finite()
    }
}

/// One semi-implicit Euler step.
///
/// The applied wrench is given about the body origin; a CoM offset remaps it
/// through the standard lever-arm coupling before the angular acceleration is
/// computed. Damping opposes the current twist component-wise.
pub fn integrate_step(
    state: &PlanarState,
    wrench: Wrench2,
    props: &MassProps,
    damping: &DampingSpec,
    dt: f64,
) -> Result<PlanarState> {
    debug_assert!(dt > 0.0);
    let tw = state.twist;

    // lever arm from CoM to the body origin
    let [cx, cy] = props.com_offset;
    let tau_applied = wrench.tau + (-cx) * wrench.fy - (-cy) * wrench.fx;

    let fx = wrench.fx
        - damping.linear[0] * tw.vx
        - damping.quadratic[0] * tw.vx * math::abs(tw.vx);
    let fy = wrench.fy
        - damping.linear[1] * tw.vy
        - damping.quadratic[1] * tw.vy * math::abs(tw.vy);
    let tau = tau_applied
        - damping.linear[2] * tw.omega
        - damping.quadratic[2] * tw.omega * math::abs(tw.omega);

    let twist = Twist2 {
        vx: tw.vx + dt * fx / props.mass,
        vy: tw.vy + dt * fy / props.mass,
        omega: tw.omega + dt * tau / props.inertia_zz,
    };

    let [wvx, wvy] = state.pose.rotate_body_to_world([twist.vx, twist.vy]);
    let x = state.pose.x + dt * wvx;
    let y = state.pose.y + dt * wvy;
    let yaw = state.pose.yaw + dt * twist.omega;

    let finite = x.is_finite()
        && y.is_finite()
        && yaw.is_finite()
        && twist.vx.is_finite()
        && twist.vy.is_finite()
        && twist.omega.is_finite();
    if !finite {
        return Err(Error::SimFault {
            env: None,
            detail: format!(
                "non-finite state after integration: pose=({x}, {y}, {yaw}), twist={twist:?}"
            ),
        });
    }
    Ok(PlanarState { pose: Pose2::new(x, y, yaw), twist })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn normalize_angle_identity() {
        assert_eq!(normalize_angle(0.0), 0.0);
    }

    #[test]
    fn normalize_angle_three_pi() {
        assert_abs_diff_eq!(normalize_angle(3.0 * PI), PI, epsilon = 1e-12);
    }

    #[test]
    fn normalize_angle_negative_three_and_half_pi() {
        // oracle: repeated +-2pi reduction
        let mut theta = -3.5 * PI;
        while theta <= -PI {
            theta += TWO_PI;
        }
        while theta > PI {
            theta -= TWO_PI;
        }
        assert_abs_diff_eq!(theta, 0.5 * PI, epsilon = 1e-12);
        assert_abs_diff_eq!(normalize_angle(-3.5 * PI), 0.5 * PI, epsilon = 1e-12);
    }

    #[test]
    fn normalize_angle_range_endpoints() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
    }

    #[test]
    fn world_to_body_identity_pose() {
        let p = Pose2::ORIGIN;
        assert_eq!(p.world_to_body([1.0, 0.0]), [1.0, 0.0]);
    }

    #[test]
    fn world_to_body_quarter_turn() {
        // hand evaluation: R(-pi/2) * (0,1) = (1, 0)
        let p = Pose2::new(0.0, 0.0, PI / 2.0);
        let b = p.world_to_body([0.0, 1.0]);
        assert_abs_diff_eq!(b[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn world_to_body_translation_only() {
        let p = Pose2::new(2.0, 0.0, 0.0);
        let b = p.world_to_body([2.0, 0.0]);
        assert_abs_diff_eq!(b[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn coasting_advances_along_heading() {
        let props = MassProps::new(1.0, 1.0, [0.0, 0.0]).unwrap();
        let state = PlanarState {
            pose: Pose2::new(0.0, 0.0, 0.3),
            twist: Twist2::new(1.0, 0.0, 0.0),
        };
        let next =
            integrate_step(&state, Wrench2::ZERO, &props, &DampingSpec::ZERO, 0.1).unwrap();
        assert_eq!(next.twist, state.twist);
        assert_abs_diff_eq!(next.pose.x, 0.1 * math::cos(0.3), epsilon = 1e-12);
        assert_abs_diff_eq!(next.pose.y, 0.1 * math::sin(0.3), epsilon = 1e-12);
    }

    #[test]
    fn force_equals_mass_times_acceleration() {
        let m = 2.5;
        let a = 0.8;
        let dt = 0.05;
        let props = MassProps::new(m, 1.0, [0.0, 0.0]).unwrap();
        let state = PlanarState::at_rest(Pose2::ORIGIN);
        let next = integrate_step(
            &state,
            Wrench2::new(m * a, 0.0, 0.0),
            &props,
            &DampingSpec::ZERO,
            dt,
        )
        .unwrap();
        assert_abs_diff_eq!(next.twist.vx, a * dt, epsilon = 1e-12);
    }

    #[test]
    fn linear_drag_matches_exponential_decay() {
        // dvx/dt = -(c/m) vx  =>  vx(t) = vx0 * exp(-c t / m)
        let m = 3.0;
        let c = 1.7;
        let dt = 1e-3;
        let props = MassProps::new(m, 1.0, [0.0, 0.0]).unwrap();
        let damping = DampingSpec { linear: [c, 0.0, 0.0], quadratic: [0.0; 3] };
        let mut state = PlanarState {
            pose: Pose2::ORIGIN,
            twist: Twist2::new(1.0, 0.0, 0.0),
        };
        for _ in 0..1000 {
            state = integrate_step(&state, Wrench2::ZERO, &props, &damping, dt).unwrap();
        }
        let analytic = math::exp(-c * 1.0 / m);
        let rel = (state.twist.vx - analytic).abs() / analytic;
        assert!(rel < 0.01, "relative error {rel}");
    }

    #[test]
    fn com_offset_couples_force_to_torque() {
        let props = MassProps::new(1.0, 1.0, [0.0, 0.1]).unwrap();
        let state = PlanarState::at_rest(Pose2::ORIGIN);
        // pure +x force at the origin, CoM at +y: torque = (-r) x F with r = com
        let next = integrate_step(
            &state,
            Wrench2::new(1.0, 0.0, 0.0),
            &props,
            &DampingSpec::ZERO,
            0.01,
        )
        .unwrap();
        // tau = +cy * fx = 0.1
        assert_abs_diff_eq!(next.twist.omega, 0.1 * 0.01, epsilon = 1e-12);
    }

    #[test]
    fn integration_is_deterministic() {
        let props = MassProps::new(2.0, 0.5, [0.01, -0.02]).unwrap();
        let damping = DampingSpec { linear: [0.3, 0.6, 0.1], quadratic: [0.05, 0.1, 0.01] };
        let state = PlanarState {
            pose: Pose2::new(0.2, -0.3, 1.1),
            twist: Twist2::new(0.4, -0.1, 0.7),
        };
        let w = Wrench2::new(0.3, -0.2, 0.05);
        let a = integrate_step(&state, w, &props, &damping, 0.02).unwrap();
        let b = integrate_step(&state, w, &props, &damping, 0.02).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_wrench_is_a_fault() {
        let props = MassProps::new(1.0, 1.0, [0.0, 0.0]).unwrap();
        let state = PlanarState::at_rest(Pose2::ORIGIN);
        let err = integrate_step(
            &state,
            Wrench2::new(f64::NAN, 0.0, 0.0),
            &props,
            &DampingSpec::ZERO,
            0.02,
        );
        assert!(err.is_err());
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(theta in -100.0f64..100.0) {
            let once = normalize_angle(theta);
            prop_assert_eq!(normalize_angle(once), once);
            prop_assert!(once > -PI && once <= PI);
        }

        #[test]
        fn normalize_preserves_angle_mod_two_pi(theta in -100.0f64..100.0) {
            let r = normalize_angle(theta);
            let k = (theta - r) / TWO_PI;
            prop_assert!((k - libm::round(k)).abs() < 1e-9);
        }

        #[test]
        fn frame_round_trip(
            x in -10.0f64..10.0, y in -10.0f64..10.0, yaw in -10.0f64..10.0,
            px in -10.0f64..10.0, py in -10.0f64..10.0,
        ) {
            let pose = Pose2::new(x, y, yaw);
            let rt = pose.body_to_world(pose.world_to_body([px, py]));
            prop_assert!((rt[0] - px).abs() < 1e-12);
            prop_assert!((rt[1] - py).abs() < 1e-12);
        }

        #[test]
        fn zero_wrench_zero_damping_conserves_twist(
            vx in -2.0f64..2.0, vy in -2.0f64..2.0, om in -2.0f64..2.0,
        ) {
            let props = MassProps::new(5.0, 1.0, [0.0, 0.0]).unwrap();
            let state = PlanarState {
                pose: Pose2::ORIGIN,
                twist: Twist2::new(vx, vy, om),
            };
            let next = integrate_step(&state, Wrench2::ZERO, &props, &DampingSpec::ZERO, 0.02)
                .unwrap();
            prop_assert_eq!(next.twist, state.twist);
        }
    }
}
