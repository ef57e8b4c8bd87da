//! Deterministic per-environment domain randomization.
//!
//! The engine perturbs mass properties at reset, injects noise and rescaling
//! into actions, adds sensor-style noise to observations, and applies
//! external wrench disturbances during stepping. Every draw comes from a
//! counter-based stream keyed on `(global_seed, env, episode, category)`, so
//! the perturbation sequence an environment sees is independent of batch
//! size and stepping order.

use crate::error::{Error, Result};
use crate::math;
use crate::planar::{MassProps, Wrench2, PI};
use crate::rng::{StreamId, StreamRng};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MassMode {
    Uniform,
    Normal,
    ConstantTimeDecay,
    ActionBasedDecay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComMode {
    Uniform,
    Normal,
    /// Accepted for config compatibility; currently a no-op.
    Spring,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InertiaMode {
    Uniform,
    Normal,
    Decay,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseMode {
    Uniform,
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WrenchMode {
    KickUniform,
    KickNormal,
    ConstantUniform,
    ConstantNormal,
    ConstantSinusoidal,
}

/// Parses a catalog mode name; unknown names are rejected at load.
pub fn parse_mode<T: ModeName>(name: &str) -> Result<T> {
    T::from_name(name).ok_or_else(|| {
        Error::Config(format!("unknown randomization mode {name:?} for {}", T::CATEGORY))
    })
}

pub trait ModeName: Sized {
    const CATEGORY: &'static str;
    fn from_name(name: &str) -> Option<Self>;
}

impl ModeName for MassMode {
    const CATEGORY: &'static str = "mass";
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Self::Uniform),
            "normal" => Some(Self::Normal),
            "constant_time_decay" => Some(Self::ConstantTimeDecay),
            "action_based_decay" => Some(Self::ActionBasedDecay),
            _ => None,
        }
    }
}

impl ModeName for ComMode {
    const CATEGORY: &'static str = "com";
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Self::Uniform),
            "normal" => Some(Self::Normal),
            "spring" => Some(Self::Spring),
            _ => None,
        }
    }
}

impl ModeName for InertiaMode {
    const CATEGORY: &'static str = "inertia";
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Self::Uniform),
            "normal" => Some(Self::Normal),
            "decay" => Some(Self::Decay),
            _ => None,
        }
    }
}

impl ModeName for NoiseMode {
    const CATEGORY: &'static str = "actions/observations";
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform" => Some(Self::Uniform),
            "normal" => Some(Self::Normal),
            _ => None,
        }
    }
}

impl ModeName for WrenchMode {
    const CATEGORY: &'static str = "wrench";
    fn from_name(name: &str) -> Option<Self> {
        match name {
            "kick_uniform" => Some(Self::KickUniform),
            "kick_normal" => Some(Self::KickNormal),
            "constant_uniform" => Some(Self::ConstantUniform),
            "constant_normal" => Some(Self::ConstantNormal),
            "constant_sinusoidal" => Some(Self::ConstantSinusoidal),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MassRandCfg {
    pub enable: bool,
    pub modes: Vec<MassMode>,
    /// Bound on |delta mass| [kg].
    pub max_delta: f64,
    /// Std for the normal mode [kg].
    pub std: f64,
    /// Mass change per second for decay modes [kg/s].
    pub mass_change_rate: f64,
    /// Mass never drops below this floor [kg].
    pub mass_floor: f64,
}

impl Default for MassRandCfg {
    fn default() -> Self {
        Self {
            enable: false,
            modes: vec![MassMode::Uniform],
            max_delta: 0.1,
            std: 0.05,
            mass_change_rate: -0.025,
            mass_floor: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComRandCfg {
    pub enable: bool,
    pub modes: Vec<ComMode>,
    /// Bound on |delta| per axis [m].
    pub max_delta: f64,
    pub std: f64,
}

impl Default for ComRandCfg {
    fn default() -> Self {
        Self { enable: false, modes: vec![ComMode::Uniform], max_delta: 0.05, std: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InertiaRandCfg {
    pub enable: bool,
    pub modes: Vec<InertiaMode>,
    pub max_delta: f64,
    pub std: f64,
    /// Inertia change per second for the decay mode; defaults to the mass
    /// decay rate when unset.
    pub decay_rate: Option<f64>,
}

impl Default for InertiaRandCfg {
    fn default() -> Self {
        Self {
            enable: false,
            modes: vec![InertiaMode::Uniform],
            max_delta: 0.01,
            std: 0.005,
            decay_rate: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyActionsCfg {
    pub enable: bool,
    pub modes: Vec<NoiseMode>,
    /// Half-open index ranges of the action vector the noise applies to.
    pub slices: Vec<(usize, usize)>,
    /// Per-slice noise amplitude bound.
    pub max_delta: Vec<f64>,
    /// Per-slice clip bounds applied after noise and rescaling.
    pub clip_actions: Vec<(f64, f64)>,
}

impl Default for NoisyActionsCfg {
    fn default() -> Self {
        Self {
            enable: false,
            modes: vec![NoiseMode::Uniform],
            slices: vec![(0, 2)],
            max_delta: vec![0.025],
            clip_actions: vec![(-1.0, 1.0)],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActionsRescalerCfg {
    pub enable: bool,
    pub slices: Vec<(usize, usize)>,
    /// Per-slice multiplicative factor range sampled at reset.
    pub rescaling_ranges: Vec<(f64, f64)>,
    pub clip_actions: Vec<(f64, f64)>,
}

impl Default for ActionsRescalerCfg {
    fn default() -> Self {
        Self {
            enable: false,
            slices: vec![(0, 2)],
            rescaling_ranges: vec![(0.8, 1.0)],
            clip_actions: vec![(-1.0, 1.0)],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyObservationsCfg {
    pub enable: bool,
    pub modes: Vec<NoiseMode>,
    pub slices: Vec<(usize, usize)>,
    pub max_delta: Vec<f64>,
    /// Renormalize (cos, sin) pairs back onto the unit circle after noise.
    pub renormalize_angle_pairs: bool,
    /// Resample the noise draw every step; otherwise the reset-time draw is
    /// reapplied verbatim.
    pub per_step_draws: bool,
}

impl Default for NoisyObservationsCfg {
    fn default() -> Self {
        Self {
            enable: false,
            modes: vec![NoiseMode::Normal],
            slices: vec![(0, 3)],
            max_delta: vec![0.01],
            renormalize_angle_pairs: true,
            per_step_draws: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WrenchRandCfg {
    pub enable: bool,
    pub modes: Vec<WrenchMode>,
    /// Force magnitude range [N].
    pub uniform_force: (f64, f64),
    /// Torque magnitude range [N m].
    pub uniform_torque: (f64, f64),
    /// Std for normal modes.
    pub normal_force_std: f64,
    pub normal_torque_std: f64,
    /// Control steps between kicks.
    pub push_interval: usize,
    /// Frequency range [Hz] for the sinusoidal mode.
    pub frequency_range: (f64, f64),
}

impl Default for WrenchRandCfg {
    fn default() -> Self {
        Self {
            enable: false,
            modes: vec![WrenchMode::KickUniform],
            uniform_force: (0.0, 0.25),
            uniform_torque: (0.0, 0.05),
            normal_force_std: 0.1,
            normal_torque_std: 0.02,
            push_interval: 5,
            frequency_range: (0.1, 0.5),
        }
    }
}

/// Full randomization configuration.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RandomizationConfig {
    pub mass: MassRandCfg,
    pub com: ComRandCfg,
    pub inertia: InertiaRandCfg,
    pub actions: NoisyActionsCfg,
    pub rescaler: ActionsRescalerCfg,
    pub observations: NoisyObservationsCfg,
    pub wrench: WrenchRandCfg,
}

impl RandomizationConfig {
    /// Everything off.
    pub fn disabled() -> Self {
        Self::default()
    }

    pub fn any_enabled(&self) -> bool {
        self.mass.enable
            || self.com.enable
            || self.inertia.enable
            || self.actions.enable
            || self.rescaler.enable
            || self.observations.enable
            || self.wrench.enable
    }

    /// Ground-robot defaults: small mass and CoM variation, action noise.
    pub fn turtlebot2_defaults() -> Self {
        RandomizationConfig {
            mass: MassRandCfg {
                enable: true,
                modes: vec![MassMode::Uniform],
                max_delta: 0.1,
                ..MassRandCfg::default()
            },
            com: ComRandCfg {
                enable: true,
                modes: vec![ComMode::Normal],
                max_delta: 0.05,
                std: 0.01,
            },
            actions: NoisyActionsCfg { enable: true, ..NoisyActionsCfg::default() },
            ..Default::default()
        }
    }

    /// Surface-vessel defaults: broad mass perturbation plus water-current
    /// style wrench kicks.
    pub fn kingfisher_defaults() -> Self {
        RandomizationConfig {
            mass: MassRandCfg {
                enable: true,
                modes: vec![MassMode::Uniform],
                max_delta: 2.0,
                ..MassRandCfg::default()
            },
            com: ComRandCfg {
                enable: true,
                modes: vec![ComMode::Uniform],
                max_delta: 0.05,
                std: 0.01,
            },
            actions: NoisyActionsCfg { enable: true, ..NoisyActionsCfg::default() },
            wrench: WrenchRandCfg { enable: true, ..WrenchRandCfg::default() },
            ..Default::default()
        }
    }

    /// Floating-platform defaults: intermediate mass range, same CoM and
    /// wrench ranges as the vessel.
    pub fn floating_platform_defaults() -> Self {
        let mut cfg = Self::kingfisher_defaults();
        cfg.mass.max_delta = 0.25;
        cfg.actions.slices = vec![(0, 8)];
        cfg.actions.enable = false; // binary thrusters carry no additive noise
        cfg
    }

    /// Validates slice bounds and range ordering against the action and
    /// observation layouts.
    pub fn validate(&self, action_dim: usize, obs_dim: usize) -> Result<()> {
        let check_slices = |name: &str,
                            slices: &[(usize, usize)],
                            lens: &[usize],
                            dim: usize|
         -> Result<()> {
            for &(lo, hi) in slices {
                if lo >= hi || hi > dim {
                    return Err(Error::Config(format!(
                        "{name}: slice ({lo}, {hi}) out of range for dimension {dim}"
                    )));
                }
            }
            for &l in lens {
                if l != slices.len() {
                    return Err(Error::Config(format!(
                        "{name}: per-slice parameter count {l} != slice count {}",
                        slices.len()
                    )));
                }
            }
            Ok(())
        };
        if self.actions.enable {
            check_slices(
                "actions",
                &self.actions.slices,
                &[self.actions.max_delta.len(), self.actions.clip_actions.len()],
                action_dim,
            )?;
        }
        if self.rescaler.enable {
            check_slices(
                "rescaler",
                &self.rescaler.slices,
                &[
                    self.rescaler.rescaling_ranges.len(),
                    self.rescaler.clip_actions.len(),
                ],
                action_dim,
            )?;
            for &(lo, hi) in &self.rescaler.rescaling_ranges {
                if lo > hi {
                    return Err(Error::Config(format!(
                        "rescaler: range ({lo}, {hi}) is not well-ordered"
                    )));
                }
            }
        }
        if self.observations.enable {
            check_slices(
                "observations",
                &self.observations.slices,
                &[self.observations.max_delta.len()],
                obs_dim,
            )?;
        }
        if self.wrench.enable {
            if self.wrench.push_interval < 1 {
                return Err(Error::Config("wrench: push_interval must be >= 1".into()));
            }
            for (lo, hi) in [self.wrench.uniform_force, self.wrench.uniform_torque] {
                if lo > hi {
                    return Err(Error::Config(format!(
                        "wrench: range ({lo}, {hi}) is not well-ordered"
                    )));
                }
            }
        }
        if self.mass.enable && self.mass.max_delta < 0.0 {
            return Err(Error::Config("mass: max_delta must be >= 0".into()));
        }
        Ok(())
    }
}

/// Per-slice noise plan: amplitude sampled at reset.
#[derive(Clone, Debug, PartialEq)]
struct NoisePlan {
    slices: Vec<(usize, usize)>,
    /// Amplitude per slice.
    amps: Vec<f64>,
    mode: NoiseMode,
}

/// Sinusoidal / constant wrench parameters sampled at reset.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
struct WrenchWave {
    force: f64,
    force_dir: f64,
    torque: f64,
    freq: f64,
    phase: f64,
}

/// All per-episode sampled perturbations for one environment.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizationPlan {
    pub env_seed: u64,
    pub episode: u64,
    pub mass_delta: f64,
    pub com_delta: [f64; 2],
    pub inertia_scale: f64,
    pub inertia_delta: f64,
    /// kg/s; zero when no decay mode is active.
    pub mass_decay_rate: f64,
    /// kg per unit action L1 norm per second.
    pub action_decay_rate: f64,
    pub inertia_decay_rate: f64,
    /// True when a perturbation had to be clamped to keep mass physical.
    pub mass_clamped: f64,
    action_noise: Option<NoisePlan>,
    action_rescale: Vec<f64>,
    obs_noise: Option<NoisePlan>,
    /// Fixed reset-time observation noise draw (when per-step draws are off).
    obs_fixed_draw: Vec<f64>,
    wrench_modes: Vec<WrenchMode>,
    wave: WrenchWave,
    push_interval: usize,
    action_rng: StreamRng,
    obs_rng: StreamRng,
    wrench_rng: StreamRng,
}

impl RandomizationPlan {
    /// A plan with every category inert.
    pub fn empty(env_seed: u64, episode: u64) -> Self {
        RandomizationPlan {
            env_seed,
            episode,
            mass_delta: 0.0,
            com_delta: [0.0, 0.0],
            inertia_scale: 1.0,
            inertia_delta: 0.0,
            mass_decay_rate: 0.0,
            action_decay_rate: 0.0,
            inertia_decay_rate: 0.0,
            mass_clamped: 0.0,
            action_noise: None,
            action_rescale: Vec::new(),
            obs_noise: None,
            obs_fixed_draw: Vec::new(),
            wrench_modes: Vec::new(),
            wave: WrenchWave::default(),
            push_interval: 1,
            action_rng: StreamRng::from_key(0),
            obs_rng: StreamRng::from_key(0),
            wrench_rng: StreamRng::from_key(0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.mass_delta == 0.0
            && self.com_delta == [0.0, 0.0]
            && self.inertia_delta == 0.0
            && self.inertia_scale == 1.0
            && self.mass_decay_rate == 0.0
            && self.action_noise.is_none()
            && self.action_rescale.is_empty()
            && self.obs_noise.is_none()
            && self.wrench_modes.is_empty()
    }
}

fn sample_bounded(
    rng: &mut StreamRng,
    uniform: bool,
    max_delta: f64,
    std: f64,
) -> f64 {
    if uniform {
        rng.uniform(-max_delta, max_delta)
    } else {
        rng.normal_truncated(0.0, std).clamp(-max_delta, max_delta)
    }
}

/// Samples all reset-timed perturbations and returns the perturbed mass
/// properties alongside the plan.
pub fn on_reset(
    config: &RandomizationConfig,
    global_seed: u64,
    env_index: u64,
    episode: u64,
    base: &MassProps,
) -> (RandomizationPlan, MassProps) {
    let mut plan = RandomizationPlan::empty(env_index, episode);
    plan.action_rng = StreamRng::for_env(global_seed, env_index, episode, StreamId::ActionNoise);
    plan.obs_rng =
        StreamRng::for_env(global_seed, env_index, episode, StreamId::ObservationNoise);
    plan.wrench_rng = StreamRng::for_env(global_seed, env_index, episode, StreamId::Wrench);

    let mut props = *base;

    if config.mass.enable {
        let mut rng = StreamRng::for_env(global_seed, env_index, episode, StreamId::MassRand);
        for mode in &config.mass.modes {
            match mode {
                MassMode::Uniform => {
                    plan.mass_delta +=
                        sample_bounded(&mut rng, true, config.mass.max_delta, config.mass.std);
                }
                MassMode::Normal => {
                    plan.mass_delta +=
                        sample_bounded(&mut rng, false, config.mass.max_delta, config.mass.std);
                }
                MassMode::ConstantTimeDecay => {
                    plan.mass_decay_rate += config.mass.mass_change_rate;
                }
                MassMode::ActionBasedDecay => {
                    plan.action_decay_rate += config.mass.mass_change_rate;
                }
            }
        }
        let new_mass = props.mass + plan.mass_delta;
        if new_mass < config.mass.mass_floor {
            plan.mass_clamped = new_mass - config.mass.mass_floor;
            plan.mass_delta = config.mass.mass_floor - props.mass;
        }
        let ratio = (props.mass + plan.mass_delta) / props.mass;
        props.mass += plan.mass_delta;
        // inertia follows the mass perturbation
        plan.inertia_scale = ratio;
        props.inertia_zz *= ratio;
    }

    if config.com.enable {
        let mut rng = StreamRng::for_env(global_seed, env_index, episode, StreamId::ComRand);
        for mode in &config.com.modes {
            match mode {
                ComMode::Uniform => {
                    plan.com_delta[0] +=
                        sample_bounded(&mut rng, true, config.com.max_delta, config.com.std);
                    plan.com_delta[1] +=
                        sample_bounded(&mut rng, true, config.com.max_delta, config.com.std);
                }
                ComMode::Normal => {
                    plan.com_delta[0] +=
                        sample_bounded(&mut rng, false, config.com.max_delta, config.com.std);
                    plan.com_delta[1] +=
                        sample_bounded(&mut rng, false, config.com.max_delta, config.com.std);
                }
                ComMode::Spring => {} // placeholder mode, no-op
            }
        }
        props.com_offset[0] += plan.com_delta[0];
        props.com_offset[1] += plan.com_delta[1];
    }

    if config.inertia.enable {
        let mut rng =
            StreamRng::for_env(global_seed, env_index, episode, StreamId::InertiaRand);
        for mode in &config.inertia.modes {
            match mode {
                InertiaMode::Uniform => {
                    plan.inertia_delta += sample_bounded(
                        &mut rng,
                        true,
                        config.inertia.max_delta,
                        config.inertia.std,
                    );
                }
                InertiaMode::Normal => {
                    plan.inertia_delta += sample_bounded(
                        &mut rng,
                        false,
                        config.inertia.max_delta,
                        config.inertia.std,
                    );
                }
                InertiaMode::Decay => {
                    plan.inertia_decay_rate +=
                        config.inertia.decay_rate.unwrap_or(config.mass.mass_change_rate);
                }
            }
        }
        props.inertia_zz = (props.inertia_zz + plan.inertia_delta).max(1e-6);
    }

    if config.actions.enable {
        let mut rng =
            StreamRng::for_env(global_seed, env_index, episode, StreamId::ActionNoise);
        // amplitude chosen per episode; draws use the per-step stream
        plan.action_rng = rng.at_counter(1_000);
        let amps = config
            .actions
            .max_delta
            .iter()
            .map(|&m| rng.uniform(0.0, m))
            .collect();
        plan.action_noise = Some(NoisePlan {
            slices: config.actions.slices.clone(),
            amps,
            mode: config.actions.modes.first().copied().unwrap_or(NoiseMode::Uniform),
        });
    }

    if config.rescaler.enable {
        let mut rng =
            StreamRng::for_env(global_seed, env_index, episode, StreamId::ActionRescale);
        plan.action_rescale = config
            .rescaler
            .rescaling_ranges
            .iter()
            .map(|&(lo, hi)| rng.uniform(lo, hi))
            .collect();
    }

    if config.observations.enable {
        let mut rng =
            StreamRng::for_env(global_seed, env_index, episode, StreamId::ObservationNoise);
        plan.obs_rng = rng.at_counter(1_000);
        let amps: Vec<f64> = config
            .observations
            .max_delta
            .iter()
            .map(|&m| rng.uniform(0.0, m))
            .collect();
        if !config.observations.per_step_draws {
            let mode =
                config.observations.modes.first().copied().unwrap_or(NoiseMode::Normal);
            for (si, &(lo, hi)) in config.observations.slices.iter().enumerate() {
                for _ in lo..hi {
                    let draw = match mode {
                        NoiseMode::Uniform => rng.uniform(-amps[si], amps[si]),
                        NoiseMode::Normal => rng.normal_truncated(0.0, amps[si]),
                    };
                    plan.obs_fixed_draw.push(draw);
                }
            }
        }
        plan.obs_noise = Some(NoisePlan {
            slices: config.observations.slices.clone(),
            amps,
            mode: config.observations.modes.first().copied().unwrap_or(NoiseMode::Normal),
        });
    }

    if config.wrench.enable {
        let mut rng = StreamRng::for_env(global_seed, env_index, episode, StreamId::Wrench);
        plan.wrench_rng = rng.at_counter(1_000);
        plan.wrench_modes = config.wrench.modes.clone();
        plan.push_interval = config.wrench.push_interval.max(1);
        // constant/sinusoidal parameters are fixed for the episode
        let (flo, fhi) = config.wrench.uniform_force;
        let (tlo, thi) = config.wrench.uniform_torque;
        plan.wave = WrenchWave {
            force: rng.uniform(flo, fhi),
            force_dir: rng.uniform(-PI, PI),
            torque: rng.uniform(tlo, thi) * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 },
            freq: rng.uniform(config.wrench.frequency_range.0, config.wrench.frequency_range.1),
            phase: rng.uniform(-PI, PI),
        };
    }

    (plan, props)
}

/// Step-timed randomization: disturbance wrench plus decayed mass
/// properties. `t` is the control step index, `dt` the control period, and
/// `action_l1` the L1 norm of the current normalized action (for
/// action-based decay).
pub fn on_step(
    plan: &RandomizationPlan,
    config: &RandomizationConfig,
    t: usize,
    dt: f64,
    action_l1: f64,
    props: &MassProps,
) -> (Wrench2, MassProps) {
    let mut props = *props;

    if plan.mass_decay_rate != 0.0 || plan.action_decay_rate != 0.0 {
        let delta = plan.mass_decay_rate * dt + plan.action_decay_rate * action_l1 * dt;
        props.mass = (props.mass + delta).max(config.mass.mass_floor);
    }
    if plan.inertia_decay_rate != 0.0 {
        props.inertia_zz = (props.inertia_zz + plan.inertia_decay_rate * dt).max(1e-6);
    }

    let mut wrench = Wrench2::ZERO;
    for mode in &plan.wrench_modes {
        match mode {
            WrenchMode::KickUniform | WrenchMode::KickNormal => {
                if t % plan.push_interval == 0 {
                    // 4 draws per kick, addressed by step so order never matters
                    let mut rng = plan.wrench_rng.at_counter(4 * t as u64);
                    let (flo, fhi) = config.wrench.uniform_force;
                    let (tlo, thi) = config.wrench.uniform_torque;
                    let (f_mag, tau_mag) = match mode {
                        WrenchMode::KickUniform => {
                            (rng.uniform(flo, fhi), rng.uniform(tlo, thi))
                        }
                        _ => (
                            math::abs(rng.normal_truncated(0.0, config.wrench.normal_force_std))
                                .min(fhi.max(flo)),
                            math::abs(
                                rng.normal_truncated(0.0, config.wrench.normal_torque_std),
                            )
                            .min(thi.max(tlo)),
                        ),
                    };
                    let dir = rng.uniform(-PI, PI);
                    let sign = if rng.next_f64() < 0.5 { -1.0 } else { 1.0 };
                    wrench += Wrench2::new(
                        f_mag * math::cos(dir),
                        f_mag * math::sin(dir),
                        sign * tau_mag,
                    );
                }
            }
            WrenchMode::ConstantUniform | WrenchMode::ConstantNormal => {
                wrench += Wrench2::new(
                    plan.wave.force * math::cos(plan.wave.force_dir),
                    plan.wave.force * math::sin(plan.wave.force_dir),
                    plan.wave.torque,
                );
            }
            WrenchMode::ConstantSinusoidal => {
                let s = math::sin(2.0 * PI * plan.wave.freq * t as f64 * dt + plan.wave.phase);
                wrench += Wrench2::new(
                    plan.wave.force * math::cos(plan.wave.force_dir) * s,
                    plan.wave.force * math::sin(plan.wave.force_dir) * s,
                    plan.wave.torque * s,
                );
            }
        }
    }

    (wrench, props)
}

/// Applies additive noise and multiplicative rescaling to the raw action.
pub fn on_action(plan: &mut RandomizationPlan, action: &mut [f64], clip: &[(f64, f64)], slices: &[(usize, usize)]) {
    if let Some(noise) = &plan.action_noise {
        for (si, &(lo, hi)) in noise.slices.iter().enumerate() {
            for a in &mut action[lo..hi] {
                let draw = match noise.mode {
                    NoiseMode::Uniform => plan.action_rng.uniform(-noise.amps[si], noise.amps[si]),
                    NoiseMode::Normal => {
                        plan.action_rng.normal_truncated(0.0, noise.amps[si])
                    }
                };
                *a += draw;
            }
        }
    }
    if !plan.action_rescale.is_empty() {
        for (si, &(lo, hi)) in slices.iter().enumerate() {
            if si < plan.action_rescale.len() {
                for a in &mut action[lo..hi] {
                    *a *= plan.action_rescale[si];
                }
            }
        }
    }
    for (si, &(lo, hi)) in slices.iter().enumerate() {
        if si < clip.len() {
            let (clo, chi) = clip[si];
            for a in &mut action[lo..hi] {
                *a = a.clamp(clo, chi);
            }
        }
    }
}

/// Applies sensor-style noise to the observation. `angle_pairs` names the
/// (cos, sin) index pairs to renormalize after perturbation.
pub fn on_observation(
    plan: &mut RandomizationPlan,
    obs: &mut [f64],
    renormalize: bool,
    angle_pairs: &[(usize, usize)],
) {
    let Some(noise) = &plan.obs_noise else { return };
    if plan.obs_fixed_draw.is_empty() {
        for (si, &(lo, hi)) in noise.slices.iter().enumerate() {
            for o in &mut obs[lo..hi] {
                let draw = match noise.mode {
                    NoiseMode::Uniform => plan.obs_rng.uniform(-noise.amps[si], noise.amps[si]),
                    NoiseMode::Normal => plan.obs_rng.normal_truncated(0.0, noise.amps[si]),
                };
                *o += draw;
            }
        }
    } else {
        let mut k = 0;
        for &(lo, hi) in &noise.slices {
            for o in &mut obs[lo..hi] {
                *o += plan.obs_fixed_draw[k];
                k += 1;
            }
        }
    }
    if renormalize {
        for &(ci, si) in angle_pairs {
            let n = math::hypot(obs[ci], obs[si]);
            if n > 1e-12 {
                obs[ci] /= n;
                obs[si] /= n;
            } else {
                obs[ci] = 1.0;
                obs[si] = 0.0;
            }
        }
    }
}

/// One-line warning list for placeholder modes, surfaced at config load.
pub fn placeholder_warnings(config: &RandomizationConfig) -> Vec<String> {
    let mut warnings = Vec::new();
    if config.com.enable && config.com.modes.contains(&ComMode::Spring) {
        warnings.push("com randomization mode \"spring\" is a placeholder and has no effect".into());
    }
    warnings
}
