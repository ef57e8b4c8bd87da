//! Proximal policy optimization, built from scratch on `f64` math.
//!
//! The trainer collects fixed-length rollouts from an [`EnvBatch`], computes
//! generalized advantage estimates, and optimizes clipped surrogate and
//! value losses with Adam under a KL-adaptive learning rate. Observations
//! and value targets are standardized by running scalers. Everything is
//! seeded, so training is bit-reproducible for a given seed.

pub mod gae;
pub mod net;
pub mod policy;
pub mod scaler;
pub mod update;

pub use gae::compute_gae;
pub use net::{Adam, Mlp};
pub use policy::{HeadKind, PolicyNet};
pub use scaler::RunningScaler;
pub use update::{IterationStats, PpoConfig, Trainer};

use crate::envman::EnvBatch;
use crate::error::Result;
use crate::metrics::EpisodeRecord;
use alloc::vec::Vec;

/// Runs the greedy policy until at least `episodes` episodes finish and
/// returns their records.
pub fn evaluate(trainer: &Trainer, env: &mut EnvBatch, episodes: usize) -> Result<Vec<EpisodeRecord>> {
    let n = env.num_envs();
    let mut records = Vec::with_capacity(episodes);
    let mut obs = env.observations();
    // generous bound so a stuck policy cannot loop forever
    let max_steps = episodes.div_ceil(n).max(1) * env.config().max_episode_steps * 4;
    for _ in 0..max_steps {
        let actions = trainer.act_deterministic(&obs, n);
        let result = env.step(&actions)?;
        records.extend(result.finished);
        obs = result.observations;
        if records.len() >= episodes {
            break;
        }
    }
    records.truncate(episodes);
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envman::EnvConfig;
    use alloc::vec;

    #[test]
    fn evaluate_collects_requested_episodes() {
        let env_cfg = EnvConfig::new("turtlebot2", "goto_position").unwrap();
        let mut env = EnvBatch::new(env_cfg, 3, 17).unwrap();
        let trainer = Trainer::new(
            PpoConfig { hidden_sizes: vec![8], ..PpoConfig::default() },
            &env,
            17,
        );
        let records = evaluate(&trainer, &mut env, 5).unwrap();
        assert_eq!(records.len(), 5);
        assert!(records.iter().all(|r| r.length > 0 && r.length <= 300));
    }
}
