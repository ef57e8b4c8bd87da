//! Generalized advantage estimation over fixed-length rollouts.

use alloc::vec;
use alloc::vec::Vec;

/// Computes advantages and returns for a `steps x num_envs` rollout laid out
/// time-major (`index = t * num_envs + e`).
///
/// `dones[t][e] = true` cuts the bootstrap after step `t`; time-limit ends
/// are included in `dones` when time-limit bootstrapping is off.
/// `last_values` are value estimates of the observation after the final step.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    last_values: &[f64],
    num_envs: usize,
    gamma: f64,
    lam: f64,
) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(rewards.len(), values.len());
    debug_assert_eq!(rewards.len(), dones.len());
    debug_assert_eq!(rewards.len() % num_envs, 0);
    debug_assert_eq!(last_values.len(), num_envs);
    let steps = rewards.len() / num_envs;

    let mut advantages = vec![0.0; rewards.len()];
    let mut returns = vec![0.0; rewards.len()];
    for e in 0..num_envs {
        let mut gae = 0.0;
        for t in (0..steps).rev() {
            let i = t * num_envs + e;
            let not_done = if dones[i] { 0.0 } else { 1.0 };
            let next_value = if t + 1 < steps {
                values[(t + 1) * num_envs + e]
            } else {
                last_values[e]
            };
            let delta = rewards[i] + gamma * not_done * next_value - values[i];
            gae = delta + gamma * lam * not_done * gae;
            advantages[i] = gae;
            returns[i] = gae + values[i];
        }
    }
    (advantages, returns)
}
