//! Stochastic policy heads on top of the MLP trunk.
//!
//! Continuous robots use a diagonal Gaussian with a state-independent,
//! learned log standard deviation; the binary-thruster robot uses
//! independent Bernoulli bits over logits.

use crate::math;
use crate::ppo::net::{ForwardCache, Mlp, MlpGrads};
use crate::rng::StreamRng;
use alloc::vec;
use alloc::vec::Vec;

const LN_2PI: f64 = 1.837877066409345;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeadKind {
    Gaussian,
    Bernoulli,
}

/// Policy network: MLP trunk producing means or logits, plus the Gaussian
/// log-std parameters (empty for Bernoulli).
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyNet {
    pub net: Mlp,
    pub head: HeadKind,
    pub log_std: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + math::exp(-x))
}

impl PolicyNet {
    pub fn new(obs_dim: usize, action_dim: usize, hidden: &[usize], head: HeadKind, rng: &mut StreamRng) -> Self {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(action_dim);
        let net = Mlp::new(&sizes, rng);
        let log_std = match head {
            HeadKind::Gaussian => vec![0.0; action_dim],
            HeadKind::Bernoulli => Vec::new(),
        };
        PolicyNet { net, head, log_std }
    }

    pub fn action_dim(&self) -> usize {
        self.net.output_dim()
    }

    /// Samples an action given the trunk output; returns `(action, logp)`.
    pub fn sample_from_output(&self, out: &[f64], rng: &mut StreamRng) -> (Vec<f64>, f64) {
        match self.head {
            HeadKind::Gaussian => {
                let mut action = Vec::with_capacity(out.len());
                for (i, &mean) in out.iter().enumerate() {
                    let std = math::exp(self.log_std[i]);
                    action.push(mean + std * rng.normal());
                }
                let logp = self.log_prob(out, &action);
                (action, logp)
            }
            HeadKind::Bernoulli => {
                let mut action = Vec::with_capacity(out.len());
                for &logit in out {
                    let p = sigmoid(logit);
                    action.push(if rng.next_f64() < p { 1.0 } else { 0.0 });
                }
                let logp = self.log_prob(out, &action);
                (action, logp)
            }
        }
    }

    /// Mode of the distribution: the mean, or thresholded bits.
    pub fn mode_from_output(&self, out: &[f64]) -> Vec<f64> {
        match self.head {
            HeadKind::Gaussian => out.to_vec(),
            HeadKind::Bernoulli => out.iter().map(|&l| if l >= 0.0 { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn log_prob(&self, out: &[f64], action: &[f64]) -> f64 {
        match self.head {
            HeadKind::Gaussian => {
                let mut lp = 0.0;
                for i in 0..out.len() {
                    let std = math::exp(self.log_std[i]);
                    let z = (action[i] - out[i]) / std;
                    lp += -0.5 * z * z - self.log_std[i] - 0.5 * LN_2PI;
                }
                lp
            }
            HeadKind::Bernoulli => {
                let mut lp = 0.0;
                for i in 0..out.len() {
                    let p = sigmoid(out[i]).clamp(1e-12, 1.0 - 1e-12);
                    lp += if action[i] >= 0.5 { math::ln(p) } else { math::ln(1.0 - p) };
                }
                lp
            }
        }
    }

    /// Log-probability plus its gradients with respect to the trunk output
    /// and the log-std parameters.
    pub fn log_prob_grads(&self, out: &[f64], action: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        match self.head {
            HeadKind::Gaussian => {
                let mut lp = 0.0;
                let mut d_out = vec![0.0; out.len()];
                let mut d_logstd = vec![0.0; out.len()];
                for i in 0..out.len() {
                    let std = math::exp(self.log_std[i]);
                    let z = (action[i] - out[i]) / std;
                    lp += -0.5 * z * z - self.log_std[i] - 0.5 * LN_2PI;
                    d_out[i] = z / std;
                    d_logstd[i] = z * z - 1.0;
                }
                (lp, d_out, d_logstd)
            }
            HeadKind::Bernoulli => {
                let mut lp = 0.0;
                let mut d_out = vec![0.0; out.len()];
                for i in 0..out.len() {
                    let p = sigmoid(out[i]).clamp(1e-12, 1.0 - 1e-12);
                    let b = if action[i] >= 0.5 { 1.0 } else { 0.0 };
                    lp += if b > 0.5 { math::ln(p) } else { math::ln(1.0 - p) };
                    d_out[i] = b - p;
                }
                (lp, d_out, Vec::new())
            }
        }
    }

    /// Distribution entropy and its gradients (same layout as
    /// [`log_prob_grads`](Self::log_prob_grads)).
    pub fn entropy_grads(&self, out: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        match self.head {
            HeadKind::Gaussian => {
                let mut h = 0.0;
                for &ls in &self.log_std {
                    h += ls + 0.5 * (LN_2PI + 1.0);
                }
                (h, vec![0.0; out.len()], vec![1.0; self.log_std.len()])
            }
            HeadKind::Bernoulli => {
                let mut h = 0.0;
                let mut d_out = vec![0.0; out.len()];
                for (i, &l) in out.iter().enumerate() {
                    let p = sigmoid(l).clamp(1e-12, 1.0 - 1e-12);
                    let q = 1.0 - p;
                    h += -p * math::ln(p) - q * math::ln(q);
                    d_out[i] = -p * q * l;
                }
                (h, d_out, Vec::new())
            }
        }
    }

    /// Convenience: forward, then sample.
    pub fn sample(&self, obs: &[f64], rng: &mut StreamRng) -> (Vec<f64>, f64, ForwardCache) {
        let cache = self.net.forward_cached(obs);
        let (a, lp) = self.sample_from_output(cache.output(), rng);
        (a, lp, cache)
    }

    pub fn zero_grads(&self) -> MlpGrads {
        self.net.zero_grads()
    }

    pub fn param_count(&self) -> usize {
        self.net.param_count() + self.log_std.len()
    }

    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        self.net.flatten_into(out);
        out.extend_from_slice(&self.log_std);
    }

    pub fn unflatten_from(&mut self, data: &[f64]) -> usize {
        let k = self.net.unflatten_from(data);
        let n = self.log_std.len();
        self.log_std.copy_from_slice(&data[k..k + n]);
        k + n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn gaussian_policy() -> PolicyNet {
        let mut rng = StreamRng::from_key(5);
        PolicyNet::new(3, 2, &[8], HeadKind::Gaussian, &mut rng)
    }

    fn bernoulli_policy() -> PolicyNet {
        let mut rng = StreamRng::from_key(6);
        PolicyNet::new(3, 4, &[8], HeadKind::Bernoulli, &mut rng)
    }

    #[test]
    fn gaussian_log_prob_matches_closed_form() {
        let mut pol = gaussian_policy();
        pol.log_std = vec![0.2, -0.3];
        let mean = [0.5f64, -1.0];
        let action = [0.9f64, -1.2];
        // independent normals: sum of -((a-m)^2 / (2 s^2)) - ln(s) - ln(2pi)/2
        let mut expect = 0.0;
        for i in 0..2 {
            let s = pol.log_std[i].exp();
            expect += -((action[i] - mean[i]).powi(2)) / (2.0 * s * s)
                - pol.log_std[i]
                - 0.5 * (2.0 * core::f64::consts::PI).ln();
        }
        assert_abs_diff_eq!(pol.log_prob(&mean, &action), expect, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_grads_match_finite_differences() {
        let mut pol = gaussian_policy();
        pol.log_std = vec![0.1, -0.4];
        let mean = [0.3, 0.7];
        let action = [0.0, 1.0];
        let (_, d_mean, d_logstd) = pol.log_prob_grads(&mean, &action);
        let h = 1e-6;
        for i in 0..2 {
            let mut mp = mean;
            mp[i] += h;
            let mut mm = mean;
            mm[i] -= h;
            let fd = (pol.log_prob(&mp, &action) - pol.log_prob(&mm, &action)) / (2.0 * h);
            assert_abs_diff_eq!(d_mean[i], fd, epsilon = 1e-6);

            let mut pp = pol.clone();
            pp.log_std[i] += h;
            let mut pm = pol.clone();
            pm.log_std[i] -= h;
            let fd = (pp.log_prob(&mean, &action) - pm.log_prob(&mean, &action)) / (2.0 * h);
            assert_abs_diff_eq!(d_logstd[i], fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn bernoulli_log_prob_at_even_odds() {
        let pol = bernoulli_policy();
        let logits = [0.0; 4];
        let action = [1.0, 0.0, 1.0, 1.0];
        assert_abs_diff_eq!(
            pol.log_prob(&logits, &action),
            4.0 * 0.5f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn bernoulli_grad_is_bit_minus_probability() {
        let pol = bernoulli_policy();
        let logits = [0.5, -1.0, 2.0, 0.0];
        let action = [1.0, 1.0, 0.0, 0.0];
        let (_, d, _) = pol.log_prob_grads(&logits, &action);
        for i in 0..4 {
            let p = 1.0 / (1.0 + (-logits[i]).exp());
            assert_abs_diff_eq!(d[i], action[i] - p, epsilon = 1e-12);
        }
    }

    #[test]
    fn gaussian_sampling_moments() {
        let mut pol = gaussian_policy();
        pol.log_std = vec![0.0, (0.5f64).ln()];
        let mean = [1.0, -2.0];
        let mut rng = StreamRng::from_key(77);
        let n = 100_000;
        let mut sums = [0.0; 2];
        let mut sq = [0.0; 2];
        for _ in 0..n {
            let (a, _) = pol.sample_from_output(&mean, &mut rng);
            for i in 0..2 {
                sums[i] += a[i];
                sq[i] += a[i] * a[i];
            }
        }
        for i in 0..2 {
            let m = sums[i] / n as f64;
            let v = sq[i] / n as f64 - m * m;
            assert_abs_diff_eq!(m, mean[i], epsilon = 0.02);
            assert_abs_diff_eq!(v, pol.log_std[i].exp().powi(2), epsilon = 0.02);
        }
    }

    #[test]
    fn bernoulli_sampling_frequency() {
        let pol = bernoulli_policy();
        let logits = [1.0, -1.0, 0.0, 3.0];
        let mut rng = StreamRng::from_key(88);
        let n = 100_000;
        let mut counts = [0.0; 4];
        for _ in 0..n {
            let (a, _) = pol.sample_from_output(&logits, &mut rng);
            for i in 0..4 {
                counts[i] += a[i];
            }
        }
        for i in 0..4 {
            let p = 1.0 / (1.0 + (-logits[i]).exp());
            assert_abs_diff_eq!(counts[i] / n as f64, p, epsilon = 0.01);
        }
    }

    #[test]
    fn mode_is_mean_or_threshold() {
        let pol = gaussian_policy();
        assert_eq!(pol.mode_from_output(&[0.3, -0.8]), vec![0.3, -0.8]);
        let pol = bernoulli_policy();
        assert_eq!(pol.mode_from_output(&[0.5, -0.5, 0.0, -3.0]), vec![1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn gaussian_entropy_closed_form() {
        let mut pol = gaussian_policy();
        pol.log_std = vec![0.0, 0.0];
        let (h, _, d_ls) = pol.entropy_grads(&[0.0, 0.0]);
        // per-dim entropy of a unit normal: 0.5 * ln(2 pi e)
        let expect = 2.0 * 0.5 * (2.0 * core::f64::consts::PI * core::f64::consts::E).ln();
        assert_abs_diff_eq!(h, expect, epsilon = 1e-12);
        assert_eq!(d_ls, vec![1.0, 1.0]);
    }

    #[test]
    fn flatten_round_trip_includes_log_std() {
        let mut pol = gaussian_policy();
        pol.log_std = vec![0.3, -0.7];
        let mut flat = Vec::new();
        pol.flatten_into(&mut flat);
        assert_eq!(flat.len(), pol.param_count());
        let mut other = gaussian_policy();
        other.log_std = vec![0.0, 0.0];
        other.unflatten_from(&flat);
        assert_eq!(other, pol);
    }
}
