//! Episode metrics: per-episode records, streaming accumulation, and
//! aggregate summaries across evaluation batches.

use alloc::vec;
use alloc::vec::Vec;

/// Numerically stable streaming mean/variance (Welford's algorithm).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.mean
        }
    }

    /// Population variance.
    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.m2 / self.n as f64
        }
    }

    #[cfg(feature = "std")]
    pub fn std(&self) -> f64 {
        self.variance().sqrt()
    }

    #[cfg(not(feature = "std"))]
    pub fn std(&self) -> f64 {
        libm::sqrt(self.variance())
    }
}

/// Everything recorded about one finished episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub env_index: u64,
    pub episode: u64,
    /// Control steps taken.
    pub length: usize,
    /// Undiscounted return.
    pub return_sum: f64,
    /// Episode-level success per the task's rule.
    pub success: bool,
    /// Terminated before the time limit (boundary, collision, runaway).
    pub early_termination: bool,
    pub goals_reached: usize,
    /// Distance to the active goal at the final step [m].
    pub final_distance: f64,
    /// |heading error| at the final step [rad]; zero for heading-free tasks.
    pub final_heading_error: f64,
    /// Mean |v_ref - v| over the episode (velocity tracking only).
    pub mean_lin_vel_error: f64,
    /// Mean |omega_ref - omega| over the episode (velocity tracking only).
    pub mean_ang_vel_error: f64,
    /// Mean L2 change of the normalized action between steps.
    pub ctrl_variation: f64,
    /// First step at which the success condition held.
    pub time_to_success: Option<usize>,
}

/// Streaming per-episode accumulator owned by each environment slot.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpisodeAccumulator {
    pub return_sum: f64,
    pub steps: usize,
    /// One stream per action dimension, over the normalized action values.
    ctrl: Vec<Welford>,
}

impl EpisodeAccumulator {
    pub fn new(action_dim: usize) -> Self {
        Self { return_sum: 0.0, steps: 0, ctrl: vec![Welford::new(); action_dim] }
    }

    pub fn reset(&mut self) {
        self.return_sum = 0.0;
        self.steps = 0;
        for w in &mut self.ctrl {
            *w = Welford::new();
        }
    }

    pub fn on_step(&mut self, reward: f64, action: &[f64]) {
        debug_assert_eq!(action.len(), self.ctrl.len());
        self.return_sum += reward;
        self.steps += 1;
        for (w, &a) in self.ctrl.iter_mut().zip(action) {
            w.push(a);
        }
    }

    /// Std of each control signal over the episode, averaged over dimensions.
    pub fn ctrl_variation(&self) -> f64 {
        if self.ctrl.is_empty() {
            return 0.0;
        }
        self.ctrl.iter().map(Welford::std).sum::<f64>() / self.ctrl.len() as f64
    }
}

/// Mean and standard deviation over `n` samples.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: u64,
}

pub fn summarize<I: IntoIterator<Item = f64>>(values: I) -> Summary {
    let mut w = Welford::new();
    for v in values {
        w.push(v);
    }
    Summary { mean: w.mean(), std: w.std(), n: w.count() }
}

/// Aggregate evaluation metrics over a set of episodes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AggregateMetrics {
    pub episodes: u64,
    pub success_rate: f64,
    pub early_termination_rate: f64,
    pub episode_return: Summary,
    pub episode_length: Summary,
    pub final_distance: Summary,
    pub final_heading_error: Summary,
    pub mean_lin_vel_error: Summary,
    pub mean_ang_vel_error: Summary,
    pub ctrl_variation: Summary,
    pub goals_reached: Summary,
    /// Over successful episodes only.
    pub time_to_success: Summary,
}

pub fn aggregate(records: &[EpisodeRecord]) -> crate::error::Result<AggregateMetrics> {
    let n = records.len() as u64;
    if n == 0 {
        return Err(crate::error::Error::Contract(
            "cannot aggregate an empty record set".into(),
        ));
    }
    let successes = records.iter().filter(|r| r.success).count() as u64;
    let earlies = records.iter().filter(|r| r.early_termination).count() as u64;
    Ok(AggregateMetrics {
        episodes: n,
        success_rate: successes as f64 / n as f64,
        early_termination_rate: earlies as f64 / n as f64,
        episode_return: summarize(records.iter().map(|r| r.return_sum)),
        episode_length: summarize(records.iter().map(|r| r.length as f64)),
        final_distance: summarize(records.iter().map(|r| r.final_distance)),
        final_heading_error: summarize(records.iter().map(|r| r.final_heading_error)),
        mean_lin_vel_error: summarize(records.iter().map(|r| r.mean_lin_vel_error)),
        mean_ang_vel_error: summarize(records.iter().map(|r| r.mean_ang_vel_error)),
        ctrl_variation: summarize(records.iter().map(|r| r.ctrl_variation)),
        goals_reached: summarize(records.iter().map(|r| r.goals_reached as f64)),
        time_to_success: summarize(
            records
                .iter()
                .filter(|r| r.success)
                .filter_map(|r| r.time_to_success.map(|t| t as f64)),
        ),
    })
}

/// Collects episode records while attached; detaching drops new records
/// without interrupting the environments.
#[derive(Clone, Debug, Default)]
pub struct Recorder {
    attached: bool,
    records: Vec<EpisodeRecord>,
}

impl Recorder {
    pub fn attached() -> Self {
        Self { attached: true, records: Vec::new() }
    }

    pub fn attach(&mut self) -> crate::error::Result<()> {
        if self.attached {
            return Err(crate::error::Error::Contract(
                "recorder is already attached".into(),
            ));
        }
        self.attached = true;
        Ok(())
    }

    pub fn detach(&mut self) {
        self.attached = false;
    }

    pub fn is_attached(&self) -> bool {
        self.attached
    }

    pub fn push(&mut self, record: EpisodeRecord) {
        if self.attached {
            self.records.push(record);
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[EpisodeRecord] {
        &self.records
    }

    pub fn drain(&mut self) -> Vec<EpisodeRecord> {
        core::mem::take(&mut self.records)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn record(ret: f64, success: bool) -> EpisodeRecord {
        EpisodeRecord {
            env_index: 0,
            episode: 0,
            length: 300,
            return_sum: ret,
            success,
            early_termination: false,
            goals_reached: usize::from(success),
            final_distance: 0.5,
            final_heading_error: 0.1,
            mean_lin_vel_error: 0.0,
            mean_ang_vel_error: 0.0,
            ctrl_variation: 0.2,
            time_to_success: success.then_some(100),
        }
    }

    #[test]
    fn welford_matches_naive_mean_and_std() {
        let data = [1.0, 4.0, -2.0, 7.5, 0.25, 3.0];
        let mut w = Welford::new();
        for &x in &data {
            w.push(x);
        }
        let n = data.len() as f64;
        let mean: f64 = data.iter().sum::<f64>() / n;
        let var: f64 = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert_abs_diff_eq!(w.mean(), mean, epsilon = 1e-12);
        assert_abs_diff_eq!(w.variance(), var, epsilon = 1e-12);
    }

    #[test]
    fn empty_summary_is_zero() {
        let s = summarize(core::iter::empty());
        assert_eq!(s, Summary { mean: 0.0, std: 0.0, n: 0 });
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn aggregate_is_permutation_invariant() {
        let a = [record(1.0, true), record(2.0, false), record(3.0, true)];
        let b = [record(3.0, true), record(1.0, true), record(2.0, false)];
        let (ra, rb) = (aggregate(&a).unwrap(), aggregate(&b).unwrap());
        assert_eq!(ra.success_rate, rb.success_rate);
        assert_abs_diff_eq!(ra.episode_return.mean, rb.episode_return.mean, epsilon = 1e-12);
        assert_abs_diff_eq!(ra.episode_return.std, rb.episode_return.std, epsilon = 1e-12);
    }

    #[test]
    fn aggregate_success_rate() {
        let records = [record(1.0, true), record(2.0, false), record(3.0, true), record(4.0, true)];
        let agg = aggregate(&records).unwrap();
        assert_abs_diff_eq!(agg.success_rate, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(agg.episode_return.mean, 2.5, epsilon = 1e-12);
        assert_eq!(agg.time_to_success.n, 3);
        assert_abs_diff_eq!(agg.time_to_success.mean, 100.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_actions_have_zero_control_variation() {
        let mut acc = EpisodeAccumulator::new(2);
        for _ in 0..10 {
            acc.on_step(0.1, &[0.4, -0.2]);
        }
        assert_abs_diff_eq!(acc.ctrl_variation(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(acc.return_sum, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn control_variation_is_mean_of_per_dim_stds() {
        // dim 0 alternates {0, 1} (std 0.5); dim 1 is constant (std 0)
        let mut acc = EpisodeAccumulator::new(2);
        for i in 0..100 {
            acc.on_step(0.0, &[(i % 2) as f64, 0.7]);
        }
        assert_abs_diff_eq!(acc.ctrl_variation(), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn recorder_attach_detach() {
        let mut rec = Recorder::attached();
        rec.push(record(1.0, true));
        assert!(rec.attach().is_err(), "double attach must be rejected");
        rec.detach();
        rec.push(record(2.0, false));
        rec.attach().unwrap();
        rec.push(record(3.0, true));
        assert_eq!(rec.len(), 2);
        let drained = rec.drain();
        assert_eq!(drained.len(), 2);
        assert!(rec.is_empty());
    }
}
