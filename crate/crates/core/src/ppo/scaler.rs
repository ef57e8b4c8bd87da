//! Running standardization of observations and value targets.

use alloc::vec;
use alloc::vec::Vec;

/// Running mean/variance standardizer updated from batches.
///
/// Uses the parallel-variance combination rule, so the result is independent
/// of how the data is split into batches up to floating-point rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct RunningScaler {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub count: f64,
    /// Normalized outputs are clamped to `[-clip, clip]`; 0 disables.
    pub clip: f64,
}

impl RunningScaler {
    pub fn new(dim: usize) -> Self {
        Self { mean: vec![0.0; dim], var: vec![1.0; dim], count: 0.0, clip: 5.0 }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Folds a batch of `rows` samples (flattened row-major) into the
    /// running statistics.
    pub fn update(&mut self, data: &[f64]) {
        let d = self.dim();
        debug_assert_eq!(data.len() % d, 0);
        let rows = data.len() / d;
        if rows == 0 {
            return;
        }
        let n_b = rows as f64;
        for j in 0..d {
            let mut mean_b = 0.0;
            for i in 0..rows {
                mean_b += data[i * d + j];
            }
            mean_b /= n_b;
            let mut var_b = 0.0;
            for i in 0..rows {
                let e = data[i * d + j] - mean_b;
                var_b += e * e;
            }
            var_b /= n_b;

            if self.count == 0.0 {
                self.mean[j] = mean_b;
                self.var[j] = var_b;
            } else {
                let n_a = self.count;
                let total = n_a + n_b;
                let delta = mean_b - self.mean[j];
                let m2 = self.var[j] * n_a
                    + var_b * n_b
                    + delta * delta * n_a * n_b / total;
                self.mean[j] += delta * n_b / total;
                self.var[j] = m2 / total;
            }
        }
        self.count += n_b;
    }

    fn std(&self, j: usize) -> f64 {
        let v = if self.var[j] > 1e-16 { self.var[j] } else { 1e-16 };
        #[cfg(feature = "std")]
        {
            v.sqrt()
        }
        #[cfg(not(feature = "std"))]
        {
            libm::sqrt(v)
        }
    }

    /// Standardizes rows in place.
    pub fn normalize(&self, data: &mut [f64]) {
        let d = self.dim();
        if self.count == 0.0 {
            return;
        }
        for (i, x) in data.iter_mut().enumerate() {
            let j = i % d;
            let mut z = (*x - self.mean[j]) / self.std(j);
            if self.clip > 0.0 {
                z = z.clamp(-self.clip, self.clip);
            }
            *x = z;
        }
    }

    /// Inverse transform (no clipping).
    pub fn unnormalize(&self, data: &mut [f64]) {
        let d = self.dim();
        if self.count == 0.0 {
            return;
        }
        for (i, x) in data.iter_mut().enumerate() {
            let j = i % d;
            *x = *x * self.std(j) + self.mean[j];
        }
    }

    pub fn normalize_scalar(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        if self.count == 0.0 {
            return x;
        }
        let z = (x - self.mean[0]) / self.std(0);
        if self.clip > 0.0 {
            z.clamp(-self.clip, self.clip)
        } else {
            z
        }
    }

    pub fn unnormalize_scalar(&self, x: f64) -> f64 {
        debug_assert_eq!(self.dim(), 1);
        if self.count == 0.0 {
            return x;
        }
        x * self.std(0) + self.mean[0]
    }
}
