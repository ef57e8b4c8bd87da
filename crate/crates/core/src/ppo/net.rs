//! Small dense networks with manual backpropagation, plus Adam.
//!
//! Everything is `f64` and fully deterministic; weights are initialized from
//! a counter-based stream so a seed pins the network bit-exactly.

use crate::math;
use crate::rng::StreamRng;
use alloc::vec;
use alloc::vec::Vec;

/// Multi-layer perceptron: tanh hidden layers, linear output.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    /// `weights[l]` is `sizes[l+1] x sizes[l]`, row-major.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Forward-pass cache: the input of every layer (post-activation of the
/// previous one) plus the final output.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `inputs[l]` is what layer `l` consumed; `inputs[L]` is the output.
    pub inputs: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.inputs.last().unwrap()
    }
}

/// Same-shaped gradient accumulator.
#[derive(Clone, Debug)]
pub struct MlpGrads {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// Scaled-uniform initialization: `U(-s, s)` with `s = 1/sqrt(fan_in)`.
    pub fn new(sizes: &[usize], rng: &mut StreamRng) -> Self {
        debug_assert!(sizes.len() >= 2);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let s = 1.0 / math::sqrt(fan_in as f64);
            weights.push((0..fan_in * fan_out).map(|_| rng.uniform(-s, s)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        Mlp { sizes: sizes.to_vec(), weights, biases }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.forward_cached(x).inputs.pop().unwrap()
    }

    pub fn forward_cached(&self, x: &[f64]) -> ForwardCache {
        debug_assert_eq!(x.len(), self.input_dim());
        let last = self.layers() - 1;
        let mut inputs = Vec::with_capacity(self.layers() + 1);
        inputs.push(x.to_vec());
        for l in 0..self.layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let cur = inputs.last().unwrap();
            let mut out = vec![0.0; n_out];
            for o in 0..n_out {
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let mut z = self.biases[l][o];
                for i in 0..n_in {
                    z += row[i] * cur[i];
                }
                out[o] = if l < last { math::tanh(z) } else { z };
            }
            inputs.push(out);
        }
        ForwardCache { inputs }
    }

    /// Backpropagates `grad_out` (dL/d output) through the cached pass,
    /// accumulating into `grads`. Returns dL/d input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_out: &[f64],
        grads: &mut MlpGrads,
    ) -> Vec<f64> {
        let last = self.layers() - 1;
        let mut delta = grad_out.to_vec();
        for l in (0..self.layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            // tanh derivative from the cached post-activation
            if l < last {
                let act = &cache.inputs[l + 1];
                for o in 0..n_out {
                    delta[o] *= 1.0 - act[o] * act[o];
                }
            }
            let input = &cache.inputs[l];
            let mut grad_in = vec![0.0; n_in];
            for o in 0..n_out {
                grads.biases[l][o] += delta[o];
                let row = &self.weights[l][o * n_in..(o + 1) * n_in];
                let grow = &mut grads.weights[l][o * n_in..(o + 1) * n_in];
                for i in 0..n_in {
                    grow[i] += delta[o] * input[i];
                    grad_in[i] += row[i] * delta[o];
                }
            }
            delta = grad_in;
        }
        delta
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            weights: self.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: self.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Appends all parameters (weights then bias, per layer) to `out`.
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for l in 0..self.layers() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
    }

    /// Reads parameters back in [`flatten_into`](Self::flatten_into) order.
    /// Returns the number of values consumed.
    pub fn unflatten_from(&mut self, data: &[f64]) -> usize {
        let mut k = 0;
        for l in 0..self.weights.len() {
            let wl = self.weights[l].len();
            self.weights[l].copy_from_slice(&data[k..k + wl]);
            k += wl;
            let bl = self.biases[l].len();
            self.biases[l].copy_from_slice(&data[k..k + bl]);
            k += bl;
        }
        k
    }
}

impl MlpGrads {
    pub fn flatten_into(&self, out: &mut Vec<f64>) {
        for l in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for w in &mut self.weights {
            for v in w {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= s;
            }
        }
    }
}

/// Adam over a flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(param_count: usize) -> Self {
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; param_count],
            v: vec![0.0; param_count],
        }
    }

    pub fn step(&mut self, lr: f64, params: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(params.len(), self.m.len());
        debug_assert_eq!(params.len(), grads.len());
        self.t += 1;
        let b1t = 1.0 - pow_f64(self.beta1, self.t);
        let b2t = 1.0 - pow_f64(self.beta2, self.t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / b1t;
            let v_hat = self.v[i] / b2t;
            params[i] -= lr * m_hat / (math::sqrt(v_hat) + self.eps);
        }
    }
}

fn pow_f64(base: f64, exp: u64) -> f64 {
    let mut r = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            r *= b;
        }
        b *= b;
        e >>= 1;
    }
    r
}

/// Global gradient-norm clipping; returns the pre-clip norm.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let mut sq = 0.0;
    for g in grads.iter() {
        sq += g * g;
    }
    let norm = math::sqrt(sq);
    if max_norm > 0.0 && norm > max_norm {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= s;
        }
    }
    norm
}
