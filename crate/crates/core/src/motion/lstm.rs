//! Dense layers and a single-layer gated recurrent cell with explicit forward
//! caches and backward passes. Gate order inside the stacked weight matrix is
//! input, forget, candidate, output.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn xavier<R: Rng>(rng: &mut R, n: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.random_range(-a..a)).collect()
}

/// `y = W x + b`, `W` row-major `out × in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weight: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    pub fn xavier<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weight: xavier(rng, inputs * outputs, inputs, outputs),
            bias: vec![0.0; outputs],
        }
    }

    pub fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = dot(&self.weight[r * self.inputs..(r + 1) * self.inputs], x) + self.bias[r];
        }
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx` in `dx`.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Dense, dx: Option<&mut [f64]>) {
        for (r, &g) in dy.iter().enumerate() {
            if g != 0.0 {
                axpy(
                    g,
                    x,
                    &mut grad.weight[r * self.inputs..(r + 1) * self.inputs],
                );
            }
            grad.bias[r] += g;
        }
        if let Some(dx) = dx {
            dx.iter_mut().for_each(|v| *v = 0.0);
            for (r, &g) in dy.iter().enumerate() {
                if g != 0.0 {
                    axpy(g, &self.weight[r * self.inputs..(r + 1) * self.inputs], dx);
                }
            }
        }
    }

    pub(crate) fn check_shape(&self) -> bool {
        self.weight.len() == self.inputs * self.outputs && self.bias.len() == self.outputs
    }
}

/// `tanh(W x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub layer: Dense,
}

impl Embedding {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.layer.outputs];
        self.layer.forward(x, &mut out);
        out.iter_mut().for_each(|v| *v = v.tanh());
        out
    }

    pub fn backward(&self, x: &[f64], y: &[f64], dy: &[f64], grad: &mut Embedding) -> Vec<f64> {
        let dpre: Vec<f64> = dy.iter().zip(y).map(|(d, y)| d * (1.0 - y * y)).collect();
        let mut dx = vec![0.0; self.layer.inputs];
        self.layer
            .backward(x, &dpre, &mut grad.layer, Some(&mut dx));
        dx
    }
}

/// Two-layer head `W2 tanh(W1 h + b1) + b2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub hidden: Dense,
    pub output: Dense,
}

pub struct HeadCache {
    pub input: Vec<f64>,
    pub activation: Vec<f64>,
}

impl Head {
    pub fn forward(&self, h: &[f64]) -> ([f64; 3], HeadCache) {
        let mut a = vec![0.0; self.hidden.outputs];
        self.hidden.forward(h, &mut a);
        a.iter_mut().for_each(|v| *v = v.tanh());
        let mut y = [0.0; 3];
        self.output.forward(&a, &mut y);
        (
            y,
            HeadCache {
                input: h.to_vec(),
                activation: a,
            },
        )
    }

    pub fn backward(&self, cache: &HeadCache, dy: &[f64; 3], grad: &mut Head) -> Vec<f64> {
        let mut da = vec![0.0; self.hidden.outputs];
        self.output
            .backward(&cache.activation, dy, &mut grad.output, Some(&mut da));
        for (d, a) in da.iter_mut().zip(&cache.activation) {
            *d *= 1.0 - a * a;
        }
        let mut dh = vec![0.0; self.hidden.inputs];
        self.hidden
            .backward(&cache.input, &da, &mut grad.hidden, Some(&mut dh));
        dh
    }
}

/// Single-layer LSTM cell; `weight` is `4H × (inputs + H)` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub inputs: usize,
    pub hidden: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

pub struct CellCache {
    pub xh: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

impl LstmCell {
    pub fn zeros(inputs: usize, hidden: usize) -> Self {
        Self {
            inputs,
            hidden,
            weight: vec![0.0; 4 * hidden * (inputs + hidden)],
            bias: vec![0.0; 4 * hidden],
        }
    }

    pub fn xavier<R: Rng>(rng: &mut R, inputs: usize, hidden: usize) -> Self {
        let width = inputs + hidden;
        let mut bias = vec![0.0; 4 * hidden];
        bias[hidden..2 * hidden].iter_mut().for_each(|b| *b = 1.0);
        Self {
            inputs,
            hidden,
            weight: xavier(rng, 4 * hidden * width, width, hidden),
            bias,
        }
    }

    /// Advances `(h, c)` in place.
    pub fn forward(&self, x: &[f64], h: &mut Vec<f64>, c: &mut Vec<f64>) -> CellCache {
        let hs = self.hidden;
        let width = self.inputs + hs;
        let mut xh = Vec::with_capacity(width);
        xh.extend_from_slice(x);
        xh.extend_from_slice(h);
        let mut gates = vec![0.0; 4 * hs];
        for (r, g) in gates.iter_mut().enumerate() {
            *g = dot(&self.weight[r * width..(r + 1) * width], &xh) + self.bias[r];
        }
        for k in 0..hs {
            gates[k] = sigmoid(gates[k]);
            gates[hs + k] = sigmoid(gates[hs + k]);
            gates[2 * hs + k] = gates[2 * hs + k].tanh();
            gates[3 * hs + k] = sigmoid(gates[3 * hs + k]);
        }
        let c_prev = c.clone();
        let mut tanh_c = vec![0.0; hs];
        for k in 0..hs {
            c[k] = gates[hs + k] * c_prev[k] + gates[k] * gates[2 * hs + k];
            tanh_c[k] = c[k].tanh();
            h[k] = gates[3 * hs + k] * tanh_c[k];
        }
        CellCache {
            xh,
            c_prev,
            gates,
            c: c.clone(),
            tanh_c,
        }
    }

    /// Given `dh` and `dc` flowing into this step's outputs, accumulates
    /// parameter gradients and returns `(dx, dh_prev, dc_prev)`.
    pub fn backward(
        &self,
        cache: &CellCache,
        dh: &[f64],
        dc_next: &[f64],
        grad: &mut LstmCell,
    ) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let hs = self.hidden;
        let width = self.inputs + hs;
        let g = &cache.gates;
        let mut dz = vec![0.0; 4 * hs];
        let mut dc_prev = vec![0.0; hs];
        for k in 0..hs {
            let (i, f, cand, o) = (g[k], g[hs + k], g[2 * hs + k], g[3 * hs + k]);
            let tc = cache.tanh_c[k];
            let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
            dz[k] = dc * cand * i * (1.0 - i);
            dz[hs + k] = dc * cache.c_prev[k] * f * (1.0 - f);
            dz[2 * hs + k] = dc * i * (1.0 - cand * cand);
            dz[3 * hs + k] = dh[k] * tc * o * (1.0 - o);
            dc_prev[k] = dc * f;
        }
        let mut dxh = vec![0.0; width];
        for (r, &d) in dz.iter().enumerate() {
            if d != 0.0 {
                axpy(d, &cache.xh, &mut grad.weight[r * width..(r + 1) * width]);
                axpy(d, &self.weight[r * width..(r + 1) * width], &mut dxh);
            }
            grad.bias[r] += d;
        }
        let dh_prev = dxh.split_off(self.inputs);
        (dxh, dh_prev, dc_prev)
    }

    pub(crate) fn check_shape(&self) -> bool {
        self.weight.len() == 4 * self.hidden * (self.inputs + self.hidden)
            && self.bias.len() == 4 * self.hidden
    }
}
