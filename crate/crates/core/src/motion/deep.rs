//! Prediction and updating LSTMs for 3D location.
//!
//! P-LSTM consumes the embedded most recent velocity and emits a per-axis gain
//! on the mean of the velocity history; the predicted location is the previous
//! refined location plus that scaled velocity. U-LSTM consumes the embedded
//! innovation (observation minus prediction) together with the embedded
//! camera-relative observation and emits a per-axis gain on the innovation.
//! All-zero weights therefore predict no motion and apply no correction.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::{CellCache, Dense, Embedding, Head, HeadCache, LstmCell};
use super::MotionError;
use crate::geometry::Vec3;

pub const HIDDEN_DIM: usize = 128;
pub const EMBED_DIM: usize = 64;
pub const HEAD_HIDDEN_DIM: usize = 64;
pub const HISTORY_LEN: usize = 5;
pub const LSTM_WEIGHTS_VERSION: u32 = 1;

/// Multiplier applied to velocities and innovations (meters) before embedding.
pub(crate) const DISPLACEMENT_SCALE: f64 = 1.0;
/// Multiplier applied to camera-relative observations (meters) before embedding.
pub(crate) const RANGE_SCALE: f64 = 0.02;

/// Last `HISTORY_LEN` per-frame velocities, oldest first. Starts empty, which
/// reads as all-zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VelocityHistory {
    entries: [Vec3; HISTORY_LEN],
    len: usize,
}

impl VelocityHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: Vec3) {
        if self.len == HISTORY_LEN {
            self.entries.copy_within(1.., 0);
            self.entries[HISTORY_LEN - 1] = v;
        } else {
            self.entries[self.len] = v;
            self.len += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_slice(&self) -> &[Vec3] {
        &self.entries[..self.len]
    }

    pub fn latest(&self) -> Vec3 {
        if self.len == 0 {
            Vec3::zeros()
        } else {
            self.entries[self.len - 1]
        }
    }

    /// Mean over the filled entries (zero when empty).
    pub fn mean(&self) -> Vec3 {
        if self.len == 0 {
            return Vec3::zeros();
        }
        self.as_slice().iter().fold(Vec3::zeros(), |a, v| a + v) / self.len as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden: usize) -> Self {
        Self {
            h: vec![0.0; hidden],
            c: vec![0.0; hidden],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.h.iter().chain(&self.c).all(|v| v.is_finite())
    }
}

/// Recurrent state of one tracklet's P-LSTM and U-LSTM.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmMotionState {
    pub predict: CellState,
    pub update: CellState,
}

impl LstmMotionState {
    pub fn new() -> Self {
        Self {
            predict: CellState::zeros(HIDDEN_DIM),
            update: CellState::zeros(HIDDEN_DIM),
        }
    }
}

impl Default for LstmMotionState {
    fn default() -> Self {
        Self::new()
    }
}

/// Parameters of both networks. The location embedding (3 → 64) is shared by
/// the three embedded inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmWeights {
    pub format_version: u32,
    pub embed: Embedding,
    pub plstm: LstmCell,
    pub ulstm: LstmCell,
    pub p_head: Head,
    pub u_head: Head,
}

impl LstmWeights {
    pub fn zeros() -> Self {
        Self {
            format_version: LSTM_WEIGHTS_VERSION,
            embed: Embedding {
                layer: Dense::zeros(3, EMBED_DIM),
            },
            plstm: LstmCell::zeros(EMBED_DIM, HIDDEN_DIM),
            ulstm: LstmCell::zeros(2 * EMBED_DIM, HIDDEN_DIM),
            p_head: Head {
                hidden: Dense::zeros(HIDDEN_DIM, HEAD_HIDDEN_DIM),
                output: Dense::zeros(HEAD_HIDDEN_DIM, 3),
            },
            u_head: Head {
                hidden: Dense::zeros(HIDDEN_DIM, HEAD_HIDDEN_DIM),
                output: Dense::zeros(HEAD_HIDDEN_DIM, 3),
            },
        }
    }

    /// Xavier-initialized weights. Output biases start at a constant-velocity
    /// prior: unit gain on the mean velocity, half gain on the innovation.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = |rng: &mut ChaCha8Rng, bias: f64| {
            let hidden = Dense::xavier(rng, HIDDEN_DIM, HEAD_HIDDEN_DIM);
            let mut output = Dense::xavier(rng, HEAD_HIDDEN_DIM, 3);
            output.weight.iter_mut().for_each(|w| *w *= 0.1);
            output.bias = vec![bias; 3];
            Head { hidden, output }
        };
        let embed = Embedding {
            layer: Dense::xavier(&mut rng, 3, EMBED_DIM),
        };
        let plstm = LstmCell::xavier(&mut rng, EMBED_DIM, HIDDEN_DIM);
        let ulstm = LstmCell::xavier(&mut rng, 2 * EMBED_DIM, HIDDEN_DIM);
        let p_head = head(&mut rng, 1.0);
        let u_head = head(&mut rng, 0.5);
        Self {
            format_version: LSTM_WEIGHTS_VERSION,
            embed,
            plstm,
            ulstm,
            p_head,
            u_head,
        }
    }

    pub fn validate(&self) -> Result<(), MotionError> {
        if self.format_version != LSTM_WEIGHTS_VERSION {
            return Err(MotionError::MalformedWeights("unsupported format_version"));
        }
        let dims_ok = self.embed.layer.inputs == 3
            && self.embed.layer.outputs == EMBED_DIM
            && self.plstm.inputs == EMBED_DIM
            && self.plstm.hidden == HIDDEN_DIM
            && self.ulstm.inputs == 2 * EMBED_DIM
            && self.ulstm.hidden == HIDDEN_DIM
            && [&self.p_head, &self.u_head].iter().all(|h| {
                h.hidden.inputs == HIDDEN_DIM
                    && h.hidden.outputs == HEAD_HIDDEN_DIM
                    && h.output.inputs == HEAD_HIDDEN_DIM
                    && h.output.outputs == 3
            });
        let shapes_ok = self.embed.layer.check_shape()
            && self.plstm.check_shape()
            && self.ulstm.check_shape()
            && [&self.p_head, &self.u_head]
                .iter()
                .all(|h| h.hidden.check_shape() && h.output.check_shape());
        if !dims_ok || !shapes_ok {
            return Err(MotionError::MalformedWeights(
                "tensor shapes do not match the architecture",
            ));
        }
        if !self
            .tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
        {
            return Err(MotionError::MalformedWeights("non-finite parameter"));
        }
        Ok(())
    }

    pub fn tensors(&self) -> [&[f64]; 14] {
        [
            &self.embed.layer.weight,
            &self.embed.layer.bias,
            &self.plstm.weight,
            &self.plstm.bias,
            &self.ulstm.weight,
            &self.ulstm.bias,
            &self.p_head.hidden.weight,
            &self.p_head.hidden.bias,
            &self.p_head.output.weight,
            &self.p_head.output.bias,
            &self.u_head.hidden.weight,
            &self.u_head.hidden.bias,
            &self.u_head.output.weight,
            &self.u_head.output.bias,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 14] {
        [
            &mut self.embed.layer.weight,
            &mut self.embed.layer.bias,
            &mut self.plstm.weight,
            &mut self.plstm.bias,
            &mut self.ulstm.weight,
            &mut self.ulstm.bias,
            &mut self.p_head.hidden.weight,
            &mut self.p_head.hidden.bias,
            &mut self.p_head.output.weight,
            &mut self.p_head.output.bias,
            &mut self.u_head.hidden.weight,
            &mut self.u_head.hidden.bias,
            &mut self.u_head.output.weight,
            &mut self.u_head.output.bias,
        ]
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// Flat parameter access in `tensors()` order.
    pub fn param(&self, index: usize) -> f64 {
        let mut i = index;
        for t in self.tensors() {
            if i < t.len() {
                return t[i];
            }
            i -= t.len();
        }
        panic!("parameter index {index} out of range");
    }

    pub fn set_param(&mut self, index: usize, value: f64) {
        let mut i = index;
        for t in self.tensors_mut() {
            if i < t.len() {
                t[i] = value;
                return;
            }
            i -= t.len();
        }
        panic!("parameter index {index} out of range");
    }
}

fn arr(v: Vec3, scale: f64) -> [f64; 3] {
    [v.x * scale, v.y * scale, v.z * scale]
}

pub(crate) struct PredictCache {
    pub input: [f64; 3],
    pub embedded: Vec<f64>,
    pub cell: CellCache,
    pub head: HeadCache,
    pub gain: [f64; 3],
    pub v_ref: Vec3,
}

pub(crate) struct UpdateCache {
    pub innovation_in: [f64; 3],
    pub innovation_emb: Vec<f64>,
    pub range_in: [f64; 3],
    pub range_emb: Vec<f64>,
    pub cell: CellCache,
    pub head: HeadCache,
    pub gain: [f64; 3],
    pub innovation: Vec3,
}

pub(crate) fn predict_step(
    weights: &LstmWeights,
    state: &mut CellState,
    v_last: Vec3,
    v_ref: Vec3,
    prev: Vec3,
) -> (Vec3, PredictCache) {
    let input = arr(v_last, DISPLACEMENT_SCALE);
    let embedded = weights.embed.forward(&input);
    let cell = weights.plstm.forward(&embedded, &mut state.h, &mut state.c);
    let (gain, head) = weights.p_head.forward(&state.h);
    let velocity = Vec3::new(gain[0] * v_ref.x, gain[1] * v_ref.y, gain[2] * v_ref.z);
    (
        prev + velocity,
        PredictCache {
            input,
            embedded,
            cell,
            head,
            gain,
            v_ref,
        },
    )
}

pub(crate) fn update_step(
    weights: &LstmWeights,
    state: &mut CellState,
    predicted: Vec3,
    observed: Vec3,
    origin: Vec3,
) -> (Vec3, UpdateCache) {
    let innovation = observed - predicted;
    let innovation_in = arr(innovation, DISPLACEMENT_SCALE);
    let range_in = arr(observed - origin, RANGE_SCALE);
    let innovation_emb = weights.embed.forward(&innovation_in);
    let range_emb = weights.embed.forward(&range_in);
    let mut x = innovation_emb.clone();
    x.extend_from_slice(&range_emb);
    let cell = weights.ulstm.forward(&x, &mut state.h, &mut state.c);
    let (gain, head) = weights.u_head.forward(&state.h);
    let refined = predicted
        + Vec3::new(
            gain[0] * innovation.x,
            gain[1] * innovation.y,
            gain[2] * innovation.z,
        );
    (
        refined,
        UpdateCache {
            innovation_in,
            innovation_emb,
            range_in,
            range_emb,
            cell,
            head,
            gain,
            innovation,
        },
    )
}

/// One P-LSTM step: advances the predictor state and returns the predicted
/// location `prev + gain ⊙ mean(history)`.
pub fn plstm_predict(
    state: &mut LstmMotionState,
    weights: &LstmWeights,
    history: &VelocityHistory,
    prev: Vec3,
) -> Vec3 {
    predict_step(
        weights,
        &mut state.predict,
        history.latest(),
        history.mean(),
        prev,
    )
    .0
}

/// One U-LSTM step: refines `predicted` toward `observed` and pushes the new
/// velocity `refined - prev` into the history. `origin` is the camera center
/// of the current frame.
pub fn ulstm_update(
    state: &mut LstmMotionState,
    weights: &LstmWeights,
    history: &mut VelocityHistory,
    prev: Vec3,
    predicted: Vec3,
    observed: Vec3,
    origin: Vec3,
) -> Vec3 {
    let refined = update_step(weights, &mut state.update, predicted, observed, origin).0;
    history.push(refined - prev);
    refined
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motion::lstm::sigmoid;
    use approx::assert_abs_diff_eq;
    use num_traits::Float;
    use rand::{Rng, SeedableRng};

    #[test]
    fn history_is_a_ring_of_five() {
        let mut h = VelocityHistory::new();
        assert_eq!(h.mean(), Vec3::zeros());
        for i in 0..8 {
            h.push(Vec3::new(i as f64, 0.0, 0.0));
        }
        assert_eq!(h.len(), HISTORY_LEN);
        assert_eq!(h.as_slice()[0].x, 3.0);
        assert_eq!(h.latest().x, 7.0);
        assert_eq!(h.mean().x, 5.0);
    }

    #[test]
    fn zero_weights_do_not_move() {
        let w = LstmWeights::zeros();
        let mut s = LstmMotionState::new();
        let mut hist = VelocityHistory::new();
        hist.push(Vec3::new(1.0, 2.0, 0.0));
        let prev = Vec3::new(10.0, -3.0, 0.7);
        let pred = plstm_predict(&mut s, &w, &hist, prev);
        assert_eq!(pred, prev);
        let refined = ulstm_update(
            &mut s,
            &w,
            &mut hist,
            prev,
            pred,
            prev + Vec3::new(1.0, 0.0, 0.0),
            Vec3::zeros(),
        );
        assert_eq!(refined, pred);
        assert_eq!(hist.latest(), Vec3::zeros());
    }

    #[test]
    fn init_is_valid_and_deterministic() {
        let a = LstmWeights::init(4);
        assert!(a.validate().is_ok());
        assert_eq!(a, LstmWeights::init(4));
        assert_ne!(a, LstmWeights::init(5));
        let mut bad = a.clone();
        bad.ulstm.bias.pop();
        assert!(bad.validate().is_err());
    }

    /// Straight transcription of the gate equations, independent of the
    /// cached implementation.
    fn reference_cell(
        w: &[f64],
        b: &[f64],
        inputs: usize,
        x: &[f64],
        h: &[f64],
        c: &[f64],
    ) -> (std::vec::Vec<f64>, std::vec::Vec<f64>) {
        let n = h.len();
        let width = inputs + n;
        let z = |row: usize| -> f64 {
            let mut s = b[row];
            for j in 0..inputs {
                s += w[row * width + j] * x[j];
            }
            for j in 0..n {
                s += w[row * width + inputs + j] * h[j];
            }
            s
        };
        let mut h2 = std::vec![0.0; n];
        let mut c2 = std::vec![0.0; n];
        for k in 0..n {
            let i = sigmoid(z(k));
            let f = sigmoid(z(n + k));
            let g = z(2 * n + k).tanh();
            let o = sigmoid(z(3 * n + k));
            c2[k] = f * c[k] + i * g;
            h2[k] = o * c2[k].tanh();
        }
        (h2, c2)
    }

    fn reference_dense(d: &Dense, x: &[f64]) -> std::vec::Vec<f64> {
        (0..d.outputs)
            .map(|r| {
                d.bias[r]
                    + (0..d.inputs)
                        .map(|j| d.weight[r * d.inputs + j] * x[j])
                        .sum::<f64>()
            })
            .collect()
    }

    fn reference_head(head: &Head, h: &[f64]) -> std::vec::Vec<f64> {
        let a: std::vec::Vec<f64> = reference_dense(&head.hidden, h)
            .into_iter()
            .map(f64::tanh)
            .collect();
        reference_dense(&head.output, &a)
    }

    #[test]
    fn forward_matches_reference_equations() {
        let mut rng = rand::rngs::SmallRng::seed_from_u64(31);
        for seed in 0..5u64 {
            let w = LstmWeights::init(100 + seed);
            let mut state = LstmMotionState::new();
            let mut ref_p = (std::vec![0.0; HIDDEN_DIM], std::vec![0.0; HIDDEN_DIM]);
            let mut ref_u = ref_p.clone();
            let mut hist = VelocityHistory::new();
            let mut prev = Vec3::new(20.0, 3.0, 0.75);
            let origin = Vec3::new(1.0, 0.0, 1.5);
            for _ in 0..12 {
                let v_last = hist.latest();
                let v_ref = hist.mean();
                let pred = plstm_predict(&mut state, &w, &hist, prev);
                let emb = |v: Vec3, s: f64| -> std::vec::Vec<f64> {
                    reference_dense(&w.embed.layer, &[v.x * s, v.y * s, v.z * s])
                        .into_iter()
                        .map(f64::tanh)
                        .collect()
                };
                let (h, c) = reference_cell(
                    &w.plstm.weight,
                    &w.plstm.bias,
                    EMBED_DIM,
                    &emb(v_last, DISPLACEMENT_SCALE),
                    &ref_p.0,
                    &ref_p.1,
                );
                ref_p = (h, c);
                let g = reference_head(&w.p_head, &ref_p.0);
                let expect_pred = prev + Vec3::new(g[0] * v_ref.x, g[1] * v_ref.y, g[2] * v_ref.z);
                assert_abs_diff_eq!(pred, expect_pred, epsilon = 1e-10);

                let obs = pred
                    + Vec3::new(
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(-0.1..0.1),
                    );
                let refined = ulstm_update(&mut state, &w, &mut hist, prev, pred, obs, origin);
                let mut x = emb(obs - pred, DISPLACEMENT_SCALE);
                x.extend(emb(obs - origin, RANGE_SCALE));
                let (h, c) = reference_cell(
                    &w.ulstm.weight,
                    &w.ulstm.bias,
                    2 * EMBED_DIM,
                    &x,
                    &ref_u.0,
                    &ref_u.1,
                );
                ref_u = (h, c);
                let g = reference_head(&w.u_head, &ref_u.0);
                let innov = obs - pred;
                let expect = pred + Vec3::new(g[0] * innov.x, g[1] * innov.y, g[2] * innov.z);
                assert_abs_diff_eq!(refined, expect, epsilon = 1e-10);
                for (a, b) in state.predict.h.iter().zip(&ref_p.0) {
                    assert!((a - b).abs() < 1e-10);
                }
                prev = refined;
            }
        }
    }

    #[test]
    fn forward_is_bit_deterministic() {
        let w = LstmWeights::init(8);
        let run = || {
            let mut s = LstmMotionState::new();
            let mut hist = VelocityHistory::new();
            let mut prev = Vec3::new(5.0, 1.0, 0.7);
            for t in 0..20 {
                let pred = plstm_predict(&mut s, &w, &hist, prev);
                prev = ulstm_update(
                    &mut s,
                    &w,
                    &mut hist,
                    prev,
                    pred,
                    Vec3::new(5.0 + t as f64, 1.0, 0.7),
                    Vec3::zeros(),
                );
            }
            (prev, s)
        };
        assert_eq!(run(), run());
    }
}
