//! Truncated backpropagation through time for the P-LSTM/U-LSTM pair.
//!
//! A training window replays one trajectory: the tracklet is born at frame 0
//! with `P̄_0 = P̂_0`, runs forward without gradients through a random burn-in,
//! then accumulates the loss over `window` frames. Per frame the loss is
//!
//! ```text
//! |P̄_t - P_t| + |P̃_t - P_t| + λ [(1 - cos(v_t, v_{t-1})) + |v_t - v_{t-1}|]
//! ```
//!
//! with `|·|` the mean absolute error over the three axes and `v_t = P̄_t - P̄_{t-1}`.
//! The prediction term is skipped while the velocity history is still empty.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::deep::{
    predict_step, update_step, CellState, LstmWeights, PredictCache, UpdateCache,
    DISPLACEMENT_SCALE, HIDDEN_DIM, HISTORY_LEN,
};
use super::MotionError;
use crate::geometry::Vec3;

const COS_EPS: f64 = 1e-6;

/// Target of the linear-motion term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearMotionTarget {
    /// Consecutive refined velocities `v_t` against `v_{t-1}`.
    #[default]
    Consecutive,
    /// Refined velocity against the ground-truth velocity.
    GroundTruth,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHyperparams {
    pub steps: usize,
    pub batch_size: usize,
    pub window: usize,
    pub max_burn_in: usize,
    pub learning_rate: f64,
    /// Learning rate at the last step as a fraction of `learning_rate`
    /// (cosine schedule).
    pub final_lr_fraction: f64,
    pub momentum: f64,
    pub clip_norm: f64,
    pub linear_weight: f64,
    pub linear_target: LinearMotionTarget,
    pub seed: u64,
}

impl Default for TrainingHyperparams {
    fn default() -> Self {
        Self {
            steps: 2000,
            batch_size: 4,
            window: 10,
            max_burn_in: 20,
            learning_rate: 1e-2,
            final_lr_fraction: 0.05,
            momentum: 0.9,
            clip_norm: 5.0,
            linear_weight: 1.0,
            linear_target: LinearMotionTarget::Consecutive,
            seed: 0,
        }
    }
}

impl TrainingHyperparams {
    pub fn validate(&self) -> Result<(), MotionError> {
        if self.steps == 0 {
            return Err(MotionError::InvalidHyperparameter("steps must be positive"));
        }
        if self.batch_size == 0 {
            return Err(MotionError::InvalidHyperparameter(
                "batch_size must be positive",
            ));
        }
        if self.window == 0 {
            return Err(MotionError::InvalidHyperparameter(
                "window must be positive",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(MotionError::InvalidHyperparameter(
                "learning_rate must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&self.final_lr_fraction) {
            return Err(MotionError::InvalidHyperparameter(
                "final_lr_fraction must be in [0, 1]",
            ));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(MotionError::InvalidHyperparameter(
                "momentum must be in [0, 1)",
            ));
        }
        if !(self.clip_norm > 0.0) {
            return Err(MotionError::InvalidHyperparameter(
                "clip_norm must be positive",
            ));
        }
        if !(self.linear_weight >= 0.0 && self.linear_weight.is_finite()) {
            return Err(MotionError::InvalidHyperparameter(
                "linear_weight must be non-negative",
            ));
        }
        Ok(())
    }

    fn learning_rate_at(&self, step: usize) -> f64 {
        let progress = if self.steps > 1 {
            step as f64 / (self.steps - 1) as f64
        } else {
            1.0
        };
        let cosine = 0.5 * (1.0 + (PI * progress).cos());
        self.learning_rate * (self.final_lr_fraction + (1.0 - self.final_lr_fraction) * cosine)
    }
}

/// One trajectory: observed (noisy) locations, ground truth, and the camera
/// center at every frame.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    pub observed: Vec<Vec3>,
    pub ground_truth: Vec<Vec3>,
    pub origins: Vec<Vec3>,
}

impl TrainingSample {
    pub fn new(
        observed: Vec<Vec3>,
        ground_truth: Vec<Vec3>,
        origins: Vec<Vec3>,
    ) -> Result<Self, MotionError> {
        if observed.len() != ground_truth.len() || observed.len() != origins.len() {
            return Err(MotionError::InvalidHyperparameter(
                "sample sequences differ in length",
            ));
        }
        Ok(Self {
            observed,
            ground_truth,
            origins,
        })
    }

    pub fn len(&self) -> usize {
        self.observed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observed.is_empty()
    }
}

/// Frames `[start, start + len)` of a sample; `start >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub weights: LstmWeights,
    /// Mean batch loss per optimizer step.
    pub losses: Vec<f64>,
    pub final_loss: f64,
}

/// Velocity history entry tagged with the window step that produced it.
#[derive(Clone, Copy)]
struct Entry {
    v: Vec3,
    source: Option<usize>,
}

struct Replay {
    p_state: CellState,
    u_state: CellState,
    history: Vec<Entry>,
    refined: Vec3,
}

impl Replay {
    fn new(birth: Vec3) -> Self {
        Self {
            p_state: CellState::zeros(HIDDEN_DIM),
            u_state: CellState::zeros(HIDDEN_DIM),
            history: Vec::with_capacity(HISTORY_LEN),
            refined: birth,
        }
    }

    fn mean(&self) -> Vec3 {
        if self.history.is_empty() {
            return Vec3::zeros();
        }
        self.history.iter().fold(Vec3::zeros(), |a, e| a + e.v) / self.history.len() as f64
    }

    fn latest(&self) -> Vec3 {
        self.history.last().map_or(Vec3::zeros(), |e| e.v)
    }

    fn push(&mut self, v: Vec3, source: Option<usize>) {
        if self.history.len() == HISTORY_LEN {
            self.history.remove(0);
        }
        self.history.push(Entry { v, source });
    }

    fn step(
        &mut self,
        w: &LstmWeights,
        observed: Vec3,
        origin: Vec3,
        source: Option<usize>,
    ) -> Step {
        let prev = self.refined;
        let sources = self.history.iter().map(|e| e.source).collect();
        let (v_last, v_ref) = (self.latest(), self.mean());
        let (p_tilde, predict) = predict_step(w, &mut self.p_state, v_last, v_ref, prev);
        let (p_bar, update) = update_step(w, &mut self.u_state, p_tilde, observed, origin);
        self.push(p_bar - prev, source);
        self.refined = p_bar;
        Step {
            predict,
            update,
            prev,
            p_tilde,
            p_bar,
            sources,
        }
    }
}

struct Step {
    predict: PredictCache,
    update: UpdateCache,
    prev: Vec3,
    p_tilde: Vec3,
    p_bar: Vec3,
    sources: Vec<Option<usize>>,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn l1(d: Vec3) -> (f64, Vec3) {
    (d.abs().sum() / 3.0, d.map(sign) / 3.0)
}

/// `1 - cos(a, b)` with smoothed norms, and its gradients.
fn cosine_distance(a: Vec3, b: Vec3) -> (f64, Vec3, Vec3) {
    let na = (a.norm_squared() + COS_EPS).sqrt();
    let nb = (b.norm_squared() + COS_EPS).sqrt();
    let c = a.dot(&b) / (na * nb);
    let da = b / (na * nb) - a * (c / (na * na));
    let db = a / (na * nb) - b * (c / (nb * nb));
    (1.0 - c, -da, -db)
}

fn add_velocity_grad(dpbar: &mut [Vec3], source: Option<usize>, g: Vec3) {
    if let Some(j) = source {
        dpbar[j] += g;
        if j >= 1 {
            dpbar[j - 1] -= g;
        }
    }
}

/// Window loss only.
pub fn window_loss(
    w: &LstmWeights,
    sample: &TrainingSample,
    window: Window,
    hp: &TrainingHyperparams,
) -> f64 {
    let mut grad = LstmWeights::zeros();
    window_gradient_into(w, sample, window, hp, &mut grad)
}

/// Window loss and its gradient with respect to every parameter.
pub fn window_gradient(
    w: &LstmWeights,
    sample: &TrainingSample,
    window: Window,
    hp: &TrainingHyperparams,
) -> (f64, LstmWeights) {
    let mut grad = LstmWeights::zeros();
    let loss = window_gradient_into(w, sample, window, hp, &mut grad);
    (loss, grad)
}

fn window_gradient_into(
    w: &LstmWeights,
    sample: &TrainingSample,
    window: Window,
    hp: &TrainingHyperparams,
    grad: &mut LstmWeights,
) -> f64 {
    let Window { start, len } = window;
    assert!(
        start >= 1 && start + len <= sample.len(),
        "window outside the sample"
    );
    let mut replay = Replay::new(sample.observed[0]);
    for t in 1..start {
        replay.step(w, sample.observed[t], sample.origins[t], None);
    }
    let steps: Vec<Step> = (0..len)
        .map(|k| {
            let t = start + k;
            replay.step(w, sample.observed[t], sample.origins[t], Some(k))
        })
        .collect();

    let scale = 1.0 / len as f64;
    let mut loss = 0.0;
    let mut dpbar = vec![Vec3::zeros(); len];
    let mut dptilde = vec![Vec3::zeros(); len];
    for (k, s) in steps.iter().enumerate() {
        let t = start + k;
        let gt = sample.ground_truth[t];
        let (l, g) = l1(s.p_bar - gt);
        loss += scale * l;
        dpbar[k] += scale * g;
        if !s.sources.is_empty() {
            let (l, g) = l1(s.p_tilde - gt);
            loss += scale * l;
            dptilde[k] += scale * g;
        }
        if hp.linear_weight == 0.0 {
            continue;
        }
        let v = s.p_bar - s.prev;
        let lw = scale * hp.linear_weight;
        match hp.linear_target {
            LinearMotionTarget::Consecutive => {
                if s.sources.is_empty() {
                    continue;
                }
                let v_prev = s.predict_input_velocity();
                let (lc, dva, dvb) = cosine_distance(v, v_prev);
                let (ll, gl) = l1(v - v_prev);
                loss += lw * (lc + ll);
                add_velocity_grad(&mut dpbar, Some(k), lw * (dva + gl));
                add_velocity_grad(&mut dpbar, *s.sources.last().unwrap(), lw * (dvb - gl));
            }
            LinearMotionTarget::GroundTruth => {
                let v_gt = gt - sample.ground_truth[t - 1];
                let (lc, dva, _) = cosine_distance(v, v_gt);
                let (ll, gl) = l1(v - v_gt);
                loss += lw * (lc + ll);
                add_velocity_grad(&mut dpbar, Some(k), lw * (dva + gl));
            }
        }
    }

    let mut dh_p = vec![0.0; HIDDEN_DIM];
    let mut dc_p = vec![0.0; HIDDEN_DIM];
    let mut dh_u = vec![0.0; HIDDEN_DIM];
    let mut dc_u = vec![0.0; HIDDEN_DIM];
    for k in (0..len).rev() {
        let s = &steps[k];
        let u = &s.update;
        let dbar = dpbar[k];
        let gain_u = Vec3::from(u.gain);
        let mut dtil = dptilde[k] + dbar.component_mul(&(Vec3::repeat(1.0) - gain_u));
        let dgain_u = dbar.component_mul(&u.innovation);

        let mut dh = w.u_head.backward(
            &u.head,
            &[dgain_u.x, dgain_u.y, dgain_u.z],
            &mut grad.u_head,
        );
        dh.iter_mut().zip(&dh_u).for_each(|(a, b)| *a += b);
        let (dx, dh_prev, dc_prev) = w.ulstm.backward(&u.cell, &dh, &dc_u, &mut grad.ulstm);
        dh_u = dh_prev;
        dc_u = dc_prev;
        let (d_innov, d_range) = dx.split_at(u.innovation_emb.len());
        let d_in = w.embed.backward(
            &u.innovation_in,
            &u.innovation_emb,
            d_innov,
            &mut grad.embed,
        );
        w.embed
            .backward(&u.range_in, &u.range_emb, d_range, &mut grad.embed);
        dtil -= Vec3::new(d_in[0], d_in[1], d_in[2]) * DISPLACEMENT_SCALE;

        let p = &s.predict;
        let gain_p = Vec3::from(p.gain);
        let dprev = dtil;
        let dgain_p = dtil.component_mul(&p.v_ref);
        let dv_ref = dtil.component_mul(&gain_p);
        let mut dh = w.p_head.backward(
            &p.head,
            &[dgain_p.x, dgain_p.y, dgain_p.z],
            &mut grad.p_head,
        );
        dh.iter_mut().zip(&dh_p).for_each(|(a, b)| *a += b);
        let (dx, dh_prev, dc_prev) = w.plstm.backward(&p.cell, &dh, &dc_p, &mut grad.plstm);
        dh_p = dh_prev;
        dc_p = dc_prev;
        let d_in = w
            .embed
            .backward(&p.input, &p.embedded, &dx, &mut grad.embed);
        let dv_last = Vec3::new(d_in[0], d_in[1], d_in[2]) * DISPLACEMENT_SCALE;

        if !s.sources.is_empty() {
            let share = dv_ref / s.sources.len() as f64;
            for src in &s.sources {
                add_velocity_grad(&mut dpbar, *src, share);
            }
            add_velocity_grad(&mut dpbar, *s.sources.last().unwrap(), dv_last);
        }
        if k >= 1 {
            dpbar[k - 1] += dprev;
        }
    }
    loss
}

impl Step {
    /// The most recent history velocity seen by the predictor.
    fn predict_input_velocity(&self) -> Vec3 {
        Vec3::from(self.predict.input) / DISPLACEMENT_SCALE
    }
}

fn random_window<R: Rng>(rng: &mut R, sample: &TrainingSample, hp: &TrainingHyperparams) -> Window {
    let n = sample.len();
    let len = hp.window.min(n - 1);
    let last_start = (n - len).min(1 + hp.max_burn_in);
    Window {
        start: rng.random_range(1..=last_start),
        len,
    }
}

/// Momentum SGD over random windows. Gradients are averaged over the batch and
/// clipped by global norm before each update.
pub fn train_lstm(
    samples: &[TrainingSample],
    init: LstmWeights,
    hp: &TrainingHyperparams,
) -> Result<TrainReport, MotionError> {
    hp.validate()?;
    init.validate()?;
    let usable: Vec<&TrainingSample> = samples.iter().filter(|s| s.len() >= 2).collect();
    if usable.is_empty() {
        return Err(MotionError::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut weights = init;
    let mut velocity = LstmWeights::zeros();
    let mut losses = Vec::with_capacity(hp.steps);
    for step in 0..hp.steps {
        let mut grad = LstmWeights::zeros();
        let mut loss = 0.0;
        for _ in 0..hp.batch_size {
            let sample = usable[rng.random_range(0..usable.len())];
            let window = random_window(&mut rng, sample, hp);
            loss += window_gradient_into(&weights, sample, window, hp, &mut grad);
        }
        let inv = 1.0 / hp.batch_size as f64;
        loss *= inv;
        if !loss.is_finite() {
            return Err(MotionError::DivergedTraining(step));
        }
        let norm = grad
            .tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
            * inv;
        if !norm.is_finite() {
            return Err(MotionError::DivergedTraining(step));
        }
        let g_scale = if norm > hp.clip_norm {
            inv * hp.clip_norm / norm
        } else {
            inv
        };
        let lr = hp.learning_rate_at(step);
        for ((wt, vt), gt) in weights
            .tensors_mut()
            .into_iter()
            .zip(velocity.tensors_mut())
            .zip(grad.tensors())
        {
            for ((w, v), g) in wt.iter_mut().zip(vt.iter_mut()).zip(gt) {
                *v = hp.momentum * *v + g_scale * g;
                *w -= lr * *v;
            }
        }
        losses.push(loss);
    }
    let final_loss = *losses.last().unwrap();
    Ok(TrainReport {
        weights,
        losses,
        final_loss,
    })
}
