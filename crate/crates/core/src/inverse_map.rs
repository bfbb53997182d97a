//! The 6-15-3 inverse map from limb kinematics to motor activations.
//!
//! Inputs are z-scored with statistics frozen at initial training. Both
//! layers use `tanh`; the output layer is affinely rescaled onto the
//! activation range, so every prediction is a valid motor command.
//!
//! Parameters live in one flat array laid out as hidden weights (15×6,
//! row-major), hidden biases (15), output weights (3×15, row-major), output
//! biases (3). The loss is the mean over samples and outputs of the squared
//! activation error.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::signals::{Activation, KinematicSample, ACTIVATION_MAX, ACTIVATION_MIN};
use crate::{seed, Error, Result};

pub const INPUTS: usize = 6;
pub const HIDDEN: usize = 15;
pub const OUTPUTS: usize = 3;

const W1: usize = 0;
const B1: usize = W1 + HIDDEN * INPUTS;
const W2: usize = B1 + HIDDEN;
const B2: usize = W2 + OUTPUTS * HIDDEN;
pub const N_PARAMS: usize = B2 + OUTPUTS;

type Params = [f64; N_PARAMS];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs_initial: usize,
    pub epochs_refine: usize,
    pub batch_size: usize,
    pub momentum: f64,
    pub learning_rate: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs_initial: 200,
            epochs_refine: 50,
            batch_size: 64,
            momentum: 0.9,
            learning_rate: 1e-2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0
            || !(self.learning_rate > 0.0)
            || !(0.0..1.0).contains(&self.momentum)
        {
            return Err(Error::invalid("train config out of range"));
        }
        Ok(())
    }
}

/// Per-epoch mean squared error over the whole training set. Entry 0 is the
/// loss before the first epoch. A map loaded from disk keeps only the first
/// and last entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: usize,
    pub losses: Vec<f64>,
    pub final_learning_rate: f64,
}

impl TrainHistory {
    pub fn initial_loss(&self) -> Option<f64> {
        self.losses.first().copied()
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.losses.last().copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub inputs: Vec<KinematicSample>,
    pub targets: Vec<Activation>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Adds a pair; rows with non-finite kinematics are skipped. Returns
    /// whether the pair was kept.
    pub fn push(&mut self, x: KinematicSample, y: Activation) -> bool {
        if x.is_finite() {
            self.inputs.push(x);
            self.targets.push(y);
            true
        } else {
            false
        }
    }

    pub fn extend_from(&mut self, other: &Dataset) {
        self.inputs.extend_from_slice(&other.inputs);
        self.targets.extend_from_slice(&other.targets);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InverseMap {
    params: Params,
    input_mean: [f64; INPUTS],
    input_scale: [f64; INPUTS],
    output_range: [f64; 2],
    pub history: TrainHistory,
}

struct Forward {
    x: [f64; INPUTS],
    hidden: [f64; HIDDEN],
    out_tanh: [f64; OUTPUTS],
}

impl InverseMap {
    /// A map with all weights zero and identity normalization; predicts the
    /// midpoint of the output range everywhere.
    pub fn zeroed() -> Self {
        Self {
            params: [0.0; N_PARAMS],
            input_mean: [0.0; INPUTS],
            input_scale: [1.0; INPUTS],
            output_range: [ACTIVATION_MIN, ACTIVATION_MAX],
            history: TrainHistory::default(),
        }
    }

    /// Symmetric uniform initialization in `±sqrt(6/(fan_in+fan_out))` per
    /// layer, with normalization statistics taken from `data`.
    pub fn initialized(data: &Dataset, seed_value: u64) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (input_mean, input_scale) = normalization(data);
        let mut rng = seed::rng(seed_value);
        let mut params = [0.0; N_PARAMS];
        let l1 = (6.0 / (INPUTS + HIDDEN) as f64).sqrt();
        let l2 = (6.0 / (HIDDEN + OUTPUTS) as f64).sqrt();
        for w in &mut params[W1..B1] {
            *w = rng.random_range(-l1..l1);
        }
        for w in &mut params[W2..B2] {
            *w = rng.random_range(-l2..l2);
        }
        Ok(Self {
            params,
            input_mean,
            input_scale,
            output_range: [ACTIVATION_MIN, ACTIVATION_MAX],
            history: TrainHistory::default(),
        })
    }

    pub fn params(&self) -> &[f64; N_PARAMS] {
        &self.params
    }

    pub fn set_params(&mut self, params: [f64; N_PARAMS]) {
        self.params = params;
    }

    pub fn normalization(&self) -> ([f64; INPUTS], [f64; INPUTS]) {
        (self.input_mean, self.input_scale)
    }

    fn normalize(&self, x: &KinematicSample) -> [f64; INPUTS] {
        let raw = x.to_array();
        std::array::from_fn(|i| (raw[i] - self.input_mean[i]) / self.input_scale[i])
    }

    fn forward(&self, params: &Params, x: [f64; INPUTS]) -> Forward {
        let mut hidden = [0.0; HIDDEN];
        for (k, h) in hidden.iter_mut().enumerate() {
            let row = &params[W1 + k * INPUTS..W1 + (k + 1) * INPUTS];
            let z: f64 = row.iter().zip(&x).map(|(w, xi)| w * xi).sum::<f64>() + params[B1 + k];
            *h = tanh(z);
        }
        let mut out_tanh = [0.0; OUTPUTS];
        for (j, o) in out_tanh.iter_mut().enumerate() {
            let row = &params[W2 + j * HIDDEN..W2 + (j + 1) * HIDDEN];
            let z: f64 = row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + params[B2 + j];
            *o = tanh(z);
        }
        Forward { x, hidden, out_tanh }
    }

    fn scale_output(&self, t: f64) -> f64 {
        let [lo, hi] = self.output_range;
        (lo + (hi - lo) * 0.5 * (t + 1.0)).clamp(lo, hi)
    }

    pub fn predict(&self, x: &KinematicSample) -> Result<Activation> {
        if !x.is_finite() {
            return Err(Error::invalid("non-finite kinematic sample"));
        }
        let f = self.forward(&self.params, self.normalize(x));
        Ok(Activation::saturating(f.out_tanh.map(|t| self.scale_output(t))))
    }

    /// Mean squared activation error over `data`.
    pub fn loss(&self, data: &Dataset) -> f64 {
        loss_with(self, &self.params, data)
    }

    /// Analytic gradient of [`InverseMap::loss`] with respect to the flat parameters.
    pub fn gradient(&self, data: &Dataset) -> [f64; N_PARAMS] {
        let rows = self.prepare(data);
        let idx: Vec<usize> = (0..data.len()).collect();
        let mut g = [0.0; N_PARAMS];
        self.accumulate_gradient(&self.params, &rows, &idx, &mut g);
        g
    }

    fn prepare(&self, data: &Dataset) -> Prepared {
        Prepared {
            x: data.inputs.iter().map(|x| self.normalize(x)).collect(),
            y: data.targets.iter().map(|y| y.values()).collect(),
        }
    }

    /// Adds the mean gradient over `data[idx]` into `grad` (which is
    /// overwritten).
    fn accumulate_gradient(&self, params: &Params, rows: &Prepared, idx: &[usize], grad: &mut Params) {
        grad.fill(0.0);
        if idx.is_empty() {
            return;
        }
        let [lo, hi] = self.output_range;
        let norm = 1.0 / (idx.len() * OUTPUTS) as f64;
        for &n in idx {
            let f = self.forward(params, rows.x[n]);
            let y = rows.y[n];
            let mut dz2 = [0.0; OUTPUTS];
            for j in 0..OUTPUTS {
                let t = f.out_tanh[j];
                let a = lo + (hi - lo) * 0.5 * (t + 1.0);
                dz2[j] = 2.0 * norm * (a - y[j]) * 0.5 * (hi - lo) * (1.0 - t * t);
            }
            let mut dh = [0.0; HIDDEN];
            for j in 0..OUTPUTS {
                let base = W2 + j * HIDDEN;
                for k in 0..HIDDEN {
                    grad[base + k] += dz2[j] * f.hidden[k];
                    dh[k] += dz2[j] * params[base + k];
                }
                grad[B2 + j] += dz2[j];
            }
            for k in 0..HIDDEN {
                let dz1 = dh[k] * (1.0 - f.hidden[k] * f.hidden[k]);
                let base = W1 + k * INPUTS;
                for i in 0..INPUTS {
                    grad[base + i] += dz1 * f.x[i];
                }
                grad[B1 + k] += dz1;
            }
        }
    }

    /// Mini-batch gradient descent with momentum from the current weights.
    ///
    /// After every epoch the full-data loss is measured. If it went up, the
    /// epoch is rolled back, momentum is cleared, and the step size halves,
    /// so the recorded history never increases.
    fn fit(&mut self, data: &Dataset, cfg: &TrainConfig, epochs: usize, seed_value: u64) {
        let mut rng = seed::rng(seed_value);
        let rows = self.prepare(data);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut velocity = [0.0; N_PARAMS];
        let mut grad = [0.0; N_PARAMS];
        let mut lr = cfg.learning_rate;
        let mut current = prepared_loss(self, &self.params, &rows);
        let mut losses = Vec::with_capacity(epochs + 1);
        losses.push(current);
        for _ in 0..epochs {
            let snapshot = self.params;
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.batch_size) {
                self.accumulate_gradient(&self.params, &rows, batch, &mut grad);
                for ((w, v), g) in self.params.iter_mut().zip(velocity.iter_mut()).zip(&grad) {
                    *v = cfg.momentum * *v - lr * g;
                    *w += *v;
                }
            }
            let next = prepared_loss(self, &self.params, &rows);
            if next.is_finite() && next <= current {
                current = next;
            } else {
                self.params = snapshot;
                velocity.fill(0.0);
                lr *= 0.5;
            }
            losses.push(current);
        }
        self.history = TrainHistory { epochs, losses, final_learning_rate: lr };
    }

    /// Warm-start retraining on `cumulative` with the normalization frozen.
    pub fn refine(&self, cumulative: &Dataset, cfg: &TrainConfig, seed_value: u64) -> Result<Self> {
        refine(self, cumulative, cfg, seed_value)
    }

    pub fn to_document(&self) -> MapDocument {
        MapDocument {
            layer_sizes: [INPUTS, HIDDEN, OUTPUTS],
            hidden_weights: self.params[W1..B1].to_vec(),
            hidden_biases: self.params[B1..W2].to_vec(),
            output_weights: self.params[W2..B2].to_vec(),
            output_biases: self.params[B2..].to_vec(),
            input_mean: self.input_mean,
            input_scale: self.input_scale,
            output_range: self.output_range,
            history: HistorySummary {
                epochs: self.history.epochs,
                initial_loss: self.history.initial_loss(),
                final_loss: self.history.final_loss(),
                final_learning_rate: self.history.final_learning_rate,
            },
        }
    }

    pub fn from_document(doc: &MapDocument) -> Result<Self> {
        if doc.layer_sizes != [INPUTS, HIDDEN, OUTPUTS] {
            return Err(Error::invalid(format!("unsupported layer sizes {:?}", doc.layer_sizes)));
        }
        let sizes = [
            (doc.hidden_weights.len(), HIDDEN * INPUTS),
            (doc.hidden_biases.len(), HIDDEN),
            (doc.output_weights.len(), OUTPUTS * HIDDEN),
            (doc.output_biases.len(), OUTPUTS),
        ];
        if sizes.iter().any(|(got, want)| got != want) {
            return Err(Error::invalid("weight array has the wrong length"));
        }
        if doc.output_range != [ACTIVATION_MIN, ACTIVATION_MAX] {
            return Err(Error::invalid("unsupported output range"));
        }
        if doc.input_scale.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::invalid("input scales must be positive"));
        }
        let mut params = [0.0; N_PARAMS];
        params[W1..B1].copy_from_slice(&doc.hidden_weights);
        params[B1..W2].copy_from_slice(&doc.hidden_biases);
        params[W2..B2].copy_from_slice(&doc.output_weights);
        params[B2..].copy_from_slice(&doc.output_biases);
        Ok(Self {
            params,
            input_mean: doc.input_mean,
            input_scale: doc.input_scale,
            output_range: doc.output_range,
            history: TrainHistory {
                epochs: doc.history.epochs,
                losses: match (doc.history.initial_loss, doc.history.final_loss) {
                    (Some(a), Some(b)) if doc.history.epochs > 0 => vec![a, b],
                    (Some(a), _) => vec![a],
                    _ => Vec::new(),
                },
                final_learning_rate: doc.history.final_learning_rate,
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_document())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_document(&serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

/// Normalized inputs and raw targets, computed once per training call.
struct Prepared {
    x: Vec<[f64; INPUTS]>,
    y: Vec<[f64; OUTPUTS]>,
}

/// `tanh` through a single `exp`; agrees with `f64::tanh` to about 1e-15
/// absolute and is markedly cheaper.
fn tanh(z: f64) -> f64 {
    let a = z.abs();
    if a > 20.0 {
        return 1.0_f64.copysign(z);
    }
    let e = (-2.0 * a).exp();
    ((1.0 - e) / (1.0 + e)).copysign(z)
}

fn loss_with(map: &InverseMap, params: &Params, data: &Dataset) -> f64 {
    prepared_loss(map, params, &map.prepare(data))
}

fn prepared_loss(map: &InverseMap, params: &Params, rows: &Prepared) -> f64 {
    if rows.x.is_empty() {
        return 0.0;
    }
    let [lo, hi] = map.output_range;
    let mut total = 0.0;
    for (x, y) in rows.x.iter().zip(&rows.y) {
        let f = map.forward(params, *x);
        for (t, yj) in f.out_tanh.iter().zip(y) {
            let a = lo + (hi - lo) * 0.5 * (t + 1.0);
            total += (a - yj) * (a - yj);
        }
    }
    total / (rows.x.len() * OUTPUTS) as f64
}

/// Per-input means and standard deviations; near-constant inputs get unit
/// scale.
fn normalization(data: &Dataset) -> ([f64; INPUTS], [f64; INPUTS]) {
    let n = data.len() as f64;
    let mut mean = [0.0; INPUTS];
    for x in &data.inputs {
        for (m, v) in mean.iter_mut().zip(x.to_array()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = [0.0; INPUTS];
    for x in &data.inputs {
        for ((s, v), m) in var.iter_mut().zip(x.to_array()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let scale = var.map(|s| {
        let sd = (s / n).sqrt();
        if sd > 1e-12 {
            sd
        } else {
            1.0
        }
    });
    (mean, scale)
}

/// Train a fresh map on babbling data.
pub fn train_initial(data: &Dataset, cfg: &TrainConfig, seed_value: u64) -> Result<InverseMap> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;
    let mut map = InverseMap::initialized(data, seed::derive(seed_value, 0))?;
    map.fit(data, cfg, cfg.epochs_initial, seed::derive(seed_value, 1));
    Ok(map)
}

/// Warm-start retraining on the cumulative dataset. Normalization statistics
/// stay those of the initial map.
pub fn refine(map: &InverseMap, cumulative: &Dataset, cfg: &TrainConfig, seed_value: u64) -> Result<InverseMap> {
    if cumulative.is_empty() {
        return Err(Error::EmptyDataset);
    }
    cfg.validate()?;
    let mut next = map.clone();
    next.fit(cumulative, cfg, cfg.epochs_refine, seed_value);
    Ok(next)
}

/// Largest relative discrepancy between the analytic gradient and central
/// finite differences (`h = 1e-5`) over every parameter.
///
/// The relative error of each component is `|g − fd| / max(|g| + |fd|, 1e-8)`.
pub fn grad_check(map: &InverseMap, data_small: &Dataset) -> Result<f64> {
    if data_small.len() > 16 {
        return Err(Error::invalid("grad_check takes at most 16 pairs"));
    }
    let analytic = map.gradient(data_small);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut p = map.params;
    for i in 0..N_PARAMS {
        let orig = p[i];
        p[i] = orig + h;
        let up = loss_with(map, &p, data_small);
        p[i] = orig - h;
        let down = loss_with(map, &p, data_small);
        p[i] = orig;
        let fd = (up - down) / (2.0 * h);
        let rel = (analytic[i] - fd).abs() / (analytic[i].abs() + fd.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Mean over samples of the squared joint-angle error summed over both
/// joints, in rad².
pub fn evaluate_mse(desired: &[KinematicSample], achieved: &[KinematicSample]) -> Result<f64> {
    if desired.len() != achieved.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} desired vs {} achieved",
            desired.len(),
            achieved.len()
        )));
    }
    if desired.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = desired
        .iter()
        .zip(achieved)
        .map(|(d, a)| (d.q[0] - a.q[0]).powi(2) + (d.q[1] - a.q[1]).powi(2))
        .sum();
    Ok(total / desired.len() as f64)
}

/// On-disk form of an [`InverseMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub layer_sizes: [usize; 3],
    pub hidden_weights: Vec<f64>,
    pub hidden_biases: Vec<f64>,
    pub output_weights: Vec<f64>,
    pub output_biases: Vec<f64>,
    pub input_mean: [f64; INPUTS],
    pub input_scale: [f64; INPUTS],
    pub output_range: [f64; 2],
    pub history: HistorySummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistorySummary {
    pub epochs: usize,
    pub initial_loss: Option<f64>,
    pub final_loss: Option<f64>,
    pub final_learning_rate: f64,
}
