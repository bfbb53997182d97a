//! Motor babbling: stair-step random activations and the dataset they yield.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::inverse_map::Dataset;
use crate::limb_sim::SimTrace;
use crate::signals::{Activation, ACTIVATION_MAX, ACTIVATION_MIN};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BabbleConfig {
    pub duration_s: f64,
    pub sample_rate: f64,
    pub activation_range: [f64; 2],
    pub seed: u64,
    /// Per-sample probability that a motor jumps to a new level. `None`
    /// means `1/sample_rate`, i.e. one jump per second on average.
    pub transition_prob: Option<f64>,
}

impl Default for BabbleConfig {
    fn default() -> Self {
        Self {
            duration_s: 300.0,
            sample_rate: 78.0,
            activation_range: [ACTIVATION_MIN, ACTIVATION_MAX],
            seed: 0,
            transition_prob: None,
        }
    }
}

impl BabbleConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.activation_range;
        if !(self.duration_s > 0.0) || !(self.sample_rate > 0.0) {
            return Err(Error::invalid("babble duration and sample rate must be positive"));
        }
        if !(ACTIVATION_MIN <= lo && lo <= hi && hi <= ACTIVATION_MAX) {
            return Err(Error::invalid(format!(
                "babble range [{lo}, {hi}] not within [{ACTIVATION_MIN}, {ACTIVATION_MAX}]"
            )));
        }
        if let Some(p) = self.transition_prob {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid("transition probability must be in [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.sample_rate).round() as usize
    }

    pub fn transition_probability(&self) -> f64 {
        self.transition_prob.unwrap_or(1.0 / self.sample_rate)
    }
}

/// Each motor holds a level until a first uniform draw falls below the
/// transition probability; a second uniform draw then picks the new level.
/// Initial levels are uniform in range.
pub fn generate(cfg: &BabbleConfig) -> Result<Vec<Activation>> {
    cfg.validate()?;
    let [lo, hi] = cfg.activation_range;
    let p = cfg.transition_probability();
    let mut rng = seed::rng(cfg.seed);
    let draw_level = |rng: &mut rand_chacha::ChaCha8Rng| lo + (hi - lo) * rng.random::<f64>();
    let mut level: [f64; 3] = std::array::from_fn(|_| draw_level(&mut rng));
    let n = cfg.n_samples();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        for l in level.iter_mut() {
            if rng.random::<f64>() < p {
                *l = draw_level(&mut rng);
            }
        }
        out.push(Activation::new(level)?);
    }
    Ok(out)
}

/// Number of level changes per motor.
pub fn transition_counts(seq: &[Activation]) -> [usize; 3] {
    let mut counts = [0; 3];
    for w in seq.windows(2) {
        let (a, b) = (w[0].values(), w[1].values());
        for i in 0..3 {
            if a[i] != b[i] {
                counts[i] += 1;
            }
        }
    }
    counts
}

/// Pair each sample's kinematics with the activation commanded over the same
/// interval. Non-finite rows are dropped.
pub fn collect_dataset(trace: &SimTrace) -> Result<Dataset> {
    if trace.is_empty() {
        return Err(Error::invalid("trace is empty"));
    }
    let mut data = Dataset::new();
    for (x, a) in trace.kinematics.iter().zip(&trace.activations) {
        data.push(*x, *a);
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(data)
}

/// Fraction of samples where at least one joint lies within `margin` (as a
/// fraction of that joint's range) of one of its limits.
pub fn near_limit_fraction(angles: &[[f64; 2]], limits: &[[f64; 2]; 2], margin: f64) -> f64 {
    if angles.is_empty() {
        return 0.0;
    }
    let near = angles
        .iter()
        .filter(|q| {
            (0..2).any(|j| {
                let [lo, hi] = limits[j];
                let band = margin * (hi - lo);
                q[j] <= lo + band || q[j] >= hi - band
            })
        })
        .count();
    near as f64 / angles.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BabbleSummary {
    pub samples: usize,
    pub transitions: [usize; 3],
    /// Fraction of samples with a joint within 5% of a limit.
    pub near_limit_fraction: f64,
    pub mean_watts: f64,
}

pub fn summarize(trace: &SimTrace, limits: &[[f64; 2]; 2]) -> BabbleSummary {
    BabbleSummary {
        samples: trace.len(),
        transitions: transition_counts(&trace.activations),
        near_limit_fraction: near_limit_fraction(&trace.angles(), limits, 0.05),
        mean_watts: trace.mean_watts,
    }
}
