//! The higher-level controller: babble, train, then reward-gated limit-cycle
//! search with the inverse map refined after every attempt.
//!
//! Attempt indices are zero-based. Exploration draws uniform feature vectors
//! until an attempt's reward strictly exceeds the threshold; exploitation then
//! runs a fixed number of Gaussian jumps around the best feature so far.

use std::fs;
use std::path::Path;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::babble::{self, BabbleConfig, BabbleSummary};
use crate::inverse_map::{self, Dataset, InverseMap, TrainConfig};
use crate::limb_sim::{Plant, SimTrace};
use crate::limit_cycle::{
    build_cycle, perturb_gaussian, sample_uniform, FeatureBounds, FeatureVector, DEFAULT_SAMPLES_PER_CYCLE,
};
use crate::signals::{Activation, KinematicSample};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct G2PConfig {
    /// mm; exploration ends on the first attempt whose reward is strictly
    /// above this.
    pub reward_threshold: f64,
    pub max_explore_attempts: usize,
    pub max_exploit_attempts: usize,
    pub cycles_per_attempt: usize,
    pub samples_per_cycle: usize,
    pub sigma_base: f64,
    pub sigma_min: f64,
    pub feature_bounds: FeatureBounds,
    /// Leading fraction of each attempt left out of refinement.
    pub refine_drop_fraction: f64,
    /// Whether attempts run against the treadmill.
    pub contact: bool,
    pub babble: BabbleConfig,
    pub train: TrainConfig,
}

impl Default for G2PConfig {
    fn default() -> Self {
        Self {
            reward_threshold: DEFAULT_REWARD_THRESHOLD,
            max_explore_attempts: 200,
            max_exploit_attempts: 15,
            cycles_per_attempt: 20,
            samples_per_cycle: DEFAULT_SAMPLES_PER_CYCLE,
            sigma_base: 0.2,
            sigma_min: 0.03,
            feature_bounds: FeatureBounds::TREADMILL,
            refine_drop_fraction: 0.25,
            contact: true,
            babble: BabbleConfig::default(),
            train: TrainConfig::default(),
        }
    }
}

/// Placeholder threshold (mm) for uncalibrated runs with the default plant.
pub const DEFAULT_REWARD_THRESHOLD: f64 = 50.0;

impl G2PConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_min > 0.0) || !(self.sigma_base >= 0.0) {
            return Err(Error::invalid("sigma_min must be positive and sigma_base nonnegative"));
        }
        if self.cycles_per_attempt == 0 {
            return Err(Error::invalid("cycles_per_attempt must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.refine_drop_fraction) {
            return Err(Error::invalid("refine_drop_fraction must lie in [0, 1)"));
        }
        if self.reward_threshold.is_nan() {
            return Err(Error::invalid("reward_threshold is NaN"));
        }
        self.feature_bounds.validate()?;
        self.babble.validate()?;
        self.train.validate()
    }

    /// Number of attempt samples that enter refinement.
    pub fn kept_samples(&self, attempt_len: usize) -> usize {
        ((1.0 - self.refine_drop_fraction) * attempt_len as f64).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Exploration,
    Exploitation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttemptRecord {
    pub index: usize,
    pub phase: Phase,
    pub feature: FeatureVector,
    /// `None` when the simulation diverged.
    pub trace: Option<SimTrace>,
    /// `-inf` for a failed attempt.
    pub reward_mm: f64,
    pub mean_watts: f64,
    pub best_so_far_mm: f64,
    /// Jump size used to draw this attempt's feature; exploitation only.
    pub sigma: Option<f64>,
}

impl AttemptRecord {
    pub fn failed(&self) -> bool {
        self.trace.is_none()
    }
}

/// Sigma shrinks in inverse proportion to the best reward, anchored so that
/// it equals `sigma_base` at the threshold. With a nonpositive threshold or
/// best reward the ratio is meaningless and `sigma_base` is used.
pub fn update_sigma(best_reward_mm: f64, cfg: &G2PConfig) -> f64 {
    let thr = cfg.reward_threshold;
    let ratio = if thr > 0.0 && best_reward_mm > 0.0 { thr / best_reward_mm } else { 1.0 };
    (cfg.sigma_base * ratio).max(cfg.sigma_min)
}

/// Babble in the air and train the initial map.
pub fn babble_and_train<P: Plant + ?Sized>(
    plant: &P,
    babble_cfg: &BabbleConfig,
    train_cfg: &TrainConfig,
    run_seed: u64,
) -> Result<(SimTrace, Dataset, InverseMap)> {
    let cfg = BabbleConfig { seed: seed::derive(run_seed, seed::stream::BABBLE), ..babble_cfg.clone() };
    let commands = babble::generate(&cfg)?;
    let trace = plant.execute(&commands, false)?;
    let data = babble::collect_dataset(&trace)?;
    let map = inverse_map::train_initial(&data, train_cfg, seed::derive(run_seed, seed::stream::INITIAL_TRAIN))?;
    Ok((trace, data, map))
}

/// Desired kinematics for one attempt and the activations the map predicts
/// for them.
pub fn plan_attempt<P: Plant + ?Sized>(
    plant: &P,
    map: &InverseMap,
    f: &FeatureVector,
    cfg: &G2PConfig,
) -> Result<(Vec<KinematicSample>, Vec<Activation>)> {
    let cycle = build_cycle(
        f,
        &cfg.feature_bounds,
        &plant.joint_limits(),
        cfg.samples_per_cycle,
        plant.sample_rate(),
    )?;
    let one: Vec<Activation> = cycle.samples.iter().map(|x| map.predict(x)).collect::<Result<_>>()?;
    let mut commands = Vec::with_capacity(one.len() * cfg.cycles_per_attempt);
    for _ in 0..cfg.cycles_per_attempt {
        commands.extend_from_slice(&one);
    }
    Ok((cycle.repeated(cfg.cycles_per_attempt), commands))
}

/// Run one attempt from the plant's start posture. A diverged simulation is
/// not an error: the record comes back failed with reward `-inf`.
/// `best_so_far_mm` is left at the reward; the caller owns the running best.
pub fn execute_attempt<P: Plant + ?Sized>(
    plant: &P,
    map: &InverseMap,
    f: &FeatureVector,
    cfg: &G2PConfig,
) -> Result<AttemptRecord> {
    let (_, commands) = plan_attempt(plant, map, f, cfg)?;
    let (trace, reward_mm, mean_watts) = match plant.execute(&commands, cfg.contact) {
        Ok(t) => {
            let (r, w) = (t.reward_mm, t.mean_watts);
            (Some(t), r, w)
        }
        Err(Error::Diverged { sample }) => {
            debug!("attempt diverged at sample {sample}");
            (None, f64::NEG_INFINITY, f64::NAN)
        }
        Err(e) => return Err(e),
    };
    Ok(AttemptRecord {
        index: 0,
        phase: Phase::Exploration,
        feature: *f,
        trace,
        reward_mm,
        mean_watts,
        best_so_far_mm: reward_mm,
        sigma: None,
    })
}

/// Append the retained tail of `trace` (achieved kinematics paired with the
/// commanded activations) to `cumulative`, then refine `map` on it.
pub fn refine_after_attempt(
    map: &InverseMap,
    cumulative: &mut Dataset,
    trace: &SimTrace,
    cfg: &G2PConfig,
    seed_value: u64,
) -> Result<InverseMap> {
    let keep = cfg.kept_samples(trace.len());
    let start = trace.len() - keep;
    for (x, a) in trace.kinematics[start..].iter().zip(&trace.activations[start..]) {
        cumulative.push(*x, *a);
    }
    map.refine(cumulative, &cfg.train, seed_value)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub seed: u64,
    pub config: G2PConfig,
    pub babble_trace: SimTrace,
    pub babble: BabbleSummary,
    pub attempts: Vec<AttemptRecord>,
    /// Index of the first attempt above threshold.
    pub crossed_at: Option<usize>,
    pub final_map: InverseMap,
    /// Size of the cumulative dataset after the last refinement.
    pub dataset_len: usize,
}

impl RunRecord {
    /// Exploration hit its cap without crossing the threshold.
    pub fn exploration_failed(&self) -> bool {
        self.crossed_at.is_none()
    }

    pub fn best_reward(&self) -> Option<f64> {
        self.attempts.last().map(|a| a.best_so_far_mm).filter(|r| r.is_finite())
    }

    pub fn crossing_reward(&self) -> Option<f64> {
        self.crossed_at.map(|i| self.attempts[i].reward_mm)
    }

    /// Best reward minus the reward of the crossing attempt.
    pub fn exploitation_improvement(&self) -> Option<f64> {
        Some(self.best_reward()? - self.crossing_reward()?)
    }

    pub fn summary(&self) -> RunSummary {
        RunSummary {
            seed: self.seed,
            reward_threshold: self.config.reward_threshold,
            crossed_at: self.crossed_at,
            exploration_failed: self.exploration_failed(),
            best_reward_mm: self.best_reward(),
            exploitation_improvement_mm: self.exploitation_improvement(),
            babble: self.babble.clone(),
            dataset_len: self.dataset_len,
            attempts: self
                .attempts
                .iter()
                .map(|a| AttemptSummary {
                    index: a.index,
                    phase: a.phase,
                    failed: a.failed(),
                    reward_mm: finite(a.reward_mm),
                    mean_watts: finite(a.mean_watts),
                    best_so_far_mm: finite(a.best_so_far_mm),
                    sigma: a.sigma,
                    feature: a.feature,
                })
                .collect(),
        }
    }

    /// Writes `config.json`, `babble.csv`, one `attempt_####.csv` per
    /// non-failed attempt, `run_summary.json` and `final_map.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        let snapshot = ConfigSnapshot { seed: self.seed, g2p: self.config.clone() };
        write_json(&dir.join("config.json"), &snapshot)?;
        self.babble_trace.save_csv(&dir.join("babble.csv"))?;
        for a in &self.attempts {
            if let Some(t) = &a.trace {
                t.save_csv(&dir.join(format!("attempt_{:04}.csv", a.index)))?;
            }
        }
        write_json(&dir.join("run_summary.json"), &self.summary())?;
        self.final_map.save(&dir.join("final_map.json"))
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub seed: u64,
    pub g2p: G2PConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptSummary {
    pub index: usize,
    pub phase: Phase,
    pub failed: bool,
    pub reward_mm: Option<f64>,
    pub mean_watts: Option<f64>,
    pub best_so_far_mm: Option<f64>,
    pub sigma: Option<f64>,
    pub feature: FeatureVector,
}

/// Contents of `run_summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub reward_threshold: f64,
    pub crossed_at: Option<usize>,
    pub exploration_failed: bool,
    pub best_reward_mm: Option<f64>,
    pub exploitation_improvement_mm: Option<f64>,
    pub babble: BabbleSummary,
    pub dataset_len: usize,
    pub attempts: Vec<AttemptSummary>,
}

/// One full run: babble, train, explore, exploit.
pub fn run<P: Plant + ?Sized>(plant: &P, cfg: &G2PConfig, run_seed: u64) -> Result<RunRecord> {
    cfg.validate()?;
    let (babble_trace, mut cumulative, mut map) = babble_and_train(plant, &cfg.babble, &cfg.train, run_seed)?;
    let babble_summary = babble::summarize(&babble_trace, &plant.joint_limits());
    let mut policy = seed::rng(seed::derive(run_seed, seed::stream::POLICY));
    let refine_root = seed::derive(run_seed, seed::stream::REFINE);

    let mut attempts: Vec<AttemptRecord> = Vec::new();
    let mut best = f64::NEG_INFINITY;
    let mut best_feature: Option<FeatureVector> = None;
    let mut crossed_at = None;
    let mut sigma = cfg.sigma_base;

    let total = cfg.max_explore_attempts + cfg.max_exploit_attempts;
    let mut exploit_done = 0;
    while attempts.len() < total {
        let index = attempts.len();
        let (phase, feature, used_sigma) = match (crossed_at, best_feature) {
            (Some(_), Some(center)) => {
                if exploit_done == cfg.max_exploit_attempts {
                    break;
                }
                exploit_done += 1;
                let f = perturb_gaussian(&center, sigma, &cfg.feature_bounds, &mut policy)?;
                (Phase::Exploitation, f, Some(sigma))
            }
            _ => {
                if index == cfg.max_explore_attempts {
                    break;
                }
                (Phase::Exploration, sample_uniform(&cfg.feature_bounds, &mut policy), None)
            }
        };
        let mut rec = execute_attempt(plant, &map, &feature, cfg)?;
        rec.index = index;
        rec.phase = phase;
        rec.sigma = used_sigma;
        if rec.reward_mm > best {
            best = rec.reward_mm;
            best_feature = Some(feature);
            if phase == Phase::Exploitation {
                sigma = update_sigma(best, cfg);
            }
        }
        rec.best_so_far_mm = best;
        if phase == Phase::Exploration && rec.reward_mm > cfg.reward_threshold {
            crossed_at = Some(index);
            sigma = update_sigma(best, cfg);
            info!("seed {run_seed}: crossed at attempt {index} with {:.3} mm", rec.reward_mm);
        }
        if let Some(trace) = &rec.trace {
            map = refine_after_attempt(&map, &mut cumulative, trace, cfg, seed::derive(refine_root, index as u64))?;
        }
        debug!("seed {run_seed}: attempt {index} {phase:?} reward {:.3}", rec.reward_mm);
        attempts.push(rec);
    }

    Ok(RunRecord {
        seed: run_seed,
        config: cfg.clone(),
        babble_trace,
        babble: babble_summary,
        attempts,
        crossed_at,
        final_map: map,
        dataset_len: cumulative.len(),
    })
}
