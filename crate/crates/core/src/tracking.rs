//! Free cyclical movements in the air: refinement on one fixed trajectory,
//! and generalization of a map refined on random trajectories to unseen ones.
//!
//! Tracking error is the joint-angle MSE between desired and achieved
//! kinematics over the part of an attempt that refinement would keep, so the
//! opening transient is excluded identically everywhere.

use std::io::Write;
use std::path::Path;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::inverse_map::{evaluate_mse, InverseMap};
use crate::learner::{babble_and_train, plan_attempt, refine_after_attempt, G2PConfig};
use crate::limb_sim::{Plant, SimTrace};
use crate::limit_cycle::{sample_uniform, FeatureBounds, FeatureVector};
use crate::{seed, Error, Result};

/// The learner configuration with tracking defaults: no contact and the
/// narrower feature bounds.
pub fn default_tracking_config() -> G2PConfig {
    G2PConfig { contact: false, feature_bounds: FeatureBounds::FREE, ..Default::default() }
}

/// One attempt in the air, scored against the desired trajectory.
pub struct TrackedAttempt {
    pub trace: SimTrace,
    pub mse: f64,
}

/// Execute `f` with `map` and score it. `Ok(None)` means the simulation
/// diverged.
pub fn track<P: Plant + ?Sized>(
    plant: &P,
    map: &InverseMap,
    f: &FeatureVector,
    cfg: &G2PConfig,
) -> Result<Option<TrackedAttempt>> {
    let (desired, commands) = plan_attempt(plant, map, f, cfg)?;
    let trace = match plant.execute(&commands, false) {
        Ok(t) => t,
        Err(Error::Diverged { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let start = desired.len() - cfg.kept_samples(desired.len());
    let mse = evaluate_mse(&desired[start..], &trace.kinematics[start..])?;
    Ok(Some(TrackedAttempt { trace, mse }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedTrackingReport {
    pub seed: u64,
    pub feature: FeatureVector,
    /// rad², in attempt order
    pub mse: Vec<f64>,
    /// The replicate stopped early on a diverged attempt.
    pub diverged: bool,
}

impl FixedTrackingReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["attempt", "mse"])?;
        for (i, m) in self.mse.iter().enumerate() {
            out.write_record([(i + 1).to_string(), crate::limb_sim::fmt_sig9(*m)])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Babble, train, then execute the same trajectory `n_attempts` times,
/// refining after each one regardless of its error.
pub fn run_fixed_tracking<P: Plant + ?Sized>(
    plant: &P,
    cfg: &G2PConfig,
    feature: &FeatureVector,
    n_attempts: usize,
    run_seed: u64,
) -> Result<FixedTrackingReport> {
    cfg.validate()?;
    feature.check(&cfg.feature_bounds)?;
    let (_, mut cumulative, mut map) = babble_and_train(plant, &cfg.babble, &cfg.train, run_seed)?;
    let refine_root = seed::derive(run_seed, seed::stream::REFINE);
    let mut report = FixedTrackingReport { seed: run_seed, feature: *feature, mse: Vec::new(), diverged: false };
    for i in 0..n_attempts {
        let Some(att) = track(plant, &map, feature, cfg)? else {
            warn!("seed {run_seed}: attempt {i} diverged, replicate aborted");
            report.diverged = true;
            break;
        };
        report.mse.push(att.mse);
        map = refine_after_attempt(&map, &mut cumulative, &att.trace, cfg, seed::derive(refine_root, i as u64))?;
    }
    Ok(report)
}

/// Test-set result for one unseen trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedMse {
    pub trajectory_id: usize,
    pub feature: FeatureVector,
    pub babble_mse: f64,
    pub refined_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneralizationSummary {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    /// Training trajectories that diverged and were not used.
    pub train_diverged: usize,
    /// Test trajectories dropped from both arms after a divergence.
    pub excluded: Vec<usize>,
    pub median_babble_mse: f64,
    pub median_refined_mse: f64,
    /// Fraction of test trajectories where the refined map has lower MSE;
    /// ties count half.
    pub win_fraction: f64,
    /// Median over trajectories of `100 (babble − refined) / babble`.
    pub median_percent_reduction: f64,
    /// `100 (1 − median refined / median babble)`.
    pub reduction_of_medians_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizationReport {
    pub summary: GeneralizationSummary,
    pub pairs: Vec<PairedMse>,
    /// Cumulative dataset size when the refined map was frozen and after the
    /// test set was evaluated; equal by construction.
    pub dataset_len_frozen: usize,
    pub dataset_len_after_test: usize,
}

impl GeneralizationReport {
    /// `trajectory_id,arm,mse`, two rows per kept test trajectory.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["trajectory_id", "arm", "mse"])?;
        for p in &self.pairs {
            let id = p.trajectory_id.to_string();
            out.write_record([id.as_str(), "babble", &crate::limb_sim::fmt_sig9(p.babble_mse)])?;
            out.write_record([id.as_str(), "refined", &crate::limb_sim::fmt_sig9(p.refined_mse)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(std::fs::File::create(dir.join("generalization.csv"))?)?;
        crate::learner::write_json(&dir.join("generalization_summary.json"), &self.summary)
    }
}

/// Median of a nonempty slice; the mean of the two middle values for even
/// lengths. Returns NaN for an empty slice.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn win_fraction(pairs: &[PairedMse]) -> f64 {
    if pairs.is_empty() {
        return f64::NAN;
    }
    let score: f64 = pairs
        .iter()
        .map(|p| match p.refined_mse.partial_cmp(&p.babble_mse) {
            Some(std::cmp::Ordering::Less) => 1.0,
            Some(std::cmp::Ordering::Equal) => 0.5,
            _ => 0.0,
        })
        .sum();
    score / pairs.len() as f64
}

fn percent_reduction(before: f64, after: f64) -> f64 {
    if before > 0.0 {
        100.0 * (before - after) / before
    } else {
        0.0
    }
}

/// Babble and train, keep a copy of that map, serially refine on `n_train`
/// random trajectories, then score both frozen maps on `n_test` fresh ones.
pub fn run_generalization<P: Plant + ?Sized>(
    plant: &P,
    cfg: &G2PConfig,
    n_train: usize,
    n_test: usize,
    run_seed: u64,
) -> Result<GeneralizationReport> {
    cfg.validate()?;
    let (_, mut cumulative, babble_map) = babble_and_train(plant, &cfg.babble, &cfg.train, run_seed)?;
    let mut train_rng = seed::rng(seed::derive(run_seed, seed::stream::POLICY));
    let refine_root = seed::derive(run_seed, seed::stream::REFINE);

    let mut refined = babble_map.clone();
    let mut train_diverged = 0;
    for i in 0..n_train {
        let f = sample_uniform(&cfg.feature_bounds, &mut train_rng);
        match track(plant, &refined, &f, cfg)? {
            Some(att) => {
                refined = refine_after_attempt(&refined, &mut cumulative, &att.trace, cfg, seed::derive(refine_root, i as u64))?;
            }
            None => train_diverged += 1,
        }
    }
    let frozen_len = cumulative.len();
    info!("seed {run_seed}: refined on {n_train} trajectories, {frozen_len} pairs");

    let mut test_rng = seed::rng(seed::derive(run_seed, seed::stream::TEST_FEATURES));
    let mut pairs = Vec::with_capacity(n_test);
    let mut excluded = Vec::new();
    for id in 0..n_test {
        let f = sample_uniform(&cfg.feature_bounds, &mut test_rng);
        let b = track(plant, &babble_map, &f, cfg)?;
        let r = track(plant, &refined, &f, cfg)?;
        match (b, r) {
            (Some(b), Some(r)) => {
                pairs.push(PairedMse { trajectory_id: id, feature: f, babble_mse: b.mse, refined_mse: r.mse })
            }
            _ => {
                warn!("seed {run_seed}: test trajectory {id} diverged, excluded");
                excluded.push(id);
            }
        }
    }

    let babble: Vec<f64> = pairs.iter().map(|p| p.babble_mse).collect();
    let refined_mse: Vec<f64> = pairs.iter().map(|p| p.refined_mse).collect();
    let per_traj: Vec<f64> = pairs.iter().map(|p| percent_reduction(p.babble_mse, p.refined_mse)).collect();
    let (mb, mr) = (median(&babble), median(&refined_mse));
    let summary = GeneralizationSummary {
        seed: run_seed,
        n_train,
        n_test,
        train_diverged,
        excluded,
        median_babble_mse: mb,
        median_refined_mse: mr,
        win_fraction: win_fraction(&pairs),
        median_percent_reduction: median(&per_traj),
        reduction_of_medians_percent: percent_reduction(mb, mr),
    };
    Ok(GeneralizationReport {
        summary,
        pairs,
        dataset_len_frozen: frozen_len,
        dataset_len_after_test: cumulative.len(),
    })
}
