//! Cross-run statistics over locomotion run directories.

use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::feasibility::convex_hull;
use crate::learner::{Phase, RunSummary};
use crate::{Error, Result};

/// Linear-interpolation quantile (`p` in `[0, 1]`) of the sorted values.
/// NaN for an empty slice.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub n: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Spread {
    pub fn of(values: &[f64]) -> Option<Self> {
        (!values.is_empty()).then(|| Spread {
            n: values.len(),
            q1: quantile(values, 0.25),
            median: quantile(values, 0.5),
            q3: quantile(values, 0.75),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    /// Directory name of the run.
    pub run: String,
    pub seed: u64,
    pub crossed_at: Option<usize>,
    pub exploration_failed: bool,
    pub best_reward_mm: Option<f64>,
    pub crossing_reward_mm: Option<f64>,
    pub exploitation_improvement_mm: Option<f64>,
    /// Median reward over the run's non-failed attempts.
    pub median_reward_mm: Option<f64>,
    /// Mean amortized power over the run's non-failed attempts.
    pub mean_watts: Option<f64>,
    /// `[watts, reward_mm]` of exploitation attempts above threshold.
    pub energy_reward_points: Vec<[f64; 2]>,
    /// Counterclockwise hull of those points.
    pub energy_reward_hull: Vec<[f64; 2]>,
}

impl RunRow {
    pub fn from_summary(run: String, s: &RunSummary) -> Self {
        let ok: Vec<_> = s.attempts.iter().filter(|a| !a.failed).collect();
        let rewards: Vec<f64> = ok.iter().filter_map(|a| a.reward_mm).collect();
        let watts: Vec<f64> = ok.iter().filter_map(|a| a.mean_watts).collect();
        let points: Vec<[f64; 2]> = ok
            .iter()
            .filter(|a| a.phase == Phase::Exploitation)
            .filter_map(|a| Some([a.mean_watts?, a.reward_mm?]))
            .filter(|p| p[1] > s.reward_threshold)
            .collect();
        RunRow {
            run,
            seed: s.seed,
            crossed_at: s.crossed_at,
            exploration_failed: s.exploration_failed,
            best_reward_mm: s.best_reward_mm,
            crossing_reward_mm: s.crossed_at.and_then(|i| s.attempts.get(i)).and_then(|a| a.reward_mm),
            exploitation_improvement_mm: s.exploitation_improvement_mm,
            median_reward_mm: (!rewards.is_empty()).then(|| quantile(&rewards, 0.5)),
            mean_watts: (!watts.is_empty()).then(|| watts.iter().sum::<f64>() / watts.len() as f64),
            energy_reward_hull: convex_hull(&points),
            energy_reward_points: points,
        }
    }
}

/// Contents of a locomotion `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossRunSummary {
    pub runs: Vec<RunRow>,
    /// Directories that could not be read.
    pub skipped: Vec<String>,
    pub crossed_runs: usize,
    pub crossing_attempt: Option<Spread>,
    pub best_reward_mm: Option<Spread>,
    pub exploitation_improvement_mm: Option<Spread>,
    pub mean_watts: Option<Spread>,
    /// Median over runs of each run's median reward.
    pub median_of_median_rewards_mm: Option<f64>,
}

fn dir_label(dir: &Path) -> String {
    dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn read_run(dir: &Path) -> Result<RunSummary> {
    let path = dir.join("run_summary.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Error::MalformedRun { path: path.clone(), reason: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| Error::MalformedRun { path, reason: e.to_string() })
}

/// Summarize locomotion run directories. Unreadable directories are skipped
/// with a warning and listed in the result.
pub fn summarize(dirs: &[PathBuf]) -> Result<CrossRunSummary> {
    if dirs.is_empty() {
        return Err(Error::invalid("no run directories given"));
    }
    let mut runs = Vec::new();
    let mut skipped = Vec::new();
    for dir in dirs {
        match read_run(dir) {
            Ok(s) => runs.push(RunRow::from_summary(dir_label(dir), &s)),
            Err(e) => {
                warn!("skipping {}: {e}", dir.display());
                skipped.push(dir_label(dir));
            }
        }
    }
    let collect = |f: &dyn Fn(&RunRow) -> Option<f64>| runs.iter().filter_map(f).collect::<Vec<f64>>();
    let crossing = collect(&|r| r.crossed_at.map(|i| i as f64));
    let medians = collect(&|r| r.median_reward_mm);
    Ok(CrossRunSummary {
        crossed_runs: crossing.len(),
        crossing_attempt: Spread::of(&crossing),
        best_reward_mm: Spread::of(&collect(&|r| r.best_reward_mm)),
        exploitation_improvement_mm: Spread::of(&collect(&|r| r.exploitation_improvement_mm)),
        mean_watts: Spread::of(&collect(&|r| r.mean_watts)),
        median_of_median_rewards_mm: (!medians.is_empty()).then(|| quantile(&medians, 0.5)),
        runs,
        skipped,
    })
}
