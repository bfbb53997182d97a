//! Experiment orchestration: configuration, seeding, replicates, threshold
//! calibration and persisted artifacts.
//!
//! Replicate `k` of an experiment with master seed `m` runs with
//! `seed::derive(m, k)`. Seeds shared by all replicates (the calibration run
//! and the fixed tracking trajectory) hang off `seed::derive(m, SHARED)`.
//!
//! Every command writes its data artifacts plus `config.ini` (the effective
//! configuration) into the output directory. Wall-clock information goes to
//! `meta.json` only, so everything else is reproducible byte for byte.

pub mod config;
pub mod summary;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::babble::{self, BabbleConfig, BabbleSummary};
use crate::feasibility::{default_stroke_postures, stroke_sweep, write_sweep_csv};
use crate::learner::{self, babble_and_train, execute_attempt, write_json, G2PConfig};
use crate::limb_sim::{fmt_sig9, Plant};
use crate::limit_cycle::{sample_uniform, FeatureVector};
use crate::tracking::{self, FixedTrackingReport, GeneralizationSummary};
use crate::{seed, Error, Result};

pub use config::{parse_overrides, CalibrationSettings, ExperimentConfig, TrackingSettings};
pub use summary::{quantile, summarize, CrossRunSummary, Spread};

/// Replicate index reserved for seeds shared across replicates.
pub const SHARED: u64 = 1 << 32;

pub fn replicate_seed(master: u64, k: usize) -> u64 {
    seed::derive(master, k as u64)
}

pub fn shared_seed(master: u64, stream: u64) -> u64 {
    seed::derive(seed::derive(master, SHARED), stream)
}

pub const DEFAULT_LOCOMOTION_REPLICATES: usize = 15;
pub const DEFAULT_TRACK_FIXED_REPLICATES: usize = 5;
pub const DEFAULT_TRACK_GENERAL_REPLICATES: usize = 1;

#[derive(Debug, Serialize)]
struct Meta<'a> {
    command: &'a str,
    version: &'a str,
    started_unix_s: f64,
    elapsed_s: f64,
}

struct Session {
    command: &'static str,
    out: PathBuf,
    started: SystemTime,
    clock: Instant,
}

impl Session {
    fn open(command: &'static str, cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        fs::create_dir_all(&cfg.out)?;
        fs::write(cfg.out.join("config.ini"), snapshot_ini(cfg))?;
        info!("{command}: writing to {}", cfg.out.display());
        Ok(Self { command, out: cfg.out.clone(), started: SystemTime::now(), clock: Instant::now() })
    }

    fn close(self) -> Result<()> {
        let started = self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        let meta = Meta {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            started_unix_s: started,
            elapsed_s: self.clock.elapsed().as_secs_f64(),
        };
        write_json(&self.out.join("meta.json"), &meta)
    }
}

/// The effective configuration without `run.out`, which names where the
/// artifacts go rather than what they contain.
pub fn snapshot_ini(cfg: &ExperimentConfig) -> String {
    cfg.to_ini().lines().filter(|l| !l.starts_with("run.out")).map(|l| format!("{l}\n")).collect()
}

/// Babble once with replicate 0's seed; writes `babble.csv` and
/// `babble_summary.json`.
pub fn cmd_babble(cfg: &ExperimentConfig) -> Result<BabbleSummary> {
    let session = Session::open("babble", cfg)?;
    let run_seed = replicate_seed(cfg.seed, 0);
    let bcfg = BabbleConfig { seed: seed::derive(run_seed, seed::stream::BABBLE), ..cfg.g2p.babble.clone() };
    let commands = babble::generate(&bcfg)?;
    let trace = cfg.limb.execute(&commands, false)?;
    trace.save_csv(&session.out.join("babble.csv"))?;
    let summary = babble::summarize(&trace, &cfg.limb.params.joint_limits);
    write_json(&session.out.join("babble_summary.json"), &summary)?;
    session.close()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilitySummary {
    pub weight_n: f64,
    pub postures: usize,
    pub singular_postures: usize,
    pub min_weight_margin_n: Option<f64>,
    pub downforce_exceeds_weight: bool,
}

/// Downforce sweep over the default stroke postures; writes
/// `feasibility.csv` and `feasibility_summary.json`.
pub fn cmd_feasibility(cfg: &ExperimentConfig) -> Result<FeasibilitySummary> {
    let session = Session::open("feasibility", cfg)?;
    let postures = default_stroke_postures();
    let rows = stroke_sweep(&cfg.limb.params, &postures);
    write_sweep_csv(&rows, BufWriter::new(File::create(session.out.join("feasibility.csv"))?))?;
    let margins: Vec<f64> = rows.iter().filter_map(|r| r.weight_margin_n).collect();
    let min_margin = margins.iter().copied().reduce(f64::min);
    let summary = FeasibilitySummary {
        weight_n: cfg.limb.params.weight(),
        postures: rows.len(),
        singular_postures: rows.iter().filter(|r| r.is_singular()).count(),
        downforce_exceeds_weight: margins.len() == rows.len() && min_margin.is_some_and(|m| m > 0.0),
        min_weight_margin_n: min_margin,
    };
    write_json(&session.out.join("feasibility_summary.json"), &summary)?;
    session.close()?;
    Ok(summary)
}

/// Nearest-rank order statistic: element `round(p/100 · (n − 1))` of the
/// ascending sort.
pub fn percentile_nearest_rank(values: &[f64], percentile: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("no values"));
    }
    if !(0.0..=100.0).contains(&percentile) {
        return Err(Error::invalid("percentile must lie in [0, 100]"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = (percentile / 100.0 * (v.len() - 1) as f64).round() as usize;
    Ok(v[idx])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub seed: u64,
    pub percentile: f64,
    pub threshold_mm: f64,
    /// Probe rewards in execution order; `None` for a diverged probe.
    pub rewards_mm: Vec<Option<f64>>,
}

/// Babble, train, execute `probes` uniform random features without any
/// refinement, and return the requested percentile of their rewards.
pub fn calibrate_threshold<P: Plant + ?Sized>(
    plant: &P,
    g2p: &G2PConfig,
    probes: usize,
    percentile: f64,
    cal_seed: u64,
) -> Result<Calibration> {
    g2p.validate()?;
    if probes == 0 {
        return Err(Error::invalid("need at least one probe"));
    }
    let (_, _, map) = babble_and_train(plant, &g2p.babble, &g2p.train, cal_seed)?;
    let mut rng = seed::rng(seed::derive(cal_seed, seed::stream::POLICY));
    let mut rewards = Vec::with_capacity(probes);
    for _ in 0..probes {
        let f = sample_uniform(&g2p.feature_bounds, &mut rng);
        rewards.push(execute_attempt(plant, &map, &f, g2p)?.reward_mm);
    }
    if rewards.iter().all(|r| *r == 0.0 || !r.is_finite()) {
        return Err(Error::CalibrationFailed(
            "every probe had zero reward; check the contact parameters".into(),
        ));
    }
    let threshold_mm = percentile_nearest_rank(&rewards, percentile)?;
    if !threshold_mm.is_finite() {
        return Err(Error::CalibrationFailed("percentile falls on a diverged probe".into()));
    }
    Ok(Calibration {
        seed: cal_seed,
        percentile,
        threshold_mm,
        rewards_mm: rewards.iter().map(|r| r.is_finite().then_some(*r)).collect(),
    })
}

/// Calibrate and write `calibration.csv`, `calibration.json`, and a
/// `config.ini` carrying the calibrated threshold. Returns the updated
/// configuration.
pub fn cmd_calibrate_threshold(cfg: &ExperimentConfig) -> Result<(ExperimentConfig, Calibration)> {
    let session = Session::open("calibrate-threshold", cfg)?;
    let cal = calibrate_threshold(
        &cfg.limb,
        &cfg.g2p,
        cfg.calibration.probes,
        cfg.calibration.percentile,
        shared_seed(cfg.seed, seed::stream::CALIBRATE),
    )?;
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(session.out.join("calibration.csv"))?));
    w.write_record(["probe", "reward_mm"])?;
    for (i, r) in cal.rewards_mm.iter().enumerate() {
        w.write_record([i.to_string(), r.map_or_else(|| "nan".to_owned(), fmt_sig9)])?;
    }
    w.flush()?;
    write_json(&session.out.join("calibration.json"), &cal)?;
    let mut calibrated = cfg.clone();
    calibrated.g2p.reward_threshold = cal.threshold_mm;
    fs::write(session.out.join("config.ini"), snapshot_ini(&calibrated))?;
    info!("calibrated threshold {:.3} mm", cal.threshold_mm);
    session.close()?;
    Ok((calibrated, cal))
}

/// Run the locomotion replicates into `run_##` directories and write
/// `summary.json`. With `calibrate`, the threshold is calibrated first
/// (artifacts under `calibration/`). A replicate that errors is logged and
/// listed as skipped in the summary; only I/O and configuration problems
/// abort the command.
pub fn cmd_locomotion(cfg: &ExperimentConfig, calibrate: bool) -> Result<CrossRunSummary> {
    let mut cfg = cfg.clone();
    if calibrate {
        let sub = ExperimentConfig { out: cfg.out.join("calibration"), ..cfg.clone() };
        cfg.g2p.reward_threshold = cmd_calibrate_threshold(&sub)?.0.g2p.reward_threshold;
    }
    let session = Session::open("locomotion", &cfg)?;
    let n = cfg.replicates.unwrap_or(DEFAULT_LOCOMOTION_REPLICATES);
    let dirs: Vec<PathBuf> = (0..n).map(|k| session.out.join(format!("run_{k:02}"))).collect();
    let outcomes: Vec<Result<()>> = dirs
        .par_iter()
        .enumerate()
        .map(|(k, dir)| {
            let run_seed = replicate_seed(cfg.seed, k);
            let record = learner::run(&cfg.limb, &cfg.g2p, run_seed)?;
            record.save(dir)
        })
        .collect();
    for (k, r) in outcomes.into_iter().enumerate() {
        match r {
            Err(e @ (Error::Io(_) | Error::Config(_))) => return Err(e),
            Err(e) => warn!("replicate {k} failed: {e}"),
            Ok(()) => {}
        }
    }
    let summary = summarize(&dirs)?;
    write_json(&session.out.join("summary.json"), &summary)?;
    session.close()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackFixedSummary {
    pub feature: FeatureVector,
    pub replicates: Vec<FixedTrackingReport>,
    /// Median across replicates at each attempt.
    pub median_mse: Vec<f64>,
    /// Replicates whose last MSE is below their first.
    pub improved_replicates: usize,
}

/// Fixed-trajectory refinement replicates; writes `track_fixed.csv`
/// (`replicate,attempt,mse`) and `track_fixed_summary.json`.
pub fn cmd_track_fixed(cfg: &ExperimentConfig) -> Result<TrackFixedSummary> {
    let session = Session::open("track-fixed", cfg)?;
    let g2p = cfg.tracking_g2p();
    let mut feature_rng = seed::rng(shared_seed(cfg.seed, seed::stream::TRACK_FEATURE));
    let feature = sample_uniform(&g2p.feature_bounds, &mut feature_rng);
    let n = cfg.replicates.unwrap_or(DEFAULT_TRACK_FIXED_REPLICATES);
    let reports: Vec<FixedTrackingReport> = (0..n)
        .into_par_iter()
        .map(|k| tracking::run_fixed_tracking(&cfg.limb, &g2p, &feature, cfg.tracking.attempts, replicate_seed(cfg.seed, k)))
        .collect::<Result<_>>()?;

    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(session.out.join("track_fixed.csv"))?));
    w.write_record(["replicate", "attempt", "mse"])?;
    for (k, r) in reports.iter().enumerate() {
        for (i, m) in r.mse.iter().enumerate() {
            w.write_record([k.to_string(), (i + 1).to_string(), fmt_sig9(*m)])?;
        }
    }
    w.flush()?;
    let median_mse = (0..cfg.tracking.attempts)
        .map(|i| {
            let at: Vec<f64> = reports.iter().filter_map(|r| r.mse.get(i).copied()).collect();
            quantile(&at, 0.5)
        })
        .collect();
    let improved = reports
        .iter()
        .filter(|r| !r.diverged && r.mse.len() >= 2 && r.mse[r.mse.len() - 1] < r.mse[0])
        .count();
    let summary = TrackFixedSummary { feature, replicates: reports, median_mse, improved_replicates: improved };
    write_json(&session.out.join("track_fixed_summary.json"), &summary)?;
    session.close()?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackGeneralSummary {
    pub replicates: Vec<GeneralizationSummary>,
    pub median_win_fraction: f64,
}

/// Generalization replicates into `general_##` directories plus
/// `track_general_summary.json`.
pub fn cmd_track_general(cfg: &ExperimentConfig) -> Result<TrackGeneralSummary> {
    let session = Session::open("track-general", cfg)?;
    let g2p = cfg.tracking_g2p();
    let n = cfg.replicates.unwrap_or(DEFAULT_TRACK_GENERAL_REPLICATES);
    let summaries: Vec<GeneralizationSummary> = (0..n)
        .into_par_iter()
        .map(|k| {
            let report = tracking::run_generalization(
                &cfg.limb,
                &g2p,
                cfg.tracking.n_train,
                cfg.tracking.n_test,
                replicate_seed(cfg.seed, k),
            )?;
            report.save(&session.out.join(format!("general_{k:02}")))?;
            Ok(report.summary)
        })
        .collect::<Result<_>>()?;
    let wins: Vec<f64> = summaries.iter().map(|s| s.win_fraction).collect();
    let summary = TrackGeneralSummary { median_win_fraction: quantile(&wins, 0.5), replicates: summaries };
    write_json(&session.out.join("track_general_summary.json"), &summary)?;
    session.close()?;
    Ok(summary)
}

/// Summarize existing run directories into `<out>/summary.json`.
pub fn cmd_summarize(dirs: &[PathBuf], out: &Path) -> Result<CrossRunSummary> {
    let summary = summarize(dirs)?;
    fs::create_dir_all(out)?;
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
