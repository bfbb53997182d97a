//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! (written straight to stdout so it shows without `--nocapture`); the test
//! fails if any criterion does.

mod common;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::oracles::{grid_oracle, random_postures};
use common::props::{self, CASES, SUITES};
use g2p::babble::{self, BabbleConfig};
use g2p::feasibility::{default_stroke_postures, stroke_sweep};
use g2p::harness::{self, CrossRunSummary, ExperimentConfig};
use g2p::inverse_map::{grad_check, Dataset, InverseMap};
use g2p::learner::{Phase, RunSummary};
use g2p::limb_sim::{step, Drive, LimbParams, LimbState};
use g2p::signals::{ACTIVATION_MAX, ACTIVATION_MIN};
use g2p::{Activation, KinematicSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ENERGY_DRIFT: f64 = 1e-3;
const ENERGY_SECONDS: f64 = 10.0;
const ENERGY_BUDGET_S: f64 = 1.0;
const GRAD_TOL: f64 = 1e-4;
const GRAD_BUDGET_S: f64 = 5.0;
const BABBLE_SAMPLES: usize = 23_400;
const TRANSITIONS: std::ops::RangeInclusive<usize> = 240..=360;
const LOCOMOTION_RUNS: usize = 10;
const MIN_CROSSING_RUNS: usize = 8;
const EXPLOIT_ATTEMPTS: usize = 15;
const SIGMA_FLOOR: f64 = 0.03;
const LOCOMOTION_BUDGET_S: f64 = 600.0;
const TRACK_REPLICATES: usize = 5;
const MIN_IMPROVED: usize = 4;
const TRACK_BUDGET_S: f64 = 180.0;
const MIN_WIN_FRACTION: f64 = 0.7;
const GENERAL_BUDGET_S: f64 = 600.0;
const MASTER_SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn line(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
    let _ = out.flush();
}

fn record(results: &mut Vec<(usize, bool)>, id: usize, name: &str, started: Instant, outcome: Outcome) {
    let verdict = if outcome.pass { "PASS" } else { "FAIL" };
    line(&format!(
        "criterion {id} [{name}]: {verdict} ({}; {:.1} s)",
        outcome.detail,
        started.elapsed().as_secs_f64()
    ));
    results.push((id, outcome.pass));
}

/// Total energy from link geometry, independent of the plant's own routine.
/// Inertias are about each link's proximal end; centres of mass at mid-link.
fn pendulum_energy(p: &LimbParams, q: [f64; 2], qd: [f64; 2]) -> f64 {
    let [l1, l2] = p.link_lengths;
    let [m1, m2] = p.link_masses;
    let [i1, i2] = p.link_inertias;
    let (c1, c2) = (0.5 * l1, 0.5 * l2);
    let a12 = q[0] + q[1];
    let w12 = qd[0] + qd[1];
    // Positions: x = Σ l sin, y = −Σ l cos.
    let v2 = [
        l1 * q[0].cos() * qd[0] + c2 * a12.cos() * w12,
        l1 * q[0].sin() * qd[0] + c2 * a12.sin() * w12,
    ];
    let kinetic = 0.5 * i1 * qd[0] * qd[0]
        + 0.5 * m2 * (v2[0] * v2[0] + v2[1] * v2[1])
        + 0.5 * (i2 - m2 * c2 * c2) * w12 * w12;
    let y1 = -c1 * q[0].cos();
    let y2 = -l1 * q[0].cos() - c2 * a12.cos();
    kinetic + p.gravity * (m1 * y1 + m2 * y2)
}

fn energy() -> Outcome {
    let p = LimbParams {
        joint_damping: [0.0; 2],
        joint_limits: [[-100.0, 100.0], [-100.0, 100.0]],
        ..LimbParams::default()
    };
    let dt = 1.0 / (78.0 * 12.0);
    let mut s = LimbState::at_rest([1.2, -0.8]);
    let e0 = pendulum_energy(&p, s.q, s.qd);
    let steps = (ENERGY_SECONDS / dt).round() as usize;
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        s = step(&p, None, &s, &Drive::Slack, dt).expect("finite pendulum");
        worst = worst.max(((pendulum_energy(&p, s.q, s.qd) - e0) / e0).abs());
    }
    let secs = clock.elapsed().as_secs_f64();
    Outcome {
        pass: worst < ENERGY_DRIFT && secs < ENERGY_BUDGET_S,
        detail: format!("max relative drift {worst:.2e} over {steps} steps of {:.3} ms", dt * 1e3),
    }
}

fn gradient() -> Outcome {
    let clock = Instant::now();
    let mut worst: f64 = 0.0;
    for s in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + s);
        let mut data = Dataset::new();
        for _ in 0..8 {
            let x: [f64; 6] = std::array::from_fn(|i| rng.random_range(-1.0..1.0) * [1.0, 1.0, 10.0, 10.0, 100.0, 100.0][i]);
            let y: [f64; 3] = std::array::from_fn(|_| rng.random_range(ACTIVATION_MIN..=ACTIVATION_MAX));
            data.push(KinematicSample::from_array(x), Activation::new(y).unwrap());
        }
        let map = InverseMap::initialized(&data, s).unwrap();
        worst = worst.max(grad_check(&map, &data).unwrap());
    }
    let secs = clock.elapsed().as_secs_f64();
    Outcome {
        pass: worst < GRAD_TOL && secs < GRAD_BUDGET_S,
        detail: format!("max relative error {worst:.2e} over 10 seeds"),
    }
}

fn feasibility() -> Outcome {
    let p = LimbParams::default();
    let report = grid_oracle(&p, &random_postures(&p, 20, 17), 18);
    let sweep = stroke_sweep(&p, &default_stroke_postures());
    let min_margin = sweep.iter().map(|r| r.weight_margin_n.unwrap_or(f64::NEG_INFINITY)).fold(f64::INFINITY, f64::min);
    Outcome {
        pass: report.passed() && min_margin > 0.0,
        detail: format!(
            "{} postures, {} vertex mismatches, downforce err {:.1e} N, min margin over weight {min_margin:.2} N",
            report.postures, report.vertex_mismatches, report.worst_downforce_error
        ),
    }
}

fn babbling() -> Outcome {
    let mut ok = true;
    let (mut lo, mut hi) = (usize::MAX, 0);
    let mut len = 0;
    for s in 0..20 {
        let seq = babble::generate(&BabbleConfig { seed: s, ..BabbleConfig::default() }).unwrap();
        len = seq.len();
        ok &= len == BABBLE_SAMPLES;
        ok &= seq.iter().flat_map(|a| a.values()).all(|x| (ACTIVATION_MIN..=ACTIVATION_MAX).contains(&x));
        for c in babble::transition_counts(&seq) {
            ok &= TRANSITIONS.contains(&c);
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    Outcome { pass: ok, detail: format!("{len} samples, transitions per motor in [{lo}, {hi}] over 20 seeds") }
}

fn read_run(dir: &Path) -> RunSummary {
    serde_json::from_str(&fs::read_to_string(dir.join("run_summary.json")).unwrap()).unwrap()
}

fn locomotion(root: &Path) -> Outcome {
    let cfg = ExperimentConfig {
        seed: MASTER_SEED,
        replicates: Some(LOCOMOTION_RUNS),
        out: root.join("locomotion"),
        ..ExperimentConfig::default()
    };
    let clock = Instant::now();
    let summary: CrossRunSummary = match harness::cmd_locomotion(&cfg, true) {
        Ok(s) => s,
        Err(e) => return Outcome { pass: false, detail: format!("error: {e}") },
    };
    let secs = clock.elapsed().as_secs_f64();
    let mut problems = Vec::new();
    for row in &summary.runs {
        let run = read_run(&cfg.out.join(&row.run));
        let best: Vec<f64> =
            run.attempts.iter().map(|a| a.best_so_far_mm.unwrap_or(f64::NEG_INFINITY)).collect();
        if best.windows(2).any(|w| w[1] < w[0]) {
            problems.push(format!("{}: best-so-far decreases", row.run));
        }
        let exploit: Vec<_> = run.attempts.iter().filter(|a| a.phase == Phase::Exploitation).collect();
        if run.crossed_at.is_some() && exploit.len() != EXPLOIT_ATTEMPTS {
            problems.push(format!("{}: {} exploitation attempts", row.run, exploit.len()));
        }
        let sigmas: Vec<f64> = exploit.iter().filter_map(|a| a.sigma).collect();
        if sigmas.iter().any(|&s| s < SIGMA_FLOOR) || sigmas.windows(2).any(|w| w[1] > w[0]) {
            problems.push(format!("{}: sigma law violated", row.run));
        }
    }
    let threshold = read_run(&cfg.out.join("run_00")).reward_threshold;
    let improvement = summary.exploitation_improvement_mm.as_ref().map_or(f64::NAN, |s| s.median);
    let crossing = summary.crossing_attempt.as_ref().map_or(f64::NAN, |s| s.median);
    let best = summary.best_reward_mm.as_ref().map_or(f64::NAN, |s| s.median);
    let pass = summary.runs.len() == LOCOMOTION_RUNS
        && summary.crossed_runs >= MIN_CROSSING_RUNS
        && problems.is_empty()
        && improvement > 0.0
        && secs < LOCOMOTION_BUDGET_S;
    let mut detail = format!(
        "threshold {threshold:.1} mm, {}/{} runs crossed, median crossing attempt {crossing}, \
         median best {best:.1} mm, median improvement {improvement:.1} mm",
        summary.crossed_runs,
        summary.runs.len()
    );
    if !problems.is_empty() {
        detail += &format!("; {}", problems.join("; "));
    }
    Outcome { pass, detail }
}

fn track_fixed(root: &Path) -> Outcome {
    let cfg = ExperimentConfig {
        seed: MASTER_SEED,
        replicates: Some(TRACK_REPLICATES),
        out: root.join("track_fixed"),
        ..ExperimentConfig::default()
    };
    let clock = Instant::now();
    let s = match harness::cmd_track_fixed(&cfg) {
        Ok(s) => s,
        Err(e) => return Outcome { pass: false, detail: format!("error: {e}") },
    };
    let secs = clock.elapsed().as_secs_f64();
    let medians: Vec<String> = s.median_mse.iter().map(|m| format!("{m:.4}")).collect();
    Outcome {
        pass: s.improved_replicates >= MIN_IMPROVED && secs < TRACK_BUDGET_S,
        detail: format!(
            "{}/{} replicates end below their first MSE; median MSE by attempt [{}] rad²",
            s.improved_replicates,
            s.replicates.len(),
            medians.join(", ")
        ),
    }
}

fn track_general(root: &Path) -> Outcome {
    let cfg = ExperimentConfig {
        seed: MASTER_SEED,
        replicates: Some(1),
        out: root.join("track_general"),
        ..ExperimentConfig::default()
    };
    let clock = Instant::now();
    let s = match harness::cmd_track_general(&cfg) {
        Ok(s) => s,
        Err(e) => return Outcome { pass: false, detail: format!("error: {e}") },
    };
    let secs = clock.elapsed().as_secs_f64();
    let g = &s.replicates[0];
    Outcome {
        pass: g.win_fraction >= MIN_WIN_FRACTION && secs < GENERAL_BUDGET_S,
        detail: format!(
            "refined map wins {:.1}% of {} test trajectories, median per-trajectory MSE reduction {:.1}%, \
             reduction of medians {:.1}%",
            100.0 * g.win_fraction,
            g.n_test - g.excluded.len(),
            g.median_percent_reduction,
            g.reduction_of_medians_percent
        ),
    }
}

fn files_under(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(dir).unwrap().to_path_buf());
            }
        }
    }
    out.sort();
    out
}

fn determinism(first: &Path, second: &Path) -> Outcome {
    let _ = locomotion(second);
    let _ = track_fixed(second);
    let _ = track_general(second);
    let a: Vec<PathBuf> = files_under(first).into_iter().filter(|p| !p.ends_with("meta.json")).collect();
    let b: Vec<PathBuf> = files_under(second).into_iter().filter(|p| !p.ends_with("meta.json")).collect();
    let differing: Vec<String> = a
        .iter()
        .filter(|p| fs::read(first.join(p)).ok() != fs::read(second.join(p)).ok())
        .map(|p| p.display().to_string())
        .collect();
    Outcome {
        pass: a == b && !a.is_empty() && differing.is_empty(),
        detail: format!("{} artifacts compared, {} differ {:?}", a.len(), differing.len(), differing),
    }
}

fn property_suites() -> Outcome {
    let mut failed = Vec::new();
    for (name, suite) in SUITES {
        if let Err(e) = suite(CASES) {
            failed.push(format!("{name}: {e}"));
        }
    }
    if let Err(e) = props::run_bookkeeping() {
        failed.push(format!("run bookkeeping: {e}"));
    }
    Outcome {
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} suites x {CASES} cases", SUITES.len())
        } else {
            failed.join("; ")
        },
    }
}

#[test]
fn acceptance_criteria() {
    let tmp = tempfile::tempdir().unwrap();
    let (first, second) = (tmp.path().join("first"), tmp.path().join("second"));
    let mut results = Vec::new();

    let t = Instant::now();
    record(&mut results, 1, "passive energy", t, energy());
    let t = Instant::now();
    record(&mut results, 2, "gradient check", t, gradient());
    let t = Instant::now();
    record(&mut results, 3, "feasibility grid", t, feasibility());
    let t = Instant::now();
    record(&mut results, 4, "babbling statistics", t, babbling());
    let t = Instant::now();
    record(&mut results, 5, "locomotion", t, locomotion(&first));
    let t = Instant::now();
    record(&mut results, 6, "fixed-trajectory tracking", t, track_fixed(&first));
    let t = Instant::now();
    record(&mut results, 7, "generalization", t, track_general(&first));
    let t = Instant::now();
    record(&mut results, 8, "determinism", t, determinism(&first, &second));
    let t = Instant::now();
    record(&mut results, 9, "property suites", t, property_suites());

    let failed: Vec<usize> = results.iter().filter(|(_, ok)| !ok).map(|(id, _)| *id).collect();
    line(&format!("acceptance: {}/{} criteria passed", results.len() - failed.len(), results.len()));
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
