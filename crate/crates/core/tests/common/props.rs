use std::f64::consts::TAU;

use g2p::babble::BabbleConfig;
use g2p::inverse_map::{Dataset, InverseMap, TrainConfig, N_PARAMS};
use g2p::learner::{self, refine_after_attempt, G2PConfig};
use g2p::limb_sim::{tendon_tensions, Limb, LimbParams, LimbState, Plant, SimTrace};
use g2p::limit_cycle::{
    build_cycle, interpolate_cycle, perturb_gaussian, spokes_to_points, FeatureBounds, FeatureVector,
    PeriodicSpline, SPOKES,
};
use g2p::signals::{ACTIVATION_MAX, ACTIVATION_MIN};
use g2p::{seed, Activation, KinematicSample};
use proptest::array::{uniform10, uniform2, uniform3, uniform6};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 1000;

fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn check<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn tone() -> impl Strategy<Value = [f64; 3]> {
    uniform3(ACTIVATION_MIN..=ACTIVATION_MAX)
}

fn in_range(a: &[f64; 3]) -> bool {
    a.iter().all(|x| (ACTIVATION_MIN..=ACTIVATION_MAX).contains(x))
}

/// Tensions are never negative and never above the motor rating, for random
/// motor constants and for the velocities a short simulated run produces.
pub fn unilaterality(cases: u32) -> Result<(), String> {
    let limb = Limb::default();
    let strategy = (
        tone(),
        uniform2(-60.0..60.0f64),
        uniform3(1.0..400.0f64),
        0.0..2000.0f64,
        vec(tone(), 6),
    );
    check(cases, strategy, |(a, qd, f_max, viscosity, seq)| {
        let params = LimbParams { f_max, motor_viscosity: viscosity, ..limb.params.clone() };
        let t = tendon_tensions(&params, &a, &qd).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for i in 0..3 {
            prop_assert!(t[i] >= 0.0 && t[i] <= f_max[i], "tension {i} = {} for a={a:?} qd={qd:?}", t[i]);
        }
        let seq: Vec<Activation> = seq.into_iter().map(Activation::saturating).collect();
        let trace = limb.execute(&seq, true).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (a, x) in trace.activations.iter().zip(&trace.kinematics) {
            let t = tendon_tensions(&limb.params, &a.values(), &x.qd).unwrap();
            prop_assert!(t.iter().all(|&v| v >= 0.0), "negative recorded tension {t:?}");
        }
        Ok(())
    })
}

/// Only in-range activations are constructible or accepted by the plant,
/// saturation always lands in range, and the inverse map never predicts
/// outside it, even for wild weights and inputs.
pub fn activation_clamp(cases: u32) -> Result<(), String> {
    let magnitude = prop_oneof![-5.0..5.0f64, -1e6..1e6f64, -1e300..1e300f64];
    let strategy = (uniform3(-3.0..3.0f64), vec(-50.0..50.0f64, N_PARAMS), uniform6(magnitude));
    let params = Limb::default().params;
    check(cases, strategy, |(raw, weights, x)| {
        let ok = in_range(&raw);
        prop_assert_eq!(Activation::new(raw).is_ok(), ok);
        prop_assert_eq!(tendon_tensions(&params, &raw, &[0.0, 0.0]).is_ok(), ok);
        prop_assert!(in_range(&Activation::saturating(raw).values()));

        let mut map = InverseMap::zeroed();
        map.set_params(weights.try_into().unwrap());
        let a = map.predict(&KinematicSample::from_array(x)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(in_range(&a.values()), "predicted {:?} for {x:?}", a.values());
        Ok(())
    })
}

/// No recorded angle leaves the joint range, from any in-range start with
/// any velocity, in the air or on the treadmill.
pub fn joint_stops(cases: u32) -> Result<(), String> {
    let limb = Limb::default();
    let [[lo0, hi0], [lo1, hi1]] = limb.params.joint_limits;
    let strategy = ((lo0..=hi0, lo1..=hi1), uniform2(-40.0..40.0f64), vec(tone(), 8), any::<bool>());
    check(cases, strategy, |((q0, q1), qd, seq, contact)| {
        let start = LimbState { q: [q0, q1], qd, ..Default::default() };
        let seq: Vec<Activation> = seq.into_iter().map(Activation::saturating).collect();
        let trace = limb.run_sequence(&start, &seq, contact).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for x in &trace.kinematics {
            for j in 0..2 {
                let [lo, hi] = limb.params.joint_limits[j];
                prop_assert!(x.q[j] >= lo - f64::EPSILON && x.q[j] <= hi + f64::EPSILON, "joint {j} at {}", x.q[j]);
            }
        }
        Ok(())
    })
}

/// Spline value and first two derivatives agree from both sides of every
/// knot including the seam, the sampled cycle starts where the wrap-around
/// evaluation ends, and the desired angles stay within the joint range.
pub fn limit_cycle(cases: u32) -> Result<(), String> {
    let limb = Limb::default();
    let limits = limb.params.joint_limits;
    let bounds = FeatureBounds::TREADMILL;
    check(cases, uniform10(bounds.lo..=bounds.hi), |spokes| {
        let f = FeatureVector(spokes);
        let points = spokes_to_points(&f, &bounds, &limits).unwrap();
        let spline = PeriodicSpline::new(&points);
        for k in 0..SPOKES {
            let left = spline.eval_segment((k + SPOKES - 1) % SPOKES, 1.0);
            let right = spline.eval_segment(k, 0.0);
            for j in 0..2 {
                prop_assert!((left.0[j] - right.0[j]).abs() < 1e-9, "value jump at knot {k}");
                prop_assert!((left.1[j] - right.1[j]).abs() < 1e-9, "slope jump at knot {k}");
                prop_assert!((left.2[j] - right.2[j]).abs() < 1e-9, "curvature jump at knot {k}");
            }
            prop_assert!((right.0[0] - points[k][0]).abs() < 1e-12 && (right.0[1] - points[k][1]).abs() < 1e-12);
        }
        let cycle = interpolate_cycle(&points, 75, 78.0).unwrap();
        let (wrap, _, _) = spline.eval(TAU);
        for j in 0..2 {
            prop_assert!((cycle.samples[0].q[j] - wrap[j]).abs() < 1e-12, "cycle does not close");
        }
        let clamped = build_cycle(&f, &bounds, &limits, 75, 78.0).unwrap();
        for s in &clamped.samples {
            for j in 0..2 {
                prop_assert!(s.q[j] >= limits[j][0] && s.q[j] <= limits[j][1]);
            }
        }
        Ok(())
    })
}

/// Gaussian jumps stay inside the feature bounds; a zero jump is the identity.
pub fn perturbation_clamp(cases: u32) -> Result<(), String> {
    let strategy = (0.0..0.5f64, 0.5..1.0f64, uniform10(0.0..=1.0f64), 0.0..5.0f64, any::<u64>());
    check(cases, strategy, |(lo, hi, raw, sigma, s)| {
        let bounds = FeatureBounds { lo, hi };
        let best = FeatureVector(raw.map(|x| x.clamp(lo, hi)));
        let mut rng = seed::rng(s);
        let next = perturb_gaussian(&best, sigma, &bounds, &mut rng).unwrap();
        prop_assert!(next.0.iter().all(|&x| bounds.contains(x)), "{next:?} outside [{lo}, {hi}]");
        let same = perturb_gaussian(&best, 0.0, &bounds, &mut rng).unwrap();
        prop_assert_eq!(same, best);
        Ok(())
    })
}

fn synthetic_trace(len: usize, tag: f64) -> SimTrace {
    let kinematics: Vec<KinematicSample> =
        (0..len).map(|i| KinematicSample { q: [tag, i as f64 * 1e-3], qd: [0.0; 2], qdd: [0.0; 2] }).collect();
    SimTrace {
        sample_rate: 78.0,
        activations: vec![Activation::baseline(); len],
        kinematics,
        belt_mm: vec![0.0; len],
        reward_mm: 0.0,
        mean_watts: 0.0,
    }
}

/// After any sequence of attempts, the cumulative dataset holds the babble
/// pairs plus the last `floor((1 − f)·len)` samples of every completed
/// attempt, in order.
pub fn refinement_bookkeeping(cases: u32) -> Result<(), String> {
    let strategy = (5usize..60, vec((1usize..400, any::<bool>()), 0..6), 0.0..0.95f64);
    check(cases, strategy, |(babble_len, attempts, drop)| {
        let cfg = G2PConfig {
            refine_drop_fraction: drop,
            train: TrainConfig { epochs_refine: 0, ..TrainConfig::default() },
            ..G2PConfig::default()
        };
        let babble = synthetic_trace(babble_len, -1.0);
        let mut cumulative = Dataset::new();
        for (x, a) in babble.kinematics.iter().zip(&babble.activations) {
            cumulative.push(*x, *a);
        }
        let mut map = InverseMap::initialized(&cumulative, 0).unwrap();
        let mut expected = babble_len;
        for (i, &(len, failed)) in attempts.iter().enumerate() {
            if failed {
                continue;
            }
            let trace = synthetic_trace(len, i as f64);
            map = refine_after_attempt(&map, &mut cumulative, &trace, &cfg, i as u64).unwrap();
            let kept = ((1.0 - drop) * len as f64).floor() as usize;
            expected += kept;
            prop_assert_eq!(cumulative.len(), expected);
            if kept > 0 {
                prop_assert_eq!(cumulative.inputs.last(), trace.kinematics.last());
                prop_assert_eq!(cumulative.inputs[expected - kept], trace.kinematics[len - kept]);
            }
        }
        Ok(())
    })
}

/// The same bookkeeping inside a real (short) run.
pub fn run_bookkeeping() -> Result<(), String> {
    let limb = Limb::default();
    let cfg = G2PConfig {
        reward_threshold: 1e9,
        max_explore_attempts: 4,
        cycles_per_attempt: 3,
        babble: BabbleConfig { duration_s: 20.0, ..BabbleConfig::default() },
        train: TrainConfig { epochs_initial: 5, epochs_refine: 2, ..TrainConfig::default() },
        ..G2PConfig::default()
    };
    let run = learner::run(&limb, &cfg, 11).map_err(|e| e.to_string())?;
    let expected = run.babble_trace.len()
        + run.attempts.iter().filter_map(|a| a.trace.as_ref()).map(|t| cfg.kept_samples(t.len())).sum::<usize>();
    if run.dataset_len == expected && run.attempts.len() == 4 {
        Ok(())
    } else {
        Err(format!("dataset holds {} pairs, expected {expected}", run.dataset_len))
    }
}

pub type Suite = (&'static str, fn(u32) -> Result<(), String>);

pub const SUITES: [Suite; 6] = [
    ("tendon unilaterality", unilaterality),
    ("activation range", activation_clamp),
    ("joint-stop containment", joint_stops),
    ("limit-cycle closure and smoothness", limit_cycle),
    ("perturbation clamp", perturbation_clamp),
    ("refinement bookkeeping", refinement_bookkeeping),
];
