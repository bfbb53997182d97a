//! Ten-spoke limit-cycle features and the periodic trajectories they define.
//!
//! A feature vector holds ten spoke lengths. Spoke `k` points at phase
//! `φ_k = 2πk/10` from the centre of the joint ranges, scaled per joint by
//! the half-range, so a spoke of length 1 reaches the edge of the range. The
//! ten tips are joined by a periodic cubic spline over phase with equal
//! spacing, which makes the path closed with continuous first and second
//! derivatives everywhere, the seam included.

use std::f64::consts::TAU;

use nalgebra::{SMatrix, SVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::signals::KinematicSample;
use crate::{Error, Result};

pub const SPOKES: usize = 10;
pub const DEFAULT_SAMPLES_PER_CYCLE: usize = 75;

/// Closed interval for every spoke length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureBounds {
    pub lo: f64,
    pub hi: f64,
}

impl FeatureBounds {
    /// Search range for the treadmill task.
    pub const TREADMILL: Self = Self { lo: 0.15, hi: 1.0 };
    /// Search range for free movements in the air.
    pub const FREE: Self = Self { lo: 0.2, hi: 0.8 };

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_finite() && self.hi.is_finite() && 0.0 <= self.lo && self.lo <= self.hi {
            Ok(())
        } else {
            Err(Error::invalid(format!("bad feature bounds [{}, {}]", self.lo, self.hi)))
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lo..=self.hi).contains(&x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub [f64; SPOKES]);

impl FeatureVector {
    pub fn spokes(&self) -> &[f64; SPOKES] {
        &self.0
    }

    pub fn check(&self, bounds: &FeatureBounds) -> Result<()> {
        match self.0.iter().position(|&x| !bounds.contains(x)) {
            None => Ok(()),
            Some(k) => Err(Error::invalid(format!(
                "spoke {k} = {} outside [{}, {}]",
                self.0[k], bounds.lo, bounds.hi
            ))),
        }
    }
}

pub fn range_center(joint_ranges: &[[f64; 2]; 2]) -> [f64; 2] {
    joint_ranges.map(|[lo, hi]| 0.5 * (lo + hi))
}

pub fn half_ranges(joint_ranges: &[[f64; 2]; 2]) -> [f64; 2] {
    joint_ranges.map(|[lo, hi]| 0.5 * (hi - lo))
}

/// Spoke tips in joint-angle space.
pub fn spokes_to_points(
    f: &FeatureVector,
    bounds: &FeatureBounds,
    joint_ranges: &[[f64; 2]; 2],
) -> Result<[[f64; 2]; SPOKES]> {
    bounds.validate()?;
    f.check(bounds)?;
    let c = range_center(joint_ranges);
    let h = half_ranges(joint_ranges);
    Ok(std::array::from_fn(|k| {
        let phi = TAU * k as f64 / SPOKES as f64;
        let r = f.0[k];
        [c[0] + r * h[0] * phi.cos(), c[1] + r * h[1] * phi.sin()]
    }))
}

/// Periodic cubic spline through `SPOKES` equally spaced knots on `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicSpline {
    knots: [[f64; 2]; SPOKES],
    /// Second derivatives with respect to phase at each knot.
    curvature: [[f64; 2]; SPOKES],
}

const SPACING: f64 = TAU / SPOKES as f64;

impl PeriodicSpline {
    pub fn new(points: &[[f64; 2]; SPOKES]) -> Self {
        // M[k-1] + 4 M[k] + M[k+1] = 6/h² (y[k+1] − 2 y[k] + y[k-1]), cyclic.
        let n = SPOKES;
        let mut a = SMatrix::<f64, SPOKES, SPOKES>::zeros();
        for k in 0..n {
            a[(k, (k + n - 1) % n)] += 1.0;
            a[(k, k)] += 4.0;
            a[(k, (k + 1) % n)] += 1.0;
        }
        let lu = a.lu();
        let mut curvature = [[0.0; 2]; SPOKES];
        for j in 0..2 {
            let rhs = SVector::<f64, SPOKES>::from_fn(|k, _| {
                let prev = points[(k + n - 1) % n][j];
                let next = points[(k + 1) % n][j];
                6.0 / (SPACING * SPACING) * ((next - points[k][j]) - (points[k][j] - prev))
            });
            // The cyclic [1 4 1] matrix is strictly diagonally dominant.
            let m = lu.solve(&rhs).expect("cyclic spline system is nonsingular");
            for k in 0..n {
                curvature[k][j] = m[k];
            }
        }
        Self { knots: *points, curvature }
    }

    /// Value, first and second phase-derivative at phase `theta` (any real;
    /// wrapped into one period).
    pub fn eval(&self, theta: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let s = theta.rem_euclid(TAU) / SPACING;
        let k = (s.floor() as usize).min(SPOKES - 1);
        self.eval_segment(k, s - k as f64)
    }

    /// Evaluate segment `k` (from knot `k` to knot `k+1`) at local `t ∈ [0, 1]`.
    pub fn eval_segment(&self, k: usize, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let k1 = (k + 1) % SPOKES;
        let h = SPACING;
        let u = 1.0 - t;
        let mut pos = [0.0; 2];
        let mut d1 = [0.0; 2];
        let mut d2 = [0.0; 2];
        for j in 0..2 {
            let (y0, y1) = (self.knots[k][j], self.knots[k1][j]);
            let (m0, m1) = (self.curvature[k][j], self.curvature[k1][j]);
            pos[j] = u * y0 + t * y1 + h * h / 6.0 * ((u * u * u - u) * m0 + (t * t * t - t) * m1);
            d1[j] = (y1 - y0) / h + h / 6.0 * (-(3.0 * u * u - 1.0) * m0 + (3.0 * t * t - 1.0) * m1);
            d2[j] = u * m0 + t * m1;
        }
        (pos, d1, d2)
    }
}

/// One period of desired kinematics, sampled uniformly in time.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleTrajectory {
    pub samples: Vec<KinematicSample>,
    pub period_s: f64,
}

impl CycleTrajectory {
    /// Clip angles into `limits`; a clipped joint gets zero velocity and
    /// acceleration at that sample, as it would resting on a stop.
    pub fn clamp_to(&mut self, limits: &[[f64; 2]; 2]) {
        for s in &mut self.samples {
            for j in 0..2 {
                let [lo, hi] = limits[j];
                if s.q[j] < lo || s.q[j] > hi {
                    s.q[j] = s.q[j].clamp(lo, hi);
                    s.qd[j] = 0.0;
                    s.qdd[j] = 0.0;
                }
            }
        }
    }

    /// The cycle repeated `cycles` times back to back.
    pub fn repeated(&self, cycles: usize) -> Vec<KinematicSample> {
        let mut out = Vec::with_capacity(self.samples.len() * cycles);
        for _ in 0..cycles {
            out.extend_from_slice(&self.samples);
        }
        out
    }
}

/// Sample the periodic spline through `points` at `samples_per_cycle`
/// uniformly spaced phases; derivatives are converted from phase to time.
pub fn interpolate_cycle(
    points: &[[f64; 2]; SPOKES],
    samples_per_cycle: usize,
    sample_rate: f64,
) -> Result<CycleTrajectory> {
    if samples_per_cycle < 20 {
        return Err(Error::invalid("samples_per_cycle must be at least 20"));
    }
    if !(sample_rate > 0.0) {
        return Err(Error::invalid("sample_rate must be positive"));
    }
    let spline = PeriodicSpline::new(points);
    let period_s = samples_per_cycle as f64 / sample_rate;
    let omega = TAU / period_s;
    let samples = (0..samples_per_cycle)
        .map(|i| {
            let theta = TAU * i as f64 / samples_per_cycle as f64;
            let (q, d1, d2) = spline.eval(theta);
            KinematicSample {
                q,
                qd: d1.map(|v| v * omega),
                qdd: d2.map(|v| v * omega * omega),
            }
        })
        .collect();
    Ok(CycleTrajectory { samples, period_s })
}

/// Feature vector to desired trajectory, kept inside `joint_limits`.
pub fn build_cycle(
    f: &FeatureVector,
    bounds: &FeatureBounds,
    joint_limits: &[[f64; 2]; 2],
    samples_per_cycle: usize,
    sample_rate: f64,
) -> Result<CycleTrajectory> {
    let points = spokes_to_points(f, bounds, joint_limits)?;
    let mut cycle = interpolate_cycle(&points, samples_per_cycle, sample_rate)?;
    cycle.clamp_to(joint_limits);
    Ok(cycle)
}

pub fn sample_uniform<R: Rng + ?Sized>(bounds: &FeatureBounds, rng: &mut R) -> FeatureVector {
    FeatureVector(std::array::from_fn(|_| {
        if bounds.lo == bounds.hi {
            bounds.lo
        } else {
            rng.random_range(bounds.lo..=bounds.hi)
        }
    }))
}

/// Independent Gaussian jitter of every spoke, clamped into `bounds`.
pub fn perturb_gaussian<R: Rng + ?Sized>(
    best: &FeatureVector,
    sigma: f64,
    bounds: &FeatureBounds,
    rng: &mut R,
) -> Result<FeatureVector> {
    if !(sigma >= 0.0) {
        return Err(Error::invalid("sigma must be nonnegative"));
    }
    Ok(FeatureVector(std::array::from_fn(|k| {
        let z: f64 = rng.sample(StandardNormal);
        (best.0[k] + sigma * z).clamp(bounds.lo, bounds.hi)
    })))
}
