//! Activation commands, kinematic samples, and sampled-signal differentiation.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Lowest accepted motor command; the tendons always carry this much tone.
pub const ACTIVATION_MIN: f64 = 0.15;
pub const ACTIVATION_MAX: f64 = 1.0;

/// Three motor commands, each a fraction of maximal tension in
/// `[ACTIVATION_MIN, ACTIVATION_MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Activation([f64; 3]);

impl Activation {
    pub fn new(a: [f64; 3]) -> Result<Self> {
        check_activation(&a)?;
        Ok(Self(a))
    }

    /// Clamp each component into the accepted range. Non-finite components
    /// map to the lower bound.
    pub fn saturating(a: [f64; 3]) -> Self {
        Self(a.map(|x| {
            if x.is_nan() {
                ACTIVATION_MIN
            } else {
                x.clamp(ACTIVATION_MIN, ACTIVATION_MAX)
            }
        }))
    }

    pub fn baseline() -> Self {
        Self([ACTIVATION_MIN; 3])
    }

    pub fn values(&self) -> [f64; 3] {
        self.0
    }
}

impl TryFrom<[f64; 3]> for Activation {
    type Error = Error;

    fn try_from(a: [f64; 3]) -> Result<Self> {
        Self::new(a)
    }
}

impl From<Activation> for [f64; 3] {
    fn from(a: Activation) -> Self {
        a.0
    }
}

pub(crate) fn check_activation(a: &[f64; 3]) -> Result<()> {
    for (i, &x) in a.iter().enumerate() {
        if !(ACTIVATION_MIN..=ACTIVATION_MAX).contains(&x) {
            return Err(Error::invalid(format!(
                "activation component {i} = {x} outside [{ACTIVATION_MIN}, {ACTIVATION_MAX}]"
            )));
        }
    }
    Ok(())
}

/// Joint angles, angular velocities and angular accelerations of both joints.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KinematicSample {
    pub q: [f64; 2],
    pub qd: [f64; 2],
    pub qdd: [f64; 2],
}

impl KinematicSample {
    /// `[q0, q1, qd0, qd1, qdd0, qdd1]`, the inverse map's input layout.
    pub fn to_array(&self) -> [f64; 6] {
        [self.q[0], self.q[1], self.qd[0], self.qd[1], self.qdd[0], self.qdd[1]]
    }

    pub fn from_array(x: [f64; 6]) -> Self {
        Self {
            q: [x[0], x[1]],
            qd: [x[2], x[3]],
            qdd: [x[4], x[5]],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }
}

/// Velocities and accelerations of uniformly sampled joint angles.
///
/// Interior samples use second-order central differences; the first and last
/// samples use second-order one-sided stencils (falling back to lower order
/// on very short sequences). Stencils are written in terms of successive
/// differences so that constant input yields exact zeros.
pub fn differentiate(angles: &[[f64; 2]], dt: f64) -> Vec<KinematicSample> {
    let n = angles.len();
    let mut out: Vec<KinematicSample> = angles
        .iter()
        .map(|&q| KinematicSample { q, ..Default::default() })
        .collect();
    if n < 2 {
        return out;
    }
    for j in 0..2 {
        let q: Vec<f64> = angles.iter().map(|a| a[j]).collect();
        let d: Vec<f64> = q.windows(2).map(|w| w[1] - w[0]).collect();
        for k in 0..n {
            let (vel, acc) = if k > 0 && k + 1 < n {
                ((d[k - 1] + d[k]) / (2.0 * dt), (d[k] - d[k - 1]) / (dt * dt))
            } else if n == 2 {
                (d[0] / dt, 0.0)
            } else if k == 0 {
                let vel = (3.0 * d[0] - d[1]) / (2.0 * dt);
                let acc = if n >= 4 {
                    (-2.0 * d[0] + 3.0 * d[1] - d[2]) / (dt * dt)
                } else {
                    (d[1] - d[0]) / (dt * dt)
                };
                (vel, acc)
            } else {
                let m = n - 2;
                let vel = (3.0 * d[m] - d[m - 1]) / (2.0 * dt);
                let acc = if n >= 4 {
                    (2.0 * d[m] - 3.0 * d[m - 1] + d[m - 2]) / (dt * dt)
                } else {
                    (d[m] - d[m - 1]) / (dt * dt)
                };
                (vel, acc)
            };
            out[k].qd[j] = vel;
            out[k].qdd[j] = acc;
        }
    }
    out
}
