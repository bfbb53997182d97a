//! Planar two-joint, three-tendon limb with backdrivable motors, joint stops,
//! and an optional passive treadmill under the foot.
//!
//! Conventions: `q = (0, 0)` has both links hanging straight down, angles are
//! counterclockwise positive, `q[0]` is the proximal angle from vertical and
//! `q[1]` the distal angle relative to the proximal link. The moment-arm
//! matrix `R` (rows = joints, columns = tendons M0, M1, M2) maps tendon
//! tensions to joint torques, and its transpose maps joint rates to tendon
//! reel-in rates.
//!
//! Each link is a uniform rod: its centre of mass sits at mid-length and its
//! inertia is given about the proximal end.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::signals::{check_activation, differentiate, Activation, KinematicSample};
use crate::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: f64 = 78.0;
pub const DEFAULT_SUBSTEPS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimbParams {
    /// m
    pub link_lengths: [f64; 2],
    /// kg
    pub link_masses: [f64; 2],
    /// kg·m², about each link's proximal end
    pub link_inertias: [f64; 2],
    /// N·m·s/rad
    pub joint_damping: [f64; 2],
    /// rad, `[lo, hi]` per joint
    pub joint_limits: [[f64; 2]; 2],
    /// m, signed; rows are joints, columns are tendons
    pub moment_arms: [[f64; 3]; 2],
    /// N
    pub f_max: [f64; 3],
    /// N·s/m, motor back-drive resistance along the tendon
    pub motor_viscosity: f64,
    /// m/s²
    pub gravity: f64,
    /// W drawn by each motor at full activation
    pub rated_power: [f64; 3],
}

impl Default for LimbParams {
    fn default() -> Self {
        let link_lengths = [0.25, 0.22];
        let link_masses = [0.5, 0.35];
        let r = 0.02;
        Self {
            link_lengths,
            link_masses,
            link_inertias: [
                link_masses[0] * link_lengths[0].powi(2) / 3.0,
                link_masses[1] * link_lengths[1].powi(2) / 3.0,
            ],
            joint_damping: [0.05, 0.05],
            joint_limits: [
                [-std::f64::consts::FRAC_PI_3, std::f64::consts::FRAC_PI_3],
                [0.0, 2.0 * std::f64::consts::FRAC_PI_3],
            ],
            moment_arms: [[-r, r, -r], [r, 0.0, -r]],
            f_max: [150.0; 3],
            motor_viscosity: 300.0,
            gravity: 9.81,
            rated_power: [20.0; 3],
        }
    }
}

impl LimbParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, xs: &[f64]| -> Result<()> {
            if xs.iter().all(|&x| x.is_finite() && x > 0.0) {
                Ok(())
            } else {
                Err(Error::invalid(format!("{name} must be strictly positive")))
            }
        };
        positive("link_lengths", &self.link_lengths)?;
        positive("link_masses", &self.link_masses)?;
        positive("link_inertias", &self.link_inertias)?;
        positive("f_max", &self.f_max)?;
        if self.joint_damping.iter().any(|&b| !(b >= 0.0)) || !(self.motor_viscosity >= 0.0) {
            return Err(Error::invalid("damping coefficients must be nonnegative"));
        }
        if !(self.gravity >= 0.0) || self.rated_power.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::invalid("gravity and rated power must be nonnegative"));
        }
        for (j, lim) in self.joint_limits.iter().enumerate() {
            if !(lim[0] < lim[1]) {
                return Err(Error::invalid(format!("joint {j} limit interval is empty")));
            }
        }
        let r = &self.moment_arms;
        // M0: proximal cw, distal ccw. M1: proximal ccw only. M2: cw at both.
        let pattern_ok = r[0][0] < 0.0
            && r[1][0] > 0.0
            && r[0][1] > 0.0
            && r[1][1] == 0.0
            && r[0][2] < 0.0
            && r[1][2] < 0.0;
        if !pattern_ok {
            return Err(Error::invalid("moment-arm sign pattern does not match the tendon routing"));
        }
        if !positively_spans(r) {
            return Err(Error::invalid("moment-arm columns do not positively span the torque plane"));
        }
        Ok(())
    }

    pub fn weight(&self) -> f64 {
        (self.link_masses[0] + self.link_masses[1]) * self.gravity
    }

    fn moment_arm_matrix(&self) -> nalgebra::Matrix2x3<f64> {
        let r = &self.moment_arms;
        nalgebra::Matrix2x3::new(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2])
    }

    /// Net joint torques `R·T`.
    pub fn joint_torques(&self, tensions: &[f64; 3]) -> [f64; 2] {
        let tau = self.moment_arm_matrix() * nalgebra::Vector3::from(*tensions);
        [tau[0], tau[1]]
    }

    /// Tendon reel-in rates `Rᵀ·q̇`.
    pub fn excursion_rates(&self, qd: &[f64; 2]) -> [f64; 3] {
        let e = self.moment_arm_matrix().transpose() * Vector2::from(*qd);
        [e[0], e[1], e[2]]
    }

    /// Total mechanical energy, potential referenced to the proximal pivot.
    pub fn mechanical_energy(&self, q: &[f64; 2], qd: &[f64; 2]) -> f64 {
        let m = self.mass_matrix(q);
        let v = Vector2::from(*qd);
        0.5 * v.dot(&(m * v)) + self.potential_energy(q)
    }

    fn potential_energy(&self, q: &[f64; 2]) -> f64 {
        let [l1, _] = self.link_lengths;
        let [c1, c2] = self.com_distances();
        let [m1, m2] = self.link_masses;
        let g = self.gravity;
        -g * (m1 * c1 * q[0].cos() + m2 * (l1 * q[0].cos() + c2 * (q[0] + q[1]).cos()))
    }

    fn com_distances(&self) -> [f64; 2] {
        [0.5 * self.link_lengths[0], 0.5 * self.link_lengths[1]]
    }

    fn mass_matrix(&self, q: &[f64; 2]) -> Matrix2<f64> {
        let [l1, _] = self.link_lengths;
        let [_, c2] = self.com_distances();
        let [i1, i2] = self.link_inertias;
        let m2 = self.link_masses[1];
        let k = m2 * l1 * c2 * q[1].cos();
        Matrix2::new(i1 + i2 + m2 * l1 * l1 + 2.0 * k, i2 + k, i2 + k, i2)
    }

    /// Coriolis/centrifugal plus gravity torques, the `C(q,q̇)q̇ + g(q)` term.
    fn bias_torques(&self, q: &[f64; 2], qd: &[f64; 2]) -> Vector2<f64> {
        let [l1, _] = self.link_lengths;
        let [c1, c2] = self.com_distances();
        let [m1, m2] = self.link_masses;
        let g = self.gravity;
        let h = m2 * l1 * c2 * q[1].sin();
        let s1 = q[0].sin();
        let s12 = (q[0] + q[1]).sin();
        Vector2::new(
            -h * (2.0 * qd[0] * qd[1] + qd[1] * qd[1]) + g * (m1 * c1 * s1 + m2 * (l1 * s1 + c2 * s12)),
            h * qd[0] * qd[0] + g * m2 * c2 * s12,
        )
    }
}

/// Whether three planar vectors reach every direction with nonnegative
/// weights: the null combination `Σ λ_i r_i = 0` must have all `λ_i` of one
/// strict sign.
fn positively_spans(r: &[[f64; 3]; 2]) -> bool {
    let col = |i: usize| [r[0][i], r[1][i]];
    let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let l = [cross(col(1), col(2)), cross(col(2), col(0)), cross(col(0), col(1))];
    l.iter().all(|&x| x > 0.0) || l.iter().all(|&x| x < 0.0)
}

/// Endpoint of the distal link, in metres.
pub fn forward_kinematics(params: &LimbParams, q: &[f64; 2]) -> [f64; 2] {
    let [l1, l2] = params.link_lengths;
    let a12 = q[0] + q[1];
    [l1 * q[0].sin() + l2 * a12.sin(), -l1 * q[0].cos() - l2 * a12.cos()]
}

/// `∂(endpoint)/∂q`; column `j` is the endpoint velocity per unit rate of joint `j`.
pub fn jacobian(params: &LimbParams, q: &[f64; 2]) -> Matrix2<f64> {
    let [l1, l2] = params.link_lengths;
    let a12 = q[0] + q[1];
    let (s1, c1) = q[0].sin_cos();
    let (s12, c12) = a12.sin_cos();
    Matrix2::new(l1 * c1 + l2 * c12, l2 * c12, l1 * s1 + l2 * s12, l2 * s12)
}

/// Tendon tensions produced by activation `a` while the joints move at `qd`.
///
/// `T_i = clamp(f_max_i·a_i − c_v·ė_i, 0, f_max_i)` with `ė = Rᵀ·q̇` the
/// reel-in rate: reeling in sheds tension, being back-driven adds it, the
/// tendon never pushes and the motor never exceeds its rating.
pub fn tendon_tensions(params: &LimbParams, a: &[f64; 3], qd: &[f64; 2]) -> Result<[f64; 3]> {
    check_activation(a)?;
    Ok(tensions_unchecked(params, a, qd))
}

fn tensions_unchecked(params: &LimbParams, a: &[f64; 3], qd: &[f64; 2]) -> [f64; 3] {
    let rates = params.excursion_rates(qd);
    std::array::from_fn(|i| {
        (params.f_max[i] * a[i] - params.motor_viscosity * rates[i]).clamp(0.0, params.f_max[i])
    })
}

/// Penalty contact between the foot and a treadmill belt lying along the
/// horizontal line `y = ground_height`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContactParams {
    /// m, belt surface height relative to the proximal pivot
    pub ground_height: f64,
    /// N/m
    pub stiffness: f64,
    /// N·s/m
    pub damping: f64,
    pub friction: f64,
    /// m/s, width of the smoothed sign function for sliding friction
    pub slip_velocity: f64,
    /// kg
    pub belt_mass: f64,
    /// N·s/m
    pub belt_drag: f64,
}

impl Default for ContactParams {
    fn default() -> Self {
        Self {
            ground_height: -0.41,
            stiffness: 4000.0,
            damping: 40.0,
            friction: 0.8,
            slip_velocity: 0.01,
            belt_mass: 0.5,
            belt_drag: 40.0,
        }
    }
}

impl ContactParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.ground_height.is_finite()
            && self.stiffness > 0.0
            && self.damping >= 0.0
            && self.friction >= 0.0
            && self.slip_velocity > 0.0
            && self.belt_mass > 0.0
            && self.belt_drag >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("contact parameters out of range"))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LimbState {
    pub q: [f64; 2],
    pub qd: [f64; 2],
    /// mm
    pub belt_position: f64,
    /// mm/s
    pub belt_velocity: f64,
}

impl LimbState {
    pub fn at_rest(q: [f64; 2]) -> Self {
        Self { q, ..Default::default() }
    }

    fn is_finite(&self) -> bool {
        self.q.iter().chain(&self.qd).all(|x| x.is_finite())
            && self.belt_position.is_finite()
            && self.belt_velocity.is_finite()
    }
}

/// What the motors do during a step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drive {
    Activation(Activation),
    /// All tendons slack: zero tension regardless of motion.
    Slack,
}

/// `[q0, q1, qd0, qd1, belt_pos_m, belt_vel_m_s]`
type Y = [f64; 6];

fn derivatives(
    params: &LimbParams,
    contact: Option<&ContactParams>,
    drive: &Drive,
    y: &Y,
) -> Y {
    let q = [y[0], y[1]];
    let qd = [y[2], y[3]];
    let tensions = match drive {
        Drive::Activation(a) => tensions_unchecked(params, &a.values(), &qd),
        Drive::Slack => [0.0; 3],
    };
    let tau_t = params.joint_torques(&tensions);
    let mut tau = Vector2::new(
        tau_t[0] - params.joint_damping[0] * qd[0],
        tau_t[1] - params.joint_damping[1] * qd[1],
    );
    let mut belt_acc = 0.0;
    if let Some(c) = contact {
        let jac = jacobian(params, &q);
        let foot = forward_kinematics(params, &q);
        let foot_v = jac * Vector2::from(qd);
        let mut belt_force = 0.0;
        let penetration = c.ground_height - foot[1];
        if penetration > 0.0 {
            let normal = (c.stiffness * penetration - c.damping * foot_v[1]).max(0.0);
            let slip = foot_v[0] - y[5];
            let traction = c.friction * normal * (slip / c.slip_velocity).tanh();
            tau += jac.transpose() * Vector2::new(-traction, normal);
            belt_force = traction;
        }
        belt_acc = (belt_force - c.belt_drag * y[5]) / c.belt_mass;
    }
    let rhs = tau - params.bias_torques(&q, &qd);
    // The mass matrix is symmetric positive definite for positive inertias.
    let qdd = params
        .mass_matrix(&q)
        .try_inverse()
        .map(|inv| inv * rhs)
        .unwrap_or_else(|| Vector2::repeat(f64::NAN));
    [qd[0], qd[1], qdd[0], qdd[1], y[5], belt_acc]
}

fn axpy(y: &Y, k: &Y, h: f64) -> Y {
    std::array::from_fn(|i| y[i] + h * k[i])
}

fn rk4(params: &LimbParams, contact: Option<&ContactParams>, drive: &Drive, y: &Y, dt: f64) -> Y {
    let k1 = derivatives(params, contact, drive, y);
    let k2 = derivatives(params, contact, drive, &axpy(y, &k1, 0.5 * dt));
    let k3 = derivatives(params, contact, drive, &axpy(y, &k2, 0.5 * dt));
    let k4 = derivatives(params, contact, drive, &axpy(y, &k3, dt));
    std::array::from_fn(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Clamp angles into the joint limits and remove outward velocity.
fn apply_stops(params: &LimbParams, y: &mut Y) {
    for j in 0..2 {
        let [lo, hi] = params.joint_limits[j];
        if y[j] < lo {
            y[j] = lo;
            y[2 + j] = y[2 + j].max(0.0);
        } else if y[j] > hi {
            y[j] = hi;
            y[2 + j] = y[2 + j].min(0.0);
        }
    }
}

/// One RK4 step of length `dt` followed by the joint-stop projection.
///
/// `contact` is `None` when the limb hangs in the air; the belt then keeps
/// its state untouched.
pub fn step(
    params: &LimbParams,
    contact: Option<&ContactParams>,
    state: &LimbState,
    drive: &Drive,
    dt: f64,
) -> Result<LimbState> {
    if !(dt > 0.0) {
        return Err(Error::invalid("dt must be positive"));
    }
    let y: Y = [
        state.q[0],
        state.q[1],
        state.qd[0],
        state.qd[1],
        state.belt_position * 1e-3,
        state.belt_velocity * 1e-3,
    ];
    let mut next = rk4(params, contact, drive, &y, dt);
    apply_stops(params, &mut next);
    let out = LimbState {
        q: [next[0], next[1]],
        qd: [next[2], next[3]],
        belt_position: if contact.is_some() { next[4] * 1e3 } else { state.belt_position },
        belt_velocity: if contact.is_some() { next[5] * 1e3 } else { state.belt_velocity },
    };
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::Diverged { sample: 0 })
    }
}

/// Uniformly sampled record of one executed activation sequence.
///
/// Row `k` holds the command `a[k]`, held over `((k)/fs, (k+1)/fs]`, and the
/// limb state at the end of that interval, `t = (k+1)/fs`. The belt always
/// starts from zero, so `reward_mm` is the last belt position.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub sample_rate: f64,
    pub activations: Vec<Activation>,
    pub kinematics: Vec<KinematicSample>,
    pub belt_mm: Vec<f64>,
    pub reward_mm: f64,
    pub mean_watts: f64,
}

pub const TRACE_CSV_HEADER: [&str; 11] =
    ["t", "a0", "a1", "a2", "q0", "q1", "qd0", "qd1", "qdd0", "qdd1", "belt_mm"];

impl SimTrace {
    pub fn len(&self) -> usize {
        self.activations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activations.is_empty()
    }

    pub fn angles(&self) -> Vec<[f64; 2]> {
        self.kinematics.iter().map(|k| k.q).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().from_writer(w);
        wtr.write_record(TRACE_CSV_HEADER)?;
        for (k, (a, s)) in self.activations.iter().zip(&self.kinematics).enumerate() {
            let t = (k + 1) as f64 / self.sample_rate;
            let a = a.values();
            let row = [
                t, a[0], a[1], a[2], s.q[0], s.q[1], s.qd[0], s.qd[1], s.qdd[0], s.qdd[1],
                self.belt_mm[k],
            ];
            wtr.write_record(row.iter().map(|&x| fmt_sig9(x)))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Parse a trace back from its CSV form. Derived quantities (reward and
    /// mean power) are recomputed from the columns; `rated_power` is needed
    /// for the latter.
    pub fn read_csv<R: Read>(r: R, rated_power: &[f64; 3]) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().from_reader(r);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != TRACE_CSV_HEADER {
            return Err(Error::invalid(format!("unexpected trace header {header:?}")));
        }
        let mut times = Vec::new();
        let mut activations = Vec::new();
        let mut kinematics = Vec::new();
        let mut belt_mm = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::invalid(format!("bad number in trace: {e}")))?;
            if v.len() != TRACE_CSV_HEADER.len() {
                return Err(Error::invalid("short trace row"));
            }
            times.push(v[0]);
            activations.push(Activation::new([v[1], v[2], v[3]])?);
            kinematics.push(KinematicSample::from_array([v[4], v[5], v[6], v[7], v[8], v[9]]));
            belt_mm.push(v[10]);
        }
        if times.is_empty() {
            return Err(Error::invalid("empty trace"));
        }
        let sample_rate = 1.0 / times[0];
        let reward_mm = *belt_mm.last().unwrap();
        let mean_watts = mean_power(&activations, rated_power);
        Ok(Self { sample_rate, activations, kinematics, belt_mm, reward_mm, mean_watts })
    }
}

/// Electrical power proxy: time average of `Σ a_i²·rated_power_i`.
pub fn mean_power(activations: &[Activation], rated_power: &[f64; 3]) -> f64 {
    if activations.is_empty() {
        return 0.0;
    }
    let total: f64 = activations
        .iter()
        .map(|a| a.values().iter().zip(rated_power).map(|(x, p)| x * x * p).sum::<f64>())
        .sum();
    total / activations.len() as f64
}

/// `%.9g`-style formatting used by every CSV the crate writes.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Something that executes activation sequences from a fixed start posture.
///
/// [`Limb`] is the real implementation; tests substitute doubles.
pub trait Plant {
    fn sample_rate(&self) -> f64;
    fn joint_limits(&self) -> [[f64; 2]; 2];
    /// Reset to the start posture and run `a_seq`, one command per sample.
    fn execute(&self, a_seq: &[Activation], contact: bool) -> Result<SimTrace>;
}

/// The simulated limb: plant and contact parameters plus integration settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Limb {
    pub params: LimbParams,
    pub contact: ContactParams,
    /// Hz
    pub sample_rate: f64,
    /// RK4 steps per sample interval
    pub substeps: usize,
    /// Joint angles every attempt starts from, at rest.
    pub start_posture: [f64; 2],
}

impl Default for Limb {
    fn default() -> Self {
        let params = LimbParams::default();
        let start_posture = [
            0.5 * (params.joint_limits[0][0] + params.joint_limits[0][1]),
            0.5 * (params.joint_limits[1][0] + params.joint_limits[1][1]),
        ];
        Self {
            params,
            contact: ContactParams::default(),
            sample_rate: DEFAULT_SAMPLE_RATE,
            substeps: DEFAULT_SUBSTEPS,
            start_posture,
        }
    }
}

impl Limb {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.contact.validate()?;
        if !(self.sample_rate > 0.0) || self.substeps == 0 {
            return Err(Error::invalid("sample_rate and substeps must be positive"));
        }
        for j in 0..2 {
            let [lo, hi] = self.params.joint_limits[j];
            if !(lo..=hi).contains(&self.start_posture[j]) {
                return Err(Error::invalid("start posture outside joint limits"));
            }
        }
        Ok(())
    }

    pub fn inner_dt(&self) -> f64 {
        1.0 / (self.sample_rate * self.substeps as f64)
    }

    pub fn start_state(&self) -> LimbState {
        LimbState::at_rest(self.start_posture)
    }

    /// Run `a_seq` under zero-order hold from `initial`.
    pub fn run_sequence(
        &self,
        initial: &LimbState,
        a_seq: &[Activation],
        contact_enabled: bool,
    ) -> Result<SimTrace> {
        if a_seq.is_empty() {
            return Err(Error::invalid("activation sequence is empty"));
        }
        if !(self.sample_rate > 0.0) || self.substeps == 0 {
            return Err(Error::invalid("sample_rate and substeps must be positive"));
        }
        let contact = contact_enabled.then_some(&self.contact);
        let dt = self.inner_dt();
        let mut state = *initial;
        let mut angles = Vec::with_capacity(a_seq.len());
        let mut belt_mm = Vec::with_capacity(a_seq.len());
        for (k, a) in a_seq.iter().enumerate() {
            let drive = Drive::Activation(*a);
            for _ in 0..self.substeps {
                state = step(&self.params, contact, &state, &drive, dt)
                    .map_err(|e| match e {
                        Error::Diverged { .. } => Error::Diverged { sample: k },
                        other => other,
                    })?;
            }
            angles.push(state.q);
            belt_mm.push(state.belt_position);
        }
        let kinematics = differentiate(&angles, 1.0 / self.sample_rate);
        Ok(SimTrace {
            sample_rate: self.sample_rate,
            activations: a_seq.to_vec(),
            kinematics,
            reward_mm: state.belt_position - initial.belt_position,
            belt_mm,
            mean_watts: mean_power(a_seq, &self.params.rated_power),
        })
    }
}

impl Plant for Limb {
    fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    fn joint_limits(&self) -> [[f64; 2]; 2] {
        self.params.joint_limits
    }

    fn execute(&self, a_seq: &[Activation], contact: bool) -> Result<SimTrace> {
        self.run_sequence(&self.start_state(), a_seq, contact)
    }
}
