//! Flat `section.key = value` configuration.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` or `;`
//! are ignored. Lists are comma separated. Every key has a default and
//! unknown keys are rejected. The same dotted names work as command-line
//! overrides (`--g2p.sigma_base 0.1` or `--set g2p.sigma_base=0.1`).

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::learner::G2PConfig;
use crate::limb_sim::Limb;
use crate::limit_cycle::FeatureBounds;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSettings {
    pub attempts: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub feature_bounds: FeatureBounds,
}

impl Default for TrackingSettings {
    fn default() -> Self {
        Self { attempts: 5, n_train: 30, n_test: 30, feature_bounds: FeatureBounds::FREE }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSettings {
    pub probes: usize,
    /// 0 to 100
    pub percentile: f64,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self { probes: 100, percentile: 60.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub limb: Limb,
    /// Also holds the `babble.*` and `train.*` blocks.
    pub g2p: G2PConfig,
    pub tracking: TrackingSettings,
    pub calibration: CalibrationSettings,
    /// Master seed; replicate `k` runs with `seed::derive(seed, k)`.
    pub seed: u64,
    /// `None` picks the per-command default.
    pub replicates: Option<usize>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            limb: Limb::default(),
            g2p: G2PConfig::default(),
            tracking: TrackingSettings::default(),
            calibration: CalibrationSettings::default(),
            seed: 0,
            replicates: None,
            out: PathBuf::from("runs"),
        }
    }
}

fn bad(key: &str, value: &str, why: impl Display) -> Error {
    Error::Config(format!("{key} = {value}: {why}"))
}

fn scalar<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value.trim().parse().map_err(|e| bad(key, value, e))
}

fn list<const N: usize>(key: &str, value: &str) -> Result<[f64; N]> {
    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(bad(key, value, format!("expected {N} comma-separated numbers")));
    }
    let mut out = [0.0; N];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = scalar(key, p)?;
    }
    Ok(out)
}

fn bounds(key: &str, value: &str) -> Result<FeatureBounds> {
    let [lo, hi] = list::<2>(key, value)?;
    Ok(FeatureBounds { lo, hi })
}

fn auto<T: FromStr>(key: &str, value: &str) -> Result<Option<T>>
where
    T::Err: Display,
{
    if value.trim() == "auto" {
        Ok(None)
    } else {
        scalar(key, value).map(Some)
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn opt<T: Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "auto".to_owned(), |x| x.to_string())
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.limb.params;
        let c = &mut self.limb.contact;
        let g = &mut self.g2p;
        match key {
            "plant.link_lengths" => p.link_lengths = list(key, value)?,
            "plant.link_masses" => p.link_masses = list(key, value)?,
            "plant.link_inertias" => p.link_inertias = list(key, value)?,
            "plant.joint_damping" => p.joint_damping = list(key, value)?,
            "plant.joint_limits" => {
                let [a, b, c, d] = list(key, value)?;
                p.joint_limits = [[a, b], [c, d]];
            }
            "plant.moment_arms" => {
                let [a, b, c, d, e, f] = list(key, value)?;
                p.moment_arms = [[a, b, c], [d, e, f]];
            }
            "plant.f_max" => p.f_max = list(key, value)?,
            "plant.motor_viscosity" => p.motor_viscosity = scalar(key, value)?,
            "plant.gravity" => p.gravity = scalar(key, value)?,
            "plant.rated_power" => p.rated_power = list(key, value)?,
            "plant.sample_rate" => self.limb.sample_rate = scalar(key, value)?,
            "plant.substeps" => self.limb.substeps = scalar(key, value)?,
            "plant.start_posture" => self.limb.start_posture = list(key, value)?,
            "contact.ground_height" => c.ground_height = scalar(key, value)?,
            "contact.stiffness" => c.stiffness = scalar(key, value)?,
            "contact.damping" => c.damping = scalar(key, value)?,
            "contact.friction" => c.friction = scalar(key, value)?,
            "contact.slip_velocity" => c.slip_velocity = scalar(key, value)?,
            "contact.belt_mass" => c.belt_mass = scalar(key, value)?,
            "contact.belt_drag" => c.belt_drag = scalar(key, value)?,
            "babble.duration_s" => g.babble.duration_s = scalar(key, value)?,
            "babble.activation_range" => g.babble.activation_range = list(key, value)?,
            "babble.transition_prob" => g.babble.transition_prob = auto(key, value)?,
            "train.epochs_initial" => g.train.epochs_initial = scalar(key, value)?,
            "train.epochs_refine" => g.train.epochs_refine = scalar(key, value)?,
            "train.batch_size" => g.train.batch_size = scalar(key, value)?,
            "train.momentum" => g.train.momentum = scalar(key, value)?,
            "train.learning_rate" => g.train.learning_rate = scalar(key, value)?,
            "g2p.reward_threshold" => g.reward_threshold = scalar(key, value)?,
            "g2p.max_explore_attempts" => g.max_explore_attempts = scalar(key, value)?,
            "g2p.max_exploit_attempts" => g.max_exploit_attempts = scalar(key, value)?,
            "g2p.cycles_per_attempt" => g.cycles_per_attempt = scalar(key, value)?,
            "g2p.samples_per_cycle" => g.samples_per_cycle = scalar(key, value)?,
            "g2p.sigma_base" => g.sigma_base = scalar(key, value)?,
            "g2p.sigma_min" => g.sigma_min = scalar(key, value)?,
            "g2p.feature_bounds" => g.feature_bounds = bounds(key, value)?,
            "g2p.refine_drop_fraction" => g.refine_drop_fraction = scalar(key, value)?,
            "tracking.attempts" => self.tracking.attempts = scalar(key, value)?,
            "tracking.n_train" => self.tracking.n_train = scalar(key, value)?,
            "tracking.n_test" => self.tracking.n_test = scalar(key, value)?,
            "tracking.feature_bounds" => self.tracking.feature_bounds = bounds(key, value)?,
            "calibrate.probes" => self.calibration.probes = scalar(key, value)?,
            "calibrate.percentile" => self.calibration.percentile = scalar(key, value)?,
            "run.seed" => self.seed = scalar(key, value)?,
            "run.replicates" => self.replicates = auto(key, value)?,
            "run.out" => self.out = PathBuf::from(value.trim()),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Every key with its current value, in file order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let p = &self.limb.params;
        let c = &self.limb.contact;
        let g = &self.g2p;
        let lim = p.joint_limits;
        let r = p.moment_arms;
        vec![
            ("plant.link_lengths", join(&p.link_lengths)),
            ("plant.link_masses", join(&p.link_masses)),
            ("plant.link_inertias", join(&p.link_inertias)),
            ("plant.joint_damping", join(&p.joint_damping)),
            ("plant.joint_limits", join(&[lim[0][0], lim[0][1], lim[1][0], lim[1][1]])),
            ("plant.moment_arms", join(&[r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2]])),
            ("plant.f_max", join(&p.f_max)),
            ("plant.motor_viscosity", p.motor_viscosity.to_string()),
            ("plant.gravity", p.gravity.to_string()),
            ("plant.rated_power", join(&p.rated_power)),
            ("plant.sample_rate", self.limb.sample_rate.to_string()),
            ("plant.substeps", self.limb.substeps.to_string()),
            ("plant.start_posture", join(&self.limb.start_posture)),
            ("contact.ground_height", c.ground_height.to_string()),
            ("contact.stiffness", c.stiffness.to_string()),
            ("contact.damping", c.damping.to_string()),
            ("contact.friction", c.friction.to_string()),
            ("contact.slip_velocity", c.slip_velocity.to_string()),
            ("contact.belt_mass", c.belt_mass.to_string()),
            ("contact.belt_drag", c.belt_drag.to_string()),
            ("babble.duration_s", g.babble.duration_s.to_string()),
            ("babble.activation_range", join(&g.babble.activation_range)),
            ("babble.transition_prob", opt(&g.babble.transition_prob)),
            ("train.epochs_initial", g.train.epochs_initial.to_string()),
            ("train.epochs_refine", g.train.epochs_refine.to_string()),
            ("train.batch_size", g.train.batch_size.to_string()),
            ("train.momentum", g.train.momentum.to_string()),
            ("train.learning_rate", g.train.learning_rate.to_string()),
            ("g2p.reward_threshold", g.reward_threshold.to_string()),
            ("g2p.max_explore_attempts", g.max_explore_attempts.to_string()),
            ("g2p.max_exploit_attempts", g.max_exploit_attempts.to_string()),
            ("g2p.cycles_per_attempt", g.cycles_per_attempt.to_string()),
            ("g2p.samples_per_cycle", g.samples_per_cycle.to_string()),
            ("g2p.sigma_base", g.sigma_base.to_string()),
            ("g2p.sigma_min", g.sigma_min.to_string()),
            ("g2p.feature_bounds", join(&[g.feature_bounds.lo, g.feature_bounds.hi])),
            ("g2p.refine_drop_fraction", g.refine_drop_fraction.to_string()),
            ("tracking.attempts", self.tracking.attempts.to_string()),
            ("tracking.n_train", self.tracking.n_train.to_string()),
            ("tracking.n_test", self.tracking.n_test.to_string()),
            (
                "tracking.feature_bounds",
                join(&[self.tracking.feature_bounds.lo, self.tracking.feature_bounds.hi]),
            ),
            ("calibrate.probes", self.calibration.probes.to_string()),
            ("calibrate.percentile", self.calibration.percentile.to_string()),
            ("run.seed", self.seed.to_string()),
            ("run.replicates", opt(&self.replicates)),
            ("run.out", self.out.display().to_string()),
        ]
    }

    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (key, value) in self.entries() {
            let head = key.split('.').next().unwrap_or("");
            if head != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                section = head;
            }
            out.push_str(&format!("{key} = {value}\n"));
        }
        out
    }

    /// Apply every assignment in `text` on top of `self`.
    pub fn apply_ini(&mut self, text: &str) -> Result<()> {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn from_ini(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_ini(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_ini(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.limb.validate()?;
        self.g2p.validate()?;
        self.tracking.feature_bounds.validate()?;
        if self.tracking.attempts == 0 {
            return Err(Error::Config("tracking.attempts must be at least 1".into()));
        }
        if self.calibration.probes == 0 || !(0.0..=100.0).contains(&self.calibration.percentile) {
            return Err(Error::Config("calibrate.probes must be ≥ 1 and percentile in [0, 100]".into()));
        }
        if self.replicates == Some(0) {
            return Err(Error::Config("run.replicates must be at least 1".into()));
        }
        Ok(())
    }

    /// The learner configuration for free movements in the air.
    pub fn tracking_g2p(&self) -> G2PConfig {
        G2PConfig { contact: false, feature_bounds: self.tracking.feature_bounds, ..self.g2p.clone() }
    }
}

/// Turn trailing `--section.key value` / `--section.key=value` arguments
/// into assignments.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let body = arg
            .strip_prefix("--")
            .filter(|b| b.contains('.'))
            .ok_or_else(|| Error::Config(format!("unexpected argument `{arg}`")))?;
        match body.split_once('=') {
            Some((k, v)) => out.push((k.to_owned(), v.to_owned())),
            None => {
                let v = it.next().ok_or_else(|| Error::Config(format!("`{arg}` needs a value")))?;
                out.push((body.to_owned(), v.clone()));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ini_round_trip_is_exact() {
        let mut cfg = ExperimentConfig::default();
        cfg.g2p.reward_threshold = 51.234567890123;
        cfg.replicates = Some(4);
        cfg.g2p.babble.transition_prob = Some(0.02);
        let back = ExperimentConfig::from_ini(&cfg.to_ini()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(ExperimentConfig::from_ini(&ExperimentConfig::default().to_ini()).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn every_entry_is_settable() {
        let cfg = ExperimentConfig::default();
        let mut other = ExperimentConfig::default();
        for (k, v) in cfg.entries() {
            other.set(k, &v).unwrap();
        }
        assert_eq!(other, cfg);
    }

    #[test]
    fn comments_lists_and_auto() {
        let text = "# plant\n\nplant.f_max = 100, 110,120\n; note\nbabble.transition_prob = auto\nrun.replicates = 3\n";
        let cfg = ExperimentConfig::from_ini(text).unwrap();
        assert_eq!(cfg.limb.params.f_max, [100.0, 110.0, 120.0]);
        assert_eq!(cfg.g2p.babble.transition_prob, None);
        assert_eq!(cfg.replicates, Some(3));
    }

    #[test]
    fn unknown_and_malformed_rejected() {
        for text in ["plant.nonsense = 1", "plant.f_max = 1, 2", "g2p.sigma_min = abc", "just words"] {
            assert!(matches!(ExperimentConfig::from_ini(text), Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn overrides_parse_both_forms() {
        let args: Vec<String> = ["--g2p.sigma_base", "0.1", "--run.seed=9"].iter().map(|s| s.to_string()).collect();
        let o = parse_overrides(&args).unwrap();
        assert_eq!(o, vec![("g2p.sigma_base".into(), "0.1".into()), ("run.seed".into(), "9".into())]);
        assert!(parse_overrides(&["--g2p.sigma_base".to_string()]).is_err());
        assert!(parse_overrides(&["positional".to_string()]).is_err());
    }

    #[test]
    fn validation_catches_bad_values() {
        let mut cfg = ExperimentConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.calibration.percentile = 101.0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.set("plant.joint_limits", "1, -1, 0, 2").unwrap();
        assert!(cfg.validate().is_err());
    }
}
