//! Plain-text configuration: `key = value` lines, `#` comments.
//!
//! The embedded defaults are always loaded first; a user file may only set
//! keys the defaults know about, plus new `object.<name>` and `set.<name>`
//! entries. Command-line flags are applied last.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use touchbench_core::dataset::CollectConfig;
use touchbench_core::geometry::ObjectModel;
use touchbench_core::model::TrainHyper;
use touchbench_core::recognition::{EpisodeConfig, Mode};
use touchbench_core::shapeclass::{ClassifierHyper, StampGenConfig};
use touchbench_core::tactile::{SensorLayout, StampConfig};

use crate::objects::{ObjectSpec, ObjectSpecError};

pub const DEFAULT_CONFIG: &str = include_str!("../config/default.conf");

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{origin}:{line}: {message}")]
    Syntax { origin: String, line: usize, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config key `{key}` has invalid value `{value}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error(transparent)]
    Object(#[from] ObjectSpecError),
    #[error("unknown object set `{0}`")]
    UnknownSet(String),
    #[error("set `{set}` names unknown object `{object}`")]
    UnknownObject { set: String, object: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
    objects: BTreeMap<String, ObjectSpec>,
    sets: BTreeMap<String, Vec<String>>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

impl Config {
    pub fn defaults() -> Self {
        let mut c = Self { values: BTreeMap::new(), objects: BTreeMap::new(), sets: BTreeMap::new() };
        c.merge_text("default.conf", DEFAULT_CONFIG, true).expect("embedded defaults parse");
        c
    }

    /// Defaults overlaid with the file at `path`, if any.
    pub fn load(path: Option<&Path>) -> Result<Self, crate::Error> {
        let mut c = Self::defaults();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
            c.merge_text(&path.display().to_string(), &text, false)?;
        }
        Ok(c)
    }

    pub fn merge_text(&mut self, origin: &str, text: &str, allow_new_keys: bool) -> Result<(), ConfigError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: &str| ConfigError::Syntax { origin: origin.into(), line: n + 1, message: message.into() };
            let (key, value) = line.split_once('=').ok_or_else(|| syntax("expected `key = value`"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(syntax("empty key"));
            }
            if let Some(name) = key.strip_prefix("object.") {
                if !valid_name(name) {
                    return Err(syntax("object names use letters, digits, `_` and `-`"));
                }
                self.objects.insert(name.into(), ObjectSpec::parse(name, value)?);
            } else if let Some(name) = key.strip_prefix("set.") {
                if !valid_name(name) {
                    return Err(syntax("set names use letters, digits, `_` and `-`"));
                }
                let members: Vec<String> =
                    value.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                if members.is_empty() {
                    return Err(syntax("empty object set"));
                }
                self.sets.insert(name.into(), members);
            } else {
                self.set_value(key, value, allow_new_keys)?;
            }
        }
        self.check_sets()
    }

    fn check_sets(&self) -> Result<(), ConfigError> {
        for (set, members) in &self.sets {
            if let Some(object) = members.iter().find(|m| !self.objects.contains_key(*m)) {
                return Err(ConfigError::UnknownObject { set: set.clone(), object: object.clone() });
            }
        }
        Ok(())
    }

    fn set_value(&mut self, key: &str, value: &str, allow_new: bool) -> Result<(), ConfigError> {
        if !allow_new && !self.values.contains_key(key) {
            return Err(ConfigError::UnknownKey(key.into()));
        }
        self.values.insert(key.into(), value.into());
        Ok(())
    }

    /// Flag override; the key must exist and the value must parse like the default.
    pub fn set<T: ToString>(&mut self, key: &str, value: T) -> Result<(), ConfigError> {
        self.set_value(key, &value.to_string(), false)
    }

    pub fn raw(&self, key: &str) -> Result<&str, ConfigError> {
        self.values.get(key).map(String::as_str).ok_or_else(|| ConfigError::UnknownKey(key.into()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        let value = self.raw(key)?;
        value.parse().map_err(|e: T::Err| ConfigError::InvalidValue {
            key: key.into(),
            value: value.into(),
            reason: e.to_string(),
        })
    }

    fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let v: f64 = self.get(key)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(self.invalid(key, "must be positive"));
        }
        Ok(v)
    }

    fn count(&self, key: &str) -> Result<usize, ConfigError> {
        let v: usize = self.get(key)?;
        if v == 0 {
            return Err(self.invalid(key, "must be at least 1"));
        }
        Ok(v)
    }

    fn invalid(&self, key: &str, reason: &str) -> ConfigError {
        ConfigError::InvalidValue { key: key.into(), value: self.values.get(key).cloned().unwrap_or_default(), reason: reason.into() }
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.get("seed")
    }

    pub fn workers(&self) -> Result<usize, ConfigError> {
        self.count("workers")
    }

    pub fn object_names(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(String::as_str)
    }

    pub fn set_names(&self) -> impl Iterator<Item = &str> {
        self.sets.keys().map(String::as_str)
    }

    /// Specs of a named set, in the order the set lists them.
    pub fn object_set(&self, name: &str) -> Result<Vec<ObjectSpec>, ConfigError> {
        let members = self.sets.get(name).ok_or_else(|| ConfigError::UnknownSet(name.into()))?;
        Ok(members.iter().map(|m| self.objects[m].clone()).collect())
    }

    pub fn build_set(&self, name: &str) -> Result<Vec<ObjectModel>, ConfigError> {
        self.object_set(name)?.iter().map(|s| s.build().map_err(ConfigError::from)).collect()
    }

    pub fn layout(&self) -> Result<SensorLayout, ConfigError> {
        let noise_std: f64 = self.get("noise_std")?;
        if !(noise_std >= 0.0) {
            return Err(self.invalid("noise_std", "must be non-negative"));
        }
        Ok(SensorLayout {
            kernel_sigma: self.positive("kernel_sigma_mm")?,
            gain_z: self.get("gain_z")?,
            gain_t: self.get("gain_t")?,
            noise_std,
            ..SensorLayout::default()
        })
    }

    pub fn collect_config(&self) -> Result<CollectConfig, ConfigError> {
        let c = CollectConfig {
            pad_side: self.positive("pad_side")?,
            standoff: self.positive("standoff")?,
            gap: self.positive("gap")?,
            penetration_mm: (self.positive("penetration_min_mm")?, self.positive("penetration_max_mm")?),
            layout: self.layout()?,
            noise: self.get("noise")?,
        };
        c.validate().map_err(|e| ConfigError::InvalidValue {
            key: "touch".into(),
            value: String::new(),
            reason: e.to_string(),
        })?;
        Ok(c)
    }

    pub fn train_fraction(&self) -> Result<f64, ConfigError> {
        let f: f64 = self.get("train_fraction")?;
        if !(f > 0.0 && f < 1.0) {
            return Err(self.invalid("train_fraction", "must lie in (0, 1)"));
        }
        Ok(f)
    }

    pub fn train_hyper(&self) -> Result<TrainHyper, ConfigError> {
        let aux: f64 = self.get("aux_weight")?;
        if !(aux >= 0.0) {
            return Err(self.invalid("aux_weight", "must be non-negative"));
        }
        Ok(TrainHyper {
            epochs: self.get("epochs")?,
            batch: self.count("batch")?,
            lr: self.positive("lr")?,
            aux_weight: aux,
            seed: self.seed()?,
        })
    }

    pub fn episode_config(&self, mode: Mode) -> Result<EpisodeConfig, ConfigError> {
        let press = self.positive("recognition_press_mm")?;
        let mut touch = self.collect_config()?;
        touch.penetration_mm = (press, press);
        touch.validate().map_err(|e| ConfigError::InvalidValue {
            key: "recognition_press_mm".into(),
            value: press.to_string(),
            reason: e.to_string(),
        })?;
        Ok(EpisodeConfig {
            touches: self.count("touches")?,
            mode,
            location_candidates: self.count("location_candidates")?,
            proprioception_scale: self.positive("proprioception_scale")?,
            touch,
        })
    }

    pub fn stamp_config(&self) -> Result<StampGenConfig, ConfigError> {
        let max_offset: f64 = self.get("stamp_max_offset_mm")?;
        if !(max_offset >= 0.0) {
            return Err(self.invalid("stamp_max_offset_mm", "must be non-negative"));
        }
        Ok(StampGenConfig {
            stamp: StampConfig {
                width: self.positive("stamp_width_mm")?,
                bar: self.positive("stamp_bar_mm")?,
                depth: self.positive("stamp_depth_mm")?,
                pad_side: self.positive("pad_side")? * 1e3,
                standoff: self.positive("standoff")? * 1e3,
            },
            layout: self.layout()?,
            max_offset_mm: max_offset,
            press_mm: self.positive("stamp_depth_mm")?,
        })
    }

    pub fn classifier_hyper(&self) -> Result<ClassifierHyper, ConfigError> {
        Ok(ClassifierHyper {
            epochs: self.get("stamp_epochs")?,
            batch: self.count("stamp_batch")?,
            lr: self.positive("stamp_lr")?,
            train_fraction: self.train_fraction()?,
            seed: self.seed()?,
        })
    }

    /// Every resolved entry as `key = value` lines, sorted.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            let _ = writeln!(out, "{k} = {v}");
        }
        for (k, v) in &self.objects {
            let _ = writeln!(out, "object.{k} = {v}");
        }
        for (k, v) in &self.sets {
            let _ = writeln!(out, "set.{k} = {}", v.join(", "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = Config::defaults();
        assert_eq!(c.seed().unwrap(), 0);
        assert_eq!(c.build_set("tools").unwrap().len(), 3);
        assert_eq!(c.build_set("train").unwrap().len(), 2);
        assert_eq!(c.collect_config().unwrap(), CollectConfig::default());
        assert_eq!(c.episode_config(Mode::I2T).unwrap(), EpisodeConfig::default());
        let s = c.stamp_config().unwrap();
        assert_eq!(s.stamp, StampConfig::default());
    }

    #[test]
    fn overlay_and_flags() {
        let mut c = Config::defaults();
        c.merge_text("user", "epochs = 3 # short\nobject.ball = sphere:0.01\nset.mine = ball, box\n", false).unwrap();
        assert_eq!(c.get::<usize>("epochs").unwrap(), 3);
        assert_eq!(c.object_set("mine").unwrap()[0].name, "ball");
        c.set("seed", 9).unwrap();
        assert_eq!(c.seed().unwrap(), 9);
        assert_eq!(c.set("nonsense", 1), Err(ConfigError::UnknownKey("nonsense".into())));
    }

    #[test]
    fn distinct_errors() {
        let mut c = Config::defaults();
        assert!(matches!(c.merge_text("u", "epochs 3", false), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!(c.merge_text("u", "colour = red", false), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.merge_text("u", "object.x = blob:1", false), Err(ConfigError::Object(_))));
        assert!(matches!(c.merge_text("u", "set.s = nothing", false), Err(ConfigError::UnknownObject { .. })));
        let mut c = Config::defaults();
        c.set("epochs", "many").unwrap();
        assert!(matches!(c.train_hyper(), Err(ConfigError::InvalidValue { .. })));
        assert!(matches!(c.object_set("nope"), Err(ConfigError::UnknownSet(_))));
    }

    #[test]
    fn render_reparses_to_same_config() {
        let c = Config::defaults();
        let mut d = Config { values: BTreeMap::new(), objects: BTreeMap::new(), sets: BTreeMap::new() };
        d.merge_text("echo", &c.render(), true).unwrap();
        assert_eq!(c, d);
    }
}
