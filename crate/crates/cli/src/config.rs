//! Flat `key = value` pipeline configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths in a
//! config file are resolved against the file's directory; paths given as
//! overrides are used as given.

use std::path::{Path, PathBuf};

use netmh::error::{Error, Result};
use netmh::graphlets::DynamicGraphletConfig;
use netmh::netmodel::Trait;
use netmh::predict::{CvConfig, FeatureConfig, LogRegConfig};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub events_path: PathBuf,
    pub labels_path: PathBuf,
    pub num_weeks: usize,
    pub traits: Vec<Trait>,
    pub graphlet_size: usize,
    pub dyn_max_nodes: usize,
    pub dyn_max_events: usize,
    pub dyn_max_gap: usize,
    pub got_k: usize,
    pub cluster_k: usize,
    pub cluster_seed: u64,
    pub cluster_concatenated: bool,
    pub cv_repeats: usize,
    pub cv_folds: usize,
    pub cv_seed: u64,
    pub pca_variance: f64,
    pub l2_strength: f64,
    pub output_dir: PathBuf,
    pub baseline_path: Option<PathBuf>,
    pub precision: Precision,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let f = FeatureConfig::default();
        let cv = CvConfig::default();
        PipelineConfig {
            events_path: PathBuf::from("events.csv"),
            labels_path: PathBuf::from("labels.csv"),
            num_weeks: 31,
            traits: Trait::ALL.to_vec(),
            graphlet_size: f.graphlet_size,
            dyn_max_nodes: f.dynamic.max_nodes,
            dyn_max_events: f.dynamic.max_events,
            dyn_max_gap: f.dynamic.max_gap,
            got_k: f.got_k,
            cluster_k: 4,
            cluster_seed: 0,
            cluster_concatenated: false,
            cv_repeats: cv.repeats,
            cv_folds: cv.folds,
            cv_seed: cv.seed,
            pca_variance: cv.variance_fraction,
            l2_strength: cv.logreg.l2_strength,
            output_dir: PathBuf::from("out"),
            baseline_path: None,
            precision: Precision::F64,
        }
    }
}

fn bad(key: &str, value: &str, what: &str) -> Error {
    Error::Config(format!("{key} = {value:?}: expected {what}"))
}

fn parse_num<N: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<N> {
    value.parse().map_err(|_| bad(key, value, what))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

impl PipelineConfig {
    /// Reads a config file on top of the defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = PipelineConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{}:{}: {}", path.display(), i + 1, strip_prefix(&e))))?;
        }
        for p in [&mut cfg.events_path, &mut cfg.labels_path, &mut cfg.output_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        if let Some(p) = cfg.baseline_path.as_mut().filter(|p| p.is_relative()) {
            *p = base.join(&*p);
        }
        Ok(cfg)
    }

    /// Applies a `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<()> {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {kv:?}: expected key=value")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "events_path" => self.events_path = PathBuf::from(value),
            "labels_path" => self.labels_path = PathBuf::from(value),
            "num_weeks" => self.num_weeks = parse_num(key, value, "a positive integer")?,
            "traits" => {
                self.traits = value
                    .split(',')
                    .map(|t| Trait::parse(t.trim()).ok_or_else(|| bad(key, value, "a list of depressed, anxious")))
                    .collect::<Result<_>>()?;
            }
            "graphlet_size" => self.graphlet_size = parse_num(key, value, "4 or 5")?,
            "dyn_max_nodes" => self.dyn_max_nodes = parse_num(key, value, "an integer")?,
            "dyn_max_events" => self.dyn_max_events = parse_num(key, value, "an integer")?,
            "dyn_max_gap" => self.dyn_max_gap = parse_num(key, value, "an integer")?,
            "got_k" => self.got_k = parse_num(key, value, "3 or 4")?,
            "cluster_k" => self.cluster_k = parse_num(key, value, "a positive integer")?,
            "cluster_seed" => self.cluster_seed = parse_num(key, value, "an unsigned integer")?,
            "cluster_concatenated" => self.cluster_concatenated = parse_bool(key, value)?,
            "cv_repeats" => self.cv_repeats = parse_num(key, value, "a positive integer")?,
            "cv_folds" => self.cv_folds = parse_num(key, value, "an integer of at least 2")?,
            "cv_seed" => self.cv_seed = parse_num(key, value, "an unsigned integer")?,
            "pca_variance" => self.pca_variance = parse_num(key, value, "a number in (0, 1]")?,
            "l2_strength" => self.l2_strength = parse_num(key, value, "a non-negative number")?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            "baseline_path" => {
                self.baseline_path = if value.is_empty() { None } else { Some(PathBuf::from(value)) }
            }
            "precision" => {
                self.precision = match value {
                    "f32" => Precision::F32,
                    "f64" => Precision::F64,
                    _ => return Err(bad(key, value, "f32 or f64")),
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Range checks on every knob. Paths are checked when they are read.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.num_weeks == 0 {
            return fail("num_weeks must be at least 1".into());
        }
        if self.traits.is_empty() {
            return fail("traits must name at least one trait".into());
        }
        if !(4..=5).contains(&self.graphlet_size) {
            return fail(format!("graphlet_size must be 4 or 5, got {}", self.graphlet_size));
        }
        if !(3..=4).contains(&self.got_k) {
            return fail(format!("got_k must be 3 or 4, got {}", self.got_k));
        }
        self.feature_config()
            .dynamic
            .validate()
            .map_err(|e| Error::Config(strip_prefix(&e)))?;
        if self.cluster_k == 0 {
            return fail("cluster_k must be at least 1".into());
        }
        if self.cv_repeats == 0 || self.cv_folds < 2 {
            return fail("cv_repeats must be at least 1 and cv_folds at least 2".into());
        }
        if !(self.pca_variance > 0.0 && self.pca_variance <= 1.0) {
            return fail(format!("pca_variance must be in (0, 1], got {}", self.pca_variance));
        }
        if !(self.l2_strength >= 0.0 && self.l2_strength.is_finite()) {
            return fail(format!("l2_strength must be non-negative, got {}", self.l2_strength));
        }
        Ok(())
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig {
            graphlet_size: self.graphlet_size,
            dynamic: DynamicGraphletConfig {
                max_nodes: self.dyn_max_nodes,
                max_events: self.dyn_max_events,
                max_gap: self.dyn_max_gap,
            },
            got_k: self.got_k,
        }
    }

    pub fn cv_config(&self) -> CvConfig {
        CvConfig {
            repeats: self.cv_repeats,
            folds: self.cv_folds,
            seed: self.cv_seed,
            variance_fraction: self.pca_variance,
            logreg: LogRegConfig { l2_strength: self.l2_strength, ..LogRegConfig::default() },
        }
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) | Error::InvalidInput(m) => m.clone(),
        e => e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\nevents_path = ev.csv\nlabels_path=/abs/labels.csv\ntraits = anxious\ncluster_k = 3\n\nprecision = f32\n",
        )
        .unwrap();
        let mut cfg = PipelineConfig::load(&path).unwrap();
        assert_eq!(cfg.events_path, dir.path().join("ev.csv"));
        assert_eq!(cfg.labels_path, PathBuf::from("/abs/labels.csv"));
        assert_eq!(cfg.traits, vec![Trait::Anxious]);
        assert_eq!(cfg.cluster_k, 3);
        assert_eq!(cfg.precision, Precision::F32);
        cfg.apply_override("l2_strength=0.5").unwrap();
        assert_eq!(cfg.l2_strength, 0.5);
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_bad_input() {
        let mut cfg = PipelineConfig::default();
        assert!(cfg.apply_override("nope=1").unwrap_err().is_usage());
        assert!(cfg.apply_override("cluster_k=x").unwrap_err().is_usage());
        assert!(cfg.apply_override("missing_equals").unwrap_err().is_usage());
        cfg.graphlet_size = 6;
        assert!(cfg.validate().unwrap_err().is_usage());
        let cfg = PipelineConfig {
            dyn_max_nodes: 9,
            ..PipelineConfig::default()
        };
        assert!(cfg.validate().unwrap_err().is_usage());
    }
}
