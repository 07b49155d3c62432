//! Experiment configuration: defaults, flag values, and the optional
//! config file, whose present keys override flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use f2sketch::EdisjLabel;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Workload {
    Uniform,
    Zipf,
    Edisj,
    Multilevel,
    File,
}

impl Workload {
    pub fn as_str(&self) -> &'static str {
        match self {
            Workload::Uniform => "uniform",
            Workload::Zipf => "zipf",
            Workload::Edisj => "edisj",
            Workload::Multilevel => "multilevel",
            Workload::File => "file",
        }
    }
}

impl FromStr for Workload {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "uniform" => Workload::Uniform,
            "zipf" => Workload::Zipf,
            "edisj" => Workload::Edisj,
            "multilevel" => Workload::Multilevel,
            "file" => Workload::File,
            other => bail!("unknown workload {other:?} (uniform|zipf|edisj|multilevel|file)"),
        })
    }
}

pub fn parse_label(s: &str) -> Result<EdisjLabel> {
    Ok(match s {
        "yes" => EdisjLabel::Yes,
        "no-disjoint" => EdisjLabel::NoDisjoint,
        "no-wrong-exam" => EdisjLabel::NoWrongExam,
        other => bail!("unknown label {other:?} (yes|no-disjoint|no-wrong-exam)"),
    })
}

/// Fully resolved experiment parameters.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub workload: Workload,
    pub n: u64,
    pub epsilon: f64,
    pub trials: u32,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Run the tug-of-war baseline alongside the sketch.
    pub baseline: bool,
    /// Gap-instance player count.
    pub t: u64,
    /// Gap-instance super-element width; `None` uses the default
    /// `floor(eps^2 n / t^2)` (at least 1).
    pub d: Option<u64>,
    /// Label used by `gen` for gap instances and planted streams.
    pub label: EdisjLabel,
    /// Multi-level plant level; 0 leaves the stream unplanted.
    pub level: u32,
    pub universe: Option<u64>,
    pub zipf_exponent: f64,
    /// Stream file for the `file` workload.
    pub input: Option<PathBuf>,
    /// Include the wall-time column in CSV rows.
    pub include_walltime: bool,
    /// Sketch error for the `edisj` experiment; `None` uses `epsilon/8`.
    pub sketch_epsilon: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            workload: Workload::Uniform,
            n: 100_000,
            epsilon: 0.25,
            trials: 100,
            seed: 1,
            out: None,
            baseline: false,
            t: 8,
            d: None,
            label: EdisjLabel::Yes,
            level: 0,
            universe: None,
            zipf_exponent: 1.0,
            input: None,
            include_walltime: true,
            sketch_epsilon: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            bail!("trials must be at least 1");
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            bail!("epsilon {} outside (0, 1]", self.epsilon);
        }
        if self.workload == Workload::File && self.input.is_none() {
            bail!("file workload needs --input");
        }
        Ok(())
    }

    /// Default gap-instance width: `floor(eps^2 n / t^2)`, at least 1.
    pub fn edisj_width(&self) -> u64 {
        self.d
            .unwrap_or_else(|| {
                f2sketch::streamgen::default_super_element_width(self.n, self.t, self.epsilon)
            })
            .max(1)
    }
}

/// Optional TOML config file; every present key overrides the flag value.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub workload: Option<String>,
    pub n: Option<u64>,
    pub epsilon: Option<f64>,
    pub trials: Option<u32>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub baseline: Option<bool>,
    pub t: Option<u64>,
    pub d: Option<u64>,
    pub label: Option<String>,
    pub level: Option<u32>,
    pub universe: Option<u64>,
    pub zipf_exponent: Option<f64>,
    pub input: Option<PathBuf>,
    pub walltime: Option<bool>,
    pub sketch_epsilon: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(w) = &self.workload {
            cfg.workload = w.parse()?;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.baseline {
            cfg.baseline = v;
        }
        if let Some(v) = self.t {
            cfg.t = v;
        }
        if let Some(v) = self.d {
            cfg.d = Some(v);
        }
        if let Some(l) = &self.label {
            cfg.label = parse_label(l)?;
        }
        if let Some(v) = self.level {
            cfg.level = v;
        }
        if let Some(v) = self.universe {
            cfg.universe = Some(v);
        }
        if let Some(v) = self.zipf_exponent {
            cfg.zipf_exponent = v;
        }
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = self.walltime {
            cfg.include_walltime = v;
        }
        if let Some(v) = self.sketch_epsilon {
            cfg.sketch_epsilon = Some(v);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_overrides_flags() {
        let mut cfg = ExperimentConfig {
            trials: 50,
            epsilon: 0.5,
            ..ExperimentConfig::default()
        };
        let file: ConfigFile =
            toml::from_str("trials = 7\nworkload = \"zipf\"\nlabel = \"no-disjoint\"").unwrap();
        file.apply(&mut cfg).unwrap();
        assert_eq!(cfg.trials, 7);
        assert_eq!(cfg.workload, Workload::Zipf);
        assert_eq!(cfg.label, EdisjLabel::NoDisjoint);
        // Keys absent from the file keep the flag value.
        assert_eq!(cfg.epsilon, 0.5);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(toml::from_str::<ConfigFile>("bogus = 1").is_err());
    }

    #[test]
    fn validation_rules() {
        let mut cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.epsilon = 1.5;
        assert!(cfg.validate().is_err());
        cfg.epsilon = 0.25;
        cfg.workload = Workload::File;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_width_tracks_parameters() {
        let cfg = ExperimentConfig {
            n: 4096,
            epsilon: 0.25,
            t: 2,
            ..ExperimentConfig::default()
        };
        assert_eq!(cfg.edisj_width(), 64);
        let tiny = ExperimentConfig {
            n: 64,
            epsilon: 0.25,
            t: 2,
            ..ExperimentConfig::default()
        };
        // floor would be 0; clamped to 1.
        assert_eq!(tiny.edisj_width(), 1);
    }
}
