//! Run configuration: a single TOML document covering every command.
//! Resolution order is flags, then the file, then built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use keystep_core::eval::{Baseline, EvalConfig};
use keystep_core::keysteps::ExtractConfig;
use keystep_core::synth::SynthConfig;
use keystep_core::trainer::TrainConfig;
use keystep_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Environment variable consulted for the worker count when neither a flag
/// nor the config file sets one.
pub const THREADS_ENV: &str = "KEYSTEP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSource {
    /// Adapted features from a trained checkpoint.
    #[default]
    Model,
    /// Raw features, concatenated.
    Raw,
    /// One-hot ground-truth steps; background gets its own column.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InferenceConfig {
    pub features: FeatureSource,
    /// Modalities concatenated at inference; all available ones when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modalities: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalOptions {
    /// Label fractions for the phase probe.
    pub fractions: Vec<f64>,
    pub baselines: Vec<Baseline>,
    pub subsample: usize,
    pub seed: u64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        let d = EvalConfig::default();
        Self {
            fractions: d.fractions,
            baselines: d.baselines,
            subsample: d.subsample,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub manifest: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub synth: SynthConfig,
    pub train: TrainConfig,
    pub extract: ExtractConfig,
    pub inference: InferenceConfig,
    pub eval: EvalOptions,
    pub paths: Paths,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("run configuration serializes to TOML")
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            extract: self.extract.clone(),
            fractions: self.eval.fractions.clone(),
            baselines: self.eval.baselines.clone(),
            subsample: self.eval.subsample,
            seed: self.eval.seed,
        }
    }

    /// Worker count: the resolved setting, else the environment, else `None`
    /// (all cores).
    pub fn thread_count(&self) -> Result<Option<usize>> {
        if let Some(n) = self.threads {
            return Ok(Some(n));
        }
        match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("{THREADS_ENV}={v:?} is not a thread count"))),
            Err(_) => Ok(None),
        }
    }

    pub fn required(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
        path.clone()
            .ok_or_else(|| Error::Config(format!("no {what} given (flag or [paths] entry)")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::parse("[train]\nepoch = 3\n"), Err(Error::Config(_))));
        assert!(matches!(RunConfig::parse("colour = 1\n"), Err(Error::Config(_))));
    }

    #[test]
    fn partial_file_keeps_other_defaults() {
        let cfg = RunConfig::parse("[train]\nepochs = 7\n[extract]\nnum_clusters = 3\n").unwrap();
        assert_eq!(cfg.train.epochs, 7);
        assert_eq!(cfg.extract.num_clusters, 3);
        assert_eq!(cfg.train.batch_size, 4);
    }

    #[test]
    fn feature_source_names() {
        let cfg = RunConfig::parse("[inference]\nfeatures = \"oracle\"\n").unwrap();
        assert_eq!(cfg.inference.features, FeatureSource::Oracle);
    }
}
