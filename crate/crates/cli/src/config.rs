//! Experiment configuration: one JSON document, every field defaulted,
//! unknown fields rejected, overridable from the command line.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use emofed::corpus::{NormalizeMode, NUM_CATEGORIES};
use emofed::dataset::{SyntheticSpec, DEFAULT_DIM};
use emofed::fedsim::{Algorithm, PartitionMode};
use emofed::model::{Arch, TrainConfig};
use emofed::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Balancing {
    None,
    Resample,
    CostSensitive,
}

impl Balancing {
    pub fn label(self) -> &'static str {
        match self {
            Balancing::None => "Imbalanced",
            Balancing::Resample => "Resampled",
            Balancing::CostSensitive => "Cost-sensitive",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Balancing::None => "none",
            Balancing::Resample => "resample",
            Balancing::CostSensitive => "cost-sensitive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Linear,
    Mlp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// Feature-hashing dimension; a power of two.
    pub dim: usize,
    /// Hidden width, used by `mlp` only.
    pub hidden: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            kind: ModelKind::Linear,
            dim: DEFAULT_DIM,
            hidden: 64,
        }
    }
}

impl ModelConfig {
    pub fn arch(&self) -> Arch {
        match self.kind {
            ModelKind::Linear => Arch::Linear {
                dim: self.dim,
                k: NUM_CATEGORIES,
            },
            ModelKind::Mlp => Arch::Mlp {
                dim: self.dim,
                hidden: self.hidden,
                k: NUM_CATEGORIES,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Keep every example of a source tweet in the same split.
    pub by_source: bool,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { by_source: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CentralConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Default for CentralConfig {
    fn default() -> Self {
        CentralConfig {
            epochs: 25,
            learning_rate: 1e-2,
            batch_size: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FedGrid {
    pub algorithms: Vec<Algorithm>,
    pub client_fractions: Vec<f64>,
    pub partitions: Vec<PartitionMode>,
    pub rounds: usize,
    pub n_clients: usize,
    pub bins_per_client: usize,
    pub shared_fraction: f64,
    pub warm_epochs: usize,
    pub shared_sample_fraction: f64,
    /// Local optimizer settings; `class_weights` is filled in by balancing.
    pub train: TrainConfig,
    /// Absolute validation F1 target whose first crossing is logged.
    pub target_f1: Option<f64>,
}

impl Default for FedGrid {
    fn default() -> Self {
        FedGrid {
            algorithms: vec![Algorithm::FedProx],
            client_fractions: vec![0.1, 0.3, 0.5],
            partitions: vec![PartitionMode::Iid, PartitionMode::NonIid],
            rounds: 100,
            n_clients: 100,
            bins_per_client: 2,
            shared_fraction: 0.3,
            warm_epochs: 5,
            shared_sample_fraction: 0.05,
            train: TrainConfig::default(),
            target_f1: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub normalize_mode: NormalizeMode,
    pub synth: SyntheticSpec,
    pub split: SplitConfig,
    pub model: ModelConfig,
    pub balancing: Vec<Balancing>,
    pub central: CentralConfig,
    pub fed: FedGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            normalize_mode: NormalizeMode::Tokens,
            synth: SyntheticSpec::default(),
            split: SplitConfig::default(),
            model: ModelConfig::default(),
            balancing: vec![Balancing::None, Balancing::Resample, Balancing::CostSensitive],
            central: CentralConfig::default(),
            fed: FedGrid::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Reads `path` (if any), applies `overrides` in order and validates.
    pub fn resolve(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", p.display())))?
            }
            None => Value::Object(Default::default()),
        };
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: ExperimentConfig = serde_json::from_value(doc).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.model.arch().validate()?;
        if !self.model.dim.is_power_of_two() {
            return Err(config_err(format!("model.dim {} must be a power of two", self.model.dim)));
        }
        if self.balancing.is_empty() {
            return Err(config_err("balancing must list at least one mode"));
        }
        let c = &self.central;
        if c.epochs == 0 || c.batch_size == 0 || !(c.learning_rate >= 0.0 && c.learning_rate.is_finite()) {
            return Err(config_err("central: epochs and batch_size must be positive, learning_rate finite"));
        }
        let f = &self.fed;
        if f.algorithms.is_empty() || f.client_fractions.is_empty() || f.partitions.is_empty() {
            return Err(config_err("fed: algorithms, client_fractions and partitions must be non-empty"));
        }
        if f.train.class_weights.is_some() {
            return Err(config_err("fed.train.class_weights is set by the balancing mode"));
        }
        for &algorithm in &f.algorithms {
            for &fraction in &f.client_fractions {
                for &mode in &f.partitions {
                    self.fed_config(algorithm, fraction, mode).validate()?;
                }
            }
        }
        Ok(())
    }

    /// Configuration of one federated grid cell (before balancing).
    pub fn fed_config(&self, algorithm: Algorithm, client_fraction: f64, mode: PartitionMode) -> emofed::fedsim::FedConfig {
        let f = &self.fed;
        emofed::fedsim::FedConfig {
            algorithm,
            client_fraction,
            rounds: f.rounds,
            shared_fraction: f.shared_fraction,
            warm_epochs: f.warm_epochs,
            shared_sample_fraction: f.shared_sample_fraction,
            arch: self.model.arch(),
            train: f.train.clone(),
            partition: emofed::fedsim::PartitionPlan {
                mode,
                n_clients: f.n_clients,
                bins: f.n_clients * f.bins_per_client,
                bins_per_client: f.bins_per_client,
            },
            seed: self.seed,
            target_f1: f.target_f1,
        }
    }
}

/// Applies `a.b.c=VALUE`. `VALUE` is parsed as JSON, falling back to a
/// plain string.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("override {spec:?} is not of the form key=value")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(config_err(format!("override {spec:?} has an empty key")));
        }
        let obj = match node {
            Value::Object(map) => map,
            _ => return Err(config_err(format!("override {spec:?}: {} is not an object", keys[..i].join(".")))),
        };
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one key")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_fully_materialized() {
        let cfg = ExperimentConfig::resolve(None, &[]).unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        let echo = serde_json::to_value(&cfg).unwrap();
        assert_eq!(echo["fed"]["train"]["mu"], 0.01);
        assert_eq!(echo["central"]["epochs"], 25);
    }

    #[test]
    fn overrides_nest_and_parse_json() {
        let cfg = ExperimentConfig::resolve(
            None,
            &[
                "fed.rounds=3".into(),
                "fed.algorithms=[\"fedavg\",\"causalfedgsdmod\"]".into(),
                "normalize_mode=plain".into(),
            ],
        )
        .unwrap();
        assert_eq!(cfg.fed.rounds, 3);
        assert_eq!(cfg.fed.algorithms, vec![Algorithm::FedAvg, Algorithm::CausalFedGsdMod]);
        assert_eq!(cfg.normalize_mode, NormalizeMode::Plain);
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        for bad in ["fed.round=3", "model.dim=1000", "fed.client_fractions=[0]", "balancing=[]", "seed"] {
            let err = ExperimentConfig::resolve(None, &[bad.into()]).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{bad}: {err}");
        }
    }
}
