//! Federated simulation engine: client partitioning, client sampling,
//! sample-weighted aggregation and the FedAvg / FedProx / CausalFedGSD
//! round loops.

mod aggregate;
mod causal;
mod engine;
mod partition;
mod select;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Summary;
use crate::model::{Arch, Sample, TrainConfig};

pub use aggregate::{aggregate, ClientUpdate};
pub use causal::{attach_shared_samples, reserve_shared, warm_start};
pub use engine::{run_experiment, run_experiment_with, ExperimentResult, FeaturizedSplits};
pub use partition::{partition, partition_iid, partition_noniid};
pub use select::{clients_per_round, select_clients};

/// One client's local data.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientShard {
    pub client_id: usize,
    pub examples: Vec<Sample>,
}

impl ClientShard {
    /// Sample count used as the aggregation weight.
    pub fn n(&self) -> usize {
        self.examples.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Iid,
    NonIid,
}

impl PartitionMode {
    pub fn label(self) -> &'static str {
        match self {
            PartitionMode::Iid => "IID",
            PartitionMode::NonIid => "non-IID",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionPlan {
    pub mode: PartitionMode,
    pub n_clients: usize,
    /// Label-sorted bins (non-IID only).
    pub bins: usize,
    pub bins_per_client: usize,
}

impl Default for PartitionPlan {
    fn default() -> Self {
        PartitionPlan {
            mode: PartitionMode::Iid,
            n_clients: 100,
            bins: 200,
            bins_per_client: 2,
        }
    }
}

impl PartitionPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_clients == 0 {
            return Err(Error::Config("n_clients must be positive".into()));
        }
        if self.mode == PartitionMode::NonIid
            && (self.bins_per_client == 0 || self.bins != self.n_clients * self.bins_per_client)
        {
            return Err(Error::Config(format!(
                "non-IID partition needs bins = n_clients * bins_per_client ({} != {} * {})",
                self.bins, self.n_clients, self.bins_per_client
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    FedAvg,
    FedProx,
    /// Reserved pool sampled out to clients.
    CausalFedGsd,
    /// Reserved pool warm-starts the global model on the server.
    CausalFedGsdMod,
}

impl Algorithm {
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::FedAvg => "FedAvg",
            Algorithm::FedProx => "FedProx",
            Algorithm::CausalFedGsd => "CausalFedGSD",
            Algorithm::CausalFedGsdMod => "Modified CausalFedGSD",
        }
    }

    pub fn uses_shared_pool(self) -> bool {
        matches!(self, Algorithm::CausalFedGsd | Algorithm::CausalFedGsdMod)
    }
}

/// Everything that determines a federated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FedConfig {
    pub algorithm: Algorithm,
    pub client_fraction: f64,
    pub rounds: usize,
    /// Share of training data reserved by the CausalFedGSD variants.
    pub shared_fraction: f64,
    /// Server-side warm-start epochs (modified CausalFedGSD).
    pub warm_epochs: usize,
    /// Share of the reserved pool each client receives (baseline CausalFedGSD).
    pub shared_sample_fraction: f64,
    pub arch: Arch,
    pub train: TrainConfig,
    pub partition: PartitionPlan,
    pub seed: u64,
    /// Validation weighted-F1 level whose first crossing is reported.
    pub target_f1: Option<f64>,
}

impl Default for FedConfig {
    fn default() -> Self {
        FedConfig {
            algorithm: Algorithm::FedProx,
            client_fraction: 0.1,
            rounds: 100,
            shared_fraction: 0.3,
            warm_epochs: 5,
            shared_sample_fraction: 0.05,
            arch: Arch::Linear {
                dim: crate::dataset::DEFAULT_DIM,
                k: crate::corpus::NUM_CATEGORIES,
            },
            train: TrainConfig::default(),
            partition: PartitionPlan::default(),
            seed: 0,
            target_f1: None,
        }
    }
}

impl FedConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.arch.validate()?;
        self.train.validate()?;
        self.partition.validate()?;
        if !(self.client_fraction > 0.0 && self.client_fraction <= 1.0) {
            return bad(format!("client_fraction {} not in (0, 1]", self.client_fraction));
        }
        if self.rounds == 0 {
            return bad("rounds must be positive".into());
        }
        if self.algorithm.uses_shared_pool() && !(self.shared_fraction > 0.0 && self.shared_fraction < 1.0) {
            return bad(format!("shared_fraction {} not in (0, 1)", self.shared_fraction));
        }
        if self.algorithm == Algorithm::CausalFedGsdMod && self.warm_epochs == 0 {
            return bad("warm_epochs must be positive".into());
        }
        if self.algorithm == Algorithm::CausalFedGsd
            && !(self.shared_sample_fraction > 0.0 && self.shared_sample_fraction <= 1.0)
        {
            return bad(format!(
                "shared_sample_fraction {} not in (0, 1]",
                self.shared_sample_fraction
            ));
        }
        if let Some(t) = self.target_f1 {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("target_f1 {t} not in [0, 1]"));
            }
        }
        Ok(())
    }
}

/// Per-round record, emitted as one JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub clients: Vec<usize>,
    /// Local data loss of each selected client after training, same order
    /// as `clients`.
    pub client_loss: Vec<f64>,
    pub val: Summary,
    pub update_norm: f64,
}

/// `ceil(fraction * n)`, tolerant of representation error in `fraction`
/// (0.3 * 100 must give 30, not 31).
pub(crate) fn ceil_share(fraction: f64, n: usize) -> usize {
    let exact = fraction * n as f64;
    let rounded = exact.round();
    if (exact - rounded).abs() <= 1e-9 * exact.abs().max(1.0) {
        rounded as usize
    } else {
        exact.ceil() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_share_handles_float_noise() {
        assert_eq!(ceil_share(0.1, 100), 10);
        assert_eq!(ceil_share(0.3, 100), 30);
        assert_eq!(ceil_share(0.5, 100), 50);
        assert_eq!(ceil_share(0.7, 10), 7);
        assert_eq!(ceil_share(0.05, 300), 15);
        assert_eq!(ceil_share(0.3, 7), 3);
        assert_eq!(ceil_share(0.001, 1), 1);
    }

    #[test]
    fn config_validation() {
        FedConfig::default().validate().unwrap();
        let bad = [
            FedConfig { client_fraction: 0.0, ..Default::default() },
            FedConfig { client_fraction: 1.5, ..Default::default() },
            FedConfig { rounds: 0, ..Default::default() },
            FedConfig {
                algorithm: Algorithm::CausalFedGsd,
                shared_fraction: 1.0,
                ..Default::default()
            },
            FedConfig {
                partition: PartitionPlan {
                    mode: PartitionMode::NonIid,
                    bins: 150,
                    ..Default::default()
                },
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn config_rejects_unknown_fields_and_fills_defaults() {
        let cfg: FedConfig = serde_json::from_str(r#"{"algorithm":"fedavg","rounds":3}"#).unwrap();
        assert_eq!(cfg.rounds, 3);
        assert_eq!(cfg.train.mu, 0.01);
        assert_eq!(cfg.partition.n_clients, 100);
        assert!(serde_json::from_str::<FedConfig>(r#"{"round":3}"#).is_err());
    }
}
