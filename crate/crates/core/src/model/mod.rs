//! Reference classifiers (softmax regression and a one-hidden-layer MLP)
//! trained with minibatch SGD on class-weighted cross-entropy, optionally
//! with a proximal pull towards an anchor.

mod network;
mod params;
mod train;

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassWeights, FeatureVec};
use crate::error::{Error, Result};
use crate::metrics::{self, ConfusionMatrix, MetricsReport};

pub use network::{forward, grad, loss, predict};
pub use params::{init, Arch, GradVec, Params};
pub use train::sgd_train;

/// A featurized example.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sample {
    pub x: FeatureVec,
    pub label: usize,
}

impl Sample {
    pub fn new(x: FeatureVec, label: usize) -> Self {
        Sample { x, label }
    }
}

impl crate::dataset::Labeled for Sample {
    fn label(&self) -> usize {
        self.label
    }
}

/// Local optimization settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub local_epochs: usize,
    /// Proximal coefficient; 0 disables the proximal term.
    pub mu: f64,
    /// `None` means unit weights.
    pub class_weights: Option<ClassWeights>,
    /// Proximal anchor, set per round by the federated engine.
    #[serde(skip)]
    pub anchor: Option<Params>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-2,
            batch_size: 8,
            local_epochs: 1,
            mu: 0.01,
            class_weights: None,
            anchor: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("train config: {m}")));
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate {} must be finite and non-negative", self.learning_rate));
        }
        if self.batch_size == 0 || self.local_epochs == 0 {
            return bad("batch_size and local_epochs must be positive".into());
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return bad(format!("mu {} must be finite and non-negative", self.mu));
        }
        if let Some(w) = &self.class_weights {
            if w.0.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad("class weights must be finite and non-negative".into());
            }
        }
        Ok(())
    }
}

/// Pluggable client-side optimizer used by the federated engine.
pub trait LocalTrainer: Sync {
    fn train(&self, global: &Params, shard: &[Sample], cfg: &TrainConfig, seed: u64) -> Result<Params>;
}

/// Minibatch SGD, see [`sgd_train`].
#[derive(Debug, Clone, Copy, Default)]
pub struct SgdTrainer;

impl LocalTrainer for SgdTrainer {
    fn train(&self, global: &Params, shard: &[Sample], cfg: &TrainConfig, seed: u64) -> Result<Params> {
        sgd_train(global, shard, cfg, seed)
    }
}

pub fn confusion_on(params: &Params, data: &[Sample]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::new(params.arch.classes());
    for s in data {
        cm.add(s.label, predict(params, &s.x));
    }
    cm
}

/// Predicts every sample and reports weighted metrics.
pub fn evaluate(params: &Params, data: &[Sample]) -> Result<MetricsReport> {
    metrics::report(&confusion_on(params, data))
}
