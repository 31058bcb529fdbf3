use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Example;
use crate::dataset::{featurize, SplitSet};
use crate::error::{Error, Result};
use crate::metrics::{MetricsReport, Summary};
use crate::model::{evaluate, init, loss, LocalTrainer, Params, Sample, SgdTrainer, TrainConfig};
use crate::rng::{mix, TAG_CLIENT};

use super::{
    aggregate, attach_shared_samples, partition, reserve_shared, select_clients, warm_start, Algorithm,
    ClientShard, ClientUpdate, FedConfig, RoundLog,
};

/// Train/validation/test data after featurization.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeaturizedSplits {
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
}

impl FeaturizedSplits {
    pub fn from_examples(train: &[Example], validation: &[Example], test: &[Example], dim: usize) -> Self {
        let f = |xs: &[Example]| -> Vec<Sample> {
            xs.iter()
                .map(|e| Sample::new(featurize(&e.tokens, dim), e.label.index()))
                .collect()
        };
        FeaturizedSplits {
            train: f(train),
            validation: f(validation),
            test: f(test),
        }
    }

    pub fn from_split(split: &SplitSet, dim: usize) -> Self {
        Self::from_examples(&split.train, &split.validation, &split.test, dim)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    /// Validation metrics of the model clients receive in round 1.
    pub initial_val: Summary,
    pub rounds: Vec<RoundLog>,
    pub test: MetricsReport,
    #[serde(skip)]
    pub final_params: Option<Params>,
    /// First round whose validation F1 reaches `target_f1`; 0 when the
    /// starting model already does.
    pub rounds_to_target: Option<usize>,
}

/// Runs one federated experiment with plain SGD clients on `workers`
/// threads. Results do not depend on `workers`.
pub fn run_experiment(cfg: &FedConfig, data: &FeaturizedSplits, workers: usize) -> Result<ExperimentResult> {
    run_experiment_with(cfg, data, &SgdTrainer, workers)
}

fn check_labels(data: &FeaturizedSplits, k: usize) -> Result<()> {
    for s in data.train.iter().chain(&data.validation).chain(&data.test) {
        if s.label >= k {
            return Err(Error::LabelOutOfRange { label: s.label, k });
        }
    }
    if data.train.is_empty() || data.validation.is_empty() || data.test.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}

fn local_config(cfg: &FedConfig, global: &Params) -> TrainConfig {
    let mut local = cfg.train.clone();
    match cfg.algorithm {
        Algorithm::FedProx => local.anchor = Some(global.clone()),
        _ => {
            local.mu = 0.0;
            local.anchor = None;
        }
    }
    local
}

pub fn run_experiment_with(
    cfg: &FedConfig,
    data: &FeaturizedSplits,
    trainer: &dyn LocalTrainer,
    workers: usize,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    check_labels(data, cfg.arch.classes())?;
    let seed = cfg.seed;

    let (shared, pool) = if cfg.algorithm.uses_shared_pool() {
        reserve_shared(&data.train, cfg.shared_fraction, seed)?
    } else {
        (Vec::new(), data.train.clone())
    };
    let mut shards = partition(&pool, &cfg.partition, seed)?;
    if cfg.algorithm == Algorithm::CausalFedGsd {
        shards = attach_shared_samples(&shards, &shared, cfg.shared_sample_fraction, seed)?;
    }
    let mut global = match cfg.algorithm {
        Algorithm::CausalFedGsdMod => warm_start(cfg.arch, &shared, cfg.warm_epochs, &cfg.train, seed)?,
        _ => init(cfg.arch, seed),
    };

    let initial_val = evaluate(&global, &data.validation)?.summary();
    let reached = |f1: f64| cfg.target_f1.is_some_and(|t| f1 >= t);
    let mut rounds_to_target = reached(initial_val.f1_weighted).then_some(0);

    let threads = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let mut rounds = Vec::with_capacity(cfg.rounds);
    for round in 1..=cfg.rounds {
        let selected = select_clients(shards.len(), cfg.client_fraction, round, seed);
        let local = local_config(cfg, &global);
        let eval_cfg = TrainConfig {
            mu: 0.0,
            anchor: None,
            ..local.clone()
        };
        let outcomes: Vec<(ClientUpdate, f64)> = threads.install(|| {
            selected
                .par_iter()
                .filter(|&&id| shards[id].n() > 0)
                .map(|&id| train_client(trainer, &global, &shards[id], &local, &eval_cfg, round, seed))
                .collect::<Result<Vec<_>>>()
        })?;

        let (updates, client_loss): (Vec<ClientUpdate>, Vec<f64>) = outcomes.into_iter().unzip();
        let next = aggregate(&updates)?;
        next.check()?;
        let update_norm = next.l2_distance(&global);
        global = next;

        let val = evaluate(&global, &data.validation)?.summary();
        if rounds_to_target.is_none() && reached(val.f1_weighted) {
            rounds_to_target = Some(round);
        }
        rounds.push(RoundLog {
            round,
            clients: updates.iter().map(|u| u.client_id).collect(),
            client_loss,
            val,
            update_norm,
        });
    }

    Ok(ExperimentResult {
        initial_val,
        rounds,
        test: evaluate(&global, &data.test)?,
        final_params: Some(global),
        rounds_to_target,
    })
}

fn train_client(
    trainer: &dyn LocalTrainer,
    global: &Params,
    shard: &ClientShard,
    cfg: &TrainConfig,
    eval_cfg: &TrainConfig,
    round: usize,
    seed: u64,
) -> Result<(ClientUpdate, f64)> {
    let client_seed = mix(seed, &[TAG_CLIENT, round as u64, shard.client_id as u64]);
    let params = trainer.train(global, &shard.examples, cfg, client_seed)?;
    let client_loss = loss(&params, &shard.examples, eval_cfg)?;
    Ok((
        ClientUpdate {
            client_id: shard.client_id,
            params,
            n: shard.n(),
        },
        client_loss,
    ))
}
