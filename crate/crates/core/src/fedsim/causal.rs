//! Shared-pool helpers for the CausalFedGSD variants.

use rand::seq::{index, SliceRandom};

use crate::error::{Error, Result};
use crate::model::{init, sgd_train, Arch, Params, Sample, TrainConfig};
use crate::rng::{mix, rng_for, TAG_ATTACH, TAG_INIT, TAG_RESERVE};

use super::{ceil_share, ClientShard};

/// Class-stratified reservation of `ceil(s * n_c)` examples per class.
/// Returns `(shared, remainder)`; the remainder keeps input order.
pub fn reserve_shared(train: &[Sample], s: f64, seed: u64) -> Result<(Vec<Sample>, Vec<Sample>)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Config(format!("shared fraction {s} not in (0, 1)")));
    }
    let k = train.iter().map(|x| x.label + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, x) in train.iter().enumerate() {
        by_class[x.label].push(i);
    }
    let mut rng = rng_for(seed, &[TAG_RESERVE]);
    let mut reserved = vec![false; train.len()];
    let mut shared = Vec::new();
    for members in &mut by_class {
        members.shuffle(&mut rng);
        let take = ceil_share(s, members.len());
        for &i in &members[..take] {
            reserved[i] = true;
            shared.push(train[i].clone());
        }
    }
    let remainder = train
        .iter()
        .zip(&reserved)
        .filter(|(_, &r)| !r)
        .map(|(x, _)| x.clone())
        .collect();
    Ok((shared, remainder))
}

/// Baseline CausalFedGSD: every client receives its own draw (without
/// replacement) of `ceil(alpha * |shared|)` pool examples, keyed by
/// `(seed, client_id)`.
pub fn attach_shared_samples(
    shards: &[ClientShard],
    shared: &[Sample],
    alpha: f64,
    seed: u64,
) -> Result<Vec<ClientShard>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("shared sample fraction {alpha} not in (0, 1]")));
    }
    let m = ceil_share(alpha, shared.len()).min(shared.len());
    Ok(shards
        .iter()
        .map(|shard| {
            let mut rng = rng_for(seed, &[TAG_ATTACH, shard.client_id as u64]);
            let mut picked = index::sample(&mut rng, shared.len(), m).into_vec();
            picked.sort_unstable();
            let mut examples = shard.examples.clone();
            examples.extend(picked.into_iter().map(|i| shared[i].clone()));
            ClientShard {
                client_id: shard.client_id,
                examples,
            }
        })
        .collect())
}

/// Modified CausalFedGSD: initialize, then train centrally on the whole
/// reserved pool for `epochs` epochs without a proximal term.
pub fn warm_start(arch: Arch, shared: &[Sample], epochs: usize, train_cfg: &TrainConfig, seed: u64) -> Result<Params> {
    if shared.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let cfg = TrainConfig {
        local_epochs: epochs,
        mu: 0.0,
        anchor: None,
        ..train_cfg.clone()
    };
    let start = init(arch, seed);
    sgd_train(&start, shared, &cfg, mix(seed, &[TAG_INIT, 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureVec;
    use crate::model::loss;

    fn samples(counts: &[usize], dim: usize) -> Vec<Sample> {
        let mut out = Vec::new();
        for (label, &n) in counts.iter().enumerate() {
            for i in 0..n {
                let mut entries = vec![(label as u32, 1), (8 + (i % 7) as u32, 1)];
                entries.sort();
                out.push(Sample::new(FeatureVec { dim, entries }, label));
            }
        }
        out
    }

    #[test]
    fn reserve_thirty_percent() {
        let train = samples(&[100; 10], 16);
        let (shared, rest) = reserve_shared(&train, 0.3, 1).unwrap();
        assert_eq!(shared.len(), 300);
        assert_eq!(rest.len(), 700);
        for c in 0..10 {
            assert_eq!(shared.iter().filter(|s| s.label == c).count(), 30);
        }
        assert_eq!(reserve_shared(&train, 0.3, 1).unwrap(), (shared, rest));
    }

    #[test]
    fn reserve_ceiling_keeps_one_per_class() {
        let train = samples(&[1; 10], 16);
        let (shared, rest) = reserve_shared(&train, 0.001, 0).unwrap();
        assert_eq!(shared.len(), 10);
        assert!(rest.is_empty());
        assert!(reserve_shared(&train, 1.0, 0).is_err());
    }

    #[test]
    fn attach_sizes_and_independence() {
        let shared = samples(&[30; 10], 16);
        let shards: Vec<_> = (0..3)
            .map(|client_id| ClientShard {
                client_id,
                examples: samples(&[2], 16),
            })
            .collect();
        let out = attach_shared_samples(&shards, &shared, 0.05, 9).unwrap();
        for s in &out {
            assert_eq!(s.n(), 2 + 15);
        }
        assert_ne!(out[0].examples[2..], out[1].examples[2..]);

        let all = attach_shared_samples(&shards, &shared, 1.0, 9).unwrap();
        assert!(all.iter().all(|s| s.n() == 2 + 300));
    }

    #[test]
    fn warm_start_properties() {
        let arch = Arch::Linear { dim: 16, k: 3 };
        let shared = samples(&[40, 20, 10], 16);
        let frozen = TrainConfig {
            learning_rate: 0.0,
            ..TrainConfig::default()
        };
        assert_eq!(warm_start(arch, &shared, 5, &frozen, 3).unwrap(), init(arch, 3));

        let cfg = TrainConfig::default();
        let warmed = warm_start(arch, &shared, 5, &cfg, 3).unwrap();
        let eval_cfg = TrainConfig { mu: 0.0, ..cfg.clone() };
        assert!(loss(&warmed, &shared, &eval_cfg).unwrap() < loss(&init(arch, 3), &shared, &eval_cfg).unwrap());
        assert_eq!(warmed, warm_start(arch, &shared, 5, &cfg, 3).unwrap());
        assert!(warm_start(arch, &[], 5, &cfg, 3).is_err());
    }
}
