use std::collections::BTreeSet;
use std::ops::Range;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::model::Sample;
use crate::rng::{rng_for, TAG_PARTITION};

use super::{ClientShard, PartitionMode, PartitionPlan};

pub fn partition(train: &[Sample], plan: &PartitionPlan, seed: u64) -> Result<Vec<ClientShard>> {
    plan.validate()?;
    match plan.mode {
        PartitionMode::Iid => partition_iid(train, plan.n_clients, seed),
        PartitionMode::NonIid => partition_noniid(train, plan, seed),
    }
}

/// Shuffles each class and deals its examples round-robin across clients.
/// The dealer position carries over between classes, so shard sizes differ
/// by at most one.
pub fn partition_iid(train: &[Sample], n_clients: usize, seed: u64) -> Result<Vec<ClientShard>> {
    if n_clients == 0 {
        return Err(Error::Config("n_clients must be positive".into()));
    }
    if train.len() < n_clients {
        return Err(Error::TooFewExamples {
            needed: n_clients,
            actual: train.len(),
        });
    }
    let k = train.iter().map(|s| s.label + 1).max().unwrap_or(0);
    let mut by_class: Vec<Vec<&Sample>> = vec![Vec::new(); k];
    for s in train {
        by_class[s.label].push(s);
    }

    let mut rng = rng_for(seed, &[TAG_PARTITION]);
    let mut shards: Vec<ClientShard> = (0..n_clients)
        .map(|client_id| ClientShard {
            client_id,
            examples: Vec::with_capacity(train.len() / n_clients + 1),
        })
        .collect();
    let mut next = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for s in members.iter() {
            shards[next].examples.push((*s).clone());
            next = (next + 1) % n_clients;
        }
    }
    Ok(shards)
}

fn distinct_labels(sorted: &[&Sample], bin: &Range<usize>) -> usize {
    sorted[bin.clone()]
        .iter()
        .map(|s| s.label)
        .collect::<BTreeSet<_>>()
        .len()
}

/// Label-sorted bins dealt to clients.
///
/// Examples are stable-sorted by label and cut into `plan.bins` contiguous
/// bins (the first `len % bins` get one extra). Bin order is shuffled and
/// client `i` takes positions `i*b .. (i+1)*b`. The shuffled order is then
/// repaired so that no client holds two bins that straddle a class
/// boundary, which keeps every client at `b + 1` labels or fewer whenever
/// each class fills at least one bin.
pub fn partition_noniid(train: &[Sample], plan: &PartitionPlan, seed: u64) -> Result<Vec<ClientShard>> {
    plan.validate()?;
    let bins = plan.bins;
    let per_client = plan.bins_per_client;
    if train.len() < bins {
        return Err(Error::TooFewExamples {
            needed: bins,
            actual: train.len(),
        });
    }
    let mut sorted: Vec<&Sample> = train.iter().collect();
    sorted.sort_by_key(|s| s.label);

    let base = train.len() / bins;
    let extra = train.len() % bins;
    let mut ranges = Vec::with_capacity(bins);
    let mut start = 0;
    for b in 0..bins {
        let len = base + usize::from(b < extra);
        ranges.push(start..start + len);
        start += len;
    }
    let mixed: Vec<bool> = ranges.iter().map(|r| distinct_labels(&sorted, r) > 1).collect();

    let mut order: Vec<usize> = (0..bins).collect();
    order.shuffle(&mut rng_for(seed, &[TAG_PARTITION]));
    if per_client > 1 {
        repair_mixed_pairs(&mut order, &mixed, plan.n_clients, per_client);
    }

    Ok((0..plan.n_clients)
        .map(|client_id| ClientShard {
            client_id,
            examples: order[client_id * per_client..(client_id + 1) * per_client]
                .iter()
                .flat_map(|&b| sorted[ranges[b].clone()].iter().map(|s| (*s).clone()))
                .collect(),
        })
        .collect())
}

/// Swaps bins so each client holds at most one multi-label bin. Clients are
/// visited in id order; a surplus mixed bin goes to the next client (cyclic)
/// that holds none, in exchange for that client's first single-label bin.
fn repair_mixed_pairs(order: &mut [usize], mixed: &[bool], n_clients: usize, per_client: usize) {
    let slots = |c: usize| c * per_client..(c + 1) * per_client;
    let mixed_count = |order: &[usize], c: usize| slots(c).filter(|&p| mixed[order[p]]).count();
    for client in 0..n_clients {
        while mixed_count(order, client) > 1 {
            let from = slots(client)
                .rev()
                .find(|&p| mixed[order[p]])
                .expect("client holds a mixed bin");
            let target = (1..n_clients)
                .map(|d| (client + d) % n_clients)
                .find(|&c| mixed_count(order, c) == 0);
            let Some(target) = target else { return };
            let to = slots(target)
                .find(|&p| !mixed[order[p]])
                .expect("client without mixed bins has a pure bin");
            order.swap(from, to);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureVec;
    use std::collections::HashMap;

    fn samples(counts: &[usize]) -> Vec<Sample> {
        let mut out = Vec::new();
        for (label, &n) in counts.iter().enumerate() {
            for i in 0..n {
                out.push(Sample::new(
                    FeatureVec {
                        dim: 1 << 20,
                        entries: vec![((out.len() as u32), 1), ((1 << 19) + i as u32, 1)],
                    },
                    label,
                ));
            }
        }
        out
    }

    fn multiset(xs: impl Iterator<Item = Sample>) -> HashMap<Sample, usize> {
        let mut m = HashMap::new();
        for x in xs {
            *m.entry(x).or_insert(0) += 1;
        }
        m
    }

    #[test]
    fn iid_single_client_gets_everything() {
        let train = samples(&[5, 3]);
        let shards = partition_iid(&train, 1, 0).unwrap();
        assert_eq!(shards.len(), 1);
        assert_eq!(shards[0].n(), 8);
    }

    #[test]
    fn iid_round_robin_arithmetic() {
        let train = samples(&[100; 10]);
        for shard in partition_iid(&train, 10, 3).unwrap() {
            assert_eq!(shard.n(), 100);
            let mut per_class = [0; 10];
            for s in &shard.examples {
                per_class[s.label] += 1;
            }
            assert_eq!(per_class, [10; 10]);
        }
    }

    #[test]
    fn iid_too_few_examples() {
        assert!(matches!(
            partition_iid(&samples(&[3]), 4, 0),
            Err(Error::TooFewExamples { needed: 4, actual: 3 })
        ));
    }

    #[test]
    fn noniid_two_bins_each_and_complete() {
        let train = samples(&[900, 500, 300, 200, 150, 120, 100, 90, 80, 60]);
        let plan = PartitionPlan {
            mode: PartitionMode::NonIid,
            ..Default::default()
        };
        let shards = partition_noniid(&train, &plan, 5).unwrap();
        assert_eq!(shards.len(), 100);
        let per_bin = train.len() / 200;
        for s in &shards {
            assert!(s.n() >= 2 * per_bin && s.n() <= 2 * per_bin + 2);
            let labels: BTreeSet<_> = s.examples.iter().map(|x| x.label).collect();
            assert!(labels.len() <= 3, "client {} has {labels:?}", s.client_id);
        }
        assert_eq!(
            multiset(shards.into_iter().flat_map(|s| s.examples)),
            multiset(train.into_iter())
        );
        assert_eq!(
            partition_noniid(&samples(&[300, 100]), &PartitionPlan { mode: PartitionMode::NonIid, ..Default::default() }, 1).unwrap(),
            partition_noniid(&samples(&[300, 100]), &PartitionPlan { mode: PartitionMode::NonIid, ..Default::default() }, 1).unwrap()
        );
    }

    #[test]
    fn noniid_label_cap_holds_across_seeds() {
        let train = samples(&[700, 420, 260, 180, 140, 110, 90, 75, 65, 60]);
        let plan = PartitionPlan {
            mode: PartitionMode::NonIid,
            ..Default::default()
        };
        for seed in 0..50 {
            for s in partition_noniid(&train, &plan, seed).unwrap() {
                let labels: BTreeSet<_> = s.examples.iter().map(|x| x.label).collect();
                assert!(labels.len() <= 3, "seed {seed} client {}", s.client_id);
            }
        }
    }

    #[test]
    fn repair_moves_surplus_mixed_bin() {
        // Client 0 holds both mixed bins (0 and 1).
        let mixed = [true, true, false, false, false, false];
        let mut order = vec![0, 1, 2, 3, 4, 5];
        repair_mixed_pairs(&mut order, &mixed, 3, 2);
        assert_eq!(order, vec![0, 2, 1, 3, 4, 5]);
    }

    #[test]
    fn noniid_requires_enough_examples() {
        let plan = PartitionPlan {
            mode: PartitionMode::NonIid,
            ..Default::default()
        };
        assert!(partition_noniid(&samples(&[50, 50]), &plan, 0).is_err());
    }
}
