use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::corpus::{Example, NUM_CATEGORIES};
use crate::error::{Error, Result};
use crate::rng::{rng_for, TAG_SPLIT};

use super::Labeled;

/// Train/validation/test partition of a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSet {
    pub train: Vec<Example>,
    pub validation: Vec<Example>,
    pub test: Vec<Example>,
    pub split_seed: u64,
    pub by_source: bool,
}

/// Persisted next to the three split files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub by_source: bool,
    pub counts: BTreeMap<String, Vec<usize>>,
}

impl SplitSet {
    pub fn manifest(&self) -> SplitManifest {
        let counts = [
            ("train", &self.train),
            ("validation", &self.validation),
            ("test", &self.test),
        ]
        .into_iter()
        .map(|(name, xs)| (name.to_string(), super::class_counts(xs, NUM_CATEGORIES)))
        .collect();
        SplitManifest {
            seed: self.split_seed,
            by_source: self.by_source,
            counts,
        }
    }
}

fn round_share(n: usize, num: usize, den: usize) -> usize {
    (n * num + den / 2) / den
}

/// Shuffles units (examples, or source groups when `by_source`) by `seed`
/// and cuts them 80/10/10 by cumulative example count.
pub fn split(corpus: &[Example], seed: u64, by_source: bool) -> Result<SplitSet> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut units: Vec<Vec<&Example>> = if by_source {
        let mut groups: BTreeMap<&str, Vec<&Example>> = BTreeMap::new();
        for e in corpus {
            groups.entry(e.source_id.as_str()).or_default().push(e);
        }
        groups.into_values().collect()
    } else {
        corpus.iter().map(|e| vec![e]).collect()
    };
    units.shuffle(&mut rng_for(seed, &[TAG_SPLIT]));

    let n = corpus.len();
    let train_end = round_share(n, 8, 10);
    let val_end = round_share(n, 9, 10);
    let mut set = SplitSet {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        split_seed: seed,
        by_source,
    };
    let mut placed = 0;
    for unit in units {
        let dest = if placed < train_end {
            &mut set.train
        } else if placed < val_end {
            &mut set.validation
        } else {
            &mut set.test
        };
        placed += unit.len();
        dest.extend(unit.into_iter().cloned());
    }
    debug_assert!(set.train.iter().all(|e| e.label() < NUM_CATEGORIES));
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EmojiCategory;
    use std::collections::HashSet;

    fn ex(id: usize, source: &str) -> Example {
        Example {
            id: format!("e{id}"),
            source_id: source.into(),
            tokens: vec![format!("w{id}")],
            label: EmojiCategory::from_index(id % 10).unwrap(),
        }
    }

    #[test]
    fn ten_examples_cut_8_1_1() {
        let corpus: Vec<_> = (0..10).map(|i| ex(i, &format!("s{i}"))).collect();
        let s = split(&corpus, 3, false).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (8, 1, 1));
    }

    #[test]
    fn shared_source_stays_together() {
        let mut corpus: Vec<_> = (0..3).map(|i| ex(i, "same")).collect();
        corpus.extend((3..20).map(|i| ex(i, &format!("s{i}"))));
        for seed in 0..20 {
            let s = split(&corpus, seed, true).unwrap();
            let holders = [&s.train, &s.validation, &s.test]
                .iter()
                .filter(|part| part.iter().any(|e| e.source_id == "same"))
                .count();
            assert_eq!(holders, 1);
            let in_holder = [&s.train, &s.validation, &s.test]
                .iter()
                .map(|part| part.iter().filter(|e| e.source_id == "same").count())
                .max()
                .unwrap();
            assert_eq!(in_holder, 3);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let corpus: Vec<_> = (0..50).map(|i| ex(i, &format!("s{i}"))).collect();
        assert_eq!(split(&corpus, 9, false).unwrap(), split(&corpus, 9, false).unwrap());
        assert_ne!(
            split(&corpus, 9, false).unwrap().train,
            split(&corpus, 10, false).unwrap().train
        );
    }

    #[test]
    fn empty_corpus_errors() {
        assert!(matches!(split(&[], 0, true), Err(Error::EmptyCorpus)));
    }

    #[test]
    fn sizes_within_one_of_proportions() {
        for n in 1..120 {
            let corpus: Vec<_> = (0..n).map(|i| ex(i, &format!("s{i}"))).collect();
            let s = split(&corpus, n as u64, false).unwrap();
            let nf = n as f64;
            assert!((s.train.len() as f64 - 0.8 * nf).abs() <= 1.0, "n={n}");
            assert!((s.validation.len() as f64 - 0.1 * nf).abs() <= 1.0, "n={n}");
            assert!((s.test.len() as f64 - 0.1 * nf).abs() <= 1.0, "n={n}");
            let ids: HashSet<_> = s
                .train
                .iter()
                .chain(&s.validation)
                .chain(&s.test)
                .map(|e| e.id.clone())
                .collect();
            assert_eq!(ids.len(), n);
        }
    }

    #[test]
    fn manifest_counts() {
        let corpus: Vec<_> = (0..10).map(|i| ex(i, &format!("s{i}"))).collect();
        let m = split(&corpus, 1, false).unwrap().manifest();
        assert_eq!(m.counts["train"].iter().sum::<usize>(), 8);
        assert_eq!(m.counts["test"].len(), NUM_CATEGORIES);
    }
}
