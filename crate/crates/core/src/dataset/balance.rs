use rand::seq::{index, SliceRandom};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, TAG_RESAMPLE};

use super::Labeled;

pub fn class_counts<T: Labeled>(xs: &[T], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for x in xs {
        counts[x.label()] += 1;
    }
    counts
}

fn checked_counts<T: Labeled>(xs: &[T], k: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0; k];
    for x in xs {
        let label = x.label();
        if label >= k {
            return Err(Error::LabelOutOfRange { label, k });
        }
        counts[label] += 1;
    }
    match counts.iter().position(|&c| c == 0) {
        Some(class) => Err(Error::MissingClass { class }),
        None => Ok(counts),
    }
}

/// Re-samples `train` to exactly `floor(|train| / k)` examples per class.
///
/// Majority classes are down-sampled without replacement. Minority classes
/// keep every original once and are topped up by sampling with replacement.
pub fn resample<T: Labeled + Clone>(train: &[T], k: usize, seed: u64) -> Result<Vec<T>> {
    let counts = checked_counts(train, k)?;
    let target = train.len() / k;
    if target == 0 {
        return Err(Error::TooFewExamples {
            needed: k,
            actual: train.len(),
        });
    }

    let mut by_class: Vec<Vec<&T>> = vec![Vec::new(); k];
    for x in train {
        by_class[x.label()].push(x);
    }

    let mut rng = rng_for(seed, &[TAG_RESAMPLE]);
    let mut out = Vec::with_capacity(target * k);
    for (members, &n) in by_class.iter().zip(&counts) {
        if n >= target {
            let mut picked = index::sample(&mut rng, n, target).into_vec();
            picked.sort_unstable();
            out.extend(picked.into_iter().map(|i| members[i].clone()));
        } else {
            out.extend(members.iter().map(|&x| x.clone()));
            out.extend((n..target).map(|_| members[rng.gen_range(0..n)].clone()));
        }
    }
    out.shuffle(&mut rng);
    Ok(out)
}

/// Per-class loss multipliers, `w_c = n / (k * n_c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassWeights(pub Vec<f64>);

impl ClassWeights {
    pub fn uniform(k: usize) -> Self {
        ClassWeights(vec![1.0; k])
    }

    pub fn get(&self, class: usize) -> f64 {
        self.0[class]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Inverse-frequency weights normalized to mean one over examples.
pub fn class_weights<T: Labeled>(train: &[T], k: usize) -> Result<ClassWeights> {
    let counts = checked_counts(train, k)?;
    let n = train.len() as f64;
    Ok(ClassWeights(
        counts.iter().map(|&c| n / (k as f64 * c as f64)).collect(),
    ))
}
