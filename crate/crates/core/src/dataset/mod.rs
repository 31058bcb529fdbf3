//! Splitting, class balancing, feature hashing and synthetic long-tail
//! corpora.

mod balance;
mod features;
mod split;
mod synth;

pub use balance::{class_counts, class_weights, resample, ClassWeights};
pub use features::{featurize, fnv1a64, FeatureVec, DEFAULT_DIM};
pub use split::{split, SplitManifest, SplitSet};
pub use synth::{synth, SyntheticSpec};

use crate::corpus::Example;

/// Anything carrying a class label in `0..k`.
pub trait Labeled {
    fn label(&self) -> usize;
}

impl Labeled for Example {
    fn label(&self) -> usize {
        self.label.index()
    }
}
