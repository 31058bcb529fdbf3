use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng as _;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::corpus::{EmojiCategory, Example, NUM_CATEGORIES};
use crate::error::{Error, Result};
use crate::rng::{rng_for, TAG_SYNTH};

/// Parameters of a synthetic long-tailed corpus. Class of rank `r` is
/// category index `r - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_examples: usize,
    pub zipf_s: f64,
    pub signature_vocab_per_class: usize,
    pub shared_vocab: usize,
    pub signal_ratio: f64,
    pub mean_length: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_examples: 20_000,
            zipf_s: 1.6,
            signature_vocab_per_class: 50,
            shared_vocab: 500,
            signal_ratio: 0.7,
            mean_length: 12.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("synthetic spec: {m}")));
        if self.n_examples == 0 {
            return bad("n_examples must be positive");
        }
        if !(self.zipf_s >= 0.0 && self.zipf_s.is_finite()) {
            return bad("zipf_s must be finite and non-negative");
        }
        if self.signature_vocab_per_class == 0 || self.shared_vocab == 0 {
            return bad("vocabulary sizes must be positive");
        }
        if !(0.0..=1.0).contains(&self.signal_ratio) {
            return bad("signal_ratio must lie in [0, 1]");
        }
        if !(self.mean_length > 0.0 && self.mean_length.is_finite()) {
            return bad("mean_length must be positive");
        }
        Ok(())
    }

    /// Zipf probabilities over the ten ranks.
    pub fn class_pmf(&self) -> Vec<f64> {
        let raw: Vec<f64> = (1..=NUM_CATEGORIES)
            .map(|r| (r as f64).powf(-self.zipf_s))
            .collect();
        let z: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / z).collect()
    }
}

/// Draws a corpus: Zipf class, Poisson length (at least one token), each
/// token from the class signature vocabulary with probability
/// `signal_ratio`, otherwise from the shared vocabulary.
pub fn synth(spec: &SyntheticSpec, seed: u64) -> Result<Vec<Example>> {
    spec.validate()?;
    let mut rng = rng_for(seed, &[TAG_SYNTH]);
    let classes = WeightedIndex::new(spec.class_pmf()).expect("positive class weights");
    let lengths = Poisson::new(spec.mean_length).expect("positive mean length");

    let width = spec.n_examples.to_string().len();
    let mut out = Vec::with_capacity(spec.n_examples);
    for i in 0..spec.n_examples {
        let class = classes.sample(&mut rng);
        let len = (lengths.sample(&mut rng) as usize).max(1);
        let tokens = (0..len)
            .map(|_| {
                if rng.gen_bool(spec.signal_ratio) {
                    format!("c{class}s{}", rng.gen_range(0..spec.signature_vocab_per_class))
                } else {
                    format!("w{}", rng.gen_range(0..spec.shared_vocab))
                }
            })
            .collect();
        let id = format!("syn{i:0width$}");
        out.push(Example {
            source_id: id.clone(),
            id,
            tokens,
            label: EmojiCategory::from_index(class).expect("class < 10"),
        });
    }
    Ok(out)
}
