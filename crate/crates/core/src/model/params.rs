use rand::distributions::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{rng_for, TAG_INIT};

/// Classifier architecture. Both take a hashed bag-of-words of width `dim`
/// and emit `k` class logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Arch {
    Linear { dim: usize, k: usize },
    Mlp { dim: usize, hidden: usize, k: usize },
}

/// Offsets of each block inside the flat vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Layout {
    pub w1: usize,
    pub b1: usize,
    pub w2: usize,
    pub b2: usize,
    pub len: usize,
}

impl Arch {
    pub fn input_dim(&self) -> usize {
        match *self {
            Arch::Linear { dim, .. } | Arch::Mlp { dim, .. } => dim,
        }
    }

    pub fn classes(&self) -> usize {
        match *self {
            Arch::Linear { k, .. } | Arch::Mlp { k, .. } => k,
        }
    }

    /// `W1` row-major `[out][in]`, `b1`, then `W2`, `b2` for the MLP.
    pub(crate) fn layout(&self) -> Layout {
        match *self {
            Arch::Linear { dim, k } => Layout {
                w1: 0,
                b1: k * dim,
                w2: k * dim + k,
                b2: k * dim + k,
                len: k * dim + k,
            },
            Arch::Mlp { dim, hidden, k } => {
                let b1 = hidden * dim;
                let w2 = b1 + hidden;
                let b2 = w2 + k * hidden;
                Layout {
                    w1: 0,
                    b1,
                    w2,
                    b2,
                    len: b2 + k,
                }
            }
        }
    }

    pub fn num_params(&self) -> usize {
        self.layout().len
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Arch::Linear { dim, k } => dim > 0 && k > 0,
            Arch::Mlp { dim, hidden, k } => dim > 0 && hidden > 0 && k > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("architecture dimensions must be positive: {self:?}")))
        }
    }
}

/// Flattened model parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub arch: Arch,
    pub flat: Vec<f64>,
}

impl Params {
    pub fn zeros(arch: Arch) -> Self {
        Params {
            arch,
            flat: vec![0.0; arch.num_params()],
        }
    }

    /// Checks the length matches the architecture and every entry is finite.
    pub fn check(&self) -> Result<()> {
        let expected = self.arch.num_params();
        if self.flat.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.flat.len(),
            });
        }
        if let Some(i) = self.flat.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("parameter {i} is {}", self.flat[i])));
        }
        Ok(())
    }

    pub fn l2_distance(&self, other: &Params) -> f64 {
        self.flat
            .iter()
            .zip(&other.flat)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Gradient with the same layout as [`Params::flat`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradVec {
    pub flat: Vec<f64>,
}

/// Glorot-uniform weights, zero biases.
pub fn init(arch: Arch, seed: u64) -> Params {
    let mut params = Params::zeros(arch);
    let mut rng = rng_for(seed, &[TAG_INIT]);
    let layout = arch.layout();
    let mut fill = |range: std::ops::Range<usize>, fan_in: usize, fan_out: usize| {
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let dist = Uniform::new_inclusive(-a, a);
        for v in &mut params.flat[range] {
            *v = dist.sample(&mut rng);
        }
    };
    match arch {
        Arch::Linear { dim, k } => fill(layout.w1..layout.b1, dim, k),
        Arch::Mlp { dim, hidden, k } => {
            fill(layout.w1..layout.b1, dim, hidden);
            fill(layout.w2..layout.b2, hidden, k);
        }
    }
    params
}
