//! Forward pass, weighted cross-entropy with proximal term, and the
//! analytic gradient for both architectures.

use crate::dataset::FeatureVec;
use crate::error::{Error, Result};

use super::params::{Arch, GradVec, Params};
use super::{Sample, TrainConfig};

/// Logits and (for the MLP) hidden pre-activations of one example.
struct Activations {
    hidden: Vec<f64>,
    logits: Vec<f64>,
}

fn activations(params: &Params, x: &FeatureVec) -> Activations {
    let flat = &params.flat;
    let layout = params.arch.layout();
    match params.arch {
        Arch::Linear { dim, k } => {
            let logits = (0..k)
                .map(|c| {
                    let row = &flat[c * dim..(c + 1) * dim];
                    x.entries
                        .iter()
                        .fold(flat[layout.b1 + c], |z, &(j, n)| z + n as f64 * row[j as usize])
                })
                .collect();
            Activations {
                hidden: Vec::new(),
                logits,
            }
        }
        Arch::Mlp { dim, hidden, k } => {
            let pre: Vec<f64> = (0..hidden)
                .map(|h| {
                    let row = &flat[h * dim..(h + 1) * dim];
                    x.entries
                        .iter()
                        .fold(flat[layout.b1 + h], |z, &(j, n)| z + n as f64 * row[j as usize])
                })
                .collect();
            let logits = (0..k)
                .map(|c| {
                    let row = &flat[layout.w2 + c * hidden..layout.w2 + (c + 1) * hidden];
                    row.iter()
                        .zip(&pre)
                        .fold(flat[layout.b2 + c], |z, (w, &a)| z + w * a.max(0.0))
                })
                .collect();
            Activations { hidden: pre, logits }
        }
    }
}

/// Max-shifted softmax; returns probabilities and log-sum-exp.
fn softmax(logits: &[f64]) -> (Vec<f64>, f64) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - m).exp()).collect();
    let sum: f64 = exps.iter().sum();
    (exps.into_iter().map(|e| e / sum).collect(), m + sum.ln())
}

fn check_input(arch: &Arch, x: &FeatureVec) -> Result<()> {
    if x.dim != arch.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: arch.input_dim(),
            actual: x.dim,
        });
    }
    Ok(())
}

/// Class probabilities for one input.
pub fn forward(params: &Params, x: &FeatureVec) -> Result<Vec<f64>> {
    check_input(&params.arch, x)?;
    Ok(softmax(&activations(params, x).logits).0)
}

/// Index of the largest logit; ties go to the lowest class.
pub fn predict(params: &Params, x: &FeatureVec) -> usize {
    let logits = activations(params, x).logits;
    let mut best = 0;
    for (c, &z) in logits.iter().enumerate() {
        if z > logits[best] {
            best = c;
        }
    }
    best
}

pub(crate) fn check_batch(params: &Params, batch: &[Sample], cfg: &TrainConfig) -> Result<()> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if cfg.mu > 0.0 {
        let anchor = cfg.anchor.as_ref().ok_or(Error::MissingAnchor)?;
        if anchor.arch != params.arch || anchor.flat.len() != params.flat.len() {
            return Err(Error::ArchMismatch);
        }
    }
    let k = params.arch.classes();
    if let Some(w) = &cfg.class_weights {
        if w.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: w.len(),
            });
        }
    }
    for s in batch {
        check_input(&params.arch, &s.x)?;
        if s.label >= k {
            return Err(Error::LabelOutOfRange { label: s.label, k });
        }
    }
    Ok(())
}

fn class_weight(cfg: &TrainConfig, label: usize) -> f64 {
    cfg.class_weights.as_ref().map_or(1.0, |w| w.get(label))
}

/// Mean weighted cross-entropy plus `(mu/2) * ||flat - anchor||^2`.
pub fn loss(params: &Params, batch: &[Sample], cfg: &TrainConfig) -> Result<f64> {
    check_batch(params, batch, cfg)?;
    let data: f64 = batch
        .iter()
        .map(|s| {
            let z = activations(params, &s.x).logits;
            let (_, lse) = softmax(&z);
            class_weight(cfg, s.label) * (lse - z[s.label])
        })
        .sum::<f64>()
        / batch.len() as f64;
    let prox = match (&cfg.anchor, cfg.mu > 0.0) {
        (Some(anchor), true) => {
            0.5 * cfg.mu
                * params
                    .flat
                    .iter()
                    .zip(&anchor.flat)
                    .map(|(w, a)| (w - a) * (w - a))
                    .sum::<f64>()
        }
        _ => 0.0,
    };
    Ok(data + prox)
}

/// Dense gradient buffer that remembers which entries were written.
pub(crate) struct GradBuffer {
    pub values: Vec<f64>,
    marked: Vec<bool>,
    pub touched: Vec<usize>,
}

impl GradBuffer {
    pub fn new(len: usize) -> Self {
        GradBuffer {
            values: vec![0.0; len],
            marked: vec![false; len],
            touched: Vec::new(),
        }
    }

    #[inline]
    fn add(&mut self, i: usize, v: f64) {
        if !self.marked[i] {
            self.marked[i] = true;
            self.touched.push(i);
        }
        self.values[i] += v;
    }

    pub fn clear(&mut self) {
        for &i in &self.touched {
            self.values[i] = 0.0;
            self.marked[i] = false;
        }
        self.touched.clear();
    }
}

/// Adds the data-term gradient of the mean weighted cross-entropy over
/// `batch` into `buf`. Inputs must already be validated.
pub(crate) fn accumulate_data_grad(
    params: &Params,
    batch: &[&Sample],
    cfg: &TrainConfig,
    buf: &mut GradBuffer,
) {
    let flat = &params.flat;
    let layout = params.arch.layout();
    let inv_n = 1.0 / batch.len() as f64;
    for s in batch {
        let act = activations(params, &s.x);
        let (mut delta, _) = softmax(&act.logits);
        delta[s.label] -= 1.0;
        let scale = class_weight(cfg, s.label) * inv_n;
        for d in &mut delta {
            *d *= scale;
        }
        match params.arch {
            Arch::Linear { dim, k } => {
                for (c, &d) in delta.iter().enumerate().take(k) {
                    for &(j, n) in &s.x.entries {
                        buf.add(c * dim + j as usize, d * n as f64);
                    }
                    buf.add(layout.b1 + c, d);
                }
            }
            Arch::Mlp { dim, hidden, k } => {
                for (c, &d) in delta.iter().enumerate().take(k) {
                    for (h, &a) in act.hidden.iter().enumerate() {
                        buf.add(layout.w2 + c * hidden + h, d * a.max(0.0));
                    }
                    buf.add(layout.b2 + c, d);
                }
                for (h, &a) in act.hidden.iter().enumerate() {
                    if a <= 0.0 {
                        continue;
                    }
                    let dh = delta
                        .iter()
                        .enumerate()
                        .fold(0.0, |acc, (c, &d)| acc + d * flat[layout.w2 + c * hidden + h]);
                    for &(j, n) in &s.x.entries {
                        buf.add(h * dim + j as usize, dh * n as f64);
                    }
                    buf.add(layout.b1 + h, dh);
                }
            }
        }
    }
}

/// Analytic gradient of [`loss`].
pub fn grad(params: &Params, batch: &[Sample], cfg: &TrainConfig) -> Result<GradVec> {
    check_batch(params, batch, cfg)?;
    let mut buf = GradBuffer::new(params.flat.len());
    let refs: Vec<&Sample> = batch.iter().collect();
    accumulate_data_grad(params, &refs, cfg, &mut buf);
    let mut flat = buf.values;
    if cfg.mu > 0.0 {
        let anchor = cfg.anchor.as_ref().expect("checked above");
        for ((g, w), a) in flat.iter_mut().zip(&params.flat).zip(&anchor.flat) {
            *g += cfg.mu * (w - a);
        }
    }
    Ok(GradVec { flat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ClassWeights;
    use crate::model::init;

    fn plain() -> TrainConfig {
        TrainConfig {
            mu: 0.0,
            ..TrainConfig::default()
        }
    }

    fn fv(dim: usize, entries: &[(u32, u32)]) -> FeatureVec {
        FeatureVec {
            dim,
            entries: entries.to_vec(),
        }
    }

    #[test]
    fn zero_params_give_uniform() {
        let p = Params::zeros(Arch::Mlp { dim: 8, hidden: 3, k: 4 });
        let probs = forward(&p, &fv(8, &[(1, 2), (5, 1)])).unwrap();
        assert!(probs.iter().all(|&q| q == 0.25));
    }

    #[test]
    fn hand_softmax() {
        let p = Params {
            arch: Arch::Linear { dim: 1, k: 2 },
            flat: vec![1.0, 0.0, 0.0, 0.0],
        };
        let probs = forward(&p, &fv(1, &[(0, 1)])).unwrap();
        let e = std::f64::consts::E;
        assert!((probs[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((probs[1] - 1.0 / (e + 1.0)).abs() < 1e-15);
        assert!((probs[0] - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn dimension_mismatch() {
        let p = Params::zeros(Arch::Linear { dim: 4, k: 2 });
        assert!(matches!(
            forward(&p, &fv(8, &[])),
            Err(Error::DimensionMismatch { expected: 4, actual: 8 })
        ));
    }

    #[test]
    fn uniform_loss_is_ln_k() {
        let p = Params::zeros(Arch::Linear { dim: 16, k: 10 });
        let batch = [Sample::new(fv(16, &[(3, 1)]), 7)];
        let l = loss(&p, &batch, &plain()).unwrap();
        assert!((l - 10f64.ln()).abs() < 1e-12);
        assert!((l - std::f64::consts::LN_10).abs() < 1e-12);
    }

    #[test]
    fn confident_prediction_has_tiny_loss() {
        let mut p = Params::zeros(Arch::Linear { dim: 2, k: 2 });
        p.flat[0] = 50.0; // class 0 weight on feature 0
        let batch = [Sample::new(fv(2, &[(0, 1)]), 0)];
        assert!(loss(&p, &batch, &plain()).unwrap() < 1e-9);
    }

    #[test]
    fn proximal_term_vanishes_at_anchor() {
        let p = init(Arch::Mlp { dim: 8, hidden: 4, k: 3 }, 2);
        let batch = [Sample::new(fv(8, &[(0, 1), (6, 2)]), 1)];
        let plain = plain();
        let prox = TrainConfig {
            mu: 0.01,
            anchor: Some(p.clone()),
            ..TrainConfig::default()
        };
        assert_eq!(loss(&p, &batch, &plain).unwrap(), loss(&p, &batch, &prox).unwrap());
        assert_eq!(grad(&p, &batch, &plain).unwrap(), grad(&p, &batch, &prox).unwrap());
    }

    #[test]
    fn mu_without_anchor_errors() {
        let p = Params::zeros(Arch::Linear { dim: 2, k: 2 });
        let batch = [Sample::new(fv(2, &[]), 0)];
        let cfg = TrainConfig {
            mu: 0.5,
            anchor: None,
            ..TrainConfig::default()
        };
        assert!(matches!(loss(&p, &batch, &cfg), Err(Error::MissingAnchor)));
        assert!(matches!(grad(&p, &batch, &cfg), Err(Error::MissingAnchor)));
        assert!(matches!(loss(&p, &[], &plain()), Err(Error::EmptyBatch)));
    }

    #[test]
    fn doubling_mu_doubles_proximal_gradient() {
        let p = init(Arch::Linear { dim: 8, k: 3 }, 5);
        let anchor = init(Arch::Linear { dim: 8, k: 3 }, 6);
        let batch = [Sample::new(fv(8, &[(1, 1), (2, 3)]), 2)];
        let cfg = |mu| TrainConfig {
            mu,
            anchor: Some(anchor.clone()),
            ..TrainConfig::default()
        };
        let g0 = grad(&p, &batch, &cfg(0.0)).unwrap();
        let g1 = grad(&p, &batch, &cfg(1.0)).unwrap();
        let g2 = grad(&p, &batch, &cfg(2.0)).unwrap();
        for i in 0..g0.flat.len() {
            let d1 = g1.flat[i] - g0.flat[i];
            let d2 = g2.flat[i] - g0.flat[i];
            assert!((d2 - 2.0 * d1).abs() < 1e-12, "entry {i}");
        }
    }

    #[test]
    fn unit_weights_match_plain_cross_entropy() {
        let arch = Arch::Linear { dim: 8, k: 4 };
        for seed in 0..20 {
            let p = init(arch, seed);
            let batch: Vec<Sample> = (0..5)
                .map(|i| Sample::new(fv(8, &[((i * 3 % 8) as u32, 1), (7, 2)]), i % 4))
                .collect();
            let weighted = TrainConfig {
                class_weights: Some(ClassWeights::uniform(4)),
                ..plain()
            };
            let got = loss(&p, &batch, &weighted).unwrap();
            // Oracle: -ln(p_y) from forward probabilities.
            let want = batch
                .iter()
                .map(|s| -forward(&p, &s.x).unwrap()[s.label].ln())
                .sum::<f64>()
                / batch.len() as f64;
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn argmax_invariant_under_uniform_bias_shift() {
        let arch = Arch::Linear { dim: 8, k: 5 };
        let p = init(arch, 3);
        let mut shifted = p.clone();
        let b1 = arch.layout().b1;
        for v in &mut shifted.flat[b1..] {
            *v += 3.5;
        }
        for j in 0..8 {
            let x = fv(8, &[(j, 1)]);
            assert_eq!(predict(&p, &x), predict(&shifted, &x));
        }
    }
}
