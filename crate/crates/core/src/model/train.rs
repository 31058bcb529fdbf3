use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::{rng_for, TAG_SHUFFLE};

use super::network::{accumulate_data_grad, check_batch, GradBuffer};
use super::params::Params;
use super::{Sample, TrainConfig};

/// Plain minibatch SGD. Each epoch shuffles the shard with a stream keyed by
/// `(seed, epoch)`; the trailing partial batch is kept.
///
/// Returns a new parameter vector; `params` is left untouched.
pub fn sgd_train(params: &Params, shard: &[Sample], cfg: &TrainConfig, seed: u64) -> Result<Params> {
    cfg.validate()?;
    check_batch(params, shard, cfg)?;
    let mut current = params.clone();
    let mut buf = GradBuffer::new(current.flat.len());
    let anchor = cfg.anchor.as_ref().filter(|_| cfg.mu > 0.0);
    let lr = cfg.learning_rate;

    for epoch in 0..cfg.local_epochs {
        let mut order: Vec<&Sample> = shard.iter().collect();
        order.shuffle(&mut rng_for(seed, &[TAG_SHUFFLE, epoch as u64]));
        for batch in order.chunks(cfg.batch_size) {
            accumulate_data_grad(&current, batch, cfg, &mut buf);
            match anchor {
                Some(anchor) => {
                    for (i, (w, a)) in current.flat.iter_mut().zip(&anchor.flat).enumerate() {
                        let g = buf.values[i] + cfg.mu * (*w - a);
                        *w -= lr * g;
                    }
                }
                None => {
                    for &i in &buf.touched {
                        current.flat[i] -= lr * buf.values[i];
                    }
                }
            }
            buf.clear();
        }
    }
    if let Some(i) = current.flat.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!(
            "parameter {i} diverged during training (learning rate {lr})"
        )));
    }
    Ok(current)
}
