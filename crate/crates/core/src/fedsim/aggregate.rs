use crate::error::{Error, Result};
use crate::model::Params;

/// What a client sends back: parameters and the sample count behind them.
/// Raw examples never travel with an update.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client_id: usize,
    pub params: Params,
    pub n: usize,
}

/// Sample-weighted average `sum_i (n_i / sum_j n_j) * flat_i`, reduced in
/// ascending client-id order regardless of input order.
pub fn aggregate(updates: &[ClientUpdate]) -> Result<Params> {
    let first = updates.first().ok_or(Error::NoUpdates)?;
    let arch = first.params.arch;
    let len = first.params.flat.len();
    if updates
        .iter()
        .any(|u| u.params.arch != arch || u.params.flat.len() != len)
    {
        return Err(Error::ArchMismatch);
    }
    let total: usize = updates.iter().map(|u| u.n).sum();
    if total == 0 {
        return Err(Error::NoUpdates);
    }

    let mut ordered: Vec<&ClientUpdate> = updates.iter().collect();
    ordered.sort_by_key(|u| u.client_id);

    let mut flat = vec![0.0; len];
    for u in ordered {
        let weight = u.n as f64 / total as f64;
        for (acc, v) in flat.iter_mut().zip(&u.params.flat) {
            *acc += weight * v;
        }
    }
    Ok(Params { arch, flat })
}
