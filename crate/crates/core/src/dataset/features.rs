use serde::{Deserialize, Serialize};

/// Default hashed feature dimension.
pub const DEFAULT_DIM: usize = 4096;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

/// Sparse hashed bag-of-words. Entries are sorted by index, indices unique,
/// counts at least one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVec {
    pub dim: usize,
    pub entries: Vec<(u32, u32)>,
}

impl FeatureVec {
    pub fn total_count(&self) -> u64 {
        self.entries.iter().map(|&(_, c)| c as u64).sum()
    }
}

/// Hashes each token's UTF-8 bytes with FNV-1a and masks to `dim`.
///
/// # Panics
///
/// If `dim` is not a power of two.
pub fn featurize<S: AsRef<str>>(tokens: &[S], dim: usize) -> FeatureVec {
    assert!(dim.is_power_of_two(), "feature dim must be a power of two");
    let mask = (dim - 1) as u64;
    let mut idx: Vec<u32> = tokens
        .iter()
        .map(|t| (fnv1a64(t.as_ref().as_bytes()) & mask) as u32)
        .collect();
    idx.sort_unstable();
    let mut entries: Vec<(u32, u32)> = Vec::with_capacity(idx.len());
    for i in idx {
        match entries.last_mut() {
            Some((last, c)) if *last == i => *c += 1,
            _ => entries.push((i, 1)),
        }
    }
    FeatureVec { dim, entries }
}
