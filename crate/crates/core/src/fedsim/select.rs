use rand::seq::index;

use crate::rng::{rng_for, TAG_SELECT};

use super::ceil_share;

/// `ceil(c * N)`, at least one.
pub fn clients_per_round(n_clients: usize, fraction: f64) -> usize {
    ceil_share(fraction, n_clients).clamp(1, n_clients)
}

/// Uniform draw without replacement from a stream keyed by
/// `(seed, round)`; returned sorted ascending.
pub fn select_clients(n_clients: usize, fraction: f64, round: usize, seed: u64) -> Vec<usize> {
    let m = clients_per_round(n_clients, fraction);
    let mut rng = rng_for(seed, &[TAG_SELECT, round as u64]);
    let mut ids = index::sample(&mut rng, n_clients, m).into_vec();
    ids.sort_unstable();
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_fractions() {
        assert_eq!(select_clients(100, 0.10, 1, 0).len(), 10);
        assert_eq!(select_clients(100, 0.30, 1, 0).len(), 30);
        assert_eq!(select_clients(100, 0.50, 1, 0).len(), 50);
        assert_eq!(select_clients(7, 1.0, 3, 3), (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn sorted_distinct_and_deterministic() {
        let a = select_clients(100, 0.3, 4, 11);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert!(a.iter().all(|&i| i < 100));
        assert_eq!(a, select_clients(100, 0.3, 4, 11));
        assert_ne!(a, select_clients(100, 0.3, 5, 11));
    }

    #[test]
    fn roughly_uniform_over_rounds() {
        let mut hits = [0usize; 20];
        for r in 0..2000 {
            for i in select_clients(20, 0.25, r, 1) {
                hits[i] += 1;
            }
        }
        // Expected 500 each, sd ~ 19.4.
        assert!(hits.iter().all(|&h| (h as f64 - 500.0).abs() < 80.0), "{hits:?}");
    }
}
