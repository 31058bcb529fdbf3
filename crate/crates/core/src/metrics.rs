//! Confusion matrices and support-weighted precision/recall/F1.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[truth][pred]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    k: usize,
    counts: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn new(k: usize) -> Self {
        ConfusionMatrix {
            k,
            counts: vec![0; k * k],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, truth: usize, pred: usize) -> u64 {
        self.counts[truth * self.k + pred]
    }

    pub fn add(&mut self, truth: usize, pred: usize) {
        self.counts[truth * self.k + pred] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|c| self.get(c, c)).sum()
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let k = rows.len();
        let mut cm = ConfusionMatrix::new(k);
        for (t, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), k, "confusion matrix must be square");
            for (p, &v) in row.iter().enumerate() {
                cm.counts[t * k + p] = v;
            }
        }
        cm
    }
}

impl AddAssign<&ConfusionMatrix> for ConfusionMatrix {
    fn add_assign(&mut self, rhs: &ConfusionMatrix) {
        assert_eq!(self.k, rhs.k);
        for (a, b) in self.counts.iter_mut().zip(&rhs.counts) {
            *a += b;
        }
    }
}

/// Tallies `(truth, pred)` pairs over `k` classes.
pub fn confusion(preds: &[usize], truths: &[usize], k: usize) -> Result<ConfusionMatrix> {
    if preds.len() != truths.len() {
        return Err(Error::DimensionMismatch {
            expected: truths.len(),
            actual: preds.len(),
        });
    }
    if preds.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut cm = ConfusionMatrix::new(k);
    for (&p, &t) in preds.iter().zip(truths) {
        for label in [p, t] {
            if label >= k {
                return Err(Error::LabelOutOfRange { label, k });
            }
        }
        cm.add(t, p);
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Headline numbers logged every round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub precision: f64,
    pub recall: f64,
    pub f1_weighted: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    #[serde(rename = "f1_weighted")]
    pub f1: f64,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroMetrics,
    /// Number of per-class precision/recall values defined as 0 because
    /// their denominator was 0.
    pub zero_division: u32,
}

impl MetricsReport {
    pub fn summary(&self) -> Summary {
        Summary {
            precision: self.precision,
            recall: self.recall,
            f1_weighted: self.f1,
            accuracy: self.accuracy,
        }
    }
}

fn ratio(num: u64, den: u64, zero_division: &mut u32) -> f64 {
    if den == 0 {
        *zero_division += 1;
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class and support-weighted precision, recall and F1.
pub fn report(cm: &ConfusionMatrix) -> Result<MetricsReport> {
    let k = cm.k();
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyBatch);
    }
    let mut zero_division = 0;
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.get(c, c);
            let support: u64 = (0..k).map(|p| cm.get(c, p)).sum();
            let predicted: u64 = (0..k).map(|t| cm.get(t, c)).sum();
            let precision = ratio(tp, predicted, &mut zero_division);
            let recall = ratio(tp, support, &mut zero_division);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();

    let weighted = |f: fn(&ClassMetrics) -> f64| -> f64 {
        per_class
            .iter()
            .map(|m| m.support as f64 / total as f64 * f(m))
            .sum()
    };
    let mean = |f: fn(&ClassMetrics) -> f64| -> f64 {
        per_class.iter().map(f).sum::<f64>() / k as f64
    };

    Ok(MetricsReport {
        precision: weighted(|m| m.precision),
        recall: weighted(|m| m.recall),
        f1: weighted(|m| m.f1),
        accuracy: cm.trace() as f64 / total as f64,
        macro_avg: MacroMetrics {
            precision: mean(|m| m.precision),
            recall: mean(|m| m.recall),
            f1: mean(|m| m.f1),
        },
        per_class,
        zero_division,
    })
}

/// Formats a unit-interval metric as a percentage with two decimals.
pub fn percent(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_for_perfect_predictions() {
        let labels = [0, 1, 2, 2, 1];
        let cm = confusion(&labels, &labels, 3).unwrap();
        for t in 0..3 {
            for p in 0..3 {
                assert_eq!(cm.get(t, p) > 0, t == p);
            }
        }
        let r = report(&cm).unwrap();
        assert_eq!((r.precision, r.recall, r.f1, r.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn direct_tally() {
        let cm = confusion(&[0, 1], &[1, 1], 2).unwrap();
        assert_eq!(cm.get(1, 0), 1);
        assert_eq!(cm.get(1, 1), 1);
        assert_eq!(cm.get(0, 0) + cm.get(0, 1), 0);
    }

    #[test]
    fn errors() {
        assert!(confusion(&[], &[], 2).is_err());
        assert!(confusion(&[0], &[0, 1], 2).is_err());
        assert!(confusion(&[2], &[0], 2).is_err());
        assert!(report(&ConfusionMatrix::new(3)).is_err());
    }

    #[test]
    fn two_class_hand_case() {
        let r = report(&ConfusionMatrix::from_rows(&[vec![3, 1], vec![2, 4]])).unwrap();
        assert!((r.precision - 0.72).abs() < 1e-12);
        assert!((r.recall - 0.70).abs() < 1e-12);
        let f0 = 2.0 * 0.6 * 0.75 / 1.35;
        let f1 = 2.0 * 0.8 * (2.0 / 3.0) / (0.8 + 2.0 / 3.0);
        assert!((r.f1 - (0.4 * f0 + 0.6 * f1)).abs() < 1e-12);
        assert!((r.f1 - 0.70303).abs() < 1e-5);
    }

    #[test]
    fn single_predicted_class() {
        let truths: Vec<usize> = (0..10).flat_map(|c| std::iter::repeat_n(c, 5)).collect();
        let preds = vec![3; truths.len()];
        let r = report(&confusion(&preds, &truths, 10).unwrap()).unwrap();
        assert!((r.recall - 0.1).abs() < 1e-12);
        assert!((r.accuracy - 0.1).abs() < 1e-12);
        // Nine classes never predicted.
        assert_eq!(r.zero_division, 9);
    }

    #[test]
    fn confusion_matrices_merge() {
        let mut a = confusion(&[0, 1], &[0, 0], 2).unwrap();
        let b = confusion(&[1], &[1], 2).unwrap();
        a += &b;
        assert_eq!(a, confusion(&[0, 1, 1], &[0, 0, 1], 2).unwrap());
    }

    fn pairs() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (1usize..60).prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..5, n),
                proptest::collection::vec(0usize..5, n),
            )
        })
    }

    proptest! {
        #[test]
        fn weighted_recall_is_accuracy((preds, truths) in pairs()) {
            let r = report(&confusion(&preds, &truths, 5).unwrap()).unwrap();
            prop_assert!((r.recall - r.accuracy).abs() < 1e-12);
        }

        #[test]
        fn invariant_under_label_permutation((preds, truths) in pairs(), perm in Just(vec![0usize,1,2,3,4]).prop_shuffle()) {
            let a = report(&confusion(&preds, &truths, 5).unwrap()).unwrap();
            let p2: Vec<_> = preds.iter().map(|&x| perm[x]).collect();
            let t2: Vec<_> = truths.iter().map(|&x| perm[x]).collect();
            let b = report(&confusion(&p2, &t2, 5).unwrap()).unwrap();
            prop_assert!((a.precision - b.precision).abs() < 1e-12);
            prop_assert!((a.f1 - b.f1).abs() < 1e-12);
            prop_assert_eq!(a.accuracy, b.accuracy);
        }
    }

    #[test]
    fn percent_format() {
        assert_eq!(percent(0.63349), "63.35");
        assert_eq!(percent(1.0), "100.00");
    }
}
