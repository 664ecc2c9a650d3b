//! Confusion matrices, per-class and averaged metrics, and pairwise
//! accuracy as a proxy for concept overlap between two classes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::PredictionSet;

/// Rows are gold labels, columns predicted labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    labels: Vec<usize>,
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(labels: Vec<usize>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    /// Tallies (gold, predicted) pairs over an explicit label space.
    pub fn from_pairs(labels: Vec<usize>, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = ConfusionMatrix::zeros(labels);
        for (g, p) in pairs {
            let gi = m.position(g)?;
            let pi = m.position(p)?;
            m.counts[gi][pi] += 1;
        }
        Ok(m)
    }

    /// Builds a matrix from explicit counts, rows = gold.
    pub fn from_counts(labels: Vec<usize>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = labels.len();
        if counts.len() != n || counts.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("confusion counts must be square over the label space".into()));
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    fn position(&self, label: usize) -> Result<usize> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .ok_or(Error::LabelOutOfSpace {
                label,
                size: self.labels.len(),
            })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, gold: usize, predicted: usize) -> Result<u64> {
        Ok(self.counts[self.position(gold)?][self.position(predicted)?])
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Delimited export: header `gold,<label>...`, one row per gold label.
    pub fn to_csv(&self, name: impl Fn(usize) -> String) -> String {
        let mut out = String::from("gold");
        for &l in &self.labels {
            let _ = write!(out, ",{}", name(l));
        }
        out.push('\n');
        for (i, row) in self.counts.iter().enumerate() {
            out.push_str(&name(self.labels[i]));
            for c in row {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path, name: impl Fn(usize) -> String) -> Result<()> {
        std::fs::write(path, self.to_csv(name)).map_err(|e| Error::io(path, e))
    }
}

pub fn confusion(predictions: &PredictionSet) -> Result<ConfusionMatrix> {
    ConfusionMatrix::from_pairs(
        predictions.label_space.labels(),
        predictions.rows().iter().map(|r| (r.gold, r.predicted)),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub predicted: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class: Vec<ClassMetrics>,
    pub accuracy: f64,
    /// Support-weighted mean of per-class F1.
    pub weighted_f1: f64,
    /// Unweighted mean of F1 over classes that occur as gold or predicted.
    pub macro_f1: f64,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 per class with 0 for empty denominators, plus
/// accuracy and weighted and macro F1.
pub fn metrics(matrix: &ConfusionMatrix) -> Result<EvalReport> {
    let total = matrix.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no examples".into()));
    }
    let n = matrix.labels.len();
    let mut per_class = Vec::with_capacity(n);
    let mut trace = 0u64;
    for i in 0..n {
        let tp = matrix.counts[i][i];
        trace += tp;
        let support: u64 = matrix.counts[i].iter().sum();
        let predicted: u64 = matrix.counts.iter().map(|r| r[i]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.push(ClassMetrics {
            label: matrix.labels[i],
            precision,
            recall,
            f1,
            support,
            predicted,
        });
    }
    let weighted_f1 = per_class
        .iter()
        .map(|c| c.support as f64 * c.f1)
        .sum::<f64>()
        / total as f64;
    let active: Vec<&ClassMetrics> = per_class
        .iter()
        .filter(|c| c.support > 0 || c.predicted > 0)
        .collect();
    let macro_f1 = active.iter().map(|c| c.f1).sum::<f64>() / active.len() as f64;
    Ok(EvalReport {
        per_class,
        accuracy: ratio(trace, total),
        weighted_f1,
        macro_f1,
        total,
    })
}

impl EvalReport {
    /// Markdown table of the classes that occur, followed by aggregates.
    pub fn to_markdown(&self, name: impl Fn(usize) -> String) -> String {
        let mut out = String::from("| class | precision | recall | f1 | support |\n|---|---:|---:|---:|---:|\n");
        for c in self.per_class.iter().filter(|c| c.support > 0 || c.predicted > 0) {
            let _ = writeln!(
                out,
                "| {} | {:.4} | {:.4} | {:.4} | {} |",
                name(c.label),
                c.precision,
                c.recall,
                c.f1,
                c.support
            );
        }
        let _ = writeln!(
            out,
            "\naccuracy {:.4} · weighted F1 {:.4} · macro F1 {:.4} · n = {}",
            self.accuracy, self.weighted_f1, self.macro_f1, self.total
        );
        out
    }
}

/// Accuracy restricted to gold and predicted labels in `{a, b}`:
/// `(aa + bb) / (aa + ab + ba + bb)`.
pub fn pairwise_accuracy(matrix: &ConfusionMatrix, a: usize, b: usize) -> Result<f64> {
    if a == b {
        return Err(Error::Invalid("pairwise accuracy needs two distinct labels".into()));
    }
    let aa = matrix.get(a, a)?;
    let ab = matrix.get(a, b)?;
    let ba = matrix.get(b, a)?;
    let bb = matrix.get(b, b)?;
    let den = aa + ab + ba + bb;
    if den == 0 {
        return Err(Error::EmptyPair(a, b));
    }
    Ok((aa + bb) as f64 / den as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseEntry {
    pub a: usize,
    pub b: usize,
    /// `None` when the pair has no examples.
    pub accuracy: Option<f64>,
}

/// Pairwise accuracy for every unordered pair in the label space.
pub fn pairwise_table(matrix: &ConfusionMatrix) -> Vec<PairwiseEntry> {
    let labels = matrix.labels();
    let mut out = Vec::new();
    for (i, &a) in labels.iter().enumerate() {
        for &b in &labels[i + 1..] {
            out.push(PairwiseEntry {
                a,
                b,
                accuracy: pairwise_accuracy(matrix, a, b).ok(),
            });
        }
    }
    out
}

/// Reading of a pairwise accuracy value as an overlap signal.
pub fn interpret_pairwise(accuracy: f64) -> &'static str {
    if accuracy >= 0.9 {
        "distinguishable: little concept overlap"
    } else if accuracy >= 0.7 {
        "partly confusable: moderate concept overlap"
    } else {
        "near chance: heavy concept overlap"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn direct_tally() {
        let m = ConfusionMatrix::from_pairs(vec![0, 1], [(0, 0), (0, 1), (1, 1)]).unwrap();
        assert_eq!(m.counts(), &[vec![1, 1], vec![0, 1]]);
        assert!(ConfusionMatrix::from_pairs(vec![0, 1], [(0, 2)]).is_err());
        let empty = ConfusionMatrix::from_pairs(vec![0, 1, 2], []).unwrap();
        assert_eq!(empty.total(), 0);
        assert!(metrics(&empty).is_err());
    }

    #[test]
    fn diagonal_is_perfect() {
        let m = ConfusionMatrix::from_pairs(vec![0, 1, 2], [(0, 0), (1, 1), (2, 2), (2, 2)]).unwrap();
        let r = metrics(&m).unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.macro_f1, 1.0);
        assert_eq!(r.weighted_f1, 1.0);
    }

    #[test]
    fn three_class_by_hand() {
        let m = ConfusionMatrix::from_counts(
            vec![0, 1, 2],
            vec![vec![5, 1, 0], vec![2, 3, 0], vec![0, 0, 4]],
        )
        .unwrap();
        let r = metrics(&m).unwrap();
        let c0 = &r.per_class[0];
        assert!((c0.precision - 5.0 / 7.0).abs() < 1e-15);
        assert!((c0.recall - 5.0 / 6.0).abs() < 1e-15);
        // 2 * (5/7 * 5/6) / (5/7 + 5/6) = 10/13
        assert!((c0.f1 - 10.0 / 13.0).abs() < 1e-15);
        assert!((c0.f1 - 0.7692).abs() < 1e-4);
        assert!((r.accuracy - 12.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn zero_support_has_zero_weight() {
        // Class 2 is predicted once but never gold.
        let m = ConfusionMatrix::from_counts(
            vec![0, 1, 2],
            vec![vec![3, 0, 1], vec![0, 4, 0], vec![0, 0, 0]],
        )
        .unwrap();
        let r = metrics(&m).unwrap();
        assert_eq!(r.per_class[2].support, 0);
        assert_eq!(r.per_class[2].f1, 0.0);
        let expected = (4.0 * r.per_class[0].f1 + 4.0 * r.per_class[1].f1) / 8.0;
        assert!((r.weighted_f1 - expected).abs() < 1e-15);
        assert!((r.macro_f1 - (r.per_class[0].f1 + r.per_class[1].f1) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn pairwise_examples() {
        let ident = ConfusionMatrix::from_counts(vec![0, 1, 2], vec![vec![4, 0, 0], vec![0, 6, 0], vec![0, 0, 2]]).unwrap();
        assert_eq!(pairwise_accuracy(&ident, 0, 2).unwrap(), 1.0);

        let even = ConfusionMatrix::from_counts(vec![0, 1], vec![vec![3, 3], vec![3, 3]]).unwrap();
        assert_eq!(pairwise_accuracy(&even, 0, 1).unwrap(), 0.5);

        let m = ConfusionMatrix::from_counts(vec![0, 1], vec![vec![8, 2], vec![3, 7]]).unwrap();
        assert_eq!(pairwise_accuracy(&m, 0, 1).unwrap(), 0.75);
        assert_eq!(pairwise_accuracy(&m, 1, 0).unwrap(), 0.75);

        let sparse = ConfusionMatrix::from_counts(vec![0, 1, 2], vec![vec![4, 0, 0], vec![0, 0, 0], vec![0, 0, 0]]).unwrap();
        assert!(matches!(pairwise_accuracy(&sparse, 1, 2), Err(Error::EmptyPair(1, 2))));
        assert!(pairwise_accuracy(&sparse, 1, 1).is_err());
    }

    #[test]
    fn csv_export() {
        let m = ConfusionMatrix::from_counts(vec![0, 1], vec![vec![8, 2], vec![3, 7]]).unwrap();
        assert_eq!(m.to_csv(|l| l.to_string()), "gold,0,1\n0,8,2\n1,3,7\n");
    }

    proptest! {
        #[test]
        fn permutation_and_symmetry(
            pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60),
            perm in Just([0usize, 1, 2, 3]).prop_shuffle(),
        ) {
            let m = ConfusionMatrix::from_pairs(vec![0, 1, 2, 3], pairs.iter().copied()).unwrap();
            let relabeled = ConfusionMatrix::from_pairs(
                vec![0, 1, 2, 3],
                pairs.iter().map(|&(g, p)| (perm[g], perm[p])),
            ).unwrap();
            let r = metrics(&m).unwrap();
            let s = metrics(&relabeled).unwrap();
            prop_assert!((r.accuracy - s.accuracy).abs() < 1e-12);
            prop_assert!((r.weighted_f1 - s.weighted_f1).abs() < 1e-12);
            prop_assert!((r.macro_f1 - s.macro_f1).abs() < 1e-12);
            for c in &r.per_class {
                let d = &s.per_class[perm[c.label]];
                prop_assert!((c.f1 - d.f1).abs() < 1e-12);
                prop_assert_eq!(c.support, d.support);
            }
            for a in 0..4 {
                for b in (a + 1)..4 {
                    let x = pairwise_accuracy(&m, a, b).ok();
                    let y = pairwise_accuracy(&m, b, a).ok();
                    prop_assert_eq!(x, y);
                }
            }
        }

        #[test]
        fn equal_supports_make_weighted_equal_macro(
            preds in prop::collection::vec(0usize..3, 12),
        ) {
            // Gold labels 0,1,2 four times each.
            let pairs: Vec<(usize, usize)> = preds.iter().enumerate().map(|(i, &p)| (i % 3, p)).collect();
            let m = ConfusionMatrix::from_pairs(vec![0, 1, 2], pairs).unwrap();
            let r = metrics(&m).unwrap();
            prop_assert!((r.weighted_f1 - r.macro_f1).abs() < 1e-12);
        }
    }
}
