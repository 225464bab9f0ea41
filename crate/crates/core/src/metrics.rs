//! Confusion-matrix metrics with support-weighted averaging.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("nothing to evaluate")]
    EmptySplit,
    #[error("{actual} labels but {predicted} predictions")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("class {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
    pub support: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: u64,
    /// `confusion[actual][predicted]`
    pub confusion: Vec<Vec<u64>>,
    pub per_class: Vec<ClassCounts>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Correct predictions over all predictions.
    pub accuracy: f64,
    /// Support-weighted mean of per-class `(TP + TN) / total`.
    pub accuracy_tn_weighted: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl MetricsReport {
    pub fn from_predictions(
        classes: usize,
        actual: &[usize],
        predicted: &[usize],
    ) -> Result<Self, MetricsError> {
        if actual.len() != predicted.len() {
            return Err(MetricsError::LengthMismatch {
                actual: actual.len(),
                predicted: predicted.len(),
            });
        }
        if actual.is_empty() {
            return Err(MetricsError::EmptySplit);
        }
        let mut confusion = vec![vec![0u64; classes]; classes];
        for (&a, &p) in actual.iter().zip(predicted) {
            if let Some(&class) = [a, p].iter().find(|&&c| c >= classes) {
                return Err(MetricsError::ClassOutOfRange { class, classes });
            }
            confusion[a][p] += 1;
        }
        Ok(Self::from_confusion(confusion))
    }

    pub fn from_confusion(confusion: Vec<Vec<u64>>) -> Self {
        let k = confusion.len();
        let total: u64 = confusion.iter().flatten().sum();
        let per_class: Vec<ClassCounts> = (0..k)
            .map(|c| {
                let tp = confusion[c][c];
                let support: u64 = confusion[c].iter().sum();
                let predicted: u64 = confusion.iter().map(|row| row[c]).sum();
                let (fp, fn_) = (predicted - tp, support - tp);
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassCounts {
                    tp,
                    fp,
                    fn_,
                    tn: total - tp - fp - fn_,
                    support,
                    precision,
                    recall,
                    f1,
                }
            })
            .collect();
        let weighted = |f: &dyn Fn(&ClassCounts) -> f64| {
            per_class
                .iter()
                .map(|c| ratio(c.support, total) * f(c))
                .sum::<f64>()
        };
        let correct: u64 = (0..k).map(|c| confusion[c][c]).sum();
        Self {
            total,
            precision: weighted(&|c| c.precision),
            recall: weighted(&|c| c.recall),
            f1: weighted(&|c| c.f1),
            accuracy: ratio(correct, total),
            accuracy_tn_weighted: weighted(&|c| ratio(c.tp + c.tn, total)),
            confusion,
            per_class,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.confusion.len()
    }

    /// Plain-text table with one row per class and a weighted summary.
    pub fn render_table(&self, labels: &[String]) -> String {
        let name = |c: usize| labels.get(c).cloned().unwrap_or_else(|| c.to_string());
        let width = (0..self.num_classes())
            .map(|c| name(c).len())
            .max()
            .unwrap_or(5)
            .max(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>7}",
            "class", "precision", "recall", "f1", "support"
        );
        for (c, counts) in self.per_class.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}",
                name(c),
                counts.precision,
                counts.recall,
                counts.f1,
                counts.support
            );
        }
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.4}  {:>9.4}  {:>9.4}  {:>7}",
            "weighted", self.precision, self.recall, self.f1, self.total
        );
        let _ = writeln!(
            out,
            "accuracy {:.4}  (tn-weighted {:.4})",
            self.accuracy, self.accuracy_tn_weighted
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        let r = MetricsReport::from_predictions(3, &[0, 1, 2, 2], &[0, 1, 2, 2]).unwrap();
        assert_eq!(
            (r.precision, r.recall, r.f1, r.accuracy),
            (1.0, 1.0, 1.0, 1.0)
        );
    }

    #[test]
    fn lopsided_two_class_case() {
        let r = MetricsReport::from_predictions(2, &[0, 0, 0, 1], &[0, 0, 0, 0]).unwrap();
        assert_eq!(r.accuracy, 0.75);
        assert_eq!(r.recall, 0.75);
        assert_eq!(r.precision, 0.5625);
        assert_eq!(r.per_class[1].precision, 0.0);
        for c in &r.per_class {
            assert_eq!(c.tp + c.fp + c.fn_ + c.tn, 4);
        }
    }

    #[test]
    fn tn_weighted_accuracy_differs_for_three_classes() {
        let r = MetricsReport::from_predictions(3, &[0, 1, 2], &[1, 2, 0]).unwrap();
        assert_eq!(r.accuracy, 0.0);
        assert!((r.accuracy_tn_weighted - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert_eq!(
            MetricsReport::from_predictions(2, &[], &[]),
            Err(MetricsError::EmptySplit)
        );
        assert!(matches!(
            MetricsReport::from_predictions(2, &[0], &[2]),
            Err(MetricsError::ClassOutOfRange { .. })
        ));
        assert!(matches!(
            MetricsReport::from_predictions(2, &[0], &[]),
            Err(MetricsError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn table_mentions_every_class() {
        let r = MetricsReport::from_predictions(2, &[0, 1], &[0, 0]).unwrap();
        let t = r.render_table(&["alpha".into(), "beta".into()]);
        assert!(t.contains("alpha") && t.contains("beta") && t.contains("weighted"));
    }
}
