//! Per-class precision, recall and F1 over binned steering labels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns are predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    /// Builds a matrix from square row-major counts.
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let n = counts.len();
        if n == 0 || counts.iter().any(|r| r.len() != n) {
            return Err(Error::invalid(
                "confusion matrix must be square and non-empty",
            ));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn n_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|r| r[class]).sum()
    }
}

pub fn confusion(
    true_labels: &[usize],
    pred_labels: &[usize],
    n_classes: usize,
) -> Result<ConfusionMatrix> {
    if true_labels.len() != pred_labels.len() {
        return Err(Error::DimensionMismatch {
            expected: true_labels.len(),
            actual: pred_labels.len(),
        });
    }
    if true_labels.is_empty() {
        return Err(Error::invalid("no labels"));
    }
    if n_classes == 0 {
        return Err(Error::invalid("n_classes must be positive"));
    }
    let mut counts = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in true_labels.iter().zip(pred_labels) {
        for label in [t, p] {
            if label >= n_classes {
                return Err(Error::LabelOutOfRange { label, n_classes });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub classes: Vec<ClassStats>,
    pub accuracy: f64,
    pub macro_avg: Averages,
    pub weighted_avg: Averages,
    pub total_support: u64,
    pub confusion_matrix: ConfusionMatrix,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Classification report; empty classes score 0 instead of NaN.
pub fn report(m: &ConfusionMatrix) -> Result<ClassReport> {
    let total = m.total();
    if total == 0 {
        return Err(Error::invalid("confusion matrix has no observations"));
    }
    let n = m.n_classes();
    let classes: Vec<ClassStats> = (0..n)
        .map(|c| {
            let tp = m.counts[c][c];
            let support = m.support(c);
            let precision = ratio(tp, m.predicted(c));
            let recall = ratio(tp, support);
            ClassStats {
                precision,
                recall,
                f1: harmonic(precision, recall),
                support,
            }
        })
        .collect();

    let trace: u64 = (0..n).map(|c| m.counts[c][c]).sum();
    let avg = |weight: &dyn Fn(&ClassStats) -> f64, norm: f64| Averages {
        precision: classes.iter().map(|s| weight(s) * s.precision).sum::<f64>() / norm,
        recall: classes.iter().map(|s| weight(s) * s.recall).sum::<f64>() / norm,
        f1: classes.iter().map(|s| weight(s) * s.f1).sum::<f64>() / norm,
    };
    let macro_avg = avg(&|_| 1.0, n as f64);
    let weighted_avg = avg(&|s| s.support as f64, total as f64);

    Ok(ClassReport {
        classes,
        accuracy: ratio(trace, total),
        macro_avg,
        weighted_avg,
        total_support: total,
        confusion_matrix: m.clone(),
    })
}
