//! k-nearest-neighbor classification and agreement metrics.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Accuracy, kappa and the confusion matrix of a prediction run.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub overall_accuracy: f64,
    pub kappa: f64,
    /// `confusion[t][p]` counts truth class `t+1` predicted as `p+1`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class_accuracy: Vec<f64>,
}

/// Majority vote among the `k` nearest training samples by Euclidean
/// distance. Distance ties break toward the smaller training index, vote
/// ties toward the smaller class id.
pub fn knn_classify(
    train_x: &Matrix,
    train_y: &[usize],
    test_x: &Matrix,
    k: usize,
) -> Result<Vec<usize>> {
    let n = train_x.rows();
    if train_y.len() != n {
        return Err(Error::shape("knn: label count does not match training samples"));
    }
    if k == 0 || k > n {
        return Err(Error::domain(format!(
            "knn: k={k} out of range for {n} training samples"
        )));
    }
    if test_x.cols() != train_x.cols() {
        return Err(Error::shape("knn: train and test dimensions differ"));
    }

    let mut out = Vec::with_capacity(test_x.rows());
    for i in 0..test_x.rows() {
        let mut cand: Vec<(f64, usize)> = (0..n)
            .map(|j| {
                let d: f64 = test_x
                    .row(i)
                    .iter()
                    .zip(train_x.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d, j)
            })
            .collect();
        cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

        let mut votes: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for &(_, j) in cand.iter().take(k) {
            *votes.entry(train_y[j]).or_insert(0) += 1;
        }
        // BTreeMap iterates classes ascending, so the first maximum is the
        // smallest class id.
        let mut best_class = 0;
        let mut best_count = 0;
        for (&class, &count) in &votes {
            if count > best_count {
                best_count = count;
                best_class = class;
            }
        }
        out.push(best_class);
    }
    Ok(out)
}

/// Confusion-matrix evaluation. Truth entries of 0 (unlabeled) are
/// excluded; predictions must be >= 1.
pub fn evaluate(pred: &[usize], truth: &[usize]) -> Result<EvalReport> {
    if pred.len() != truth.len() {
        return Err(Error::shape(format!(
            "evaluate: {} predictions for {} truth entries",
            pred.len(),
            truth.len()
        )));
    }
    let pairs: Vec<(usize, usize)> = pred
        .iter()
        .zip(truth)
        .filter(|(_, &t)| t > 0)
        .map(|(&p, &t)| (p, t))
        .collect();
    if pairs.is_empty() {
        return Err(Error::domain("evaluate: every truth entry is unlabeled"));
    }
    if pairs.iter().any(|&(p, _)| p == 0) {
        return Err(Error::domain("evaluate: predictions must be class ids >= 1"));
    }
    let classes = pairs.iter().map(|&(p, t)| p.max(t)).max().unwrap();
    let mut confusion = vec![vec![0usize; classes]; classes];
    for &(p, t) in &pairs {
        confusion[t - 1][p - 1] += 1;
    }
    let total = pairs.len() as f64;
    let diag: usize = (0..classes).map(|c| confusion[c][c]).sum();
    let oa = diag as f64 / total;

    let mut p_e = 0.0;
    for c in 0..classes {
        let row: usize = confusion[c].iter().sum();
        let col: usize = (0..classes).map(|t| confusion[t][c]).sum();
        p_e += row as f64 * col as f64 / (total * total);
    }
    let kappa = if (1.0 - p_e).abs() < 1e-15 {
        // Degenerate marginals: possible only when everything agrees.
        1.0
    } else {
        (oa - p_e) / (1.0 - p_e)
    };

    let per_class_accuracy = (0..classes)
        .map(|c| {
            let row: usize = confusion[c].iter().sum();
            if row == 0 {
                0.0
            } else {
                confusion[c][c] as f64 / row as f64
            }
        })
        .collect();

    Ok(EvalReport { overall_accuracy: oa, kappa, confusion, per_class_accuracy })
}
