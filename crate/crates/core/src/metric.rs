//! Supervised Mahalanobis metric learning for target detection.
//!
//! The metric maximizes a linear objective over the PSD unit-Frobenius
//! sphere: positive/negative separation, minus a similarity-propagation
//! penalty (kNN graphs linking positives with positives and negatives with
//! negatives), minus a manifold-smoothness penalty on the positives. Every
//! accepted iterate is PSD-projected and renormalized.

use crate::align::{build_alignment, AlignParams, LabeledDataset, Method, SigmaRule};
use crate::error::{Error, Result};
use crate::linalg::psd_project;
use crate::matrix::Matrix;

/// Symmetric PSD metric with unit Frobenius norm.
#[derive(Debug, Clone)]
pub struct MetricMatrix {
    pub m: Matrix,
}

impl MetricMatrix {
    /// The scaled identity, the canonical baseline metric.
    pub fn identity(d: usize) -> Self {
        Self { m: Matrix::identity(d).scale(1.0 / (d as f64).sqrt()) }
    }
}

/// Per-pixel detection statistic (lower = more target-like) with optional
/// ground truth and AUC.
#[derive(Debug, Clone)]
pub struct DetectionResult {
    pub scores: Vec<f64>,
    pub labels: Option<Vec<bool>>,
    pub auc: Option<f64>,
}

/// Result of [`sml_fit`].
#[derive(Debug, Clone)]
pub struct SmlFit {
    pub metric: MetricMatrix,
    /// Objective value at each accepted iterate, starting from the
    /// initial scaled identity.
    pub objective: Vec<f64>,
    /// `(min eigenvalue, frobenius norm)` of each accepted iterate.
    pub iterate_diagnostics: Vec<(f64, f64)>,
}

/// kNN heat-kernel Laplacian over the rows of `x`, sharing the LE
/// builder's conventions (directed kNN symmetrized by patch summation,
/// median-distance sigma).
fn knn_heat_laplacian(x: &Matrix, k: usize) -> Result<Matrix> {
    let data = LabeledDataset::unlabeled(x.clone())?;
    let params = AlignParams { k, sigma: SigmaRule::Auto, ..Default::default() };
    Ok(build_alignment(Method::Le, &data, &params)?.l)
}

/// Separation scatter `sum_{p,n} (p - n)(p - n)^T / (PQ)`.
fn separation_scatter(pos: &Matrix, neg: &Matrix) -> Matrix {
    let d = pos.cols();
    let (p, q) = (pos.rows() as f64, neg.rows() as f64);
    let pos_gram = pos.transpose().matmul(pos);
    let neg_gram = neg.transpose().matmul(neg);
    let pos_sum: Vec<f64> = (0..d).map(|j| pos.col(j).iter().sum()).collect();
    let neg_sum: Vec<f64> = (0..d).map(|j| neg.col(j).iter().sum()).collect();
    let mut s = pos_gram.scale(q).add(&neg_gram.scale(p));
    for i in 0..d {
        for j in 0..d {
            s[(i, j)] -= pos_sum[i] * neg_sum[j] + neg_sum[i] * pos_sum[j];
        }
    }
    s.scale(1.0 / (p * q)).symmetrized()
}

/// Learn the detection metric by projected gradient ascent on
///
/// `f(M) = tr(M S_sep)/(PQ) - lambda_sim tr(M G_sim) - lambda_smooth tr(M G_pos)`
///
/// over the PSD unit-Frobenius sphere, with backtracking so the objective
/// is nondecreasing over accepted steps.
pub fn sml_fit(
    positives: &Matrix,
    negatives: &Matrix,
    lambda_sim: f64,
    lambda_smooth: f64,
    k: usize,
    steps: usize,
) -> Result<SmlFit> {
    let d = positives.cols();
    if negatives.cols() != d {
        return Err(Error::shape("positives and negatives disagree on dimension"));
    }
    let (p, q) = (positives.rows(), negatives.rows());
    if p < 2 || q < 2 {
        return Err(Error::domain("sml needs at least 2 positives and 2 negatives"));
    }
    if k == 0 || k >= p.min(q) {
        return Err(Error::domain(format!(
            "sml: neighbor count k={k} must satisfy 1 <= k < min(P, Q) = {}",
            p.min(q)
        )));
    }
    if lambda_sim < 0.0 || lambda_smooth < 0.0 {
        return Err(Error::domain("sml: penalty weights must be nonnegative"));
    }

    let s_sep = separation_scatter(positives, negatives);
    if s_sep.frobenius_norm() == 0.0 {
        return Err(Error::degenerate(
            "sml: separation scatter vanishes (all samples identical)",
        ));
    }

    // Similarity propagation: block Laplacians, positives with positives
    // and negatives with negatives, pulled back through the data.
    let mut grad = s_sep;
    if lambda_sim > 0.0 {
        let l_p = knn_heat_laplacian(positives, k)?;
        let l_n = knn_heat_laplacian(negatives, k)?;
        let g_p = positives.transpose().matmul(&l_p.matmul(positives));
        let g_n = negatives.transpose().matmul(&l_n.matmul(negatives));
        grad.axpy(-lambda_sim, &g_p.add(&g_n).symmetrized());
    }
    if lambda_smooth > 0.0 {
        let l_pos = knn_heat_laplacian(positives, k)?;
        let g_pos = positives.transpose().matmul(&l_pos.matmul(positives));
        grad.axpy(-lambda_smooth, &g_pos.symmetrized());
    }

    let objective_of = |m: &Matrix| -> f64 {
        m.data().iter().zip(grad.data()).map(|(a, b)| a * b).sum()
    };

    let mut m = Matrix::identity(d).scale(1.0 / (d as f64).sqrt());
    let mut obj = objective_of(&m);
    let mut objective = vec![obj];
    let mut diagnostics = vec![diagnose(&m)?];
    let mut step = 1.0;

    for _ in 0..steps {
        let mut accepted = false;
        for _ in 0..30 {
            let mut cand = m.clone();
            cand.axpy(step, &grad);
            let cand = psd_project(&cand)?;
            let norm = cand.frobenius_norm();
            if norm > 1e-300 {
                let cand = cand.scale(1.0 / norm);
                let cand_obj = objective_of(&cand);
                if cand_obj >= obj - 1e-15 {
                    m = cand;
                    obj = cand_obj;
                    objective.push(obj);
                    diagnostics.push(diagnose(&m)?);
                    step *= 1.5;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    Ok(SmlFit {
        metric: MetricMatrix { m },
        objective,
        iterate_diagnostics: diagnostics,
    })
}

fn diagnose(m: &Matrix) -> Result<(f64, f64)> {
    let eigs = crate::linalg::sym_eig(m)?;
    Ok((*eigs.values.last().unwrap(), m.frobenius_norm()))
}

/// Score every pixel: `(x - target)^T M (x - target)`, clamped at zero.
/// When labels are supplied the ROC AUC is attached.
pub fn detect(
    pixels: &Matrix,
    target: &[f64],
    metric: &MetricMatrix,
    labels: Option<&[bool]>,
) -> Result<DetectionResult> {
    let d = metric.m.rows();
    if pixels.cols() != d || target.len() != d {
        return Err(Error::shape(format!(
            "detect: metric is {d}-dimensional, pixels have {} dims, target {}",
            pixels.cols(),
            target.len()
        )));
    }
    if let Some(l) = labels {
        if l.len() != pixels.rows() {
            return Err(Error::shape("detect: label count does not match pixel count"));
        }
    }
    let mut scores = Vec::with_capacity(pixels.rows());
    for i in 0..pixels.rows() {
        let diff: Vec<f64> = pixels.row(i).iter().zip(target).map(|(x, t)| x - t).collect();
        let mv = metric.m.matvec(&diff);
        let s: f64 = diff.iter().zip(&mv).map(|(a, b)| a * b).sum();
        scores.push(s.max(0.0));
    }
    let auc = match labels {
        Some(l) => Some(roc_auc(&scores, l)?),
        None => None,
    };
    Ok(DetectionResult { scores, labels: labels.map(<[bool]>::to_vec), auc })
}

/// Area under the ROC curve by the rank statistic, lower score = positive
/// prediction, ties contributing one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::shape("roc_auc: scores and labels differ in length"));
    }
    let p = labels.iter().filter(|&&l| l).count();
    let q = labels.len() - p;
    if p == 0 || q == 0 {
        return Err(Error::domain("roc_auc: both classes must be present"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::domain("roc_auc: non-finite score"));
    }

    // Average ranks (1-based) with ties shared.
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));
    let mut ranks = vec![0.0f64; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let avg = (i + j + 2) as f64 / 2.0; // mean of 1-based ranks i+1..=j+1
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    let rank_sum_pos: f64 = labels
        .iter()
        .zip(&ranks)
        .filter(|(l, _)| **l)
        .map(|(_, r)| r)
        .sum();
    // U counts negatives scoring strictly below positives plus half ties;
    // with lower-is-positive the AUC is its complement.
    let u = rank_sum_pos - (p * (p + 1)) as f64 / 2.0;
    Ok(1.0 - u / (p as f64 * q as f64))
}
