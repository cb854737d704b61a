//! Multi-feature dimensionality reduction.
//!
//! Two routes for combining per-feature structure under learned simplex
//! weights: a linear one that mixes per-feature alignment matrices inside
//! the patch-alignment solve (trace objective, closed-form weight updates),
//! and a stochastic-neighbor one that mixes per-feature affinity matrices
//! inside a t-SNE optimization (KL objective).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::align::{
    build_alignment, solve_linear_embedding, AlignParams, AlignmentMatrix, Direction,
    LabeledDataset, Method, Projection,
};
use crate::error::{Error, Result};
use crate::linalg::pairwise_sq_dists;
use crate::matrix::Matrix;

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// A set of per-sample feature matrices sharing the same row count.
#[derive(Debug, Clone)]
pub struct FeatureBundle {
    features: Vec<Matrix>,
    labels: Option<Vec<usize>>,
}

impl FeatureBundle {
    pub fn new(features: Vec<Matrix>, labels: Option<Vec<usize>>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::domain("feature bundle needs at least one feature"));
        }
        let n = features[0].rows();
        if features.iter().any(|f| f.rows() != n) {
            return Err(Error::shape("features disagree on sample count"));
        }
        if let Some(ref l) = labels {
            if l.len() != n {
                return Err(Error::shape("label count does not match sample count"));
            }
        }
        Ok(Self { features, labels })
    }

    pub fn features(&self) -> &[Matrix] {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.features[0].rows()
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Horizontal concatenation of all feature matrices.
    pub fn concatenated(&self) -> Matrix {
        let mut out = self.features[0].clone();
        for f in &self.features[1..] {
            out = out.hcat(f);
        }
        out
    }
}

/// Nonnegative weights on the probability simplex.
#[derive(Debug, Clone)]
pub struct CombinationWeights {
    pub alpha: Vec<f64>,
}

impl CombinationWeights {
    pub fn uniform(m: usize) -> Self {
        Self { alpha: vec![1.0 / m as f64; m] }
    }

    /// Renormalize onto the simplex; nonpositive vectors become uniform.
    pub fn normalized(mut alpha: Vec<f64>) -> Self {
        let sum: f64 = alpha.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Self::uniform(alpha.len());
        }
        for a in &mut alpha {
            *a /= sum;
        }
        Self { alpha }
    }
}

/// Symmetric pairwise probability matrix: nonnegative, zero diagonal,
/// total sum one.
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    pub p: Matrix,
}

// ---------------------------------------------------------------------------
// MFC: weighted alignment combination
// ---------------------------------------------------------------------------

/// Result of [`mfc_fit`].
#[derive(Debug, Clone)]
pub struct MfcFit {
    pub projection: Projection,
    pub weights: CombinationWeights,
    /// Combined objective after each alternation.
    pub objective: Vec<f64>,
    /// Set when a nonpositive trace term had to be clamped.
    pub clamped: bool,
}

/// Weighted multi-feature embedding: per-feature DLA alignment matrices
/// are mixed as `L(alpha) = sum alpha_m^r L_m`, the projection is solved on
/// the concatenated features, and the weights get the closed-form exponent
/// update `alpha_m ∝ (1/t_m)^(1/(r-1))` on the per-feature trace terms.
pub fn mfc_fit(
    bundle: &FeatureBundle,
    d: usize,
    r: f64,
    iters: usize,
    params: &AlignParams,
) -> Result<MfcFit> {
    if r <= 1.0 {
        return Err(Error::domain("mfc: weight exponent r must exceed 1"));
    }
    let labels = bundle
        .labels()
        .map(<[usize]>::to_vec)
        .ok_or_else(|| Error::domain("mfc requires class labels"))?;
    let m = bundle.n_features();
    let n = bundle.n_samples();

    // Per-feature alignment from each feature's own neighborhoods.
    let mut alignments = Vec::with_capacity(m);
    for f in bundle.features() {
        let data = LabeledDataset::new(f.clone(), Some(labels.clone()))?;
        alignments.push(build_alignment(Method::Dla, &data, params)?);
    }

    let xhat = bundle.concatenated();
    let data = LabeledDataset::new(xhat.clone(), Some(labels))?;

    let mut weights = CombinationWeights::uniform(m);
    let mut clamped = false;
    let mut objective = Vec::with_capacity(iters);
    let mut projection = None;

    for _ in 0..iters {
        let mut l = Matrix::zeros(n, n);
        for (alignment, &a) in alignments.iter().zip(&weights.alpha) {
            l.axpy(a.powf(r), &alignment.l);
        }
        let mixed = AlignmentMatrix { l, direction: Direction::Minimize, denominator: None };
        let proj = solve_linear_embedding(&data, &mixed, d)?;
        let y = proj.transform(&xhat)?;

        let mut traces = Vec::with_capacity(m);
        for alignment in &alignments {
            let t = y.transpose().matmul(&alignment.l.matmul(&y)).trace();
            if t <= 0.0 {
                clamped = true;
                traces.push(1e-12);
            } else {
                traces.push(t);
            }
        }
        let exponent = 1.0 / (r - 1.0);
        let alpha: Vec<f64> = traces.iter().map(|t| (1.0 / t).powf(exponent)).collect();
        weights = CombinationWeights::normalized(alpha);

        let obj: f64 = weights
            .alpha
            .iter()
            .zip(&traces)
            .map(|(a, t)| a.powf(r) * t)
            .sum();
        objective.push(obj);
        projection = Some(proj);
    }

    Ok(MfcFit {
        projection: projection.expect("iters >= 1"),
        weights,
        objective,
        clamped,
    })
}

// ---------------------------------------------------------------------------
// t-SNE affinities
// ---------------------------------------------------------------------------

/// Row-conditional Gaussian distributions with per-row bandwidths found by
/// bisection so each row's perplexity hits the target within 1e-4 (capped
/// at 50 bisection steps).
pub fn tsne_conditionals(x: &Matrix, perplexity: f64) -> Result<Matrix> {
    let n = x.rows();
    if !(perplexity > 1.0 && perplexity < n as f64) {
        return Err(Error::domain(format!(
            "perplexity {perplexity} out of range (1, {n})"
        )));
    }
    let d2 = pairwise_sq_dists(x);
    let target_entropy = perplexity.ln();
    let mut p = Matrix::zeros(n, n);

    for i in 0..n {
        // Shift by the row minimum for stable exponentials.
        let mut shift = f64::INFINITY;
        for j in 0..n {
            if j != i {
                shift = shift.min(d2[(i, j)]);
            }
        }
        let mut beta = 1.0f64;
        let mut beta_lo = 0.0f64;
        let mut beta_hi = f64::INFINITY;
        let mut row = vec![0.0; n];
        for _ in 0..50 {
            let mut sum = 0.0;
            let mut weighted = 0.0;
            for j in 0..n {
                if j == i {
                    row[j] = 0.0;
                    continue;
                }
                let e = (-beta * (d2[(i, j)] - shift)).exp();
                row[j] = e;
                sum += e;
                weighted += e * (d2[(i, j)] - shift);
            }
            // Entropy of the normalized row.
            let entropy = sum.ln() + beta * weighted / sum;
            if ((entropy.exp()) - perplexity).abs() <= 1e-4 {
                break;
            }
            if entropy > target_entropy {
                beta_lo = beta;
                beta = if beta_hi.is_finite() { 0.5 * (beta + beta_hi) } else { beta * 2.0 };
            } else {
                beta_hi = beta;
                beta = 0.5 * (beta + beta_lo);
            }
        }
        let sum: f64 = row.iter().sum();
        for j in 0..n {
            p[(i, j)] = if j == i { 0.0 } else { row[j] / sum };
        }
    }
    Ok(p)
}

/// Symmetrized t-SNE affinities `p_ij = (p_{j|i} + p_{i|j}) / (2N)`.
pub fn tsne_affinities(x: &Matrix, perplexity: f64) -> Result<AffinityMatrix> {
    let cond = tsne_conditionals(x, perplexity)?;
    let n = x.rows();
    let p = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (cond[(i, j)] + cond[(j, i)]) / (2.0 * n as f64)
        }
    });
    Ok(AffinityMatrix { p })
}

// ---------------------------------------------------------------------------
// MSNE: t-SNE with learned feature weights
// ---------------------------------------------------------------------------

/// Parameters for [`msne_embed`].
#[derive(Debug, Clone)]
pub struct MsneParams {
    pub d: usize,
    pub perplexity: f64,
    /// Weight exponent, > 1.
    pub r: f64,
    pub outer_iters: usize,
    /// Gradient steps per outer alternation.
    pub inner_iters: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Optional frozen weights (skips the weight updates entirely).
    pub fixed_alpha: Option<Vec<f64>>,
}

impl Default for MsneParams {
    fn default() -> Self {
        Self {
            d: 2,
            perplexity: 15.0,
            r: 2.0,
            outer_iters: 10,
            inner_iters: 60,
            learning_rate: 100.0,
            seed: 0,
            fixed_alpha: None,
        }
    }
}

/// Result of [`msne_embed`].
#[derive(Debug, Clone)]
pub struct MsneFit {
    pub embedding: Matrix,
    pub weights: CombinationWeights,
    /// True KL divergence at initialization and after each alternation.
    pub kl_history: Vec<f64>,
    pub clamped: bool,
}

/// Unnormalized heavy-tailed kernel `(1 + ||y_i - y_j||^2)^-1` and its
/// normalizing constant.
fn student_kernel(y: &Matrix) -> (Matrix, f64) {
    let n = y.rows();
    let mut num = Matrix::zeros(n, n);
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut d2 = 0.0;
            for (a, b) in y.row(i).iter().zip(y.row(j)) {
                let diff = a - b;
                d2 += diff * diff;
            }
            let v = 1.0 / (1.0 + d2);
            num[(i, j)] = v;
            num[(j, i)] = v;
            total += 2.0 * v;
        }
    }
    (num, total)
}

fn kl_against(p: &Matrix, num: &Matrix, total: f64) -> f64 {
    let n = p.rows();
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[(i, j)];
            if i == j || pij <= 0.0 {
                continue;
            }
            let q = (num[(i, j)] / total).max(1e-300);
            kl += pij * (pij / q).ln();
        }
    }
    kl
}

/// Cross-entropy `-sum p_ij ln q_ij` of a fixed reference against Q.
fn cross_entropy(p: &Matrix, num: &Matrix, total: f64) -> f64 {
    let n = p.rows();
    let mut ce = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pij = p[(i, j)];
            if i == j || pij <= 0.0 {
                continue;
            }
            let q = (num[(i, j)] / total).max(1e-300);
            ce -= pij * q.ln();
        }
    }
    ce
}

fn tsne_gradient(p: &Matrix, y: &Matrix, num: &Matrix, total: f64) -> Matrix {
    let (n, d) = (y.rows(), y.cols());
    let mut grad = Matrix::zeros(n, d);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let q = num[(i, j)] / total;
            let coeff = 4.0 * (p[(i, j)] - q) * num[(i, j)];
            for t in 0..d {
                grad[(i, t)] += coeff * (y[(i, t)] - y[(j, t)]);
            }
        }
    }
    grad
}

fn mix_affinities(ps: &[AffinityMatrix], alpha: &[f64]) -> Matrix {
    let n = ps[0].p.rows();
    let mut out = Matrix::zeros(n, n);
    for (aff, &a) in ps.iter().zip(alpha) {
        out.axpy(a, &aff.p);
    }
    out
}

/// Multi-feature stochastic neighbor embedding.
///
/// Per-feature affinities are mixed as `P(alpha) = sum alpha_m P_m`. Each
/// alternation runs backtracked momentum gradient descent on
/// `KL(P(alpha) || Q)` (early exaggeration x4 on the first 50 global
/// steps), then proposes new weights from the per-feature cross-entropy
/// exponent rule, accepting the proposal only as far as it does not
/// increase the KL. The recorded KL sequence is nonincreasing.
pub fn msne_embed(bundle: &FeatureBundle, params: &MsneParams) -> Result<MsneFit> {
    let n = bundle.n_samples();
    let m = bundle.n_features();
    if params.d == 0 || params.d >= n {
        return Err(Error::domain(format!(
            "msne: target dimension {} out of range for {} samples",
            params.d, n
        )));
    }
    if params.r <= 1.0 {
        return Err(Error::domain("msne: weight exponent r must exceed 1"));
    }
    if params.outer_iters == 0 {
        return Err(Error::domain("msne: outer_iters must be >= 1"));
    }

    let mut affinities = Vec::with_capacity(m);
    for f in bundle.features() {
        affinities.push(tsne_affinities(f, params.perplexity)?);
    }

    let mut alpha = match &params.fixed_alpha {
        Some(a) => {
            if a.len() != m {
                return Err(Error::shape("fixed_alpha length mismatch"));
            }
            CombinationWeights::normalized(a.clone()).alpha
        }
        None => CombinationWeights::uniform(m).alpha,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut y = Matrix::from_fn(n, params.d, |_, _| {
        // Box-Muller from two uniform draws; deterministic per seed.
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen_range(0.0..1.0);
        1e-4 * (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    });
    let mut velocity = Matrix::zeros(n, params.d);
    let mut lr_scale = 1.0f64;
    let mut global_step = 0usize;
    let mut clamped = false;

    let mut p = mix_affinities(&affinities, &alpha);
    let (num, total) = student_kernel(&y);
    if total <= 0.0 {
        return Err(Error::degenerate("msne: degenerate Q normalization"));
    }
    let mut kl = kl_against(&p, &num, total);
    if !kl.is_finite() {
        return Err(Error::degenerate("msne: non-finite KL at initialization"));
    }
    let mut kl_history = vec![kl];

    // One backtracked momentum step on the current objective (possibly the
    // exaggerated one); returns false when no step length is acceptable.
    let descend_step = |y: &mut Matrix,
                            velocity: &mut Matrix,
                            lr_scale: &mut f64,
                            p_obj: &Matrix,
                            obj: &mut f64,
                            momentum: f64,
                            lr: f64|
     -> Result<bool> {
        let (num, total) = student_kernel(y);
        let grad = tsne_gradient(p_obj, y, &num, total);
        for _ in 0..24 {
            let mut v_new = velocity.scale(momentum);
            v_new.axpy(-lr * *lr_scale, &grad);
            let y_new = y.add(&v_new);
            let (num_new, total_new) = student_kernel(&y_new);
            if total_new <= 0.0 {
                return Err(Error::degenerate("msne: degenerate Q during descent"));
            }
            let obj_new = kl_against(p_obj, &num_new, total_new);
            if !obj_new.is_finite() {
                return Err(Error::degenerate("msne: non-finite KL during descent"));
            }
            if obj_new <= *obj + 1e-12 {
                *y = y_new;
                *velocity = v_new;
                *obj = obj_new;
                *lr_scale = (*lr_scale * 1.1).min(1.0);
                return Ok(true);
            }
            *lr_scale *= 0.5;
            *velocity = Matrix::zeros(velocity.rows(), velocity.cols());
        }
        Ok(false)
    };

    for _outer in 0..params.outer_iters {
        // Gradient phase.
        for _ in 0..params.inner_iters {
            let exaggerated = global_step < 50;
            let momentum = if global_step < 250 { 0.5 } else { 0.8 };
            if exaggerated {
                let p4 = p.scale(4.0);
                let (num, total) = student_kernel(&y);
                let mut obj = kl_against(&p4, &num, total);
                descend_step(
                    &mut y,
                    &mut velocity,
                    &mut lr_scale,
                    &p4,
                    &mut obj,
                    momentum,
                    params.learning_rate,
                )?;
            } else {
                descend_step(
                    &mut y,
                    &mut velocity,
                    &mut lr_scale,
                    &p,
                    &mut kl,
                    momentum,
                    params.learning_rate,
                )?;
            }
            global_step += 1;
        }
        // Re-evaluate the true KL (the exaggerated phase tracked a
        // different objective).
        {
            let (num, total) = student_kernel(&y);
            kl = kl_against(&p, &num, total);
        }
        // Guard: never record a KL above the previous record; plain
        // backtracked steps only descend.
        let floor = *kl_history.last().unwrap();
        let mut extra = 0;
        while kl > floor && extra < 200 {
            let moved = descend_step(
                &mut y,
                &mut velocity,
                &mut lr_scale,
                &p,
                &mut kl,
                0.5,
                params.learning_rate,
            )?;
            if !moved {
                break;
            }
            extra += 1;
        }

        // Weight phase: exponent-rule proposal, accepted only as far as it
        // keeps the KL nonincreasing.
        if params.fixed_alpha.is_none() && m > 1 {
            let (num, total) = student_kernel(&y);
            let ces: Vec<f64> = affinities
                .iter()
                .map(|aff| {
                    let c = cross_entropy(&aff.p, &num, total);
                    if c <= 0.0 {
                        clamped = true;
                        1e-12
                    } else {
                        c
                    }
                })
                .collect();
            let exponent = 1.0 / (params.r - 1.0);
            let proposal =
                CombinationWeights::normalized(ces.iter().map(|c| (1.0 / c).powf(exponent)).collect())
                    .alpha;
            let mut s = 1.0f64;
            for _ in 0..20 {
                let cand: Vec<f64> = alpha
                    .iter()
                    .zip(&proposal)
                    .map(|(a, pnew)| (1.0 - s) * a + s * pnew)
                    .collect();
                let cand = CombinationWeights::normalized(cand).alpha;
                let p_cand = mix_affinities(&affinities, &cand);
                let kl_cand = kl_against(&p_cand, &num, total);
                if kl_cand.is_finite() && kl_cand <= kl + 1e-12 {
                    alpha = cand;
                    p = p_cand;
                    kl = kl_cand;
                    break;
                }
                s *= 0.5;
            }
        }

        kl_history.push(kl);
    }

    Ok(MsneFit {
        embedding: y,
        weights: CombinationWeights { alpha },
        kl_history,
        clamped,
    })
}

/// Plain t-SNE on a single feature: the multi-feature engine with frozen
/// unit weight, so trajectories match bit for bit.
pub fn tsne_embed(x: &Matrix, params: &MsneParams) -> Result<MsneFit> {
    let bundle = FeatureBundle::new(vec![x.clone()], None)?;
    let mut p = params.clone();
    p.fixed_alpha = Some(vec![1.0]);
    msne_embed(&bundle, &p)
}
