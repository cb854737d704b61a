//! Patch alignment framework for linear dimensionality reduction.
//!
//! Every method here follows the same two-stage scheme: a builder produces
//! one local optimization matrix per patch (PCA and LDA use whole-dataset
//! and per-class patches, LE/LLE/DLA use neighborhood patches), and the
//! alignment stage sums the patches into a global `N x N` matrix whose
//! extreme generalized eigenvectors define a linear embedding.

use crate::error::{Error, Result};
use crate::linalg::{gen_sym_eig, pairwise_sq_dists, sym_eig};
use crate::matrix::{vec_norm, Matrix};

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Sample matrix with optional class labels (0-based, contiguous).
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    x: Matrix,
    labels: Option<Vec<usize>>,
}

impl LabeledDataset {
    pub fn new(x: Matrix, labels: Option<Vec<usize>>) -> Result<Self> {
        if x.rows() < 2 {
            return Err(Error::domain("dataset needs at least 2 samples"));
        }
        if let Some(ref l) = labels {
            if l.len() != x.rows() {
                return Err(Error::shape(format!(
                    "{} labels for {} samples",
                    l.len(),
                    x.rows()
                )));
            }
            let max = *l.iter().max().unwrap();
            let mut seen = vec![false; max + 1];
            for &c in l {
                seen[c] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::domain(
                    "class labels must be 0-based and contiguous with every class populated",
                ));
            }
        }
        Ok(Self { x, labels })
    }

    pub fn unlabeled(x: Matrix) -> Result<Self> {
        Self::new(x, None)
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.x.rows()
    }

    pub fn n_dims(&self) -> usize {
        self.x.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.labels.as_ref().map_or(0, |l| l.iter().max().unwrap() + 1)
    }
}

/// Which end of the spectrum the embedding uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// One patch: its member indices (center first) and the local matrix.
#[derive(Debug, Clone)]
pub struct PatchPart {
    pub indices: Vec<usize>,
    pub local_matrix: Matrix,
}

/// Global alignment matrix plus the solve direction. LDA additionally
/// carries its within-class matrix as the denominator of the trace ratio.
#[derive(Debug, Clone)]
pub struct AlignmentMatrix {
    pub l: Matrix,
    pub direction: Direction,
    pub denominator: Option<Matrix>,
}

/// Normalization regime of a learned projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    OrthonormalColumns,
    /// `U^T (Xc^T Xc + eps I) U = I` for centered data `Xc`.
    DataWhitened,
    /// Entrywise nonnegative with unit-norm columns.
    NonnegativeUnitColumns,
}

/// Linear map from input space to the embedding space.
#[derive(Debug, Clone)]
pub struct Projection {
    pub u: Matrix,
    pub constraint: Constraint,
    /// Column means subtracted before applying `u` (zero for the
    /// nonnegative solver, which works on raw data).
    pub mean: Vec<f64>,
}

impl Projection {
    /// Embed rows of `x`: `(x - mean) * U`.
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.u.rows() {
            return Err(Error::shape(format!(
                "projection expects {} dims, got {}",
                self.u.rows(),
                x.cols()
            )));
        }
        Ok(x.center_rows(&self.mean).matmul(&self.u))
    }

    pub fn input_dims(&self) -> usize {
        self.u.rows()
    }

    pub fn output_dims(&self) -> usize {
        self.u.cols()
    }
}

/// Patch builder selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Pca,
    Lda,
    Le,
    Lle,
    Dla,
}

/// Heat-kernel bandwidth rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaRule {
    /// Median of the nonzero kNN distances.
    Auto,
    Fixed(f64),
}

/// Builder parameters; fields not used by a method are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignParams {
    /// Neighbor count for LE/LLE.
    pub k: usize,
    /// Same-class neighbor count for DLA.
    pub k1: usize,
    /// Other-class neighbor count for DLA.
    pub k2: usize,
    /// DLA trade-off coefficient on other-class pairs.
    pub beta: f64,
    /// LE heat-kernel bandwidth.
    pub sigma: SigmaRule,
}

impl Default for AlignParams {
    fn default() -> Self {
        Self { k: 5, k1: 5, k2: 5, beta: 1.0, sigma: SigmaRule::Auto }
    }
}

// ---------------------------------------------------------------------------
// Neighborhood machinery
// ---------------------------------------------------------------------------

/// Indices of the `k` nearest admissible samples to `i`, ordered by
/// (distance, index); distance ties go to the smaller index.
fn k_nearest(dists: &Matrix, i: usize, k: usize, admit: impl Fn(usize) -> bool) -> Vec<usize> {
    let n = dists.rows();
    let mut cand: Vec<usize> = (0..n).filter(|&j| j != i && admit(j)).collect();
    cand.sort_by(|&a, &b| {
        dists[(i, a)]
            .partial_cmp(&dists[(i, b)])
            .unwrap()
            .then(a.cmp(&b))
    });
    cand.truncate(k);
    cand
}

/// Median of the nonzero kNN distances (not squared). Falls back to 1.0
/// when every neighbor distance is zero.
fn auto_sigma(dists: &Matrix, neighborhoods: &[Vec<usize>]) -> f64 {
    let mut vals: Vec<f64> = Vec::new();
    for (i, nbrs) in neighborhoods.iter().enumerate() {
        for &j in nbrs {
            let d = dists[(i, j)].sqrt();
            if d > 0.0 {
                vals.push(d);
            }
        }
    }
    if vals.is_empty() {
        return 1.0;
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = vals.len();
    if m % 2 == 1 {
        vals[m / 2]
    } else {
        0.5 * (vals[m / 2 - 1] + vals[m / 2])
    }
}

fn heat_weight(sq_dist: f64, sigma: f64) -> f64 {
    (-sq_dist / (2.0 * sigma * sigma)).exp()
}

/// Constrained local reconstruction weights for LLE: minimize `w^T G w`
/// subject to `sum(w) = 1`, where `G` is the local difference Gram.
///
/// Solved through the eigendecomposition of `G`; eigenvalues below
/// `1e-10 * lambda_max` count as null. When the all-ones vector has a null
/// component, the minimum-norm null-space solution is returned, which makes
/// exactly reconstructable (collinear or planar) neighborhoods exact.
pub fn lle_weights(center: &[f64], neighbors: &Matrix) -> Result<Vec<f64>> {
    let k = neighbors.rows();
    let dim = neighbors.cols();
    if center.len() != dim {
        return Err(Error::shape("lle_weights: center dimension mismatch"));
    }
    let mut g = Matrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let mut s = 0.0;
            for t in 0..dim {
                s += (center[t] - neighbors[(a, t)]) * (center[t] - neighbors[(b, t)]);
            }
            g[(a, b)] = s;
            g[(b, a)] = s;
        }
    }
    let pairs = sym_eig(&g)?;
    let lam_max = pairs.values[0].max(0.0);
    let null_tol = 1e-10 * lam_max;
    let c: Vec<f64> = (0..k)
        .map(|idx| pairs.vectors.col(idx).iter().sum::<f64>())
        .collect();

    let null_mass: f64 = (0..k)
        .filter(|&idx| pairs.values[idx] <= null_tol)
        .map(|idx| c[idx] * c[idx])
        .sum();

    let mut w = vec![0.0; k];
    if null_mass > 1e-20 * k as f64 {
        // Exact reconstruction exists: minimum-norm solution in the null
        // space with weights summing to one.
        for idx in 0..k {
            if pairs.values[idx] <= null_tol {
                let coeff = c[idx] / null_mass;
                let v = pairs.vectors.col(idx);
                for (wi, vi) in w.iter_mut().zip(&v) {
                    *wi += coeff * vi;
                }
            }
        }
    } else {
        for idx in 0..k {
            if pairs.values[idx] > null_tol {
                let coeff = c[idx] / pairs.values[idx];
                let v = pairs.vectors.col(idx);
                for (wi, vi) in w.iter_mut().zip(&v) {
                    *wi += coeff * vi;
                }
            }
        }
        let total: f64 = w.iter().sum();
        if total.abs() < 1e-12 * vec_norm(&w) * k as f64 {
            // Constraint surface parallel to the level sets; fall back to
            // uniform weights.
            w = vec![1.0 / k as f64; k];
        } else {
            for wi in &mut w {
                *wi /= total;
            }
        }
    }
    Ok(w)
}

fn class_indices(labels: &[usize]) -> Vec<Vec<usize>> {
    let classes = labels.iter().max().unwrap() + 1;
    let mut out = vec![Vec::new(); classes];
    for (i, &c) in labels.iter().enumerate() {
        out[c].push(i);
    }
    out
}

fn centering_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| (if i == j { 1.0 } else { 0.0 }) - 1.0 / n as f64)
}

// ---------------------------------------------------------------------------
// Patch builders
// ---------------------------------------------------------------------------

/// Local matrix `[[sum(w), -w^T], [-w, diag(w)]]` shared by the LE and DLA
/// builders; every row sums to zero.
fn star_patch_matrix(weights: &[f64]) -> Matrix {
    let k = weights.len();
    let mut m = Matrix::zeros(k + 1, k + 1);
    m[(0, 0)] = weights.iter().sum();
    for (j, &w) in weights.iter().enumerate() {
        m[(0, j + 1)] = -w;
        m[(j + 1, 0)] = -w;
        m[(j + 1, j + 1)] = w;
    }
    m
}

/// Per-sample patch construction for every builder.
pub fn build_patches(
    method: Method,
    data: &LabeledDataset,
    params: &AlignParams,
) -> Result<Vec<PatchPart>> {
    let n = data.n_samples();
    match method {
        Method::Pca => Ok(vec![PatchPart {
            indices: (0..n).collect(),
            local_matrix: centering_matrix(n),
        }]),
        Method::Lda => {
            let labels = data
                .labels()
                .ok_or_else(|| Error::domain("lda requires class labels"))?;
            let mut patches = Vec::new();
            for members in class_indices(labels) {
                let nc = members.len();
                patches.push(PatchPart {
                    indices: members,
                    local_matrix: centering_matrix(nc),
                });
            }
            Ok(patches)
        }
        Method::Le => {
            if params.k == 0 || params.k >= n {
                return Err(Error::domain(format!(
                    "le: neighbor count k={} must satisfy 1 <= k < N={}",
                    params.k, n
                )));
            }
            let dists = pairwise_sq_dists(data.x());
            let neighborhoods: Vec<Vec<usize>> =
                (0..n).map(|i| k_nearest(&dists, i, params.k, |_| true)).collect();
            let sigma = match params.sigma {
                SigmaRule::Auto => auto_sigma(&dists, &neighborhoods),
                SigmaRule::Fixed(s) => s,
            };
            if sigma <= 0.0 {
                return Err(Error::domain("le: sigma must be positive"));
            }
            let mut patches = Vec::with_capacity(n);
            for (i, nbrs) in neighborhoods.iter().enumerate() {
                let weights: Vec<f64> =
                    nbrs.iter().map(|&j| heat_weight(dists[(i, j)], sigma)).collect();
                let mut indices = vec![i];
                indices.extend_from_slice(nbrs);
                patches.push(PatchPart { indices, local_matrix: star_patch_matrix(&weights) });
            }
            Ok(patches)
        }
        Method::Lle => {
            if params.k == 0 || params.k >= n {
                return Err(Error::domain(format!(
                    "lle: neighbor count k={} must satisfy 1 <= k < N={}",
                    params.k, n
                )));
            }
            let dists = pairwise_sq_dists(data.x());
            let mut patches = Vec::with_capacity(n);
            for i in 0..n {
                let nbrs = k_nearest(&dists, i, params.k, |_| true);
                let w = lle_weights(data.x().row(i), &data.x().select_rows(&nbrs))?;
                let k = w.len();
                let mut local = Matrix::zeros(k + 1, k + 1);
                local[(0, 0)] = 1.0;
                for a in 0..k {
                    local[(0, a + 1)] = -w[a];
                    local[(a + 1, 0)] = -w[a];
                    for b in 0..k {
                        local[(a + 1, b + 1)] = w[a] * w[b];
                    }
                }
                let mut indices = vec![i];
                indices.extend_from_slice(&nbrs);
                patches.push(PatchPart { indices, local_matrix: local });
            }
            Ok(patches)
        }
        Method::Dla => {
            let labels = data
                .labels()
                .ok_or_else(|| Error::domain("dla requires class labels"))?;
            let classes = class_indices(labels);
            let smallest = classes.iter().map(|c| c.len()).min().unwrap();
            if smallest < params.k1 + 1 {
                return Err(Error::domain(format!(
                    "dla: smallest class has {} samples, needs at least k1+1 = {}",
                    smallest,
                    params.k1 + 1
                )));
            }
            let largest = classes.iter().map(|c| c.len()).max().unwrap();
            if n - largest < params.k2 {
                return Err(Error::domain(format!(
                    "dla: only {} other-class samples available for k2={}",
                    n - largest,
                    params.k2
                )));
            }
            let dists = pairwise_sq_dists(data.x());
            let mut patches = Vec::with_capacity(n);
            for i in 0..n {
                let same = k_nearest(&dists, i, params.k1, |j| labels[j] == labels[i]);
                let other = k_nearest(&dists, i, params.k2, |j| labels[j] != labels[i]);
                let mut weights = vec![1.0; same.len()];
                weights.extend(std::iter::repeat(-params.beta).take(other.len()));
                let mut indices = vec![i];
                indices.extend_from_slice(&same);
                indices.extend_from_slice(&other);
                patches.push(PatchPart { indices, local_matrix: star_patch_matrix(&weights) });
            }
            Ok(patches)
        }
    }
}

/// Alignment stage: sum every patch into the global matrix at its index
/// set, in patch order.
pub fn assemble(patches: &[PatchPart], n: usize) -> Matrix {
    let mut l = Matrix::zeros(n, n);
    for patch in patches {
        let k = patch.indices.len();
        for a in 0..k {
            for b in 0..k {
                l[(patch.indices[a], patch.indices[b])] += patch.local_matrix[(a, b)];
            }
        }
    }
    l
}

/// Build the global alignment matrix for the chosen method.
pub fn build_alignment(
    method: Method,
    data: &LabeledDataset,
    params: &AlignParams,
) -> Result<AlignmentMatrix> {
    let n = data.n_samples();
    let patches = build_patches(method, data, params)?;
    let assembled = assemble(&patches, n);
    match method {
        Method::Pca => Ok(AlignmentMatrix {
            l: assembled,
            direction: Direction::Maximize,
            denominator: None,
        }),
        Method::Lda => {
            // Patches assemble the within-class matrix; the between-class
            // part is the centering matrix minus it.
            let l_b = centering_matrix(n).sub(&assembled);
            Ok(AlignmentMatrix {
                l: l_b,
                direction: Direction::Maximize,
                denominator: Some(assembled),
            })
        }
        Method::Le | Method::Lle | Method::Dla => Ok(AlignmentMatrix {
            l: assembled,
            direction: Direction::Minimize,
            denominator: None,
        }),
    }
}

// ---------------------------------------------------------------------------
// Embedding solves
// ---------------------------------------------------------------------------

/// Ridge used whenever a Gram matrix is inverted.
pub(crate) fn gram_ridge(gram_trace: f64, dims: usize) -> f64 {
    1e-6 * gram_trace / dims as f64
}

/// Linearized embedding: the columns of `U` solve
/// `(Xc^T L Xc) v = lambda (Xc^T Lw Xc + eps I) v`, where `Lw` defaults to
/// the plain Gram pairing and `Xc` is the column-centered sample matrix.
/// Minimize-direction alignments take the `d` smallest eigenvalues,
/// maximize-direction the `d` largest.
pub fn solve_linear_embedding(
    data: &LabeledDataset,
    alignment: &AlignmentMatrix,
    d: usize,
) -> Result<Projection> {
    let n = data.n_samples();
    let dims = data.n_dims();
    if d == 0 || d > dims {
        return Err(Error::domain(format!(
            "target dimension {d} out of range 1..={dims}"
        )));
    }
    if alignment.l.rows() != n {
        return Err(Error::shape(format!(
            "alignment matrix is {}x{} for {} samples",
            alignment.l.rows(),
            alignment.l.cols(),
            n
        )));
    }
    let mu = data.x().col_means();
    let xc = data.x().center_rows(&mu);
    let gram = xc.transpose().matmul(&xc).symmetrized();
    let gram_trace = gram.trace();
    if gram_trace <= 0.0 {
        return Err(Error::degenerate(
            "all samples identical: data Gram has rank 0",
        ));
    }
    let a = xc.transpose().matmul(&alignment.l.matmul(&xc)).symmetrized();
    let mut b = match &alignment.denominator {
        Some(lw) => xc.transpose().matmul(&lw.matmul(&xc)).symmetrized(),
        None => gram,
    };
    let eps = gram_ridge(gram_trace, dims);
    for i in 0..dims {
        b[(i, i)] += eps;
    }
    let pairs = gen_sym_eig(&a, &b)?;
    let cols: Vec<usize> = match alignment.direction {
        Direction::Maximize => (0..d).collect(),
        Direction::Minimize => (dims - d..dims).rev().collect(),
    };
    let u = pairs.vectors.select_cols(&cols);
    Ok(Projection { u, constraint: Constraint::DataWhitened, mean: mu })
}

/// Build + solve in one call, capping LDA at `classes - 1` dimensions.
pub fn fit_linear(
    method: Method,
    data: &LabeledDataset,
    params: &AlignParams,
    d: usize,
) -> Result<Projection> {
    let alignment = build_alignment(method, data, params)?;
    let d = if method == Method::Lda {
        d.min(data.n_classes().saturating_sub(1)).max(1)
    } else {
        d
    };
    solve_linear_embedding(data, &alignment, d)
}

/// Result of the nonnegative embedding solve.
#[derive(Debug, Clone)]
pub struct NonnegativeEmbedding {
    pub projection: Projection,
    /// Objective value after each accepted iteration, starting with the
    /// seed value.
    pub objective: Vec<f64>,
}

/// Nonnegative variant: projected gradient descent of
/// `tr(U^T X^T L X U)` over entrywise nonnegative `U` with unit-norm
/// columns, seeded from the clipped unconstrained solve. Negative entries
/// are clipped to zero each step and the step size is halved whenever the
/// objective would increase.
pub fn solve_nonnegative_embedding(
    data: &LabeledDataset,
    alignment: &AlignmentMatrix,
    d: usize,
    iters: usize,
) -> Result<NonnegativeEmbedding> {
    if alignment.direction == Direction::Maximize {
        return Err(Error::domain(
            "nonnegative embedding supports minimize-direction alignments only",
        ));
    }
    if data.x().data().iter().any(|&v| v < 0.0) {
        return Err(Error::domain("nonnegative embedding requires nonnegative data"));
    }
    let dims = data.n_dims();
    // Raw data here: the alignment matrices annihilate constants, so the
    // quadratic matches the centered one, and raw data keeps U^T x >= 0.
    let a = data
        .x()
        .transpose()
        .matmul(&alignment.l.matmul(data.x()))
        .symmetrized();

    let seed = solve_linear_embedding(data, alignment, d)?;
    let mut u = Matrix::zeros(dims, d);
    for j in 0..d {
        let mut col = seed.u.col(j);
        let max = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max <= 0.0 {
            for v in &mut col {
                *v = -*v;
            }
        }
        for v in &mut col {
            *v = v.max(0.0);
        }
        let norm = vec_norm(&col);
        if norm < 1e-12 {
            col = vec![1.0 / (dims as f64).sqrt(); dims];
        } else {
            for v in &mut col {
                *v /= norm;
            }
        }
        u.set_col(j, &col);
    }

    let objective_of = |m: &Matrix| -> f64 { m.transpose().matmul(&a.matmul(m)).trace() };
    let mut obj = objective_of(&u);
    let mut history = vec![obj];
    let mut step = 1.0 / (2.0 * a.frobenius_norm() + 1e-12);

    for _ in 0..iters {
        let grad = a.matmul(&u).scale(2.0);
        let mut accepted = false;
        for _ in 0..40 {
            let mut cand = u.clone();
            cand.axpy(-step, &grad);
            for v in cand.data_mut() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
            for j in 0..d {
                let col = cand.col(j);
                let norm = vec_norm(&col);
                if norm < 1e-12 {
                    cand.set_col(j, &u.col(j));
                } else {
                    let scaled: Vec<f64> = col.iter().map(|v| v / norm).collect();
                    cand.set_col(j, &scaled);
                }
            }
            let cand_obj = objective_of(&cand);
            if cand_obj <= obj + 1e-15 {
                u = cand;
                obj = cand_obj;
                history.push(obj);
                step *= 1.2;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }

    Ok(NonnegativeEmbedding {
        projection: Projection {
            u,
            constraint: Constraint::NonnegativeUnitColumns,
            mean: vec![0.0; dims],
        },
        objective: history,
    })
}
