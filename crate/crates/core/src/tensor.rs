//! Dense N-mode tensor algebra and greedy rank-1 decomposition.
//!
//! Tensors are stored in lexicographic index order with the last index
//! fastest. Mode-k unfolding uses the cyclic column convention: the columns
//! of `unfold(t, k)` enumerate the remaining modes in the order
//! `k+1, k+2, ...` (wrapping), first listed slowest. `fold` is the exact
//! inverse for every mode.

use crate::error::{Error, Result};
use crate::linalg::sym_eig;
use crate::matrix::{vec_norm, Matrix};

/// Dense real tensor of arbitrary order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// One term of a rank-1 decomposition: `weight * a_1 (x) a_2 (x) ...`
/// with unit-norm factors.
#[derive(Debug, Clone)]
pub struct RankOneTerm {
    pub weight: f64,
    pub factors: Vec<Vec<f64>>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.iter().any(|&s| s == 0) {
            return Err(Error::shape("tensor mode sizes must all be >= 1"));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::shape(format!(
                "tensor data length {} does not match shape {:?}",
                data.len(),
                shape
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("tensor contains non-finite entries"));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Self { shape, data: vec![0.0; len] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Row-major strides (last index fastest).
    fn strides(&self) -> Vec<usize> {
        let d = self.shape.len();
        let mut s = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.shape[k + 1];
        }
        s
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        let strides = self.strides();
        let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.data[flat]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let strides = self.strides();
        let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
        self.data[flat] = v;
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &DenseTensor) -> DenseTensor {
        assert_eq!(self.shape, other.shape);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        DenseTensor { shape: self.shape.clone(), data }
    }

    pub fn add(&self, other: &DenseTensor) -> DenseTensor {
        assert_eq!(self.shape, other.shape);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        DenseTensor { shape: self.shape.clone(), data }
    }

    /// Flatten to a vector, lexicographic order.
    pub fn to_vec(&self) -> Vec<f64> {
        self.data.clone()
    }
}

/// Cyclic mode order for unfolding: `mode+1, mode+2, ...` wrapping, with
/// the first listed mode slowest. Returns per-mode column weights.
fn unfold_weights(shape: &[usize], mode: usize) -> Vec<usize> {
    let d = shape.len();
    let order: Vec<usize> = (1..d).map(|off| (mode + off) % d).collect();
    let mut weights = vec![0usize; d];
    let mut w = 1usize;
    for &m in order.iter().rev() {
        weights[m] = w;
        w *= shape[m];
    }
    weights
}

/// Mode-k matricization under the cyclic column convention.
pub fn unfold(t: &DenseTensor, mode: usize) -> Result<Matrix> {
    let d = t.order();
    if mode >= d {
        return Err(Error::shape(format!(
            "unfold mode {mode} out of range for order-{d} tensor"
        )));
    }
    let rows = t.shape[mode];
    let cols: usize = t.shape.iter().product::<usize>() / rows;
    let weights = unfold_weights(&t.shape, mode);
    let mut out = Matrix::zeros(rows, cols);

    let mut idx = vec![0usize; d];
    for &v in &t.data {
        let row = idx[mode];
        let col: usize = (0..d).filter(|&m| m != mode).map(|m| idx[m] * weights[m]).sum();
        out[(row, col)] = v;
        // Advance the multi-index, last mode fastest.
        for m in (0..d).rev() {
            idx[m] += 1;
            if idx[m] < t.shape[m] {
                break;
            }
            idx[m] = 0;
        }
    }
    Ok(out)
}

/// Inverse of [`unfold`]: rebuild the tensor of the given shape from its
/// mode-k matricization.
pub fn fold(m: &Matrix, mode: usize, shape: &[usize]) -> Result<DenseTensor> {
    let d = shape.len();
    if mode >= d {
        return Err(Error::shape(format!(
            "fold mode {mode} out of range for shape {shape:?}"
        )));
    }
    let expected_rows = shape[mode];
    let expected_cols: usize = shape.iter().product::<usize>() / expected_rows;
    if m.rows() != expected_rows || m.cols() != expected_cols {
        return Err(Error::shape(format!(
            "fold: matrix {}x{} inconsistent with shape {:?} on mode {}",
            m.rows(),
            m.cols(),
            shape,
            mode
        )));
    }
    let weights = unfold_weights(shape, mode);
    let mut t = DenseTensor::zeros(shape.to_vec());
    let d_total = t.data.len();
    let mut idx = vec![0usize; d];
    for flat in 0..d_total {
        let row = idx[mode];
        let col: usize = (0..d).filter(|&k| k != mode).map(|k| idx[k] * weights[k]).sum();
        t.data[flat] = m[(row, col)];
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(t)
}

/// Mode-k product: multiply `u` into mode `k` of `t`.
pub fn mode_product(t: &DenseTensor, u: &Matrix, mode: usize) -> Result<DenseTensor> {
    if mode >= t.order() {
        return Err(Error::shape(format!(
            "mode_product mode {mode} out of range for order-{} tensor",
            t.order()
        )));
    }
    if u.cols() != t.shape[mode] {
        return Err(Error::shape(format!(
            "mode_product: matrix has {} columns but mode {} has size {}",
            u.cols(),
            mode,
            t.shape[mode]
        )));
    }
    let unfolded = unfold(t, mode)?;
    let product = u.matmul(&unfolded);
    let mut new_shape = t.shape.clone();
    new_shape[mode] = u.rows();
    fold(&product, mode, &new_shape)
}

impl RankOneTerm {
    /// Expand the term back into a dense tensor.
    pub fn expand(&self) -> DenseTensor {
        let shape: Vec<usize> = self.factors.iter().map(|f| f.len()).collect();
        // Successive Kronecker products match lexicographic layout.
        let mut data = vec![self.weight];
        for f in &self.factors {
            let mut next = Vec::with_capacity(data.len() * f.len());
            for &a in &data {
                for &b in f {
                    next.push(a * b);
                }
            }
            data = next;
        }
        DenseTensor { shape, data }
    }
}

/// Contract `t` with every listed factor except the one for `skip`,
/// yielding the vector along mode `skip`.
fn contract_except(t: &DenseTensor, factors: &[Vec<f64>], skip: usize) -> Vec<f64> {
    let mut cur = t.clone();
    // Collapse each mode other than `skip` to size 1; mode indices are
    // preserved because collapsed modes keep a singleton axis.
    for m in 0..t.order() {
        if m == skip {
            continue;
        }
        let row = Matrix::new(1, factors[m].len(), factors[m].clone()).expect("factor row");
        cur = mode_product(&cur, &row, m).expect("contract shapes agree");
    }
    cur.data
}

/// Best rank-1 approximation by alternating least squares.
///
/// Initialization is the leading eigenvector of `unfold(t,k) unfold(t,k)^T`
/// per mode — deterministic, no random restarts. Stops when the relative
/// weight change drops below `tol` or after `max_iters` sweeps. The first
/// factor's largest-magnitude component is forced positive, with the sign
/// absorbed into the weight.
pub fn rank1_fit(t: &DenseTensor, max_iters: usize, tol: f64) -> Result<RankOneTerm> {
    if t.order() < 2 {
        return Err(Error::shape("rank1_fit requires an order >= 2 tensor"));
    }
    if t.frobenius_norm() == 0.0 {
        return Err(Error::degenerate("rank1_fit on identically zero tensor"));
    }

    let d = t.order();
    let mut factors: Vec<Vec<f64>> = Vec::with_capacity(d);
    for mode in 0..d {
        let m = unfold(t, mode)?;
        let gram = m.matmul(&m.transpose()).symmetrized();
        let pairs = sym_eig(&gram)?;
        factors.push(pairs.vectors.col(0));
    }

    let mut weight = {
        let v = contract_except(t, &factors, d - 1);
        vec_dot_here(&v, &factors[d - 1])
    };

    for _ in 0..max_iters {
        for mode in 0..d {
            let v = contract_except(t, &factors, mode);
            let norm = vec_norm(&v);
            if norm > 1e-300 {
                factors[mode] = v.iter().map(|x| x / norm).collect();
            }
        }
        let new_weight = {
            let v = contract_except(t, &factors, d - 1);
            vec_dot_here(&v, &factors[d - 1])
        };
        let rel = (new_weight.abs() - weight.abs()).abs() / new_weight.abs().max(1e-300);
        weight = new_weight;
        if rel < tol {
            break;
        }
    }

    // Sign convention on the first factor.
    let first = &factors[0];
    let mut best = 0usize;
    let mut best_abs = 0.0f64;
    for (i, &x) in first.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if first[best] < 0.0 {
        for x in &mut factors[0] {
            *x = -*x;
        }
        weight = -weight;
    }

    Ok(RankOneTerm { weight, factors })
}

fn vec_dot_here(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy rank-1 deflation, returning the extracted terms and the final
/// residual. Terms come back sorted by `|weight|` descending.
pub fn r1td_decompose_full(t: &DenseTensor, k: usize) -> Result<(Vec<RankOneTerm>, DenseTensor)> {
    if k == 0 {
        return Err(Error::domain("r1td: k must be >= 1"));
    }
    let norm0 = t.frobenius_norm();
    let mut residual = t.clone();
    let mut terms: Vec<RankOneTerm> = Vec::new();
    for _ in 0..k {
        if residual.frobenius_norm() <= 1e-12 * norm0 {
            break;
        }
        let term = rank1_fit(&residual, 100, 1e-8)?;
        let expanded = term.expand();
        residual = residual.sub(&expanded);
        terms.push(term);
    }
    terms.sort_by(|a, b| b.weight.abs().partial_cmp(&a.weight.abs()).unwrap());
    Ok((terms, residual))
}

/// Greedy rank-1 deflation; see [`r1td_decompose_full`].
pub fn r1td_decompose(t: &DenseTensor, k: usize) -> Result<Vec<RankOneTerm>> {
    Ok(r1td_decompose_full(t, k)?.0)
}

/// Reconstruct from the top-k rank-1 terms by weight intensity.
pub fn r1td_denoise(t: &DenseTensor, k: usize) -> Result<DenseTensor> {
    let terms = r1td_decompose(t, k)?;
    let mut out = DenseTensor::zeros(t.shape.to_vec());
    for term in &terms {
        let e = term.expand();
        for (o, v) in out.data.iter_mut().zip(e.data()) {
            *o += v;
        }
    }
    Ok(out)
}

/// Smallest k whose terms hold at least `energy_fraction` of the total
/// extracted squared-weight energy; used by the CLI's `--energy` option.
pub fn energy_truncation(terms: &[RankOneTerm], energy_fraction: f64) -> usize {
    let total: f64 = terms.iter().map(|t| t.weight * t.weight).sum();
    if total == 0.0 {
        return terms.len();
    }
    let mut acc = 0.0;
    for (i, t) in terms.iter().enumerate() {
        acc += t.weight * t.weight;
        if acc >= energy_fraction * total {
            return i + 1;
        }
    }
    terms.len()
}
