//! Deterministic dense symmetric linear algebra.
//!
//! The eigensolver is a cyclic Jacobi iteration: simple, bit-reproducible
//! and accurate for the at-most-a-few-hundred-dimensional matrices this
//! crate produces. The generalized symmetric-definite problem is reduced to
//! the standard one through a Cholesky factor.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Relative symmetry tolerance required of eigensolver inputs.
const SYM_TOL: f64 = 1e-10;

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Eigenvalues, `values[i] >= values[i+1]`.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: Matrix,
}

fn check_symmetric_input(a: &Matrix, op: &str) -> Result<()> {
    if !a.is_square() {
        return Err(Error::shape(format!(
            "{op} requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.all_finite() {
        return Err(Error::domain(format!("{op} input has non-finite entries")));
    }
    if !a.is_symmetric(SYM_TOL) {
        return Err(Error::shape(format!("{op} requires a symmetric matrix")));
    }
    Ok(())
}

/// Frobenius norm of the strictly off-diagonal part.
fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Flip each eigenvector so its largest-magnitude component is positive.
///
/// Breaks the sign ambiguity reproducibly; ties go to the earliest index.
fn fix_vector_signs(vectors: &mut Matrix) {
    let (n, d) = (vectors.rows(), vectors.cols());
    for j in 0..d {
        let mut best = 0usize;
        let mut best_abs = 0.0f64;
        for i in 0..n {
            let a = vectors[(i, j)].abs();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        if vectors[(best, j)] < 0.0 {
            for i in 0..n {
                vectors[(i, j)] = -vectors[(i, j)];
            }
        }
    }
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Sweeps until the off-diagonal Frobenius norm drops below
/// `1e-12 * ||A||_F`, capped at 100 sweeps. Eigenvalues come back in plain
/// descending order with orthonormal eigenvectors in matching columns.
pub fn sym_eig(a: &Matrix) -> Result<EigenPairs> {
    check_symmetric_input(a, "sym_eig")?;
    let n = a.rows();
    let mut m = a.symmetrized();
    let mut v = Matrix::identity(n);
    let threshold = 1e-12 * a.frobenius_norm();

    for _sweep in 0..100 {
        if off_diagonal_norm(&m) <= threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                // Classic two-sided rotation choosing the smaller angle.
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Stable descending sort; equal eigenvalues keep rotation order.
    order.sort_by(|&i, &j| m[(j, j)].partial_cmp(&m[(i, i)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = v.select_cols(&order);
    fix_vector_signs(&mut vectors);

    Ok(EigenPairs { values, vectors })
}

/// Cholesky factorization `B = L L^T` of a symmetric positive-definite matrix.
///
/// A pivot below `1e-12 * trace(B) / n` (or non-positive) fails with a
/// not-positive-definite error.
pub fn cholesky(b: &Matrix) -> Result<Matrix> {
    check_symmetric_input(b, "cholesky")?;
    let n = b.rows();
    let pivot_floor = 1e-12 * b.trace() / n as f64;
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = b[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 || sum < pivot_floor {
                    return Err(Error::NotPositiveDefinite(format!(
                        "pivot {sum:.3e} at index {i} below floor {pivot_floor:.3e}"
                    )));
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solve `L X = B` for lower-triangular `L`, column by column.
fn solve_lower(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows();
    let m = b.cols();
    let mut x = Matrix::zeros(n, m);
    for col in 0..m {
        for i in 0..n {
            let mut sum = b[(i, col)];
            for k in 0..i {
                sum -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = sum / l[(i, i)];
        }
    }
    x
}

/// Solve `L^T X = B` for lower-triangular `L`, column by column.
fn solve_lower_transposed(l: &Matrix, b: &Matrix) -> Matrix {
    let n = l.rows();
    let m = b.cols();
    let mut x = Matrix::zeros(n, m);
    for col in 0..m {
        for i in (0..n).rev() {
            let mut sum = b[(i, col)];
            for k in (i + 1)..n {
                sum -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = sum / l[(i, i)];
        }
    }
    x
}

/// Generalized symmetric-definite eigenproblem `A v = lambda B v`.
///
/// Reduced via `B = L L^T` to a standard problem on `L^-1 A L^-T`; the
/// returned vectors are B-orthonormal (`v^T B v = 1`) and ordered by
/// descending eigenvalue.
pub fn gen_sym_eig(a: &Matrix, b: &Matrix) -> Result<EigenPairs> {
    check_symmetric_input(a, "gen_sym_eig")?;
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::shape(format!(
            "gen_sym_eig size mismatch: A is {}x{}, B is {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let l = cholesky(b)?;
    let w = solve_lower(&l, a);
    let c = solve_lower(&l, &w.transpose()).transpose().symmetrized();
    let pairs = sym_eig(&c)?;
    let mut vectors = solve_lower_transposed(&l, &pairs.vectors);
    fix_vector_signs(&mut vectors);
    Ok(EigenPairs { values: pairs.values, vectors })
}

/// Nearest positive-semidefinite matrix in Frobenius norm.
///
/// Clips negative eigenvalues at zero and recomposes.
pub fn psd_project(m: &Matrix) -> Result<Matrix> {
    check_symmetric_input(m, "psd_project")?;
    let pairs = sym_eig(m)?;
    let n = m.rows();
    let mut out = Matrix::zeros(n, n);
    for (k, &lam) in pairs.values.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let v = pairs.vectors.col(k);
        for i in 0..n {
            let share = lam * v[i];
            for j in 0..n {
                out[(i, j)] += share * v[j];
            }
        }
    }
    Ok(out.symmetrized())
}

/// Squared Euclidean distances between the rows of `x`.
///
/// Symmetric with a zero diagonal; entries are clamped at zero.
pub fn pairwise_sq_dists(x: &Matrix) -> Matrix {
    let n = x.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut s = 0.0;
            for (a, b) in x.row(i).iter().zip(x.row(j)) {
                let diff = a - b;
                s += diff * diff;
            }
            let s = s.max(0.0);
            d[(i, j)] = s;
            d[(j, i)] = s;
        }
    }
    d
}

/// Orthonormalize the columns of `m` by modified Gram-Schmidt, dropping
/// columns that become numerically zero.
pub fn orthonormal_columns(m: &Matrix) -> Matrix {
    let (n, d) = (m.rows(), m.cols());
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = m.col(j);
        for q in &cols {
            let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for vi in &mut v {
                *vi /= norm;
            }
            cols.push(v);
        }
    }
    let mut out = Matrix::zeros(n, cols.len().max(1));
    for (j, v) in cols.iter().enumerate() {
        out.set_col(j, v);
    }
    out
}

/// Principal angles (radians, ascending) between the column spans of `a`
/// and `b`.
///
/// Small angles come from the sine route (complement residual), which stays
/// accurate where `acos` of a near-unit cosine would not.
pub fn principal_angles(a: &Matrix, b: &Matrix) -> Result<Vec<f64>> {
    if a.rows() != b.rows() {
        return Err(Error::shape("principal_angles: ambient dimensions differ"));
    }
    let qa = orthonormal_columns(a);
    let qb = orthonormal_columns(b);
    let m = qa.transpose().matmul(&qb);
    let cos2 = sym_eig(&m.transpose().matmul(&m).symmetrized())?.values;
    let resid = qb.sub(&qa.matmul(&m));
    let mut sin2 = sym_eig(&resid.transpose().matmul(&resid).symmetrized())?.values;
    sin2.reverse(); // ascending angles pair with descending cosines
    Ok(cos2
        .iter()
        .zip(&sin2)
        .map(|(&c2, &s2)| {
            if c2 > 0.5 {
                s2.clamp(0.0, 1.0).sqrt().asin()
            } else {
                c2.clamp(0.0, 1.0).sqrt().acos()
            }
        })
        .collect())
}
