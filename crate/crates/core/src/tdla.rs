//! Tensor discriminative locality alignment on spectral-spatial windows.
//!
//! Each pixel becomes a `w x w x B` sub-cube. Discriminative patches are
//! built once on the vectorized tensors (k1 same-class and k2 other-class
//! neighbors, frozen through the alternation), and one projection matrix
//! per mode is learned by alternately minimizing the patch-weighted
//! projected-difference energy.

use crate::cube::{HsiCube, LabelRaster};
use crate::error::{Error, Result};
use crate::linalg::{pairwise_sq_dists, sym_eig};
use crate::matrix::Matrix;
use crate::tensor::{mode_product, unfold, DenseTensor};

/// One spectral-spatial training sample.
#[derive(Debug, Clone)]
pub struct TensorSample {
    pub tensor: DenseTensor,
    pub label: usize,
    pub origin: (usize, usize),
}

/// One projection matrix per mode, each with orthonormal columns mapping
/// `size_m -> reduced_m`.
#[derive(Debug, Clone)]
pub struct ModeProjections {
    pub u: Vec<Matrix>,
}

/// Result of [`tdla_fit`].
#[derive(Debug, Clone)]
pub struct TdlaFit {
    pub projections: ModeProjections,
    /// Patch-weighted objective after each outer sweep.
    pub objective: Vec<f64>,
}

/// Cut the `w x w x B` window around each listed pixel.
///
/// Window 1 degenerates to the bare spectrum as a `1 x 1 x B` tensor.
pub fn organize_spectral_spatial(
    cube: &HsiCube,
    labels: &LabelRaster,
    window: usize,
    pixels: &[(usize, usize)],
) -> Result<Vec<TensorSample>> {
    if window % 2 == 0 || window == 0 {
        return Err(Error::domain(format!("window must be odd, got {window}")));
    }
    if labels.rows() != cube.rows() || labels.cols() != cube.cols() {
        return Err(Error::shape("label raster does not match cube dimensions"));
    }
    let h = window / 2;
    let bands = cube.bands();
    let mut out = Vec::with_capacity(pixels.len());
    for &(r, c) in pixels {
        if r < h || c < h || r + h >= cube.rows() || c + h >= cube.cols() {
            return Err(Error::domain(format!(
                "pixel ({r}, {c}) too close to the border for window {window}"
            )));
        }
        let mut data = Vec::with_capacity(window * window * bands);
        for i in 0..window {
            for j in 0..window {
                for b in 0..bands {
                    data.push(cube.get(r - h + i, c - h + j, b));
                }
            }
        }
        out.push(TensorSample {
            tensor: DenseTensor::new(vec![window, window, bands], data)?,
            label: labels.get(r, c),
            origin: (r, c),
        });
    }
    Ok(out)
}

/// Discriminative pair list: (center, member, coefficient) with +1 on
/// same-class and -beta on other-class nearest neighbors, computed on the
/// vectorized tensors and frozen.
fn build_pairs(
    samples: &[TensorSample],
    k1: usize,
    k2: usize,
    beta: f64,
) -> Result<Vec<(usize, usize, f64)>> {
    let n = samples.len();
    let len = samples[0].tensor.data().len();
    let vecs = Matrix::from_fn(n, len, |i, j| samples[i].tensor.data()[j]);
    let dists = pairwise_sq_dists(&vecs);

    let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
    let mut counts = std::collections::BTreeMap::new();
    for &l in &labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    if counts.len() < 2 {
        return Err(Error::domain("tdla requires at least two classes"));
    }
    let smallest = *counts.values().min().unwrap();
    if smallest < k1 + 1 {
        return Err(Error::domain(format!(
            "tdla: smallest class has {smallest} samples, needs k1+1 = {}",
            k1 + 1
        )));
    }
    let largest = *counts.values().max().unwrap();
    if n - largest < k2 {
        return Err(Error::domain(format!(
            "tdla: only {} other-class samples for k2 = {k2}",
            n - largest
        )));
    }

    let mut pairs = Vec::with_capacity(n * (k1 + k2));
    for i in 0..n {
        let mut same: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        same.sort_by(|&a, &b| {
            dists[(i, a)].partial_cmp(&dists[(i, b)]).unwrap().then(a.cmp(&b))
        });
        for &j in same.iter().take(k1) {
            pairs.push((i, j, 1.0));
        }
        let mut other: Vec<usize> = (0..n).filter(|&j| labels[j] != labels[i]).collect();
        other.sort_by(|&a, &b| {
            dists[(i, a)].partial_cmp(&dists[(i, b)]).unwrap().then(a.cmp(&b))
        });
        for &j in other.iter().take(k2) {
            pairs.push((i, j, -beta));
        }
    }
    Ok(pairs)
}

/// Project a tensor on every mode except `skip` with the transposed
/// projections (size -> reduced).
fn project_except(t: &DenseTensor, u: &[Matrix], skip: usize) -> Result<DenseTensor> {
    let mut cur = t.clone();
    for (m, um) in u.iter().enumerate() {
        if m == skip {
            continue;
        }
        cur = mode_product(&cur, &um.transpose(), m)?;
    }
    Ok(cur)
}

fn project_all(t: &DenseTensor, u: &[Matrix]) -> Result<DenseTensor> {
    let mut cur = t.clone();
    for (m, um) in u.iter().enumerate() {
        cur = mode_product(&cur, &um.transpose(), m)?;
    }
    Ok(cur)
}

fn pair_objective(
    samples: &[TensorSample],
    pairs: &[(usize, usize, f64)],
    u: &[Matrix],
) -> Result<f64> {
    let projected: Vec<DenseTensor> = samples
        .iter()
        .map(|s| project_all(&s.tensor, u))
        .collect::<Result<_>>()?;
    let mut obj = 0.0;
    for &(c, j, coeff) in pairs {
        let diff = projected[c].sub(&projected[j]);
        let norm = diff.frobenius_norm();
        obj += coeff * norm * norm;
    }
    Ok(obj)
}

/// Alternating per-mode projection learning.
///
/// For each mode in turn (other modes fixed), the scatter
/// `S_m = sum coeff * D D^T` over the patch pairs' mode-m unfoldings is
/// assembled and `U_m` becomes its `d_m` smallest eigenvectors. The scalar
/// objective is nonincreasing across full sweeps; sweeps stop early when
/// its relative change drops below 1e-5.
pub fn tdla_fit(
    samples: &[TensorSample],
    reduced: &[usize],
    k1: usize,
    k2: usize,
    beta: f64,
    outer_iters: usize,
) -> Result<TdlaFit> {
    if samples.is_empty() {
        return Err(Error::domain("tdla: no samples"));
    }
    let shape = samples[0].tensor.shape().to_vec();
    if samples.iter().any(|s| s.tensor.shape() != shape.as_slice()) {
        return Err(Error::shape("tdla: samples disagree on tensor shape"));
    }
    let order = shape.len();
    if reduced.len() != order {
        return Err(Error::shape(format!(
            "tdla: {} reduced dims for an order-{order} tensor",
            reduced.len()
        )));
    }
    for (m, (&d, &s)) in reduced.iter().zip(&shape).enumerate() {
        if d == 0 || d > s {
            return Err(Error::domain(format!(
                "tdla: reduced dim {d} out of range for mode {m} of size {s}"
            )));
        }
    }

    let pairs = build_pairs(samples, k1, k2, beta)?;

    // Start from truncated identities.
    let mut u: Vec<Matrix> = shape
        .iter()
        .zip(reduced)
        .map(|(&s, &d)| Matrix::from_fn(s, d, |i, j| if i == j { 1.0 } else { 0.0 }))
        .collect();

    let mut objective = Vec::with_capacity(outer_iters);
    let mut prev = f64::INFINITY;
    for _sweep in 0..outer_iters {
        for m in 0..order {
            let projected: Vec<Matrix> = samples
                .iter()
                .map(|s| {
                    let t = project_except(&s.tensor, &u, m)?;
                    unfold(&t, m)
                })
                .collect::<Result<_>>()?;
            let size_m = shape[m];
            let mut scatter = Matrix::zeros(size_m, size_m);
            for &(c, j, coeff) in &pairs {
                let d = projected[c].sub(&projected[j]);
                // scatter += coeff * D D^T
                for row_a in 0..size_m {
                    for row_b in row_a..size_m {
                        let mut s = 0.0;
                        for col in 0..d.cols() {
                            s += d[(row_a, col)] * d[(row_b, col)];
                        }
                        scatter[(row_a, row_b)] += coeff * s;
                        if row_a != row_b {
                            scatter[(row_b, row_a)] += coeff * s;
                        }
                    }
                }
            }
            let pairs_m = sym_eig(&scatter)?;
            // d_m smallest eigenvalues, ascending.
            let cols: Vec<usize> = (size_m - reduced[m]..size_m).rev().collect();
            u[m] = pairs_m.vectors.select_cols(&cols);
        }
        let obj = pair_objective(samples, &pairs, &u)?;
        if !obj.is_finite() {
            return Err(Error::degenerate("tdla: non-finite objective"));
        }
        objective.push(obj);
        if prev.is_finite() && (prev - obj).abs() <= 1e-5 * obj.abs().max(1.0) {
            break;
        }
        prev = obj;
    }

    Ok(TdlaFit { projections: ModeProjections { u }, objective })
}

/// Apply the learned projections: `T x_0 U_0^T x_1 U_1^T x_2 U_2^T`.
pub fn tdla_transform(sample: &TensorSample, proj: &ModeProjections) -> Result<DenseTensor> {
    if proj.u.len() != sample.tensor.order() {
        return Err(Error::shape("tdla_transform: mode count mismatch"));
    }
    for (m, um) in proj.u.iter().enumerate() {
        if um.rows() != sample.tensor.shape()[m] {
            return Err(Error::shape(format!(
                "tdla_transform: mode {m} expects size {}, got {}",
                um.rows(),
                sample.tensor.shape()[m]
            )));
        }
    }
    project_all(&sample.tensor, &proj.u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::principal_angles;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ramp_cube(rows: usize, cols: usize, bands: usize) -> HsiCube {
        let mut data = Vec::new();
        for b in 0..bands {
            for r in 0..rows {
                for c in 0..cols {
                    data.push((r + c + b) as f64);
                }
            }
        }
        HsiCube::new(rows, cols, bands, data, None).unwrap()
    }

    fn full_raster(rows: usize, cols: usize, label: usize) -> LabelRaster {
        LabelRaster::new(rows, cols, vec![label; rows * cols]).unwrap()
    }

    #[test]
    fn window_one_is_the_bare_spectrum() {
        let cube = ramp_cube(4, 4, 3);
        let labels = full_raster(4, 4, 1);
        let samples = organize_spectral_spatial(&cube, &labels, 1, &[(2, 3)]).unwrap();
        assert_eq!(samples[0].tensor.shape(), &[1, 1, 3]);
        assert_eq!(samples[0].tensor.data(), cube.spectrum(2, 3).as_slice());
        assert_eq!(samples[0].label, 1);
    }

    #[test]
    fn window_three_on_constant_cube() {
        let cube = HsiCube::new(5, 5, 2, vec![2.5; 50], None).unwrap();
        let labels = full_raster(5, 5, 1);
        let samples = organize_spectral_spatial(&cube, &labels, 3, &[(2, 2)]).unwrap();
        assert!(samples[0].tensor.data().iter().all(|&v| v == 2.5));
        assert_eq!(samples[0].tensor.data().len(), 9 * 2);
    }

    #[test]
    fn window_three_matches_ramp_closed_form() {
        let cube = ramp_cube(8, 8, 4);
        let labels = full_raster(8, 8, 1);
        let samples = organize_spectral_spatial(&cube, &labels, 3, &[(5, 5)]).unwrap();
        let t = &samples[0].tensor;
        for i in 0..3 {
            for j in 0..3 {
                for b in 0..4 {
                    let want = ((5 + i - 1) + (5 + j - 1) + b) as f64;
                    assert_eq!(t.get(&[i, j, b]), want);
                }
            }
        }
    }

    #[test]
    fn organize_rejects_border_and_even_window() {
        let cube = ramp_cube(4, 4, 2);
        let labels = full_raster(4, 4, 1);
        assert!(organize_spectral_spatial(&cube, &labels, 2, &[(2, 2)]).is_err());
        assert!(organize_spectral_spatial(&cube, &labels, 3, &[(0, 2)]).is_err());
        assert!(organize_spectral_spatial(&cube, &labels, 3, &[(2, 3)]).is_err());
    }

    /// Two-class spectral-spatial samples where only the spectral mode
    /// carries class signal: spatial entries are noise, spectra live in a
    /// seeded 2-D subspace with class-specific coefficients.
    fn signal_in_spectral_mode(
        n_per_class: usize,
        w: usize,
        bands: usize,
        seed: u64,
    ) -> (Vec<TensorSample>, Matrix) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut b1: Vec<f64> = (0..bands).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm1: f64 = b1.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut b1 {
            *v /= norm1;
        }
        // Orthogonalize the second basis vector against the first.
        let mut b2: Vec<f64> = (0..bands).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dot: f64 = b1.iter().zip(&b2).map(|(a, b)| a * b).sum();
        for (v, a) in b2.iter_mut().zip(&b1) {
            *v -= dot * a;
        }
        let norm2: f64 = b2.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut b2 {
            *v /= norm2;
        }

        let mut samples = Vec::new();
        for class in 0..2usize {
            // Class-specific coefficient pattern in the signal plane.
            let (c1, c2) = if class == 0 { (3.0, 0.5) } else { (0.5, 3.0) };
            for _ in 0..n_per_class {
                let a1 = c1 + rng.gen_range(-0.2..0.2);
                let a2 = c2 + rng.gen_range(-0.2..0.2);
                let mut data = Vec::with_capacity(w * w * bands);
                for _ in 0..w * w {
                    let gain: f64 = 1.0 + rng.gen_range(-0.3..0.3);
                    for b in 0..bands {
                        let sig = a1 * b1[b] + a2 * b2[b];
                        data.push(gain * sig + rng.gen_range(-0.1..0.1));
                    }
                }
                samples.push(TensorSample {
                    tensor: DenseTensor::new(vec![w, w, bands], data).unwrap(),
                    label: class + 1,
                    origin: (0, 0),
                });
            }
        }
        let mut basis = Matrix::zeros(bands, 2);
        basis.set_col(0, &b1);
        basis.set_col(1, &b2);
        (samples, basis)
    }

    #[test]
    fn full_dims_reproduce_unprojected_objective() {
        let (samples, _) = signal_in_spectral_mode(8, 3, 6, 51);
        let fit = tdla_fit(&samples, &[3, 3, 6], 3, 3, 1.0, 3).unwrap();
        // With square orthonormal projections the objective equals the
        // unprojected patch objective.
        let identity = ModeProjections {
            u: vec![Matrix::identity(3), Matrix::identity(3), Matrix::identity(6)],
        };
        let pairs = build_pairs(&samples, 3, 3, 1.0).unwrap();
        let raw = pair_objective(&samples, &pairs, &identity.u).unwrap();
        let got = *fit.objective.last().unwrap();
        assert!(
            (got - raw).abs() <= 1e-7 * raw.abs().max(1.0),
            "objective {got} vs unprojected {raw}"
        );
        for um in &fit.projections.u {
            let gram = um.transpose().matmul(um);
            assert!(gram.sub(&Matrix::identity(gram.rows())).frobenius_norm() < 1e-7);
        }
    }

    #[test]
    fn spectral_projection_recovers_signal_subspace() {
        let (samples, basis) = signal_in_spectral_mode(12, 3, 10, 52);
        let fit = tdla_fit(&samples, &[3, 3, 2], 4, 4, 1.0, 5).unwrap();
        let angles = principal_angles(&fit.projections.u[2], &basis).unwrap();
        let max_angle = angles.iter().cloned().fold(0.0f64, f64::max);
        assert!(
            max_angle < 10f64.to_radians(),
            "principal angle {} deg",
            max_angle.to_degrees()
        );
    }

    #[test]
    fn objective_nonincreasing_over_sweeps() {
        let (samples, _) = signal_in_spectral_mode(10, 3, 8, 53);
        let fit = tdla_fit(&samples, &[2, 2, 3], 3, 3, 1.0, 5).unwrap();
        for w in fit.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-7, "objective rose: {:?}", fit.objective);
        }
    }

    #[test]
    fn transform_is_identity_under_identity_projections() {
        let (samples, _) = signal_in_spectral_mode(4, 3, 5, 54);
        let proj = ModeProjections {
            u: vec![Matrix::identity(3), Matrix::identity(3), Matrix::identity(5)],
        };
        let out = tdla_transform(&samples[0], &proj).unwrap();
        assert_eq!(out, samples[0].tensor);
    }

    #[test]
    fn transform_preserves_norm_inside_projected_subspaces() {
        // Build a tensor from a random core expanded through orthonormal
        // factors; projecting back recovers the core and the norm.
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let u0 = crate::linalg::orthonormal_columns(&Matrix::from_fn(4, 2, |_, _| {
            rng.gen_range(-1.0..1.0)
        }));
        let u1 = crate::linalg::orthonormal_columns(&Matrix::from_fn(5, 2, |_, _| {
            rng.gen_range(-1.0..1.0)
        }));
        let u2 = crate::linalg::orthonormal_columns(&Matrix::from_fn(6, 3, |_, _| {
            rng.gen_range(-1.0..1.0)
        }));
        let core = DenseTensor::new(
            vec![2, 2, 3],
            (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let mut t = core.clone();
        t = mode_product(&t, &u0, 0).unwrap();
        t = mode_product(&t, &u1, 1).unwrap();
        t = mode_product(&t, &u2, 2).unwrap();
        let sample = TensorSample { tensor: t.clone(), label: 1, origin: (0, 0) };
        let proj = ModeProjections { u: vec![u0, u1, u2] };
        let out = tdla_transform(&sample, &proj).unwrap();
        assert!((out.frobenius_norm() - t.frobenius_norm()).abs() < 1e-8);
        assert!(out.sub(&core).frobenius_norm() < 1e-10);
    }

    #[test]
    fn transform_matches_sequential_mode_products_and_contracts() {
        let mut rng = ChaCha8Rng::seed_from_u64(56);
        let t = DenseTensor::new(
            vec![3, 3, 4],
            (0..36).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let sample = TensorSample { tensor: t.clone(), label: 1, origin: (0, 0) };
        let u: Vec<Matrix> = [(3usize, 2usize), (3, 2), (4, 3)]
            .iter()
            .map(|&(s, d)| {
                crate::linalg::orthonormal_columns(&Matrix::from_fn(s, d, |_, _| {
                    rng.gen_range(-1.0..1.0)
                }))
            })
            .collect();
        let proj = ModeProjections { u: u.clone() };
        let got = tdla_transform(&sample, &proj).unwrap();
        let mut want = t.clone();
        for (m, um) in u.iter().enumerate() {
            want = mode_product(&want, &um.transpose(), m).unwrap();
        }
        assert_eq!(got, want);
        // Orthonormal-column projections are contractions.
        assert!(got.frobenius_norm() <= t.frobenius_norm() + 1e-12);
    }

    #[test]
    fn objective_invariant_to_sample_permutation() {
        let (samples, _) = signal_in_spectral_mode(8, 3, 6, 57);
        let fit = tdla_fit(&samples, &[2, 2, 3], 3, 3, 1.0, 4).unwrap();
        let mut perm: Vec<usize> = (0..samples.len()).collect();
        perm.reverse();
        let permuted: Vec<TensorSample> = perm.iter().map(|&i| samples[i].clone()).collect();
        let fitp = tdla_fit(&permuted, &[2, 2, 3], 3, 3, 1.0, 4).unwrap();
        let a = fit.objective.last().unwrap();
        let b = fitp.objective.last().unwrap();
        assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn window_one_full_dims_matches_vector_dla_span() {
        let (samples, _) = signal_in_spectral_mode(10, 1, 6, 58);
        let fit = tdla_fit(&samples, &[1, 1, 6], 3, 3, 1.0, 3).unwrap();

        let x = Matrix::from_fn(samples.len(), 6, |i, j| samples[i].tensor.data()[j]);
        let labels: Vec<usize> = samples.iter().map(|s| s.label - 1).collect();
        let data = crate::align::LabeledDataset::new(x, Some(labels)).unwrap();
        let params = crate::align::AlignParams { k1: 3, k2: 3, beta: 1.0, ..Default::default() };
        let proj = crate::align::fit_linear(crate::align::Method::Dla, &data, &params, 6).unwrap();

        let angles = principal_angles(&fit.projections.u[2], &proj.u).unwrap();
        for a in angles {
            assert!(a < 1e-4, "angle {a}");
        }
    }

    #[test]
    fn fit_validates_inputs() {
        let (samples, _) = signal_in_spectral_mode(4, 3, 5, 59);
        assert!(tdla_fit(&samples, &[3, 3], 2, 2, 1.0, 2).is_err());
        assert!(tdla_fit(&samples, &[3, 3, 9], 2, 2, 1.0, 2).is_err());
        assert!(tdla_fit(&samples, &[3, 3, 5], 4, 2, 1.0, 2).is_err());
        // Single class.
        let single: Vec<TensorSample> = samples
            .iter()
            .map(|s| TensorSample { label: 1, ..s.clone() })
            .collect();
        assert!(tdla_fit(&single, &[3, 3, 5], 2, 2, 1.0, 2).is_err());
    }
}
