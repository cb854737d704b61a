//! Support tensor machine on spectral-textural feature tensors.
//!
//! A Gabor bank summarizes local texture of the band-mean image; each
//! pixel's window becomes an order-2 tensor (window positions x feature
//! channels), and a linear SVM is trained alternately along each tensor
//! mode so the weight stays a rank-1 outer product `u v^T`.

use crate::cube::HsiCube;
use crate::error::{Error, Result};
use crate::matrix::{vec_dot, vec_norm, Matrix};
use crate::tensor::DenseTensor;

// ---------------------------------------------------------------------------
// Gabor texture features
// ---------------------------------------------------------------------------

/// A bank of zero-mean real Gabor kernels.
#[derive(Debug, Clone)]
pub struct GaborBank {
    pub kernels: Vec<Matrix>,
    pub orientations: Vec<f64>,
    pub wavelengths: Vec<f64>,
    pub size: usize,
}

impl GaborBank {
    /// Build kernels for every (wavelength, orientation) pair, wavelength
    /// major. Gaussian envelope sigma is half the wavelength; each kernel
    /// is DC-corrected by mean subtraction.
    pub fn new(orientations: &[f64], wavelengths: &[f64], size: usize) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(Error::domain("gabor kernel size must be odd"));
        }
        if wavelengths.iter().any(|&w| w <= 0.0) {
            return Err(Error::domain("gabor wavelengths must be positive"));
        }
        let h = (size / 2) as isize;
        let mut kernels = Vec::new();
        for &lambda in wavelengths {
            let sigma = 0.5 * lambda;
            for &theta in orientations {
                let (sin_t, cos_t) = theta.sin_cos();
                let mut k = Matrix::zeros(size, size);
                for row in -h..=h {
                    for col in -h..=h {
                        // x' points along the direction of sinusoidal
                        // variation; theta = 0 varies along columns.
                        let x = col as f64 * cos_t + row as f64 * sin_t;
                        let y = -(col as f64) * sin_t + row as f64 * cos_t;
                        let envelope = (-(x * x + y * y) / (2.0 * sigma * sigma)).exp();
                        let carrier = (2.0 * std::f64::consts::PI * x / lambda).cos();
                        k[((row + h) as usize, (col + h) as usize)] = envelope * carrier;
                    }
                }
                let mean = k.data().iter().sum::<f64>() / (size * size) as f64;
                for v in k.data_mut() {
                    *v -= mean;
                }
                kernels.push(k);
            }
        }
        Ok(Self {
            kernels,
            orientations: orientations.to_vec(),
            wavelengths: wavelengths.to_vec(),
            size,
        })
    }

    /// Four orientations (0, 45, 90, 135 degrees) by wavelengths 4 and 8
    /// pixels, kernel size 11.
    pub fn default_bank() -> Self {
        let orientations: Vec<f64> =
            [0.0f64, 45.0, 90.0, 135.0].iter().map(|d| d.to_radians()).collect();
        Self::new(&orientations, &[4.0, 8.0], 11).expect("default bank parameters are valid")
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }
}

/// Symmetric reflection with edge repeat for out-of-range coordinates.
fn reflect(mut t: isize, n: isize) -> usize {
    loop {
        if t < 0 {
            t = -t - 1;
        } else if t >= n {
            t = 2 * n - 1 - t;
        } else {
            return t as usize;
        }
    }
}

/// Per-pixel texture features: each kernel is correlated with the
/// band-mean image under reflect padding and the response magnitude is
/// taken. Output is (rows*cols) x G in raster-scan order.
pub fn gabor_features(cube: &HsiCube, bank: &GaborBank) -> Result<Matrix> {
    let (rows, cols) = (cube.rows(), cube.cols());
    if bank.size > rows || bank.size > cols {
        return Err(Error::shape(format!(
            "gabor kernel size {} exceeds image {}x{}",
            bank.size, rows, cols
        )));
    }
    let image = cube.band_mean_image();
    let h = (bank.size / 2) as isize;
    let g = bank.len();
    let mut out = Matrix::zeros(rows * cols, g);
    for (ki, kernel) in bank.kernels.iter().enumerate() {
        for r in 0..rows as isize {
            for c in 0..cols as isize {
                let mut acc = 0.0;
                for i in -h..=h {
                    for j in -h..=h {
                        let rr = reflect(r + i, rows as isize);
                        let cc = reflect(c + j, cols as isize);
                        acc += kernel[((i + h) as usize, (j + h) as usize)] * image[(rr, cc)];
                    }
                }
                out[((r as usize) * cols + c as usize, ki)] = acc.abs();
            }
        }
    }
    Ok(out)
}

/// Order-2 multifeature tensor for one pixel: rows are the window
/// positions (row-major), columns are the B spectral values followed by
/// the G texture values at that position.
pub fn build_feature_tensor(
    cube: &HsiCube,
    pixel: (usize, usize),
    window: usize,
    texture: &Matrix,
) -> Result<DenseTensor> {
    if window % 2 == 0 || window == 0 {
        return Err(Error::domain(format!("window must be odd, got {window}")));
    }
    let (r, c) = pixel;
    let h = window / 2;
    if r < h || c < h || r + h >= cube.rows() || c + h >= cube.cols() {
        return Err(Error::domain(format!(
            "pixel ({r}, {c}) too close to the border for window {window}"
        )));
    }
    if texture.rows() != cube.rows() * cube.cols() {
        return Err(Error::shape("texture matrix rows must cover every pixel"));
    }
    let bands = cube.bands();
    let g = texture.cols();
    let mut data = Vec::with_capacity(window * window * (bands + g));
    for i in 0..window {
        for j in 0..window {
            let (pr, pc) = (r - h + i, c - h + j);
            for b in 0..bands {
                data.push(cube.get(pr, pc, b));
            }
            data.extend_from_slice(texture.row(pr * cube.cols() + pc));
        }
    }
    DenseTensor::new(vec![window * window, bands + g], data)
}

// ---------------------------------------------------------------------------
// Linear SVM by deterministic subgradient descent
// ---------------------------------------------------------------------------

fn svm_objective(x: &Matrix, y: &[f64], c: f64, w: &[f64], b: f64) -> f64 {
    let mut obj = 0.5 * vec_dot(w, w);
    for i in 0..x.rows() {
        let margin = y[i] * (vec_dot(x.row(i), w) + b);
        obj += c * (1.0 - margin).max(0.0);
    }
    obj
}

/// Full-batch projected subgradient minimization of
/// `0.5 ||w||^2 + c sum hinge(y (w x + b))` with step `1/t`, keeping the
/// best iterate by objective.
pub fn svm_train_linear(
    x: &Matrix,
    y: &[f64],
    c: f64,
    iters: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = x.rows();
    if y.len() != n {
        return Err(Error::shape("svm: label count does not match sample count"));
    }
    if c <= 0.0 {
        return Err(Error::domain("svm: c must be positive"));
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::domain("svm: labels must be +1 or -1"));
    }
    let pos = y.iter().filter(|&&v| v > 0.0).count();
    if pos == 0 || pos == n {
        return Err(Error::domain("svm: both classes must be present"));
    }

    let d = x.cols();
    let radius = (2.0 * c * n as f64).sqrt();
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut best_w = w.clone();
    let mut best_b = b;
    let mut best_obj = svm_objective(x, y, c, &w, b);

    for t in 1..=iters {
        let mut grad_w = w.clone();
        let mut grad_b = 0.0;
        for i in 0..n {
            let margin = y[i] * (vec_dot(x.row(i), &w) + b);
            if margin < 1.0 {
                for (g, &xv) in grad_w.iter_mut().zip(x.row(i)) {
                    *g -= c * y[i] * xv;
                }
                grad_b -= c * y[i];
            }
        }
        let step = 1.0 / t as f64;
        for (wv, g) in w.iter_mut().zip(&grad_w) {
            *wv -= step * g;
        }
        b -= step * grad_b;
        // Projection onto the ball that must contain the optimum.
        let norm = vec_norm(&w);
        if norm > radius {
            let s = radius / norm;
            for wv in &mut w {
                *wv *= s;
            }
        }
        let obj = svm_objective(x, y, c, &w, b);
        if obj < best_obj {
            best_obj = obj;
            best_w = w.clone();
            best_b = b;
        }
    }
    Ok((best_w, best_b))
}

// ---------------------------------------------------------------------------
// Support tensor machine
// ---------------------------------------------------------------------------

/// Rank-1 tensor classifier: decision value `u^T X v + bias` with unit
/// `u` (scale absorbed into `v`).
#[derive(Debug, Clone)]
pub struct StmModel {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub bias: f64,
    pub c: f64,
}

const STM_INNER_ITERS: usize = 500;

/// Alternating rank-1 SVM training on order-2 tensors.
///
/// With `u` fixed, a linear SVM on `X_i^T u` yields `v` and the bias; with
/// `v` fixed, a linear SVM on `X_i v` yields `u`, which is renormalized
/// with its scale absorbed into `v`. Stops when the relative change of
/// `(u, v)` drops below 1e-4 or after `outer_iters` rounds.
pub fn stm_train(
    tensors: &[DenseTensor],
    y: &[f64],
    c: f64,
    outer_iters: usize,
) -> Result<StmModel> {
    if tensors.is_empty() {
        return Err(Error::domain("stm: no training tensors"));
    }
    if tensors.iter().any(|t| t.order() != 2) {
        return Err(Error::shape("stm: tensors must be order 2"));
    }
    let shape = tensors[0].shape().to_vec();
    if tensors.iter().any(|t| t.shape() != shape.as_slice()) {
        return Err(Error::shape("stm: tensors disagree on shape"));
    }
    if tensors.iter().all(|t| t.frobenius_norm() == 0.0) {
        return Err(Error::degenerate("stm: all training tensors are zero"));
    }
    let (rows, cols) = (shape[0], shape[1]);

    let mut u = vec![1.0 / (rows as f64).sqrt(); rows];
    let mut v = vec![0.0f64; cols];
    let mut bias = 0.0f64;

    for _ in 0..outer_iters {
        let u_prev = u.clone();
        let v_prev = v.clone();

        // Fix u, learn v: samples are X_i^T u.
        let xv = Matrix::from_fn(tensors.len(), cols, |i, j| {
            let t = &tensors[i];
            (0..rows).map(|p| u[p] * t.data()[p * cols + j]).sum()
        });
        let (v_new, b_new) = svm_train_linear(&xv, y, c, STM_INNER_ITERS)?;
        v = v_new;
        bias = b_new;

        // Fix v, learn u: samples are X_i v.
        let xu = Matrix::from_fn(tensors.len(), rows, |i, p| {
            let t = &tensors[i];
            vec_dot(&t.data()[p * cols..(p + 1) * cols], &v)
        });
        let (u_raw, b_new) = svm_train_linear(&xu, y, c, STM_INNER_ITERS)?;
        let scale = vec_norm(&u_raw);
        if scale > 1e-300 {
            u = u_raw.iter().map(|x| x / scale).collect();
            for vv in &mut v {
                *vv *= scale;
            }
            bias = b_new;
        }

        let du = u.iter().zip(&u_prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let dv = v.iter().zip(&v_prev).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let rel = du / vec_norm(&u_prev).max(1.0) + dv / vec_norm(&v_prev).max(1.0);
        if rel < 1e-4 {
            break;
        }
    }

    Ok(StmModel { u, v, bias, c })
}

/// Decision value and label for one tensor; `sign(0)` is `+1`.
pub fn stm_predict(tensor: &DenseTensor, model: &StmModel) -> Result<(i8, f64)> {
    if tensor.order() != 2 {
        return Err(Error::shape("stm_predict: tensor must be order 2"));
    }
    let (rows, cols) = (tensor.shape()[0], tensor.shape()[1]);
    if rows != model.u.len() || cols != model.v.len() {
        return Err(Error::shape(format!(
            "stm_predict: tensor {}x{} does not match model {}x{}",
            rows,
            cols,
            model.u.len(),
            model.v.len()
        )));
    }
    let mut score = model.bias;
    for p in 0..rows {
        let row_dot = vec_dot(&tensor.data()[p * cols..(p + 1) * cols], &model.v);
        score += model.u[p] * row_dot;
    }
    let label = if score >= 0.0 { 1 } else { -1 };
    Ok((label, score))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn constant_cube(rows: usize, cols: usize, bands: usize, v: f64) -> HsiCube {
        HsiCube::new(rows, cols, bands, vec![v; rows * cols * bands], None).unwrap()
    }

    #[test]
    fn kernels_are_zero_mean_and_bank_sized() {
        let bank = GaborBank::default_bank();
        assert_eq!(bank.len(), 8);
        for k in &bank.kernels {
            let mean = k.data().iter().sum::<f64>() / (bank.size * bank.size) as f64;
            assert!(mean.abs() < 1e-6);
        }
        assert!(GaborBank::new(&[0.0], &[4.0], 10).is_err());
    }

    #[test]
    fn constant_image_has_zero_features() {
        let cube = constant_cube(16, 16, 3, 7.5);
        let bank = GaborBank::default_bank();
        let feats = gabor_features(&cube, &bank).unwrap();
        let max = feats.data().iter().cloned().fold(0.0f64, f64::max);
        assert!(max < 1e-8, "max response {max}");
    }

    #[test]
    fn stripes_excite_matching_orientation() {
        // Vertical stripes varying along columns at wavelength 4.
        let (rows, cols) = (24, 24);
        let mut data = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let _ = r;
                let v = 1.0 + (2.0 * std::f64::consts::PI * c as f64 / 4.0).cos();
                data.push(v);
            }
        }
        let cube = HsiCube::new(rows, cols, 1, data, None).unwrap();
        let bank = GaborBank::default_bank();
        let feats = gabor_features(&cube, &bank).unwrap();
        // Kernel 0 is wavelength 4 at 0 degrees, kernel 2 at 90 degrees.
        let center = (rows / 2) * cols + cols / 2;
        assert!(
            feats[(center, 0)] > 10.0 * feats[(center, 2)],
            "0deg {} vs 90deg {}",
            feats[(center, 0)],
            feats[(center, 2)]
        );
    }

    #[test]
    fn impulse_reads_kernel_center() {
        let (rows, cols) = (15, 15);
        let mut data = vec![0.0; rows * cols];
        data[(rows / 2) * cols + cols / 2] = 1.0;
        let cube = HsiCube::new(rows, cols, 1, data, None).unwrap();
        let bank = GaborBank::default_bank();
        let feats = gabor_features(&cube, &bank).unwrap();
        let center = (rows / 2) * cols + cols / 2;
        for (ki, k) in bank.kernels.iter().enumerate() {
            let want = k[(bank.size / 2, bank.size / 2)].abs();
            assert!((feats[(center, ki)] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn features_invariant_to_constant_offset() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let (rows, cols) = (14, 14);
        let base: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.0..1.0)).collect();
        let cube_a = HsiCube::new(rows, cols, 1, base.clone(), None).unwrap();
        let shifted: Vec<f64> = base.iter().map(|v| v + 5.0).collect();
        let cube_b = HsiCube::new(rows, cols, 1, shifted, None).unwrap();
        let bank = GaborBank::default_bank();
        let fa = gabor_features(&cube_a, &bank).unwrap();
        let fb = gabor_features(&cube_b, &bank).unwrap();
        assert!(fa.sub(&fb).frobenius_norm() < 1e-8);
    }

    #[test]
    fn gabor_rejects_kernel_larger_than_image() {
        let cube = constant_cube(8, 8, 1, 1.0);
        let bank = GaborBank::default_bank(); // size 11 > 8
        assert!(gabor_features(&cube, &bank).is_err());
    }

    #[test]
    fn feature_tensor_window_one_concatenates() {
        let cube = constant_cube(5, 5, 3, 2.0);
        let texture = Matrix::from_fn(25, 2, |i, j| (i * 2 + j) as f64);
        let t = build_feature_tensor(&cube, (2, 3), 1, &texture).unwrap();
        assert_eq!(t.shape(), &[1, 5]);
        let want = [2.0, 2.0, 2.0, (2 * 5 + 3) as f64 * 2.0, (2 * 5 + 3) as f64 * 2.0 + 1.0];
        for (got, want) in t.data().iter().zip(&want) {
            assert_eq!(got, want);
        }
    }

    #[test]
    fn feature_tensor_constant_inputs_give_identical_rows() {
        let cube = constant_cube(7, 7, 2, 1.5);
        let texture = Matrix::from_fn(49, 3, |_, j| j as f64);
        let t = build_feature_tensor(&cube, (3, 3), 3, &texture).unwrap();
        assert_eq!(t.shape(), &[9, 5]);
        let first: Vec<f64> = t.data()[0..5].to_vec();
        for row in 1..9 {
            assert_eq!(&t.data()[row * 5..(row + 1) * 5], first.as_slice());
        }
    }

    #[test]
    fn feature_tensor_matches_ramp_closed_form() {
        let (rows, cols, bands) = (9, 9, 2);
        let mut data = Vec::new();
        for b in 0..bands {
            for r in 0..rows {
                for c in 0..cols {
                    data.push((r + c + b) as f64);
                }
            }
        }
        let cube = HsiCube::new(rows, cols, bands, data, None).unwrap();
        let texture = Matrix::zeros(rows * cols, 1);
        let t = build_feature_tensor(&cube, (4, 4), 3, &texture).unwrap();
        assert_eq!(t.shape(), &[9, 3]);
        for i in 0..3 {
            for j in 0..3 {
                let (pr, pc) = (3 + i, 3 + j);
                for b in 0..2 {
                    assert_eq!(t.data()[(i * 3 + j) * 3 + b], (pr + pc + b) as f64);
                }
            }
        }
        // Border violation.
        assert!(build_feature_tensor(&cube, (0, 4), 3, &texture).is_err());
    }

    #[test]
    fn svm_separable_pair() {
        let x = Matrix::new(2, 1, vec![-1.0, 1.0]).unwrap();
        let y = [-1.0, 1.0];
        let (w, b) = svm_train_linear(&x, &y, 10.0, 300).unwrap();
        assert!(w[0] > 0.0);
        for i in 0..2 {
            let pred = (w[0] * x[(i, 0)] + b).signum();
            assert_eq!(pred, y[i]);
        }
    }

    #[test]
    fn svm_separable_blobs_reach_full_accuracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let n = 40;
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            rows.push(3.0 * s + rng.gen_range(-0.5..0.5));
            rows.push(rng.gen_range(-1.0..1.0));
            y.push(s);
        }
        let x = Matrix::new(n, 2, rows).unwrap();
        let (w, b) = svm_train_linear(&x, &y, 1.0, 500).unwrap();
        for i in 0..n {
            let score = vec_dot(x.row(i), &w) + b;
            assert!(score * y[i] > 0.0, "sample {i} misclassified");
        }
    }

    #[test]
    fn svm_weight_norm_shrinks_with_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(85);
        let n = 30;
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            rows.push(s + rng.gen_range(-1.2..1.2));
            rows.push(rng.gen_range(-1.0..1.0));
            y.push(s);
        }
        let x = Matrix::new(n, 2, rows).unwrap();
        let (w_hi, _) = svm_train_linear(&x, &y, 1.0, 400).unwrap();
        let (w_lo, _) = svm_train_linear(&x, &y, 0.1, 400).unwrap();
        assert!(vec_norm(&w_lo) <= vec_norm(&w_hi) + 1e-12);
    }

    #[test]
    fn svm_objective_never_exceeds_start() {
        let mut rng = ChaCha8Rng::seed_from_u64(87);
        let x = Matrix::from_fn(20, 3, |_, _| rng.gen_range(-1.0..1.0));
        let y: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let (w, b) = svm_train_linear(&x, &y, 2.0, 100).unwrap();
        let initial = svm_objective(&x, &y, 2.0, &vec![0.0; 3], 0.0);
        assert!(svm_objective(&x, &y, 2.0, &w, b) <= initial);
    }

    #[test]
    fn svm_rejects_single_class() {
        let x = Matrix::zeros(3, 2);
        assert!(svm_train_linear(&x, &[1.0, 1.0, 1.0], 1.0, 10).is_err());
    }

    fn rank1_instance(
        n_per_class: usize,
        rows: usize,
        cols: usize,
        noise: f64,
        seed: u64,
    ) -> (Vec<DenseTensor>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let na = vec_norm(&a);
        for v in &mut a {
            *v /= na;
        }
        let mut b: Vec<f64> = (0..cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nb = vec_norm(&b);
        for v in &mut b {
            *v /= nb;
        }
        let mut tensors = Vec::new();
        let mut labels = Vec::new();
        for class in [1.0f64, -1.0] {
            for _ in 0..n_per_class {
                let s = class * (1.0 + rng.gen_range(-0.2..0.2));
                let mut data = Vec::with_capacity(rows * cols);
                for p in 0..rows {
                    for f in 0..cols {
                        data.push(s * a[p] * b[f] + noise * rng.gen_range(-1.0..1.0));
                    }
                }
                tensors.push(DenseTensor::new(vec![rows, cols], data).unwrap());
                labels.push(class);
            }
        }
        (tensors, labels)
    }

    #[test]
    fn stm_separates_clean_rank1_data() {
        let (tensors, y) = rank1_instance(6, 4, 5, 0.0, 89);
        let model = stm_train(&tensors, &y, 1.0, 3).unwrap();
        for (t, &label) in tensors.iter().zip(&y) {
            let (pred, _) = stm_predict(t, &model).unwrap();
            assert_eq!(pred as f64, label);
        }
        assert!((vec_norm(&model.u) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn flipped_labels_negate_decision_values() {
        let (tensors, y) = rank1_instance(5, 3, 4, 0.05, 91);
        let model = stm_train(&tensors, &y, 1.0, 4).unwrap();
        let flipped: Vec<f64> = y.iter().map(|v| -v).collect();
        let model_f = stm_train(&tensors, &flipped, 1.0, 4).unwrap();
        for t in &tensors {
            let (_, s) = stm_predict(t, &model).unwrap();
            let (_, sf) = stm_predict(t, &model_f).unwrap();
            assert!((s + sf).abs() < 1e-9, "{s} vs {sf}");
        }
    }

    #[test]
    fn stm_small_sample_generalizes() {
        // One generative instance: 55 samples per class sharing the same
        // rank-1 factors; the first 5 per class train, 100 are held out.
        let (all, y_all) = rank1_instance(55, 4, 6, 0.1, 93);
        let train_idx: Vec<usize> = (0..5).chain(55..60).collect();
        let test_idx: Vec<usize> = (5..55).chain(60..110).collect();
        let train: Vec<DenseTensor> = train_idx.iter().map(|&i| all[i].clone()).collect();
        let y_train: Vec<f64> = train_idx.iter().map(|&i| y_all[i]).collect();
        let model = stm_train(&train, &y_train, 1.0, 5).unwrap();
        let mut hits = 0;
        for &i in &test_idx {
            let (pred, _) = stm_predict(&all[i], &model).unwrap();
            if pred as f64 == y_all[i] {
                hits += 1;
            }
        }
        let acc = hits as f64 / test_idx.len() as f64;
        assert!(acc >= 0.9, "held-out accuracy {acc}");
    }

    #[test]
    fn degenerate_row_tensors_match_linear_svm_predictions() {
        let mut rng = ChaCha8Rng::seed_from_u64(95);
        let n = 20;
        let d = 4;
        let mut tensors = Vec::new();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            let sample: Vec<f64> = (0..d)
                .map(|j| if j == 0 { 2.5 * s + rng.gen_range(-0.4..0.4) } else { rng.gen_range(-1.0..1.0) })
                .collect();
            rows.extend_from_slice(&sample);
            tensors.push(DenseTensor::new(vec![1, d], sample).unwrap());
            y.push(s);
        }
        let x = Matrix::new(n, d, rows).unwrap();
        let model = stm_train(&tensors, &y, 1.0, 2).unwrap();
        let (w, b) = svm_train_linear(&x, &y, 1.0, STM_INNER_ITERS).unwrap();
        for (i, t) in tensors.iter().enumerate() {
            let (pred, _) = stm_predict(t, &model).unwrap();
            let svm_pred = if vec_dot(x.row(i), &w) + b >= 0.0 { 1 } else { -1 };
            assert_eq!(pred, svm_pred, "sample {i}");
        }
    }

    #[test]
    fn predict_identities() {
        let model = StmModel {
            u: vec![0.6, 0.8],
            v: vec![1.0, -2.0, 0.5],
            bias: 0.7,
            c: 1.0,
        };
        let zero = DenseTensor::zeros(vec![2, 3]);
        let (_, s) = stm_predict(&zero, &model).unwrap();
        assert_eq!(s, model.bias);

        // X = u v^T with zero bias scores ||v||^2.
        let outer = DenseTensor::new(
            vec![2, 3],
            (0..6)
                .map(|idx| model.u[idx / 3] * model.v[idx % 3])
                .collect(),
        )
        .unwrap();
        let unbiased = StmModel { bias: 0.0, ..model.clone() };
        let (label, s) = stm_predict(&outer, &unbiased).unwrap();
        let vnorm2 = vec_dot(&model.v, &model.v);
        assert!((s - vnorm2).abs() < 1e-12);
        assert_eq!(label, 1);
    }

    #[test]
    fn scores_invariant_to_uv_rescaling() {
        let (tensors, _) = rank1_instance(3, 3, 4, 0.1, 97);
        let model = StmModel {
            u: vec![0.3, -0.5, 0.9],
            v: vec![1.0, 0.2, -0.7, 0.4],
            bias: -0.1,
            c: 1.0,
        };
        let s = 3.7;
        let scaled = StmModel {
            u: model.u.iter().map(|x| x * s).collect(),
            v: model.v.iter().map(|x| x / s).collect(),
            ..model.clone()
        };
        for t in &tensors {
            let (_, a) = stm_predict(t, &model).unwrap();
            let (_, b) = stm_predict(t, &scaled).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stm_validates_inputs() {
        let zeros = vec![DenseTensor::zeros(vec![2, 2]); 4];
        let y = [1.0, -1.0, 1.0, -1.0];
        assert!(matches!(
            stm_train(&zeros, &y, 1.0, 2),
            Err(Error::Degenerate(_))
        ));
        let t3 = vec![DenseTensor::zeros(vec![2, 2, 2]); 2];
        assert!(stm_train(&t3, &y[..2], 1.0, 2).is_err());
        let (tensors, _) = rank1_instance(2, 2, 2, 0.0, 99);
        assert!(stm_train(&tensors, &[1.0; 4], 1.0, 2).is_err());
    }
}
