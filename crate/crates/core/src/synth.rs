//! Seeded synthetic data generation.
//!
//! Stands in for the airborne sensor datasets the algorithms were designed
//! around: smooth positive class signatures over a Voronoi label map with
//! boundary mixing and additive noise, plus a mixed-pixel detection set
//! for the metric-learning experiments. Identical seeds give bit-identical
//! output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cube::{HsiCube, LabelRaster};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Smooth positive signature: sum of three seeded Gaussian bumps over the
/// band index, offset so every value is at least 0.05.
fn class_signature(rng: &mut ChaCha8Rng, bands: usize) -> Vec<f64> {
    let b_max = (bands - 1) as f64;
    let mut bumps = Vec::with_capacity(3);
    for _ in 0..3 {
        let amp = rng.gen_range(0.5..1.5);
        let center = rng.gen_range(0.0..=b_max);
        let width = rng.gen_range((bands as f64 / 20.0).max(0.5)..=(bands as f64 / 5.0).max(1.0));
        bumps.push((amp, center, width));
    }
    let mut sig: Vec<f64> = (0..bands)
        .map(|b| {
            bumps
                .iter()
                .map(|&(a, c, w)| a * (-((b as f64 - c) * (b as f64 - c)) / (2.0 * w * w)).exp())
                .sum()
        })
        .collect();
    let min = sig.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < 0.05 {
        for v in &mut sig {
            *v += 0.05 - min;
        }
    }
    sig
}

/// Generate a synthetic labeled cube.
///
/// Class signatures are smooth positive curves; the label raster comes
/// from seeded Voronoi regions (three sites per class, assigned round
/// robin); pixels within `mixing_width` of a class boundary are linear
/// mixtures of the two adjacent class signatures; seeded Gaussian noise is
/// added and clamped at zero.
pub fn synth_hsi(
    seed: u64,
    rows: usize,
    cols: usize,
    bands: usize,
    classes: usize,
    noise_sigma: f64,
    mixing_width: f64,
) -> Result<(HsiCube, LabelRaster)> {
    if rows == 0 || cols == 0 || bands == 0 {
        return Err(Error::domain("synth_hsi: all counts must be >= 1"));
    }
    if classes < 2 {
        return Err(Error::domain("synth_hsi: need at least 2 classes"));
    }
    if noise_sigma < 0.0 || mixing_width < 0.0 {
        return Err(Error::domain("synth_hsi: noise and mixing width must be nonnegative"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signatures: Vec<Vec<f64>> =
        (0..classes).map(|_| class_signature(&mut rng, bands)).collect();

    // Voronoi sites, three per class, class assigned round robin.
    let n_sites = 3 * classes;
    let sites: Vec<(f64, f64, usize)> = (0..n_sites)
        .map(|i| {
            (
                rng.gen_range(0.0..rows as f64),
                rng.gen_range(0.0..cols as f64),
                i % classes,
            )
        })
        .collect();

    let noise = Normal::new(0.0, noise_sigma.max(0.0))
        .map_err(|_| Error::domain("synth_hsi: bad noise sigma"))?;

    let mut labels = vec![0usize; rows * cols];
    let mut data = vec![0.0f64; rows * cols * bands];
    for r in 0..rows {
        for c in 0..cols {
            // Nearest site overall and nearest site of a different class.
            let mut d1 = f64::INFINITY;
            let mut class1 = 0usize;
            for &(sr, sc, sclass) in &sites {
                let d = (r as f64 - sr).hypot(c as f64 - sc);
                if d < d1 {
                    d1 = d;
                    class1 = sclass;
                }
            }
            let mut d2 = f64::INFINITY;
            let mut class2 = class1;
            for &(sr, sc, sclass) in &sites {
                if sclass == class1 {
                    continue;
                }
                let d = (r as f64 - sr).hypot(c as f64 - sc);
                if d < d2 {
                    d2 = d;
                    class2 = sclass;
                }
            }
            labels[r * cols + c] = class1 + 1;

            // Mixing weight toward the adjacent class, nonzero only within
            // mixing_width of the boundary bisector.
            let mix = if mixing_width > 0.0 && class2 != class1 {
                let boundary_dist = 0.5 * (d2 - d1);
                if boundary_dist <= mixing_width {
                    0.5 * (1.0 - boundary_dist / mixing_width)
                } else {
                    0.0
                }
            } else {
                0.0
            };

            for b in 0..bands {
                let clean = (1.0 - mix) * signatures[class1][b] + mix * signatures[class2][b];
                let v = clean + noise.sample(&mut rng);
                data[b * rows * cols + r * cols + c] = v.max(0.0);
            }
        }
    }

    let cube = HsiCube::new(rows, cols, bands, data, None)?;
    let raster = LabelRaster::new(rows, cols, labels)?;
    Ok((cube, raster))
}

/// Mixed-pixel target-detection benchmark.
#[derive(Debug, Clone)]
pub struct DetectionSet {
    /// Training target samples (subpixel mixtures).
    pub positives: Matrix,
    /// Training background samples.
    pub negatives: Matrix,
    /// Test pixels.
    pub pixels: Matrix,
    /// Test ground truth, true = target.
    pub labels: Vec<bool>,
    /// Pure target spectrum.
    pub target_spectrum: Vec<f64>,
}

/// Seeded detection set: background spectra drift along two high-amplitude
/// nuisance directions; target pixels are `0.4 * target + 0.6 * background`
/// mixtures plus noise. The nuisance drift is what an identity metric
/// cannot reject.
pub fn synth_detection_set(seed: u64) -> DetectionSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 12;
    let target_spec: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.5)).collect();
    let bg_mean: Vec<f64> = (0..d).map(|_| rng.gen_range(0.5..2.5)).collect();
    let unit = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    };
    let v1 = unit(&mut rng);
    let v2 = unit(&mut rng);

    let sample = |rng: &mut ChaCha8Rng, is_target: bool| -> Vec<f64> {
        let c1: f64 = rng.gen_range(-2.0..2.0);
        let c2: f64 = rng.gen_range(-2.0..2.0);
        (0..d)
            .map(|j| {
                let bg = bg_mean[j] + c1 * v1[j] + c2 * v2[j];
                let v = if is_target { 0.4 * target_spec[j] + 0.6 * bg } else { bg };
                (v + rng.gen_range(-0.02..0.02)).max(0.0)
            })
            .collect()
    };

    let mut pos_rows = Vec::new();
    for _ in 0..15 {
        pos_rows.extend(sample(&mut rng, true));
    }
    let mut neg_rows = Vec::new();
    for _ in 0..40 {
        neg_rows.extend(sample(&mut rng, false));
    }
    let mut test_rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..30 {
        test_rows.extend(sample(&mut rng, true));
        labels.push(true);
    }
    for _ in 0..90 {
        test_rows.extend(sample(&mut rng, false));
        labels.push(false);
    }

    DetectionSet {
        positives: Matrix::new(15, d, pos_rows).expect("valid positives"),
        negatives: Matrix::new(40, d, neg_rows).expect("valid negatives"),
        pixels: Matrix::new(120, d, test_rows).expect("valid pixels"),
        labels,
        target_spectrum: target_spec,
    }
}
