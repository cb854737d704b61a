//! Subcommand implementations.

use std::path::{Path, PathBuf};

use hsikit::align::{
    build_alignment, fit_linear, solve_nonnegative_embedding, AlignParams, LabeledDataset, Method,
    SigmaRule,
};
use hsikit::csvio;
use hsikit::cube::{HsiCube, LabelRaster};
use hsikit::envi;
use hsikit::eval::{evaluate, knn_classify};
use hsikit::matrix::Matrix;
use hsikit::metric::{detect as metric_detect, roc_auc, sml_fit};
use hsikit::multifeature::{mfc_fit, msne_embed, FeatureBundle, MsneParams};
use hsikit::stm::{build_feature_tensor, gabor_features, stm_predict, stm_train, GaborBank};
use hsikit::synth::synth_hsi;
use hsikit::tdla::{organize_spectral_spatial, tdla_fit, tdla_transform};
use hsikit::tensor::{energy_truncation, r1td_decompose_full, r1td_denoise, DenseTensor};

use crate::config::Config;
use crate::{ClassifyArgs, CliError, DenoiseArgs, DetectArgs, DrArgs, EvalArgs, SynthArgs};

fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("missing required flag --{flag}")))
}

/// Cube file pair convention: `<base>.hdr` beside `<base>.raw`.
fn cube_paths(base: &Path) -> (PathBuf, PathBuf) {
    (base.with_extension("hdr"), base.with_extension("raw"))
}

fn read_cube(base: &Path) -> Result<HsiCube, CliError> {
    let (h, d) = cube_paths(base);
    Ok(envi::read_envi(&h, &d)?)
}

fn read_labels(base: &Path) -> Result<LabelRaster, CliError> {
    let (h, d) = cube_paths(base);
    Ok(envi::read_label_raster(&h, &d)?)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

pub fn synth(args: &SynthArgs, cfg: &Config) -> Result<(), CliError> {
    let seed = cfg.resolve(args.seed, "seed", 0u64)?;
    let rows = cfg.resolve(args.rows, "rows", 32usize)?;
    let cols = cfg.resolve(args.cols, "cols", 32usize)?;
    let bands = cfg.resolve(args.bands, "bands", 30usize)?;
    let classes = cfg.resolve(args.classes, "classes", 3usize)?;
    let noise = cfg.resolve(args.noise_sigma, "noise-sigma", 0.05f64)?;
    let mixing = cfg.resolve(args.mixing_width, "mixing-width", 1.0f64)?;
    let out_cube = require(cfg.resolve_opt(args.out_cube.clone(), "out-cube")?, "out-cube")?;
    let out_labels =
        require(cfg.resolve_opt(args.out_labels.clone(), "out-labels")?, "out-labels")?;

    let (cube, raster) = synth_hsi(seed, rows, cols, bands, classes, noise, mixing)?;
    let (h, d) = cube_paths(&out_cube);
    envi::write_envi(&cube, &h, &d, envi::Interleave::Bsq, envi::EnviDataType::F32)?;
    let (h, d) = cube_paths(&out_labels);
    envi::write_label_raster(&raster, &h, &d)?;
    println!(
        "synth: wrote {rows}x{cols}x{bands} cube with {classes} classes (seed {seed})"
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// dr
// ---------------------------------------------------------------------------

/// Labeled pixels of a raster as a dataset with 0-based contiguous class
/// ids; returns (pixel ids, matrix, mapped labels).
fn labeled_pixels(
    x_all: &Matrix,
    raster: &LabelRaster,
) -> Result<(Vec<usize>, Matrix, Vec<usize>), CliError> {
    let mut ids = Vec::new();
    let mut classes_present: Vec<usize> = Vec::new();
    for (i, &l) in raster.labels().iter().enumerate() {
        if l > 0 {
            ids.push(i);
            if !classes_present.contains(&l) {
                classes_present.push(l);
            }
        }
    }
    if ids.is_empty() {
        return Err(CliError::Data("label raster has no labeled pixels".into()));
    }
    classes_present.sort_unstable();
    let x = x_all.select_rows(&ids);
    let labels: Vec<usize> = ids
        .iter()
        .map(|&i| {
            classes_present
                .iter()
                .position(|&c| c == raster.labels()[i])
                .expect("class present")
        })
        .collect();
    Ok((ids, x, labels))
}

fn align_params(args: &DrArgs, cfg: &Config) -> Result<AlignParams, CliError> {
    let sigma = match cfg.resolve_opt(args.sigma, "sigma")? {
        Some(v) => SigmaRule::Fixed(v),
        None => SigmaRule::Auto,
    };
    Ok(AlignParams {
        k: cfg.resolve(args.k, "k", 5usize)?,
        k1: cfg.resolve(args.k1, "k1", 5usize)?,
        k2: cfg.resolve(args.k2, "k2", 5usize)?,
        beta: cfg.resolve(args.beta, "beta", 1.0f64)?,
        sigma,
    })
}

pub fn dr(args: &DrArgs, cfg: &Config) -> Result<(), CliError> {
    let method = require(cfg.resolve_opt(args.method.clone(), "method")?, "method")?;
    let cube_base = require(cfg.resolve_opt(args.cube.clone(), "cube")?, "cube")?;
    let dim = require(cfg.resolve_opt(args.dim, "dim")?, "dim")?;
    let out = require(cfg.resolve_opt(args.out.clone(), "out")?, "out")?;
    let labels_base = cfg.resolve_opt(args.labels.clone(), "labels")?;
    let params = align_params(args, cfg)?;
    let iters = cfg.resolve(args.iters, "iters", 10usize)?;

    let supervised = matches!(method.as_str(), "lda" | "dla" | "ndml" | "mfc" | "tdla");
    if supervised && labels_base.is_none() {
        return Err(CliError::Usage(format!(
            "dr --method {method} requires --labels"
        )));
    }

    let cube = read_cube(&cube_base)?;
    let x_all = cube.pixel_matrix();
    let n_all = x_all.rows();
    let raster = match &labels_base {
        Some(base) => Some(read_labels(base)?),
        None => None,
    };
    if let Some(r) = &raster {
        if r.rows() != cube.rows() || r.cols() != cube.cols() {
            return Err(CliError::Data("label raster does not match cube size".into()));
        }
    }

    let (ids, features): (Vec<usize>, Matrix) = match method.as_str() {
        "pca" | "le" | "lle" => {
            let data = LabeledDataset::unlabeled(x_all.clone())?;
            let m = match method.as_str() {
                "pca" => Method::Pca,
                "le" => Method::Le,
                _ => Method::Lle,
            };
            let proj = fit_linear(m, &data, &params, dim)?;
            ((0..n_all).collect(), proj.transform(&x_all)?)
        }
        "lda" | "dla" => {
            let raster = raster.as_ref().expect("checked above");
            let (_, x_lab, y_lab) = labeled_pixels(&x_all, raster)?;
            let data = LabeledDataset::new(x_lab, Some(y_lab))?;
            let m = if method == "lda" { Method::Lda } else { Method::Dla };
            let proj = fit_linear(m, &data, &params, dim)?;
            ((0..n_all).collect(), proj.transform(&x_all)?)
        }
        "ndml" => {
            let raster = raster.as_ref().expect("checked above");
            let (_, x_lab, y_lab) = labeled_pixels(&x_all, raster)?;
            let data = LabeledDataset::new(x_lab, Some(y_lab))?;
            let alignment = build_alignment(Method::Dla, &data, &params)?;
            let ndml_iters = cfg.resolve(args.iters, "iters", 200usize)?;
            let fit = solve_nonnegative_embedding(&data, &alignment, dim, ndml_iters)?;
            ((0..n_all).collect(), fit.projection.transform(&x_all)?)
        }
        "mfc" => {
            let raster = raster.as_ref().expect("checked above");
            let texture = gabor_features(&cube, &GaborBank::default_bank())?;
            let (ids_lab, _, y_lab) = labeled_pixels(&x_all, raster)?;
            let spectra_lab = x_all.select_rows(&ids_lab);
            let texture_lab = texture.select_rows(&ids_lab);
            let bundle =
                FeatureBundle::new(vec![spectra_lab, texture_lab], Some(y_lab))?;
            let r = cfg.resolve(args.r, "r", 2.0f64)?;
            let fit = mfc_fit(&bundle, dim, r, iters, &params)?;
            let concat_all = x_all.hcat(&texture);
            ((0..n_all).collect(), fit.projection.transform(&concat_all)?)
        }
        "msne" => {
            let texture = gabor_features(&cube, &GaborBank::default_bank())?;
            let bundle = FeatureBundle::new(vec![x_all.clone(), texture], None)?;
            let msne_params = MsneParams {
                d: dim,
                perplexity: cfg.resolve(args.perplexity, "perplexity", 15.0f64)?,
                r: cfg.resolve(args.r, "r", 2.0f64)?,
                outer_iters: iters,
                inner_iters: cfg.resolve(args.inner_iters, "inner-iters", 60usize)?,
                learning_rate: 100.0,
                seed: cfg.resolve(args.seed, "seed", 0u64)?,
                fixed_alpha: None,
            };
            let fit = msne_embed(&bundle, &msne_params)?;
            println!(
                "msne: weights {:?}, final KL {}",
                fit.weights.alpha,
                fit.kl_history.last().unwrap()
            );
            ((0..n_all).collect(), fit.embedding)
        }
        "tdla" => {
            let raster = raster.as_ref().expect("checked above");
            let window = cfg.resolve(args.window, "window", 3usize)?;
            let h = window / 2;
            if cube.rows() < window || cube.cols() < window {
                return Err(CliError::Data(format!(
                    "cube {}x{} too small for window {window}",
                    cube.rows(),
                    cube.cols()
                )));
            }
            let mut interior = Vec::new();
            let mut train_px = Vec::new();
            for r in h..cube.rows() - h {
                for c in h..cube.cols() - h {
                    interior.push((r, c));
                    if raster.get(r, c) > 0 {
                        train_px.push((r, c));
                    }
                }
            }
            let train = organize_spectral_spatial(&cube, raster, window, &train_px)?;
            let reduced = vec![window, window, dim.min(cube.bands())];
            let sweeps = cfg.resolve(args.iters, "iters", 5usize)?;
            let fit = tdla_fit(&train, &reduced, params.k1, params.k2, params.beta, sweeps)?;

            let all_samples = organize_spectral_spatial(&cube, raster, window, &interior)?;
            let width: usize = reduced.iter().product();
            let mut rows_out = Vec::with_capacity(all_samples.len() * width);
            let mut ids = Vec::with_capacity(all_samples.len());
            for s in &all_samples {
                let t = tdla_transform(s, &fit.projections)?;
                rows_out.extend_from_slice(t.data());
                ids.push(s.origin.0 * cube.cols() + s.origin.1);
            }
            (ids, Matrix::new(all_samples.len(), width, rows_out)?)
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown dr method '{other}' (expected pca|lda|le|lle|dla|ndml|mfc|msne|tdla)"
            )))
        }
    };

    csvio::write_indexed_csv(&out, &ids, &features)?;
    println!("dr: wrote {} rows x {} features to {}", ids.len(), features.cols(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// denoise
// ---------------------------------------------------------------------------

pub fn denoise(args: &DenoiseArgs, cfg: &Config) -> Result<(), CliError> {
    let cube_base = require(cfg.resolve_opt(args.cube.clone(), "cube")?, "cube")?;
    let k = require(cfg.resolve_opt(args.k, "k")?, "k")?;
    let energy = cfg.resolve_opt(args.energy, "energy")?;
    let out = require(cfg.resolve_opt(args.out_cube.clone(), "out-cube")?, "out-cube")?;

    let cube = read_cube(&cube_base)?;
    let (rows, cols, bands) = (cube.rows(), cube.cols(), cube.bands());
    let mut data = Vec::with_capacity(rows * cols * bands);
    for r in 0..rows {
        for c in 0..cols {
            for b in 0..bands {
                data.push(cube.get(r, c, b));
            }
        }
    }
    let tensor = DenseTensor::new(vec![rows, cols, bands], data)?;

    let denoised = match energy {
        None => r1td_denoise(&tensor, k)?,
        Some(fraction) => {
            if !(0.0 < fraction && fraction <= 1.0) {
                return Err(CliError::Usage(format!(
                    "--energy must be in (0, 1], got {fraction}"
                )));
            }
            let (terms, _) = r1td_decompose_full(&tensor, k)?;
            let keep = energy_truncation(&terms, fraction);
            let mut out = DenseTensor::zeros(vec![rows, cols, bands]);
            for term in terms.iter().take(keep) {
                let e = term.expand();
                for (o, v) in out.data_mut().iter_mut().zip(e.data()) {
                    *o += v;
                }
            }
            out
        }
    };

    // Back to band-sequential, clamped at zero like every cube source.
    let mut cube_data = vec![0.0f64; rows * cols * bands];
    for r in 0..rows {
        for c in 0..cols {
            for b in 0..bands {
                let v = denoised.get(&[r, c, b]).max(0.0);
                cube_data[b * rows * cols + r * cols + c] = v;
            }
        }
    }
    let out_cube = HsiCube::new(rows, cols, bands, cube_data, None)?;
    let (h, d) = cube_paths(&out);
    envi::write_envi(&out_cube, &h, &d, envi::Interleave::Bsq, envi::EnviDataType::F32)?;
    println!("denoise: wrote rank-{k} reconstruction to {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

pub fn detect(args: &DetectArgs, cfg: &Config) -> Result<(), CliError> {
    let cube_base = require(cfg.resolve_opt(args.cube.clone(), "cube")?, "cube")?;
    let labels_base = require(cfg.resolve_opt(args.labels.clone(), "labels")?, "labels")?;
    let out = require(cfg.resolve_opt(args.out.clone(), "out")?, "out")?;
    let target_class = cfg.resolve(args.target_class, "target-class", 1usize)?;
    let lambda_sim = cfg.resolve(args.lambda_sim, "lambda-sim", 0.5f64)?;
    let lambda_smooth = cfg.resolve(args.lambda_smooth, "lambda-smooth", 0.5f64)?;
    let k = cfg.resolve(args.k, "k", 5usize)?;
    let steps = cfg.resolve(args.steps, "steps", 200usize)?;
    let target_csv = cfg.resolve_opt(args.target.clone(), "target")?;

    let cube = read_cube(&cube_base)?;
    let raster = read_labels(&labels_base)?;
    if raster.rows() != cube.rows() || raster.cols() != cube.cols() {
        return Err(CliError::Data("label raster does not match cube size".into()));
    }
    let x_all = cube.pixel_matrix();

    let mut pos_ids = Vec::new();
    let mut neg_ids = Vec::new();
    for (i, &l) in raster.labels().iter().enumerate() {
        if l == target_class {
            pos_ids.push(i);
        } else if l > 0 {
            neg_ids.push(i);
        }
    }
    if pos_ids.len() < 2 || neg_ids.len() < 2 {
        return Err(CliError::Data(format!(
            "need at least 2 target and 2 background training pixels, got {} and {}",
            pos_ids.len(),
            neg_ids.len()
        )));
    }
    let positives = x_all.select_rows(&pos_ids);
    let negatives = x_all.select_rows(&neg_ids);

    let target = match target_csv {
        Some(path) => {
            let t = csvio::read_column_csv(&path)?;
            if t.len() != cube.bands() {
                return Err(CliError::Data(format!(
                    "target spectrum has {} bands, cube has {}",
                    t.len(),
                    cube.bands()
                )));
            }
            t
        }
        None => (0..cube.bands())
            .map(|j| positives.col(j).iter().sum::<f64>() / positives.rows() as f64)
            .collect(),
    };

    let fit = sml_fit(&positives, &negatives, lambda_sim, lambda_smooth, k, steps)?;
    let result = metric_detect(&x_all, &target, &fit.metric, None)?;

    // AUC over the labeled pixels.
    let mut labeled_scores = Vec::new();
    let mut labeled_flags = Vec::new();
    for (i, &l) in raster.labels().iter().enumerate() {
        if l > 0 {
            labeled_scores.push(result.scores[i]);
            labeled_flags.push(l == target_class);
        }
    }
    let auc = roc_auc(&labeled_scores, &labeled_flags)?;

    let ids: Vec<usize> = (0..result.scores.len()).collect();
    let score_matrix = Matrix::new(result.scores.len(), 1, result.scores.clone())?;
    csvio::write_indexed_csv(&out, &ids, &score_matrix)?;
    println!("detect: AUC {auc}");
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

/// First-n-per-class split in raster order over (id, class) pairs.
fn split_train_test(
    ids: &[usize],
    classes: &[usize],
    per_class: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (slot, (&id, &class)) in ids.iter().zip(classes).enumerate() {
        let _ = id;
        let c = counts.entry(class).or_insert(0);
        if *c < per_class {
            *c += 1;
            train.push(slot);
        } else {
            test.push(slot);
        }
    }
    (train, test)
}

pub fn classify(args: &ClassifyArgs, cfg: &Config) -> Result<(), CliError> {
    let method = require(cfg.resolve_opt(args.method.clone(), "method")?, "method")?;
    let labels_base = require(cfg.resolve_opt(args.labels.clone(), "labels")?, "labels")?;
    let out = require(cfg.resolve_opt(args.out.clone(), "out")?, "out")?;
    let per_class = cfg.resolve(args.train_per_class, "train-per-class", 10usize)?;
    let raster = read_labels(&labels_base)?;

    match method.as_str() {
        "knn" => {
            let k = cfg.resolve(args.k, "k", 1usize)?;
            let features_csv = cfg.resolve_opt(args.features.clone(), "features")?;
            // Feature rows: (pixel id, feature vector).
            let (ids, feats): (Vec<usize>, Matrix) = match features_csv {
                Some(path) => {
                    let m = csvio::read_matrix_csv(&path)?;
                    if m.cols() < 2 {
                        return Err(CliError::Data(format!(
                            "{}: expected id + feature columns",
                            path.display()
                        )));
                    }
                    let ids: Vec<usize> = m.col(0).iter().map(|v| *v as usize).collect();
                    let cols: Vec<usize> = (1..m.cols()).collect();
                    (ids, m.select_cols(&cols))
                }
                None => {
                    let cube_base =
                        require(cfg.resolve_opt(args.cube.clone(), "cube")?, "cube")?;
                    let cube = read_cube(&cube_base)?;
                    if cube.rows() != raster.rows() || cube.cols() != raster.cols() {
                        return Err(CliError::Data(
                            "label raster does not match cube size".into(),
                        ));
                    }
                    ((0..raster.labels().len()).collect(), cube.pixel_matrix())
                }
            };

            let mut lab_slots = Vec::new();
            let mut lab_classes = Vec::new();
            for (slot, &id) in ids.iter().enumerate() {
                let l = raster.labels().get(id).copied().ok_or_else(|| {
                    CliError::Data(format!("feature id {id} outside the label raster"))
                })?;
                if l > 0 {
                    lab_slots.push(slot);
                    lab_classes.push(l);
                }
            }
            let lab_ids: Vec<usize> = lab_slots.iter().map(|&s| ids[s]).collect();
            let (train_idx, test_idx) = split_train_test(&lab_ids, &lab_classes, per_class);
            if test_idx.is_empty() {
                return Err(CliError::Data(
                    "no test pixels left after the training split".into(),
                ));
            }
            let train_rows: Vec<usize> = train_idx.iter().map(|&i| lab_slots[i]).collect();
            let test_rows: Vec<usize> = test_idx.iter().map(|&i| lab_slots[i]).collect();
            let train_x = feats.select_rows(&train_rows);
            let train_y: Vec<usize> = train_idx.iter().map(|&i| lab_classes[i]).collect();
            let test_x = feats.select_rows(&test_rows);
            let preds = knn_classify(&train_x, &train_y, &test_x, k)?;

            let test_ids: Vec<usize> = test_rows.iter().map(|&s| ids[s]).collect();
            let pred_matrix =
                Matrix::new(preds.len(), 1, preds.iter().map(|&p| p as f64).collect())?;
            csvio::write_indexed_csv(&out, &test_ids, &pred_matrix)?;
            println!("classify: knn predicted {} test pixels", preds.len());
        }
        "stm" => {
            let cube_base = require(cfg.resolve_opt(args.cube.clone(), "cube")?, "cube")?;
            let cube = read_cube(&cube_base)?;
            if cube.rows() != raster.rows() || cube.cols() != raster.cols() {
                return Err(CliError::Data("label raster does not match cube size".into()));
            }
            let target_class = cfg.resolve(args.target_class, "target-class", 1usize)?;
            let window = cfg.resolve(args.window, "window", 3usize)?;
            let c = cfg.resolve(args.c, "c", 1.0f64)?;
            let iters = cfg.resolve(args.iters, "iters", 5usize)?;

            let texture = gabor_features(&cube, &GaborBank::default_bank())?;
            let h = window / 2;
            let mut ids = Vec::new();
            let mut classes = Vec::new();
            for r in h..cube.rows() - h {
                for co in h..cube.cols() - h {
                    let l = raster.get(r, co);
                    if l > 0 {
                        ids.push(r * cube.cols() + co);
                        classes.push(l);
                    }
                }
            }
            let (train_idx, test_idx) = split_train_test(&ids, &classes, per_class);
            if test_idx.is_empty() {
                return Err(CliError::Data(
                    "no test pixels left after the training split".into(),
                ));
            }
            let tensor_at = |slot: usize| -> Result<DenseTensor, CliError> {
                let id = ids[slot];
                let pixel = (id / cube.cols(), id % cube.cols());
                Ok(build_feature_tensor(&cube, pixel, window, &texture)?)
            };
            let mut train_tensors = Vec::new();
            let mut train_y = Vec::new();
            for &i in &train_idx {
                train_tensors.push(tensor_at(i)?);
                train_y.push(if classes[i] == target_class { 1.0 } else { -1.0 });
            }
            let model = stm_train(&train_tensors, &train_y, c, iters)?;

            let mut test_ids = Vec::new();
            let mut preds = Vec::new();
            for &i in &test_idx {
                let t = tensor_at(i)?;
                let (label, _) = stm_predict(&t, &model)?;
                test_ids.push(ids[i]);
                preds.push(if label > 0 { 1.0 } else { 2.0 });
            }
            let pred_matrix = Matrix::new(preds.len(), 1, preds)?;
            csvio::write_indexed_csv(&out, &test_ids, &pred_matrix)?;
            println!("classify: stm predicted {} test pixels", test_ids.len());
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown classify method '{other}' (expected knn|stm)"
            )))
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

pub fn eval(args: &EvalArgs, cfg: &Config) -> Result<(), CliError> {
    let pred_path = require(cfg.resolve_opt(args.pred.clone(), "pred")?, "pred")?;
    let out = require(cfg.resolve_opt(args.out.clone(), "out")?, "out")?;
    let truth_raster = cfg.resolve_opt(args.truth_raster.clone(), "truth-raster")?;
    let truth_csv = cfg.resolve_opt(args.truth_csv.clone(), "truth-csv")?;
    let binary_class = cfg.resolve_opt(args.binary_class, "binary-class")?;

    let pred_m = csvio::read_matrix_csv(&pred_path)?;
    if pred_m.cols() != 2 {
        return Err(CliError::Data(format!(
            "{}: expected two columns (id, class)",
            pred_path.display()
        )));
    }
    let ids: Vec<usize> = pred_m.col(0).iter().map(|v| *v as usize).collect();
    let pred: Vec<usize> = pred_m.col(1).iter().map(|v| *v as usize).collect();

    let truth: Vec<usize> = match (truth_raster, truth_csv) {
        (Some(base), None) => {
            let raster = read_labels(&base)?;
            ids.iter()
                .map(|&id| {
                    raster.labels().get(id).copied().ok_or_else(|| {
                        CliError::Data(format!("prediction id {id} outside the label raster"))
                    })
                })
                .collect::<Result<_, _>>()?
        }
        (None, Some(path)) => {
            let m = csvio::read_matrix_csv(&path)?;
            if m.cols() == 2 {
                let mut map = std::collections::HashMap::new();
                for i in 0..m.rows() {
                    map.insert(m[(i, 0)] as usize, m[(i, 1)] as usize);
                }
                ids.iter()
                    .map(|id| {
                        map.get(id).copied().ok_or_else(|| {
                            CliError::Data(format!("prediction id {id} missing from truth CSV"))
                        })
                    })
                    .collect::<Result<_, _>>()?
            } else if m.cols() == 1 && m.rows() == pred.len() {
                m.col(0).iter().map(|v| *v as usize).collect()
            } else {
                return Err(CliError::Data(format!(
                    "{}: truth CSV must be (id, class) pairs or one aligned column",
                    path.display()
                )));
            }
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --truth-raster or --truth-csv is required".into(),
            ))
        }
    };

    let truth: Vec<usize> = match binary_class {
        Some(t) => truth
            .iter()
            .map(|&l| {
                if l == 0 {
                    0
                } else if l == t {
                    1
                } else {
                    2
                }
            })
            .collect(),
        None => truth,
    };

    let report = evaluate(&pred, &truth)?;
    csvio::write_report_csv(&out, &report)?;
    println!("OA {}", report.overall_accuracy);
    println!("kappa {}", report.kappa);
    Ok(())
}
