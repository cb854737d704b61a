//! CLI behavior: exit codes, flag validation, config precedence.

use std::path::Path;
use std::process::{Command, Output};

fn hsikit(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsikit"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn hsikit")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn make_cube(dir: &Path) {
    let out = hsikit(
        dir,
        &[
            "synth", "--seed", "1", "--rows", "14", "--cols", "14", "--bands", "6", "--classes",
            "2", "--noise-sigma", "0.02", "--mixing-width", "0", "--out-cube", "cube",
            "--out-labels", "labels",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_flag_is_a_usage_error_listing_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsikit(dir.path(), &["dr", "--bogus-flag", "1"]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--bogus-flag"), "stderr: {stderr}");
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {stderr}");
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsikit(dir.path(), &["dr", "--method", "pca"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--cube"));
}

#[test]
fn supervised_method_without_labels_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    make_cube(dir.path());
    let out = hsikit(
        dir.path(),
        &["dr", "--method", "lda", "--dim", "2", "--cube", "cube", "--out", "x.csv"],
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--labels"));
}

#[test]
fn missing_data_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsikit(
        dir.path(),
        &["dr", "--method", "pca", "--dim", "2", "--cube", "nope", "--out", "x.csv"],
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn degenerate_detection_data_exits_three() {
    // A constant cube has no separation direction: the metric fit is
    // numerically degenerate.
    let dir = tempfile::tempdir().unwrap();
    let cube = hsikit::cube::HsiCube::new(3, 4, 2, vec![1.0; 24], None).unwrap();
    hsikit::envi::write_envi(
        &cube,
        &dir.path().join("cube.hdr"),
        &dir.path().join("cube.raw"),
        hsikit::envi::Interleave::Bsq,
        hsikit::envi::EnviDataType::F32,
    )
    .unwrap();
    let raster =
        hsikit::cube::LabelRaster::new(3, 4, vec![1, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 2]).unwrap();
    hsikit::envi::write_label_raster(
        &raster,
        &dir.path().join("labels.hdr"),
        &dir.path().join("labels.raw"),
    )
    .unwrap();
    let out = hsikit(
        dir.path(),
        &["detect", "--cube", "cube", "--labels", "labels", "--k", "2", "--out", "s.csv"],
    );
    assert_eq!(code(&out), 3, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eval_on_identical_pred_and_truth_prints_unit_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("pred.csv"), "0,1\n1,2\n2,1\n").unwrap();
    std::fs::write(dir.path().join("truth.csv"), "0,1\n1,2\n2,1\n").unwrap();
    let out = hsikit(
        dir.path(),
        &[
            "eval", "--pred", "pred.csv", "--truth-csv", "truth.csv", "--out", "report.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("OA 1"), "stdout: {stdout}");
}

#[test]
fn config_file_fills_defaults_and_cli_overrides() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("synth.conf"),
        "# synth defaults\nrows = 9\ncols = 9\nbands = 4\nclasses = 2\nnoise-sigma = 0\nmixing-width = 0\nout-cube = from_config\nout-labels = from_config_labels\nseed = 5\n",
    )
    .unwrap();
    // Config supplies everything.
    let out = hsikit(dir.path(), &["synth", "--config", "synth.conf"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_config.hdr").exists());

    // CLI overrides the config's output path, config still fills the rest.
    let out = hsikit(
        dir.path(),
        &["synth", "--config", "synth.conf", "--out-cube", "cli_wins"],
    );
    assert_eq!(code(&out), 0);
    assert!(dir.path().join("cli_wins.hdr").exists());
    let a = std::fs::read(dir.path().join("from_config.raw")).unwrap();
    let b = std::fs::read(dir.path().join("cli_wins.raw")).unwrap();
    assert_eq!(a, b, "same parameters must give the same cube");
}

#[test]
fn stm_classification_pipeline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsikit(
        dir.path(),
        &[
            "synth", "--seed", "5", "--rows", "20", "--cols", "20", "--bands", "6", "--classes",
            "2", "--noise-sigma", "0.02", "--mixing-width", "0", "--out-cube", "cube",
            "--out-labels", "labels",
        ],
    );
    assert_eq!(code(&out), 0);
    let out = hsikit(
        dir.path(),
        &[
            "classify", "--method", "stm", "--cube", "cube", "--labels", "labels",
            "--target-class", "1", "--train-per-class", "10", "--window", "3", "--out",
            "pred.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = hsikit(
        dir.path(),
        &[
            "eval", "--pred", "pred.csv", "--truth-raster", "labels", "--binary-class", "1",
            "--out", "report.csv",
        ],
    );
    assert_eq!(code(&out), 0);
    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let oa: f64 = report
        .lines()
        .next()
        .unwrap()
        .strip_prefix("overall_accuracy,")
        .unwrap()
        .parse()
        .unwrap();
    assert!(oa >= 0.9, "stm pipeline OA {oa}");
}

#[test]
fn msne_dr_runs_on_a_small_cube() {
    let dir = tempfile::tempdir().unwrap();
    let out = hsikit(
        dir.path(),
        &[
            "synth", "--seed", "2", "--rows", "12", "--cols", "12", "--bands", "5", "--classes",
            "2", "--noise-sigma", "0.02", "--mixing-width", "0", "--out-cube", "cube",
            "--out-labels", "labels",
        ],
    );
    assert_eq!(code(&out), 0);
    let out = hsikit(
        dir.path(),
        &[
            "dr", "--method", "msne", "--dim", "2", "--cube", "cube", "--perplexity", "8",
            "--iters", "2", "--inner-iters", "15", "--seed", "0", "--out", "emb.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("emb.csv")).unwrap();
    assert_eq!(text.lines().count(), 144);
}
