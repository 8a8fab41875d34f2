use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hsikit_core::cube::{read_cube, synth_scene, write_cube, SceneSpec};
use hsikit_core::degrade::{apply_noise, apply_spatial_blur};
use hsikit_core::freq::{apply_affine_model, AffineFreqModel};
use hsikit_core::HsiCube;
use num_complex::Complex64;

fn hsikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsikit"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = hsikit(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write_scene(dir: &Path, name: &str, cube: &HsiCube) -> PathBuf {
    let path = dir.join(name);
    write_cube(cube, &path).unwrap();
    path
}

fn scene(seed: u64) -> HsiCube {
    synth_scene(&SceneSpec::new(32, 32, 8, seed)).unwrap()
}

fn model_rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    entries.sort();
    entries
}

#[test]
fn synth_writes_four_files_per_item_and_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let run = ok(&[
        "synth",
        "--procedural",
        "64",
        "64",
        "16",
        "--count",
        "2",
        "--prob",
        "0.5",
        "--seed",
        "1",
        "--out",
        p(&out),
    ]);
    let names: Vec<String> = tree(&out).into_iter().map(|(n, _)| n).collect();
    assert_eq!(names.len(), 9);
    assert!(names.contains(&"index.csv".to_string()));
    for i in 0..2 {
        for suffix in ["gt.hsc", "deg.hsc", "prompt.txt", "recipe.txt"] {
            assert!(names.contains(&format!("{i}_{suffix}")), "{names:?}");
        }
    }
    let manifest = fs::read_to_string(out.join("index.csv")).unwrap();
    let mut lines = manifest.lines();
    assert_eq!(
        lines.next().unwrap(),
        "item,gt_path,deg_path,prompt_path,recipe_path,fired_families,recipe_hash"
    );
    assert_eq!(lines.count(), 2);
    assert!(stdout(&run).starts_with("items=2 "));
}

#[test]
fn synth_without_degradation_copies_ground_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    ok(&[
        "synth",
        "--procedural",
        "16",
        "16",
        "8",
        "--count",
        "3",
        "--prob",
        "0",
        "--seed",
        "4",
        "--out",
        p(&out),
    ]);
    for i in 0..3 {
        assert_eq!(
            fs::read(out.join(format!("{i}_gt.hsc"))).unwrap(),
            fs::read(out.join(format!("{i}_deg.hsc"))).unwrap()
        );
        assert_eq!(
            fs::read_to_string(out.join(format!("{i}_prompt.txt")))
                .unwrap()
                .trim(),
            "clean"
        );
    }
    let metrics = dir.path().join("m.csv");
    let rows = stdout(&ok(&[
        "eval",
        "--manifest",
        p(&out.join("index.csv")),
        "--out",
        p(&metrics),
    ]));
    assert_eq!(rows.lines().count(), 3);
    for row in rows.lines() {
        assert!(row.starts_with("100.0,"), "{row}");
        let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        assert!(
            fields[1] < 1e-3 && fields[2] == 0.0 && fields[3] == 0.0,
            "{row}"
        );
    }
}

#[test]
fn synth_rerun_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let args = |out: &Path, threads: &str| {
        ok(&[
            "synth",
            "--procedural",
            "24",
            "24",
            "12",
            "--count",
            "6",
            "--prob",
            "0.8",
            "--seed",
            "9",
            "--threads",
            threads,
            "--out",
            p(out),
        ]);
    };
    args(&a, "1");
    args(&b, "4");
    assert_eq!(tree(&a), tree(&b));
}

#[test]
fn analyze_identity_pair_gives_zero_model() {
    let dir = tempfile::tempdir().unwrap();
    let clean = write_scene(dir.path(), "c.hsc", &scene(1));
    let model = dir.path().join("m.csv");
    let run = ok(&[
        "analyze",
        "--clean",
        p(&clean),
        "--degraded",
        p(&clean),
        "--out",
        p(&model),
        "--spectra-dir",
        p(&dir.path().join("s")),
        "--bands",
        "0,3",
    ]);
    assert_eq!(stdout(&run).trim(), "bins=16 non_invertible=0");
    let rows = model_rows(&model);
    assert_eq!(rows.len(), 16);
    for r in rows {
        assert!(r[3..7].iter().all(|v| *v == 0.0), "{r:?}");
    }
    assert!(dir.path().join("s/residual_band0.pgm").exists());
    assert!(dir.path().join("s/residual_band3.pgm").exists());
}

#[test]
fn analyze_blur_pair_shows_attenuation() {
    let dir = tempfile::tempdir().unwrap();
    let cube = scene(2);
    let clean = write_scene(dir.path(), "c.hsc", &cube);
    let blurred = write_scene(dir.path(), "b.hsc", &apply_spatial_blur(&cube).unwrap());
    let model = dir.path().join("m.csv");
    ok(&[
        "analyze",
        "--clean",
        p(&clean),
        "--degraded",
        p(&blurred),
        "--out",
        p(&model),
    ]);
    let rows = model_rows(&model);
    assert!(rows[15][3] < rows[0][3]);
}

#[test]
#[ignore = "fails: the fitted intercept of white noise has a Rayleigh-like spread across bins, far above 20%"]
fn analyze_noise_pair_has_flat_intercepts() {
    let dir = tempfile::tempdir().unwrap();
    let cube = synth_scene(&SceneSpec::new(64, 64, 16, 3)).unwrap();
    let clean = write_scene(dir.path(), "c.hsc", &cube);
    let noisy = write_scene(dir.path(), "n.hsc", &apply_noise(&cube, 35.0, 3).unwrap());
    let model = dir.path().join("m.csv");
    ok(&[
        "analyze",
        "--clean",
        p(&clean),
        "--degraded",
        p(&noisy),
        "--out",
        p(&model),
    ]);
    let mags: Vec<f64> = model_rows(&model)
        .iter()
        .map(|r| r[5].hypot(r[6]))
        .collect();
    let mean = mags.iter().sum::<f64>() / mags.len() as f64;
    let sd = (mags.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / mags.len() as f64).sqrt();
    assert!(sd / mean < 0.2, "cv {}", sd / mean);
}

#[test]
fn analyze_shape_mismatch_exits_3_naming_both_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_scene(dir.path(), "a.hsc", &scene(1));
    let b = write_scene(
        dir.path(),
        "b.hsc",
        &synth_scene(&SceneSpec::new(16, 32, 8, 1)).unwrap(),
    );
    let out = hsikit(&[
        "analyze",
        "--clean",
        p(&a),
        "--degraded",
        p(&b),
        "--out",
        p(&dir.path().join("m.csv")),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains(&scene(1).shape_string()) && err.contains("16"),
        "{err}"
    );
}

#[test]
fn restore_with_zero_model_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let cube = scene(5);
    let input = write_scene(dir.path(), "d.hsc", &cube);
    let model = dir.path().join("zero.csv");
    AffineFreqModel::identity(16).write_csv(&model).unwrap();
    let out = dir.path().join("r.hsc");
    ok(&[
        "restore",
        "--degraded",
        p(&input),
        "--model",
        p(&model),
        "--out",
        p(&out),
    ]);
    let restored = read_cube(&out).unwrap();
    for (a, b) in cube.as_slice().iter().zip(restored.as_slice()) {
        assert!((a - b).abs() < 1e-5);
    }
}

#[test]
fn restore_with_exact_model_reports_high_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let cube = scene(6);
    let model = AffineFreqModel::uniform(16, Complex64::new(0.5, 0.0), Complex64::new(0.1, 0.0));
    let clean = write_scene(dir.path(), "c.hsc", &cube);
    let degraded = write_scene(
        dir.path(),
        "d.hsc",
        &apply_affine_model(&cube, &model).unwrap(),
    );
    let model_path = dir.path().join("m.csv");
    model.write_csv(&model_path).unwrap();
    let run = ok(&[
        "restore",
        "--degraded",
        p(&degraded),
        "--model",
        p(&model_path),
        "--out",
        p(&dir.path().join("r.hsc")),
        "--reference",
        p(&clean),
    ]);
    let err = String::from_utf8_lossy(&run.stderr);
    let line = err.lines().find(|l| l.contains("psnr")).unwrap();
    let restored: f64 = line
        .split("restored ")
        .nth(1)
        .unwrap()
        .split(' ')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(restored > 60.0, "{line}");
}

#[test]
fn restore_warns_about_non_invertible_bins() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_scene(dir.path(), "d.hsc", &scene(7));
    let model = dir.path().join("m.csv");
    let mut m = AffineFreqModel::identity(4);
    m.lambda[2] = Complex64::new(-1.0, 0.0);
    m.write_csv(&model).unwrap();
    let run = ok(&[
        "restore",
        "--degraded",
        p(&input),
        "--model",
        p(&model),
        "--out",
        p(&dir.path().join("r.hsc")),
    ]);
    assert!(String::from_utf8_lossy(&run.stderr).contains("bins [2]"));
}

#[test]
fn restore_without_model_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_scene(dir.path(), "d.hsc", &scene(7));
    let out = hsikit(&[
        "restore",
        "--degraded",
        p(&input),
        "--model",
        p(&dir.path().join("missing.csv")),
        "--out",
        p(&dir.path().join("r.hsc")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn eval_reports_hand_computed_values_and_appends() {
    let dir = tempfile::tempdir().unwrap();
    let reference = write_scene(dir.path(), "r.hsc", &HsiCube::filled(4, 4, 3, 1.0).unwrap());
    let test = write_scene(dir.path(), "t.hsc", &HsiCube::filled(4, 4, 3, 0.9).unwrap());
    let csv = dir.path().join("metrics.csv");
    let row = stdout(&ok(&[
        "eval",
        "--reference",
        p(&reference),
        "--test",
        p(&test),
        "--out",
        p(&csv),
    ]));
    let fields: Vec<f64> = row.trim().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(
        (fields[0] - 20.0).abs() < 1e-5 && (fields[2] - 0.1).abs() < 1e-6,
        "{row}"
    );

    ok(&[
        "eval",
        "--reference",
        p(&reference),
        "--test",
        p(&reference),
        "--out",
        p(&csv),
        "--losses",
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "psnr_db,sam_deg,rmse,ergas");
    assert!(lines[2].starts_with("100.0,"));
    let losses = fs::read_to_string(dir.path().join("metrics.losses.csv")).unwrap();
    assert!(losses.starts_with("l1,sam_loss_rad,swt,bmse,total,w1,w2,w3,w4\n"));
    assert!(losses
        .lines()
        .nth(1)
        .unwrap()
        .ends_with(",1.0,0.001,0.01,0.01"));
}

#[test]
fn eval_shape_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_scene(dir.path(), "a.hsc", &HsiCube::filled(4, 4, 3, 1.0).unwrap());
    let b = write_scene(dir.path(), "b.hsc", &HsiCube::filled(4, 4, 2, 1.0).unwrap());
    let out = hsikit(&[
        "eval",
        "--reference",
        p(&a),
        "--test",
        p(&b),
        "--out",
        p(&dir.path().join("m.csv")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(hsikit(&[]).status.code(), Some(1));
    assert_eq!(hsikit(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(hsikit(&["synth", "--out", "x"]).status.code(), Some(1));
    assert_eq!(
        hsikit(&[
            "eval",
            "--out",
            "x",
            "--range",
            "0",
            "--reference",
            "a",
            "--test",
            "b"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        hsikit(&[
            "synth",
            "--procedural",
            "8",
            "8",
            "--out",
            "x",
            "--threads",
            "zero"
        ])
        .status
        .code(),
        Some(1)
    );
    assert_eq!(hsikit(&["--help"]).status.code(), Some(0));
}
