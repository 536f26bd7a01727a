mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::repo_path;
use quanvkit::synth::texture;
use quanvkit::tensor_io::{load_feature_map, save_image_npy};

fn quanvkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quanvkit"))
        .args(args)
        .env_remove("QUANVKIT_WORKERS")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn eurosat_geometry_from_png() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("tile.png");
    common::write_png(&png, &texture(64, 64, 3, 21));
    let out_path = dir.path().join("features.npy");
    let config = repo_path("data/configs/eurosat-two-layer.json");
    let out = quanvkit(&[
        "--json",
        "quanvolve",
        "--input",
        s(&png),
        "--config",
        s(&config),
        "--output",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(load_feature_map(&out_path).unwrap().shape(), [4, 4, 12]);
    let summary = json(&out);
    assert_eq!(summary["shape"], serde_json::json!([4, 4, 12]));
    assert_eq!(summary["circuit_evals"], 16 * 16 * 3 + 4 * 4 * 12);
}

#[test]
fn worker_count_does_not_change_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("img.npy");
    save_image_npy(&texture(24, 24, 3, 2), &input).unwrap();
    let config = repo_path("data/configs/mnist-probe.json");
    let mut outputs = Vec::new();
    for workers in ["1", "4"] {
        let out_path = dir.path().join(format!("w{workers}.npy"));
        let out = quanvkit(&[
            "quanvolve",
            "--input",
            s(&input),
            "--config",
            s(&config),
            "--output",
            s(&out_path),
            "--workers",
            workers,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push(std::fs::read(&out_path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);

    // the environment variable is the default for --workers
    let out_path = dir.path().join("env.npy");
    let out = Command::new(env!("CARGO_BIN_EXE_quanvkit"))
        .args([
            "quanvolve",
            "--input",
            s(&input),
            "--config",
            s(&config),
            "--output",
            s(&out_path),
        ])
        .env("QUANVKIT_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(std::fs::read(&out_path).unwrap(), outputs[0]);
    let bad = Command::new(env!("CARGO_BIN_EXE_quanvkit"))
        .args([
            "quanvolve",
            "--input",
            s(&input),
            "--config",
            s(&config),
            "--output",
            s(&out_path),
        ])
        .env("QUANVKIT_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn csv_and_png_exports() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("img.npy");
    save_image_npy(&texture(8, 8, 1, 2), &input).unwrap();
    let config = repo_path("data/configs/mnist-probe.json");
    for (fmt, name) in [("csv", "m.csv"), ("png", "m.png")] {
        let out_path = dir.path().join(name);
        let out = quanvkit(&[
            "quanvolve",
            "--input",
            s(&input),
            "--config",
            s(&config),
            "--output",
            s(&out_path),
            "--format",
            fmt,
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        assert!(out_path.exists());
    }
    assert!(dir.path().join("m.png.scale.txt").exists());
    assert!(std::fs::read_to_string(dir.path().join("m.csv"))
        .unwrap()
        .starts_with("4,4,4\n"));
}

#[test]
fn missing_input_is_an_io_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("does-not-exist.png");
    let config = repo_path("data/configs/mnist-probe.json");
    let out = quanvkit(&[
        "quanvolve",
        "--input",
        s(&missing),
        "--config",
        s(&config),
        "--output",
        "x.npy",
    ]);
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("does-not-exist.png"),
        "{}",
        stderr(&out)
    );

    let out = quanvkit(&[
        "quanvolve",
        "--input",
        s(&missing),
        "--config",
        s(&dir.path().join("none.json")),
        "--output",
        "x.npy",
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("none.json"));
}

#[test]
fn invalid_config_reports_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(
        &config,
        r#"{"schema": "quanvkit-config/1", "layers": [{"kernel_size": 3, "n_qubits": 4}]}"#,
    )
    .unwrap();
    for args in [
        vec![
            "quanvolve",
            "--input",
            "x.png",
            "--config",
            s(&config),
            "--output",
            "y.npy",
        ],
        vec!["inspect", "--config", s(&config)],
    ] {
        let out = quanvkit(&args);
        assert_eq!(code(&out), 2);
        assert!(
            stderr(&out).contains("layers[0].n_qubits"),
            "{}",
            stderr(&out)
        );
    }
}

#[test]
fn usage_errors() {
    assert_eq!(code(&quanvkit(&[])), 2);
    assert_eq!(code(&quanvkit(&["frobnicate"])), 2);
    assert_eq!(code(&quanvkit(&["quanvolve", "--config"])), 2);
    assert_eq!(
        code(&quanvkit(&[
            "quanvolve",
            "--config",
            "c.json",
            "--format",
            "tiff"
        ])),
        2
    );
    assert_eq!(code(&quanvkit(&["--help"])), 0);
}

fn inspect_channels(config: &str, dir: &Path) -> (usize, usize) {
    let img = dir.join("tex.png");
    common::write_png(&img, &texture(16, 16, 1, 7));
    let grid = dir.join(format!("{config}.png"));
    let cfg = repo_path(&format!("data/configs/{config}.json"));
    let out = quanvkit(&[
        "--json",
        "inspect",
        "--config",
        s(&cfg),
        "--image",
        s(&img),
        "--output",
        s(&grid),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(grid.exists());
    let v = json(&out);
    (
        v["grid"]["channels"].as_u64().unwrap() as usize,
        v["grid"]["non_constant_channels"].as_u64().unwrap() as usize,
    )
}

#[test]
fn inspect_informative_channels() {
    let dir = tempfile::tempdir().unwrap();
    let (total, informative) = inspect_channels("random-layer-k3-n16", dir.path());
    assert_eq!(total, 16);
    assert!(informative <= 9, "{informative}");
    assert_eq!(inspect_channels("entangled-k3-n16", dir.path()), (16, 16));
}

#[test]
fn inspect_gate_table() {
    let out = quanvkit(&[
        "inspect",
        "--config",
        s(&repo_path("data/configs/encoder-only-k2.json")),
    ]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table
        .lines()
        .filter(|l| l.contains(" enc ") || l.contains(" ans "))
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.contains(" enc ")));

    let cfg = repo_path("data/configs/random-layer-k3-n16.json");
    let a = quanvkit(&["inspect", "--config", s(&cfg), "--seed", "9"]);
    let b = quanvkit(&["inspect", "--config", s(&cfg), "--seed", "9"]);
    let c = quanvkit(&["inspect", "--config", s(&cfg), "--seed", "10"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("CNOT"));
}

#[test]
fn bench_writes_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.json");
    std::fs::write(
        &grid,
        r#"{"channels": 1, "blocks": [{"image_size": [6, 10], "kernel_size": [2], "stride": [1, 2], "n_qubits": [4], "out_channels": [2]}]}"#,
    )
    .unwrap();
    let csv = dir.path().join("bench.csv");
    let out = quanvkit(&[
        "bench",
        "--grid",
        s(&grid),
        "--repeats",
        "3",
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "image_size,kernel_size,stride,n_qubits,out_channels,workers,median_s,stddev_s,circuit_evals,repeats"
    );
    assert_eq!(text.lines().count(), 5);
    assert!(csv.with_extension("gp").exists());
    assert_eq!(
        code(&quanvkit(&[
            "bench",
            "--grid",
            s(&grid),
            "--repeats",
            "2",
            "--out",
            s(&csv)
        ])),
        2
    );
}

#[test]
fn bench_check_golden_and_shuffled_negative_control() {
    let golden = repo_path("data/golden/bench-default.csv");
    let out = quanvkit(&["--json", "bench", "--check", s(&golden), "--assert"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(&out)["trends"]["passed"], true);

    // Reverse the timing columns so every sweep runs the wrong way.
    let text = std::fs::read_to_string(&golden).unwrap();
    let mut lines: Vec<Vec<String>> = text
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    let timings: Vec<(String, String)> = lines[1..]
        .iter()
        .map(|r| (r[6].clone(), r[7].clone()))
        .rev()
        .collect();
    for (row, (m, sd)) in lines[1..].iter_mut().zip(timings) {
        row[6] = m;
        row[7] = sd;
    }
    let dir = tempfile::tempdir().unwrap();
    let shuffled = dir.path().join("shuffled.csv");
    std::fs::write(
        &shuffled,
        lines.iter().map(|r| r.join(",") + "\n").collect::<String>(),
    )
    .unwrap();
    let out = quanvkit(&["bench", "--check", s(&shuffled), "--assert"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("FAIL"));
    // without --assert the same data only reports
    assert_eq!(code(&quanvkit(&["bench", "--check", s(&shuffled)])), 0);
    assert_eq!(
        code(&quanvkit(&[
            "bench",
            "--check",
            s(&dir.path().join("nope.csv"))
        ])),
        3
    );
}

#[test]
fn probe_exit_codes_follow_assertions() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("probe.csv");
    let dataset = repo_path("data/mnist-subset");
    let config = repo_path("data/configs/mnist-probe.json");
    let base = [
        "--json",
        "probe",
        "--dataset",
        s(&dataset),
        "--config",
        s(&config),
        "--out",
        s(&csv),
        "--train-limit",
        "200",
        "--test-limit",
        "100",
    ];

    let out = quanvkit(&base);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("class,conv_acc,quanv_acc\n"));
    assert_eq!(text.lines().count(), 12);

    let out = quanvkit(&[&base[..], &["--assert"]].concat());
    let failures = json(&out)["assertion_failures"].as_array().unwrap().len();
    assert_eq!(code(&out), if failures == 0 { 0 } else { 1 });

    // a golden reference far from any attainable result must fail
    let forged = dir.path().join("forged.json");
    std::fs::write(&forged, r#"{"raw_accuracy": 0.0, "quanv_accuracy": 0.0, "conv_accuracy": 0.0, "raw_purity": 0.0, "quanv_purity": 0.0, "conv_purity": 0.0}"#).unwrap();
    let out = quanvkit(&[&base[..], &["--assert", "--golden", s(&forged)]].concat());
    assert_eq!(code(&out), 1);

    let out = quanvkit(&[
        "probe",
        "--dataset",
        s(&dir.path().join("nowhere")),
        "--config",
        s(&config),
        "--out",
        s(&csv),
    ]);
    assert_eq!(code(&out), 3);
}
