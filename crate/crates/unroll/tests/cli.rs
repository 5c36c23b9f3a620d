// Copyright 2026 The unroll authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use unroll::io::{read_regularizer, write_regularizer};
use unroll_core::{local_minima, Matrix, Regularizer};

fn unroll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_unroll"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(out)).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn c_constant_else_branch() {
    let v = json(&unroll(&["c-constant", "--n-steps", "3", "--omega", "1.8"]));
    assert_eq!(v["branch"], "else");
    assert_eq!(v["lower"].as_f64().unwrap(), 1.35);
    assert!((v["upper"].as_f64().unwrap() - 1.4690).abs() < 1e-4);
    assert!((v["value"].as_f64().unwrap() - 1.512).abs() < 1e-12);
}

#[test]
fn c_constant_bounds_branch() {
    let v = json(&unroll(&["c-constant", "--n-steps", "3", "--omega", "0.1"]));
    assert_eq!(v["branch"], "bounds");
    assert!((v["value"].as_f64().unwrap() - 0.075).abs() < 1e-12);
}

#[test]
fn odd_landscape_has_two_minima() {
    let out = unroll(&[
        "landscape",
        "--n-steps",
        "3",
        "--omega",
        "0.1",
        "--mu",
        "1",
        "--sigma",
        "0.1",
        "--theta",
        "0.02",
        "--r-max",
        "8",
        "--points",
        "1000",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(header, ["r", "risk"]);
    assert_eq!(rows.len(), 1000);
    let risk: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(local_minima(&risk).len(), 2);
}

#[test]
fn usage_errors_exit_two() {
    let out = unroll(&["landscape", "--n-steps", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = unroll(&["best-risk", "--class", "bilevel", "--n", "3", "--k", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = unroll(&["verify", "--suite", "nonexistent"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn missing_input_exits_three() {
    let out = unroll(&["train", "--n", "4", "--input", "/nonexistent/signal.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_reports_checks() {
    let v = json(&unroll(&["verify", "--suite", "gradient-check", "--seed", "3"]));
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 50);
    assert!(v["checks"][0]["deviation"].as_f64().unwrap() < 1e-5);
}

#[test]
fn mc_risk_suite_passes() {
    let v = json(&unroll(&["verify", "--suite", "mc-risk", "--seed", "7"]));
    assert!(v["checks_passed"].as_u64().unwrap() >= 47);
}

#[test]
fn single_cell_sweep() {
    let out = unroll(&[
        "sweep",
        "--quantity",
        "bilevel",
        "--kind",
        "iid",
        "--n",
        "3",
        "--k",
        "2",
        "--theta",
        "0.5",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(
        header,
        ["kind", "n", "k", "N", "omega", "mu", "theta", "sigma", "risk", "attained", "branch"]
    );
    assert_eq!(rows.len(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("1 cells"));
}

#[test]
fn ratio_sweep_is_monotone_in_k() {
    let out = unroll(&[
        "sweep",
        "--quantity",
        "risk-ratio",
        "--n",
        "500",
        "--k",
        "1:500",
        "--mu",
        "1",
        "--sigma",
        "0.9",
        "--theta",
        "0.2,0.5",
    ]);
    assert!(out.status.success());
    let (header, rows) = csv_rows(&stdout(&out));
    let ratio = header.iter().position(|h| h == "ratio").unwrap();
    for theta in ["0.2", "0.5"] {
        let col: Vec<f64> = rows
            .iter()
            .filter(|r| r[6] == theta)
            .map(|r| r[ratio].parse().unwrap())
            .collect();
        assert_eq!(col.len(), 500);
        assert!(col.windows(2).all(|w| w[1] >= w[0]), "theta {theta}");
        assert!((col[499] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn unrolling_beats_bilevel_at_optimal_stepsize() {
    for sigma in ["0.9", "0.1"] {
        let out = unroll(&[
            "sweep",
            "--quantity",
            "risk-ratio",
            "--numerator",
            "bilevel",
            "--denominator",
            "unrolling-opt-omega",
            "--kind",
            "const,iid",
            "--n",
            "40",
            "--k",
            "1:40",
            "--n-steps",
            "2,4",
            "--mu",
            "1",
            "--sigma",
            sigma,
            "--theta",
            "0.2,0.5",
        ]);
        assert!(out.status.success());
        let (header, rows) = csv_rows(&stdout(&out));
        let ratio = header.iter().position(|h| h == "ratio").unwrap();
        for r in &rows {
            assert!(r[ratio].parse::<f64>().unwrap() >= 1.0 - 1e-12, "{r:?}");
        }
    }
}

#[test]
fn sweep_output_is_deterministic_and_round_trips() {
    let args = [
        "sweep",
        "--quantity",
        "mc-check",
        "--kind",
        "const,iid",
        "--n",
        "3",
        "--k",
        "1,3",
        "--n-steps",
        "2,3",
        "--omega",
        "0.5",
        "--theta",
        "0.3",
        "--mc-samples",
        "5000",
        "--seed",
        "11",
    ];
    let one = unroll(&[&args[..], &["--threads", "1"]].concat());
    let two = unroll(&[&args[..], &["--threads", "2"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, two.stdout);
    let text = stdout(&one);
    let (_, rows) = csv_rows(&text);
    for row in &rows {
        for field in row {
            if let Ok(v) = field.parse::<f64>() {
                assert_eq!(format!("{v:?}").parse::<f64>().unwrap(), v);
                if field.contains('.') || field.contains('e') {
                    assert_eq!(&format!("{v:?}"), field);
                }
            }
        }
    }
}

#[test]
fn json_sweep_matches_csv() {
    let base = [
        "sweep",
        "--quantity",
        "unrolling",
        "--n",
        "4",
        "--k",
        "1:4",
        "--n-steps",
        "3",
        "--omega",
        "0.7",
    ];
    let csv = stdout(&unroll(&base));
    let js = json(&unroll(&[&base[..], &["--format", "json"]].concat()));
    let (header, rows) = csv_rows(&csv);
    let arr = js.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    let risk = header.iter().position(|h| h == "risk").unwrap();
    for (obj, row) in arr.iter().zip(&rows) {
        assert_eq!(obj["risk"].as_f64().unwrap(), row[risk].parse::<f64>().unwrap());
    }
}

#[test]
fn config_file_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"n_steps": 3, "omega": 0.1}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = json(&unroll(&["--config", cfg, "c-constant"]));
    assert_eq!(from_file["branch"], "bounds");
    let overridden = json(&unroll(&["--config", cfg, "c-constant", "--omega", "1.8"]));
    assert_eq!(overridden["branch"], "else");
}

#[test]
fn best_risk_writes_regularizer() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["r.csv", "r.bin"] {
        let path = dir.path().join(name);
        let v = json(&unroll(&[
            "best-risk",
            "--class",
            "unrolling",
            "--kind",
            "iid",
            "--n",
            "4",
            "--k",
            "2",
            "--n-steps",
            "2",
            "--omega",
            "0.8",
            "--theta",
            "0.5",
            "--regularizer-out",
            path.to_str().unwrap(),
        ]));
        assert_eq!(v["attained"], true);
        let reg = read_regularizer(&path).unwrap();
        assert_eq!((reg.k(), reg.n()), (2, 4));
    }
}

#[test]
fn regularizer_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let reg = Regularizer::new(Matrix::from_row_major(
        2,
        3,
        vec![0.1, -2.5e-17, 3.0, 1.0 / 3.0, 7e300, -0.0],
    ))
    .unwrap();
    for name in ["r.csv", "r.bin"] {
        let path = dir.path().join(name);
        write_regularizer(&reg, &path).unwrap();
        assert_eq!(read_regularizer(&path).unwrap(), reg);
    }
}

fn write_signal(path: &Path, values: &[f64]) {
    let text: String = values.iter().map(|v| format!("{v}\n")).collect();
    std::fs::write(path, text).unwrap();
}

#[test]
fn train_depth_table() {
    let out = unroll(&[
        "train", "--n", "4", "--k", "1", "--mu", "1", "--theta", "0.3", "--sigma", "0.3", "--frames", "300", "--steps",
        "50", "--depths", "2,3", "--seed", "5",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = csv_rows(&stdout(&out));
    assert_eq!(
        header,
        ["N", "mode", "k", "n", "omega_final", "mse_train", "mse_heldout", "seed"]
    );
    let modes: Vec<(&str, &str)> = rows.iter().map(|r| (r[0].as_str(), r[1].as_str())).collect();
    assert_eq!(
        modes,
        [("2", "fixed"), ("2", "learned"), ("3", "fixed"), ("3", "learned")]
    );
}

#[test]
fn train_on_signal_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("speech.csv");
    let samples: Vec<f64> = (0..960).map(|i| (i as f64 * 0.05).sin() * 3.0).collect();
    write_signal(&path, &samples);
    let v = json(&unroll(&[
        "train",
        "--n",
        "8",
        "--k",
        "2",
        "--n-steps",
        "3",
        "--sigma",
        "0.1",
        "--mode",
        "learned",
        "--steps",
        "100",
        "--input",
        path.to_str().unwrap(),
    ]));
    assert_eq!(v["frames"], 120);
    assert_eq!(v["mode"], "learned");
    assert_eq!(v["loss_trace"].as_array().unwrap().len(), 100);
}
