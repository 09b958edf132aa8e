use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const BELL: &str = r#"{"dims": [2, 2], "amplitudes": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]]}"#;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tensorfact"));
    cmd.env_remove("SOURCE_DATE_EPOCH");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

/// 3x3 product state with amplitude `u_i v_j`.
fn product_file() -> String {
    let u = [0.6, 0.8, 0.0];
    let v = [0.5, 0.5, 0.5f64.sqrt()];
    let amps: Vec<String> = u
        .iter()
        .flat_map(|a| v.iter().map(move |b| format!("[{:.17e}, 0.0]", a * b)))
        .collect();
    format!(r#"{{"dims": [3, 3], "amplitudes": [{}]}}"#, amps.join(", "))
}

#[test]
fn schmidt_of_bell_file() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bell.json", BELL);
    let r = json(&run(&["schmidt", s(&p)]));
    assert_eq!(r["result"]["rank"], 2);
    assert_eq!(r["result"]["factorizable"], false);
    for c in r["result"]["coefficients"].as_array().unwrap() {
        assert!((c.as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
    }
    assert_eq!(r["manifest"]["seed"], 42);
    assert!(r["manifest"]["timestamp"].is_null());
}

#[test]
fn schmidt_of_product_file() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "prod.json", &product_file());
    let r = json(&run(&["schmidt", s(&p)]));
    assert_eq!(r["result"]["factorizable"], true);
}

#[test]
fn truncated_file_exits_with_parse_code() {
    let dir = TempDir::new().unwrap();
    let text = "{\n  \"dims\": [2, 2],\n  \"amplitudes\": [[0.7, 0.0],";
    let p = write(&dir, "cut.json", text);
    let out = run(&["schmidt", s(&p)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn amplitude_count_mismatch_exits_with_dims_code() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "short.json",
        r#"{"dims": [2, 2], "amplitudes": [[1.0, 0.0]]}"#,
    );
    assert_eq!(run(&["schmidt", s(&p)]).status.code(), Some(3));
}

#[test]
fn unnormalized_file_warns_on_stderr() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "big.json",
        r#"{"dims": [1, 2], "amplitudes": [[1.0, 0.0], [1.0, 0.0]]}"#,
    );
    let out = run(&["schmidt", s(&p)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("normalizing"));
}

#[test]
fn qcf_reports_value_and_verdict() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bell.json", BELL);
    let zz = json(&run(&[
        "qcf",
        s(&p),
        "--obs-a",
        "pauli-z",
        "--obs-b",
        "pauli-z",
        "--local",
    ]));
    assert!((zz["result"]["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(zz["result"]["verdict"], "entangled-witnessed");
    let zx = json(&run(&[
        "qcf",
        s(&p),
        "--obs-a",
        "pauli-z",
        "--obs-b",
        "pauli-x",
        "--local",
    ]));
    assert_eq!(zx["result"]["verdict"], "inconclusive");
    assert_eq!(zx["result"]["schmidt_rank"], 2);
}

#[test]
fn qcf_accepts_matrix_files() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bell.json", BELL);
    let z = write(
        &dir,
        "z.json",
        r#"{"rows": 2, "cols": 2, "entries": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]]}"#,
    );
    let r = json(&run(&[
        "qcf",
        s(&p),
        "--obs-a",
        s(&z),
        "--obs-b",
        "pauli-z",
        "--local",
    ]));
    assert!((r["result"]["value"][0].as_f64().unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn unknown_observable_exits_4_and_lists_names() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bell.json", BELL);
    let out = run(&[
        "qcf",
        s(&p),
        "--obs-a",
        "spin-q",
        "--obs-b",
        "pauli-z",
        "--local",
    ]);
    assert_eq!(out.status.code(), Some(4));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["pauli-x", "pauli-y", "pauli-z", "position"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn demo_coords_defaults() {
    let r = json(&run(&["demo", "coords"]));
    let q = r["result"]["gaussian"]["qcf_ab"].as_f64().unwrap();
    assert!((q + 3.0).abs() < 3e-3, "{q}");
    assert_eq!(r["result"]["gaussian"]["rank_xy"], 1);
    assert_eq!(r["manifest"]["parameters"]["d"], 129);
}

#[test]
fn demo_coords_even_grid_exits_5() {
    let out = run(&["demo", "coords", "--d", "64"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("odd"));
}

#[test]
fn demo_coords_sweep_csv_is_sorted() {
    let out = run(&[
        "demo", "coords", "--d", "33", "--sweep", "2:1:3", "--format", "csv",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("param,rank_ab,qcf_ab,variance_diff"));
    let params: Vec<f64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(params, vec![1.0, 1.5, 2.0]);
}

#[test]
fn demo_spins_defaults() {
    let r = json(&run(&["demo", "spins"]));
    assert!(r["result"]["closed_form_residual_max"].as_f64().unwrap() <= 1e-12);
    assert_eq!(r["result"]["samples"], 1000);
}

#[test]
fn demo_bell_reaches_tsirelson() {
    let r = json(&run(&["demo", "bell", "--samples", "5"]));
    let v = r["result"]["bell_state"]["value"].as_f64().unwrap();
    assert!((v - 2.828427).abs() < 1e-6);
}

#[test]
fn chsh_on_bell_file_and_wrong_dims() {
    let dir = TempDir::new().unwrap();
    let bell = write(&dir, "bell.json", BELL);
    let r = json(&run(&["chsh", s(&bell)]));
    assert_eq!(r["result"]["violates"], true);
    let prod = write(&dir, "prod.json", &product_file());
    assert_eq!(run(&["chsh", s(&prod)]).status.code(), Some(3));
}

#[test]
fn refactor_sumdiff_entangles_a_product_file() {
    let dir = TempDir::new().unwrap();
    let prod = write(&dir, "prod.json", &product_file());
    let out = dir.path().join("sd.json");
    assert!(run(&[
        "refactor",
        s(&prod),
        "--bijection",
        "sumdiff",
        "--out",
        s(&out)
    ])
    .status
    .success());
    let r = json(&run(&["schmidt", s(&out)]));
    assert!(r["result"]["rank"].as_u64().unwrap() >= 2);
    // amplitudes are unchanged, only the structure is recorded
    let before: Value = serde_json::from_str(&product_file()).unwrap();
    let after: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let amps = |v: &Value| -> Vec<f64> {
        v["amplitudes"]
            .as_array()
            .unwrap()
            .iter()
            .flat_map(|p| {
                p.as_array()
                    .unwrap()
                    .iter()
                    .map(|x| x.as_f64().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect()
    };
    assert_eq!(amps(&before), amps(&after));
    assert!(after["tps"].is_object());
}

#[test]
fn refactor_swap_twice_and_identity() {
    let dir = TempDir::new().unwrap();
    let prod = write(&dir, "prod.json", &product_file());
    let once = dir.path().join("once.json");
    let twice = dir.path().join("twice.json");
    let same = dir.path().join("same.json");
    assert!(run(&[
        "refactor",
        s(&prod),
        "--bijection",
        "swap",
        "--out",
        s(&once)
    ])
    .status
    .success());
    assert!(run(&[
        "refactor",
        s(&once),
        "--bijection",
        "swap",
        "--out",
        s(&twice)
    ])
    .status
    .success());
    assert!(run(&[
        "refactor",
        s(&prod),
        "--bijection",
        "identity",
        "--out",
        s(&same)
    ])
    .status
    .success());
    let twice: Value = serde_json::from_str(&std::fs::read_to_string(&twice).unwrap()).unwrap();
    let same: Value = serde_json::from_str(&std::fs::read_to_string(&same).unwrap()).unwrap();
    assert_eq!(twice["tps"], same["tps"]);
    assert!(same.get("tps").is_none());
}

#[test]
fn refactor_with_repeated_targets_exits_6() {
    let dir = TempDir::new().unwrap();
    let prod = write(&dir, "prod.json", &product_file());
    let bad = write(
        &dir,
        "bad.json",
        r#"{"source": [3, 3], "map": [[0,0],[0,0],[0,2],[1,0],[1,1],[1,2],[2,0],[2,1],[2,2]]}"#,
    );
    assert_eq!(
        run(&["refactor", s(&prod), "--bijection", s(&bad)])
            .status
            .code(),
        Some(6)
    );
}

#[test]
fn refactor_sumdiff_on_even_grid_exits_5() {
    let dir = TempDir::new().unwrap();
    let bell = write(&dir, "bell.json", BELL);
    assert_eq!(
        run(&["refactor", s(&bell), "--bijection", "sumdiff"])
            .status
            .code(),
        Some(5)
    );
}

#[test]
fn reruns_are_byte_identical() {
    let a = run(&["demo", "spins", "--samples", "200", "--seed", "7"]);
    let b = run(&[
        "demo",
        "spins",
        "--samples",
        "200",
        "--seed",
        "7",
        "--sequential",
    ]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["demo", "spins", "--samples", "200", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn source_date_epoch_is_recorded() {
    let out = bin()
        .args(["demo", "spins", "--samples", "3"])
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap();
    let r = json(&out);
    assert_eq!(r["manifest"]["timestamp"], "1700000000");
}

#[test]
fn bad_flag_exits_with_parse_code() {
    assert_eq!(
        run(&["demo", "coords", "--d", "many"]).status.code(),
        Some(2)
    );
}
