//! CLI acceptance: deterministic byte-identical reports (criterion 11),
//! the documented exit-code contract, and the worked command examples.

use std::fs;
use std::path::Path;
use std::process::Command;

fn swalk() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swalk"))
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const PM1: &str = r#"{
  "kind": "lattice",
  "x1": [[-1, "1/2"], [1, "1/2"]],
  "x1p": [[-1, "1/2"], [1, "1/2"]],
  "alpha": "1/2"
}"#;

const DETERMINISTIC: &str = r#"{
  "kind": "lattice",
  "x1": [[-1, "1"]],
  "x1p": [[1, "1"]],
  "alpha": "1"
}"#;

const DRIFTED: &str = r#"{
  "kind": "lattice",
  "x1": [[-2, "2/3"], [1, "1/3"]],
  "x1p": [[2, "2/3"], [-1, "1/3"]],
  "alpha": "1/2"
}"#;

#[test]
fn criterion_11_byte_identical_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "drifted.json", DRIFTED);
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for run in ["a", "b"] {
        let out = tmp.path().join(run);
        for cmd in ["stationary", "verify"] {
            let st = swalk()
                .args([
                    cmd,
                    "--spec",
                    &spec,
                    "--out",
                    out.to_str().unwrap(),
                    "--format",
                    "csv",
                ])
                .output()
                .unwrap();
            assert!(st.status.success(), "{cmd} failed: {st:?}");
        }
        let st = swalk()
            .args([
                "simulate",
                "--spec",
                &spec,
                "--seed",
                "7",
                "--steps",
                "50000",
                "--replicas",
                "3",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(st.status.success());
        let st = swalk()
            .args(["report", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(st.status.success());
        let mut blob = Vec::new();
        let mut names: Vec<_> = fs::read_dir(&out)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        for n in &names {
            blob.extend_from_slice(n.as_bytes());
            blob.extend_from_slice(&fs::read(out.join(n)).unwrap());
        }
        outputs.push(blob);
    }
    let ok = outputs[0] == outputs[1];
    println!(
        "criterion 11 byte-identical reports: {}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "reports differ between identical runs");
}

#[test]
fn verify_pm1_passes_with_half_density() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "pm1.json", PM1);
    let out = swalk()
        .args(["verify", "--spec", &spec, "--tol", "1e-10"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], true);
    assert_eq!(doc["constants"]["p"]["value"], "1/2");
    assert_eq!(doc["constants"]["p_prime"]["value"], "1/2");
    let names: Vec<&str> = doc["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"random_walk_mu_is_p_lambda"));
    assert!(names.contains(&"random_walk_p_equals_p_prime"));
}

#[test]
fn stationary_deterministic_golden_measures() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "det.json", DETERMINISTIC);
    let out = swalk().args(["stationary", "--spec", &spec]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let nu: Vec<(i64, &str)> = doc["nu"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["x"].as_i64().unwrap(), r["mass"]["value"].as_str().unwrap()))
        .collect();
    assert_eq!(nu, vec![(-1, "1"), (0, "1")]);
    // μ = ν for this pair: density 1 exactly on {−1, 0}, 0 elsewhere.
    for row in doc["mu"]["rows"].as_array().unwrap() {
        let x = row["x"].as_i64().unwrap();
        let want = if x == -1 || x == 0 { "1" } else { "0" };
        assert_eq!(row["density"]["value"], want, "mu at {x}");
    }
    // Measure tables carry their metadata.
    for key in ["nu", "mu", "pi"] {
        let t = &doc[key];
        assert!(t["window"].is_array(), "{key} window");
        assert!(t["interior"].is_array(), "{key} interior");
        assert!(t["span"].is_string(), "{key} span");
        assert!(t["backend"].is_string(), "{key} backend");
    }
}

#[test]
fn malformed_spec_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    // E X₁ > 0 violates the oscillation assumption.
    let spec = write_spec(
        tmp.path(),
        "bad.json",
        r#"{
          "kind": "lattice",
          "x1": [[1, "2/3"], [-1, "1/3"]],
          "x1p": [[1, "1"]],
          "alpha": "1"
        }"#,
    );
    let out = swalk().args(["verify", "--spec", &spec]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("oscillation"), "stderr: {msg}");

    // Unparseable JSON is also exit 2.
    let garbled = write_spec(tmp.path(), "garbled.json", "{ not json");
    let out = swalk().args(["ladder", "--spec", &garbled]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_statistical_comparison_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "drifted.json", DRIFTED);
    // 40 occupation samples cannot match the target within TV 0.02.
    let out = swalk()
        .args([
            "simulate", "--spec", &spec, "--seed", "3", "--steps", "40",
            "--replicas", "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], false);
}

#[test]
fn report_merges_and_emits_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = write_spec(tmp.path(), "pm1.json", PM1);
    let out = tmp.path().join("out");
    for cmd in ["ladder", "stationary"] {
        let st = swalk()
            .args([cmd, "--spec", &spec, "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(st.status.success());
    }
    let st = swalk()
        .args(["report", "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(0));
    let merged: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert!(merged["reports"]["ladder"].is_object());
    assert!(merged["reports"]["stationary"].is_object());
    let csv =
        fs::read_to_string(out.join("report_reports_stationary_nu.csv")).unwrap();
    assert!(csv.starts_with("x,mass,approx,backend\n"));
    assert!(csv.lines().count() > 2);
}
