use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn vglab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vglab")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn write_spec(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bishop_on_the_round_sphere_passes() {
    let out = vglab(&["verify", "bishop", "--kind", "sphere", "--n", "3", "--radii", "0.1:3.0:30", "--grid", "lin"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json_stdout(&out);
    assert_eq!(rep["overall"], "PASS");
    assert_eq!(rep["certificate_id"], "bishop");
}

#[test]
fn lemma1_from_flags_passes() {
    let out = vglab(&["verify", "lemma1", "--n", "3", "--R", "1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_stdout(&out)["overall"], "PASS");
}

#[test]
fn volume_comparison_on_a_lemma1_spec_passes() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "l1.json", r#"{"kind": "lemma1", "n": 3, "parameters": {"R": 1000}}"#);
    let out = vglab(&["verify", "thm-a", "--metric", &spec, "--nu", "3.5", "--radii", "1:1e4:40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json_stdout(&out);
    assert_eq!(rep["overall"], "PASS");
    assert_eq!(rep["inputs"]["radii"].as_array().unwrap().len(), 40);
}

#[test]
fn unknown_parameter_is_a_usage_error_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "bad.json", r#"{"kind": "lemma1", "n": 3, "parameters": {"radius": 10}}"#);
    let out = vglab(&["build", "--metric", &spec]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radius"));
}

#[test]
fn four_bubbles_at_ten_thousand() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "b.json", r#"{"kind": "thm_b", "n": 3, "parameters": {"R": 1e4}}"#);
    let out = vglab(&["build", "--metric", &spec]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let built = json_stdout(&out);
    assert_eq!(built["derived"]["N"], 4);
    assert_eq!(built["derived"]["centers"].as_array().unwrap().len(), 4);
    assert_eq!(built["spec"]["parameters"]["R"].as_f64(), Some(1e4));
}

#[test]
fn outputs_are_byte_identical_and_carry_a_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = vglab(&["verify", "lemma2", "--n", "3", "--R", "100", "--Rbar", "5", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(dir.path().join(format!("{name}.meta.json")).exists());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn tables_are_csv_with_c_style_floats() {
    let out = vglab(&["curvature", "--kind", "hyperbolic", "--n", "3", "--radii", "0.5:2:3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,k_rad,k_tan,ric_rad,ric_tan,scal,sigma_minus,ricm,rho"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "5.000000000000e-01");
    assert_eq!(row[1], "-1.000000000000e+00");
    assert_eq!(row[5], "-6.000000000000e+00");
}

#[test]
fn spectral_verdict_sets_the_exit_status() {
    let below = vglab(&["spectral", "--kind", "hyperbolic", "--n", "2", "--lambda", "0.2", "--potential", "shift"]);
    assert_eq!(below.status.code(), Some(0));
    let above = vglab(&["spectral", "--kind", "hyperbolic", "--n", "2", "--lambda", "0.3", "--potential", "shift"]);
    assert_eq!(above.status.code(), Some(1));
    assert_eq!(json_stdout(&above)["verdict"]["nonneg"], false);
}

#[test]
fn sweep_writes_one_report_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = Command::new(env!("CARGO_BIN_EXE_vglab"))
        .args(["sweep", "lemma1", "--param", "R", "--values", "10:1000:3", "--n", "3", "--out-dir"])
        .arg(&out_dir)
        .env("VGLAB_MAX_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let index: Value = serde_json::from_str(&std::fs::read_to_string(out_dir.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["overall"], "PASS");
    assert_eq!(index["points"].as_array().unwrap().len(), 3);
    for i in 0..3 {
        assert!(out_dir.join(format!("lemma1-{i:03}.json")).exists());
    }
    assert!(out_dir.join("index.json.meta.json").exists());
}

#[test]
fn failed_hypotheses_exit_one() {
    let out = vglab(&["verify", "thm-d", "--kind", "euclidean", "--n", "3", "--lambda", "0.3", "--alpha", "5", "--radii", "10"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn malformed_invocations_exit_64() {
    for args in [
        vec!["frobnicate"],
        vec!["verify", "thm-a", "--kind", "euclidean"],
        vec!["verify", "thm-a", "--kind", "euclidean", "--n", "3", "--radii", "1:10:5"],
        vec!["verify", "bishop", "--kind", "sphere", "--n", "3", "--radii", "0:3:5"],
        vec!["verify", "lemma1", "--n", "3"],
        vec!["--tol", "-1", "verify", "lemma1", "--n", "3", "--R", "10"],
    ] {
        let out = vglab(&args);
        assert_eq!(out.status.code(), Some(64), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn missing_spec_file_is_an_io_error() {
    let out = vglab(&["build", "--metric", "/nonexistent/spec.json"]);
    assert_eq!(out.status.code(), Some(74));
}

#[test]
fn serial_and_parallel_sweeps_agree() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: Option<&str>| {
        let out_dir = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_vglab"));
        cmd.args(["sweep", "lemma2", "--param", "R", "--values", "20:200:4", "--n", "3", "--Rbar", "5", "--out-dir"])
            .arg(&out_dir)
            .env_remove("VGLAB_MAX_THREADS");
        if let Some(k) = threads {
            cmd.env("VGLAB_MAX_THREADS", k);
        }
        assert_eq!(cmd.output().unwrap().status.code(), Some(0));
        (0..4)
            .map(|i| std::fs::read(out_dir.join(format!("lemma2-{i:03}.json"))).unwrap())
            .chain([std::fs::read(out_dir.join("index.json")).unwrap()])
            .collect::<Vec<_>>()
    };
    assert_eq!(run("serial", None), run("parallel", Some("3")));
}
