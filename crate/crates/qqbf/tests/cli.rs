use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const IDENTITY: &str = r#"{"P":{"coeffs":[[0,0],[1,0]]},"Q":{"coeffs":[[1,0]]}}"#;
const SUM: &str = r#"{"P":{"k":2,"terms":[{"index":[1,0],"re":1},{"index":[0,1],"re":1}]},"Q":{"k":2,"terms":[{"index":[0,0],"re":1}]}}"#;
const PRODUCT: &str = r#"{"P":{"k":2,"terms":[{"index":[1,1],"re":1}]},"Q":{"k":2,"terms":[{"index":[0,0],"re":1}]}}"#;
const NEAR_COMMON_ROOT: &str = r#"{"P":{"coeffs":[[-1,0],[1,0]]},"Q":{"coeffs":[[-1.000000000001,0],[1,0]]}}"#;

fn qqbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qqbf")).args(args).env_remove("QQBF_NUM_POLICY").output().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn error_kind(o: &Output) -> String {
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(format!("cli-{}-{name}", std::process::id()))
}

#[test]
fn synth_identity() {
    let o = qqbf(&["synth", "--fn", IDENTITY]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["m"], 0);
    assert_eq!(v["bit_order"], "lsb-first");
    let u = &v["unitary"];
    assert_eq!(u[0][0][0], 1.0);
    assert_eq!(u[1][1][0], 1.0);
    assert_eq!(u[0][1][0], 0.0);
}

#[test]
fn compat_sum_then_product() {
    let o = qqbf(&["compat", "--g0", SUM, "--g1", PRODUCT, "--n", "1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["compatible"], true);
    assert!(v.get("s1").is_some() && v.get("s2").is_some());
}

#[test]
fn multifunc_product_then_sum_is_infeasible() {
    let o = qqbf(&["multifunc", "--g0", PRODUCT, "--g1", SUM, "--n", "1,1"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_kind(&o), "incompatible");
    let d = qqbf(&["multifunc", "--g0", PRODUCT, "--g1", SUM, "--n", "1,1", "--dilation", "--z", "1,2i"]);
    assert_eq!(d.status.code(), Some(0));
    assert_eq!(stdout_json(&d)["branches"].as_array().unwrap().len(), 2);
}

#[test]
fn input_errors_exit_2() {
    for args in [
        vec!["synth", "--fn", "{"],
        vec!["synth", "--fn", NEAR_COMMON_ROOT],
        vec!["synth", "--fn", SUM, "--n", "1"],
        vec!["synth", "--fn", SUM, "--m", "0"],
        vec!["run", "--fn", SUM, "--z", "1"],
        vec!["run", "--fn", SUM, "--z", "1,banana"],
        vec!["frobnicate"],
    ] {
        let o = qqbf(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let v: Value = serde_json::from_slice(&o.stderr).unwrap();
        assert!(v["error"]["detail"].is_string());
    }
}

#[test]
fn capacity_exit_3() {
    let o = qqbf(&["synth", "--fn", IDENTITY, "--m", "20"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_kind(&o), "capacity");
}

#[test]
fn verification_failure_exit_4() {
    let o = qqbf(&["verify", "--fn", SUM, "--target", PRODUCT, "--grid", "1,2;0.5i,-1"]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(error_kind(&o), "verification");
    let ok = qqbf(&["verify", "--fn", SUM, "--grid", "1,2;inf,0;0.5i,-1"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stdout_json(&ok)["passed"], true);
}

#[test]
fn synth_file_then_run_matches_in_process() {
    let path = scratch("sum.json");
    let s = qqbf(&["synth", "--fn", SUM, "--out", path.to_str().unwrap()]);
    assert_eq!(s.status.code(), Some(0));
    let at = format!("@{}", path.display());
    for z in ["1+2i,0.5", "inf,-3i", "0,0"] {
        let from_file = qqbf(&["run", "--circuit", &at, "--z", z]);
        let in_process = qqbf(&["run", "--fn", SUM, "--z", z]);
        assert_eq!(from_file.status.code(), Some(0));
        assert_eq!(from_file.stdout, in_process.stdout, "z = {z}");
    }
    std::fs::remove_file(path).ok();
}

#[test]
fn circuit_json_round_trips_through_run() {
    let synth = qqbf(&["synth", "--fn", SUM]);
    let text = String::from_utf8(synth.stdout).unwrap();
    let run = qqbf(&["run", "--circuit", text.trim(), "--z", "2,-1+i"]);
    let direct = qqbf(&["run", "--fn", SUM, "--z", "2,-1+i"]);
    assert_eq!(run.stdout, direct.stdout);
}

#[test]
fn sampling_is_deterministic() {
    let args = ["sample", "--fn", SUM, "--z", "1,1", "--shots", "500", "--seed", "42"];
    let a = qqbf(&args);
    let b = qqbf(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert_eq!(v["shots"], 500);
    let counts = v["branch_counts"][0].as_array().unwrap();
    assert_eq!(counts[0].as_u64().unwrap() + counts[1].as_u64().unwrap(), v["herald_successes"].as_u64().unwrap());
}

#[test]
fn prob_and_sweep() {
    let z2 = r#"{"P":{"coeffs":[[0,0],[0,0],[1,0]]},"Q":{"coeffs":[[1,0]]}}"#;
    let o = qqbf(&["prob", "--fn", z2, "--ensemble", "uniform"]);
    assert_eq!(stdout_json(&o)["mean_prob"].as_f64().unwrap(), 2.0 / 3.0);
    let o = qqbf(&["prob", "--fn", IDENTITY, "--z", "inf"]);
    assert_eq!(stdout_json(&o)["success_prob"].as_f64().unwrap(), 1.0);

    let o = qqbf(&["sweep", "--params", "log:0.1:10:5", "--n", "2,3", "--ensemble", "covariant"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,n,ensemble,mean_prob,is_argmax");
    assert_eq!(lines.len(), 1 + 5 * 2);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 5);
}

#[test]
fn dilate_matrix() {
    let o = qqbf(&["dilate", "--matrix", "[[[0.6,0],[0,0]],[[0,0],[0,0.8]]]"]);
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    assert_eq!(v["dim"], 4);
    assert_eq!(v["unitary"][0][0][0], 0.6);
    let o = qqbf(&["dilate", "--matrix", "[[[2,0]]]"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn policy_file_and_flags() {
    let o = qqbf(&["synth", "--fn", NEAR_COMMON_ROOT, "--tol-coprime", "1e-15"]);
    assert_eq!(o.status.code(), Some(0));

    let path = scratch("policy.json");
    std::fs::write(&path, r#"{"coprime": 1e-15}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qqbf"))
        .args(["synth", "--fn", NEAR_COMMON_ROOT])
        .env("QQBF_NUM_POLICY", &path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));

    std::fs::write(&path, r#"{"coprime": 1e-15, "bogus": 1}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_qqbf"))
        .args(["synth", "--fn", IDENTITY])
        .env("QQBF_NUM_POLICY", &path)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    std::fs::remove_file(path).ok();
}
