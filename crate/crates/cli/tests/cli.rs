//! End-to-end runs of the `besov` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn besov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_besov"))
        .args(args)
        .env_clear()
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

#[test]
fn squared_spike_demo_separates_f_and_its_square() {
    let out = besov(&["demo", "remark1", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["f"]["verdict"]["verdict"], "moderate");
    assert_eq!(r["result"]["f_squared"]["verdict"]["verdict"], "not-moderate");
    assert_eq!(r["result"]["f_squared_integral_s0"]["verdict"], "divergent");
}

#[test]
fn root_damped_demo_depends_on_q() {
    let r = report(&besov(&["demo", "remark2", "--q", "2"]));
    assert_eq!(r["result"]["differs"], true);
    assert_eq!(r["result"]["negligible_at_q"]["verdict"]["verdict"], "negligible");
    assert_eq!(r["result"]["negligible_at_2q"]["verdict"]["verdict"], "not-negligible");
}

#[test]
fn bundled_heaviside_has_exponent_one_half() {
    let out = besov(&["analyze", "--input", &data("heaviside.csv"), "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["config"]["grid"]["N"], 8192);
    let r_hat = r["result"]["r_hat"].as_f64().unwrap();
    assert!((0.4..=0.6).contains(&r_hat), "r_hat = {r_hat}");
    assert_eq!(r["result"]["verdict"]["kind"], "besov");
}

#[test]
fn fixed_order_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("profile.svg");
    let json = dir.path().join("report.json");
    let out = besov(&[
        "analyze",
        "--input",
        &data("heaviside.csv"),
        "--k",
        "1",
        "--plot",
        svg.to_str().unwrap(),
        "--report",
        json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["k_used"], 1);
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert_eq!(std::fs::read(&json).unwrap(), out.stdout);
}

#[test]
fn zero_has_zero_norm() {
    let out = besov(&["--n", "1024", "norm", "--input", "builtin:zero", "--s", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["value"], 0.0);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let args = ["--n", "4096", "associate", "--target", "builtin:kink", "--net", "", "--battery", "4"];
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    std::fs::write(&net, r#"{"kind": "embed"}"#).unwrap();
    let mut args = args.to_vec();
    args[6] = net.to_str().unwrap();
    let a = besov(&args);
    let b = besov(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a)["result"]["verdict"]["kind"], "rapid");
}

#[test]
fn json_net_classification() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.json");
    std::fs::write(&net, r#"{"kind": "power", "c": 1.0, "exponent": -2.0}"#).unwrap();
    let r = report(&besov(&["net", "classify", "--spec", net.to_str().unwrap()]));
    assert_eq!(r["result"]["moderate"]["verdict"]["s_star"], 3);
}

#[test]
fn kernel_verification_passes() {
    let r = report(&besov(&["kernels", "verify", "--order", "4"]));
    assert_eq!(r["result"]["lp_pair"]["pass"], true);
    assert_eq!(r["result"]["moments"][0]["value"], 1.0);
}

#[test]
fn environment_sets_defaults() {
    let out = Command::new(env!("CARGO_BIN_EXE_besov"))
        .args(["norm", "--input", "builtin:zero"])
        .env_clear()
        .env("BESOV_N", "512")
        .output()
        .unwrap();
    assert_eq!(report(&out)["config"]["grid"]["N"], 512);
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,value\n0.0,1.0\n0.5,oops\n").unwrap();
    let out = besov(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("bad.csv:3"), "{msg}");

    let out = besov(&["analyze", "--input", "builtin:no-such-function"]);
    assert_eq!(out.status.code(), Some(1));
    let out = besov(&["analyze", "--input", "builtin:zero", "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn critical_exponent_is_inconclusive() {
    let args = ["--n", "4096", "norm", "--input", "builtin:heaviside", "--s", "0.5"];
    let out = besov(&[&args[..], &["--q", "2"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["result"]["verdict"], "borderline");
    let out = besov(&[&args[..], &["--q", "inf"]].concat());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["verdict"], "convergent");
}
