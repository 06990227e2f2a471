use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> (Value, i32) {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_weilrep")).args(args).output().expect("spawn cli");
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)));
    (v, out.status.code().unwrap())
}

fn gamma_of(args: &[&str]) -> String {
    let (v, code) = run(args);
    assert_eq!(code, 0, "{v}");
    v["gamma"].as_str().unwrap().to_string()
}

#[test]
fn gamma_hyperbolic_plane_is_one() {
    assert_eq!(gamma_of(&["gamma", "--p", "3", "--conductor", "0", "--form", "1,-1"]), "1");
}

#[test]
fn gamma_rank_four_example_is_minus_one() {
    assert_eq!(gamma_of(&["gamma", "--p", "3", "--conductor", "0", "--form", "1,-2,-3,6"]), "-1");
}

#[test]
fn gamma_p5_unit_form_matches_enumeration() {
    let (v, _) = run(&["gamma", "--p", "5", "--form", "1"]);
    assert_eq!(v["gamma"], "1");
    assert_eq!(v["order_of_gamma"], 1);
    assert_eq!(v["config"]["p"], 5);
    assert!(v["lambda_used"].is_array());
}

#[test]
fn gamma_p3_conductor_one_is_i() {
    assert_eq!(gamma_of(&["gamma", "--p", "3", "--conductor", "1", "--form", "1"]), "i");
}

#[test]
fn gamma_from_gram_file() {
    let path = std::env::temp_dir().join(format!("weilrep-gram-{}.json", std::process::id()));
    std::fs::write(&path, r#"[["0","1/2"],["1/2","0"]]"#).unwrap();
    assert_eq!(gamma_of(&["gamma", "--p", "3", "--gram", path.to_str().unwrap()]), "1");
    std::fs::remove_file(path).ok();
}

#[test]
fn gamma_finite_field_ring() {
    let (v, code) = run(&["gamma", "--p", "3", "--ring", "gf:7", "--form", "1,-2,-3,6"]);
    assert_eq!(code, 0, "{v}");
    // -1 in GF(7)
    assert_eq!(v["gamma"], "6");
    assert_eq!(v["order_of_gamma"], 2);
}

#[test]
fn hilbert_symbol_example() {
    let (v, code) = run(&["hilbert", "--p", "3", "3", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["hilbert"], -1);
    let (v, _) = run(&["hilbert", "--p", "3", "-1", "3"]);
    assert_eq!(v["hilbert"], -1);
}

#[test]
fn cocycle_and_psi2_commands() {
    let (v, code) = run(&["cocycle", "--p", "3", "[[1,1],[-1,0]]", "[[1,2],[-1,-1]]"]);
    assert_eq!(code, 0, "{v}");
    assert!(v["cocycle"].is_string());
    let (v, code) = run(&["psi2", "--p", "3", "[[0,1],[-1,0]]"]);
    assert_eq!(code, 0, "{v}");
    assert!(v["psi2"].is_string());
}

#[test]
fn verify_fourier_passes() {
    let (v, code) = run(&["verify", "--p", "3", "fourier"]);
    assert_eq!(code, 0);
    assert_eq!(v["passed"], true);
    assert_eq!(v["cases"].as_array().unwrap().len(), 20);
}

#[test]
fn verify_quaternion_passes() {
    let (v, code) = run(&["verify", "--p", "3", "quaternion"]);
    assert_eq!(code, 0);
    assert_eq!(v["cases"][0]["status"], "pass");
}

#[test]
fn verify_small_suites_pass() {
    for suite in ["heisenberg", "gamma-props", "witt", "cocycle", "psi2", "char2-split", "gauss-sqrt"] {
        let (v, code) = run(&["verify", "--p", "3", "--jobs", "2", suite]);
        assert_eq!(code, 0, "{suite}: {v}");
    }
}

#[test]
fn reports_are_deterministic() {
    let a = run(&["verify", "--p", "5", "--seed", "7", "--jobs", "3", "witt"]).0;
    let b = run(&["verify", "--p", "5", "--seed", "7", "--jobs", "1", "witt"]).0;
    assert_eq!(a["cases"], b["cases"]);
}

#[test]
fn bad_input_exit_codes() {
    assert_eq!(run(&["gamma", "--p", "4", "--form", "1"]).1, 2);
    assert_eq!(run(&["gamma", "--p", "3", "--form", "0,1"]).1, 2);
    assert_eq!(run(&["gamma", "--p", "3", "--form", "1,x"]).1, 2);
    assert_eq!(run(&["verify", "--p", "3", "nonsense"]).1, 2);
    assert_eq!(run(&["cocycle", "--p", "3", "[[1,1],[0,2]]", "[[0,1],[-1,0]]"]).1, 2);
    assert_eq!(run(&["gamma", "--p", "3", "--ring", "gf:3", "--form", "1"]).1, 2);
}

#[test]
fn resource_exit_code() {
    assert_eq!(run(&["gamma", "--p", "3", "--lambda-max", "0", "--form", "1/27"]).1, 3);
}
