use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nzforge")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn volume_of_the_figure_eight() {
    let out = run(&["volume", "4_1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["volume"].as_f64().unwrap() - 2.029883212819307).abs() < 1e-10);
    assert_eq!(v["pass"], true);
}

#[test]
fn unknown_entry_exits_two_with_a_suggestion() {
    let out = run(&["volume", "figure8"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["exit_code"], 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("figure_eight"));
}

#[test]
fn table_output() {
    let out = run(&["--output", "table", "volume", "5_2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.trim_start().starts_with("volume") && l.contains("2.8281")));
}

#[test]
fn list_has_every_entry() {
    let v = json(&run(&["list"]));
    assert_eq!(v.as_array().unwrap().len(), 24);
}

#[test]
fn ptb_volume() {
    let out = run(&["ptb", "--word", "LLR", "--volume"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["volume"].as_f64().unwrap() - 2.66674478).abs() < 1e-7, "{v}");
}

#[test]
fn taylor_coefficients() {
    let v = json(&run(&["taylor", "4_1", "--order", "3"]));
    let c = v["coefficients"].as_array().unwrap();
    assert_eq!(c.len(), 4);
    assert!((c[1][1].as_f64().unwrap() - 48f64.sqrt()).abs() < 1e-8);
}

#[test]
fn phi_inversion() {
    let v = json(&run(&["phi", "--gamma", "0.5", "--re", "0.1", "--im", "-0.2"]));
    assert!(v["inversion_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn exact_a_polynomial() {
    let out = run(&["apoly", "5_2", "--exact"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn dehn_filling() {
    let out = run(&["dehn", "4_1", "5", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["filled_volume"].as_f64().unwrap() - 0.9813688).abs() < 1e-6);
    let out = run(&["dehn", "4_1", "2", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identity_suite_passes() {
    let out = run(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
}
