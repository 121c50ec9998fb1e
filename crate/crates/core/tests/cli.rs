// Copyright (c) The adaptive-submod Contributors
// SPDX-License-Identifier: Apache-2.0

use std::process::{Command, Output};

use adaptive_submod::harness::*;

const LOG: &str = r#"{"family":"log_round","params":{"epsilon":0.3,"ell":4,"ell_prime":2,"k":200},"seed":3}"#;
const CUT: &str = r#"{"family":"directed_cut","params":{"delta":0.5,"opt_scale":1.0},"seed":1}"#;
const SMALL: &str = r#"{"family":"custom_small","params":{"kind":"cut","n":4,"edges":[[0,1,1.0],[1,2,2.0],[2,0,0.5],[2,3,1.5]]},"seed":0}"#;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptive-submod")).args(args).output().unwrap()
}

fn cfg(instance: &str) -> RunConfig {
    RunConfig { instance: Some(instance.into()), samples: 500, trials: 10, rounds_max: 3, ..RunConfig::default() }
}

#[test]
fn verify_passes_on_built_in_families() {
    for spec in [LOG, CUT, SMALL] {
        let r = cmd_verify(&cfg(spec)).unwrap();
        assert!(r.passed, "{}", render_verify(&r));
        assert!(r.checks.iter().all(|c| c.max_violation < VIOLATION_TOL || c.status == CheckStatus::NotApplicable));
    }
    let out = bin(&["verify", "--instance", CUT, "--samples", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["family"], "directed_cut");
}

#[test]
fn bad_specs_exit_with_two() {
    let alpha =
        r#"{"family":"poly_round","params":{"epsilon":0.01,"delta":0.4,"alpha":0.2,"r":4,"ell_prime":2,"k":10}}"#;
    for args in [
        vec!["verify", "--instance", alpha],
        vec!["run-dg", "--instance", "/nonexistent/spec.json"],
        vec!["run-dg"],
        vec!["adaptivity-curve", "--instance", SMALL],
    ] {
        let out = bin(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn run_dg_reports_are_deterministic() {
    let args = ["run-dg", "--instance", CUT, "--gamma", "0.1", "--samples", "2000", "--seed", "5"];
    let (a, b) = (bin(&args), bin(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["opt_source"], "known");
    assert_eq!(v["exact"], false);

    let exact = cmd_run_dg(&RunConfig { exact: true, format: Format::Csv, gamma: 0.1, ..cfg(CUT) }).unwrap();
    let mut lines = exact.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dg_value,rnd_value,opt_estimate,rounds_used,iterations,alpha_sum,beta_sum,delta_stat,checks_passed"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 9);
    assert_eq!(row[8], "true");
    assert!(row[0].parse::<f64>().unwrap() >= 0.51 * row[2].parse::<f64>().unwrap());
}

#[test]
fn curve_table_has_one_row_per_known_layer_count() {
    let out = cmd_adaptivity_curve(&cfg(LOG)).unwrap();
    let lines: Vec<&str> = out.text.lines().collect();
    assert_eq!(lines[0], "s,discovered_ok,best_value,theory_cap");
    assert_eq!(lines.len(), 1 + 4);
    assert!(out.warning.is_none());
    assert_eq!(cmd_adaptivity_curve(&cfg(LOG)).unwrap().text, out.text);
}

#[test]
fn bounds_table_and_file_output() {
    let path = std::env::temp_dir().join(format!("bounds-{}.csv", std::process::id()));
    let out = bin(&["bounds", "--rounds-max", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(text, cmd_bounds(&RunConfig { rounds_max: 4, format: Format::Csv, ..RunConfig::default() }).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "r,quadr_opt,poly_bound,log_round_cap");
    assert!(lines[1].starts_with("1,0.25,"));
    assert_eq!(lines.len(), 5);
}

#[test]
fn numbers_keep_twelve_significant_digits() {
    assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
    assert_eq!(fmt_sig(0.25), "0.25");
}
