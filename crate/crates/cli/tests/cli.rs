use std::process::{Command, Output};

fn solvspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_solvspec")).args(args).output().expect("run solvspec")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn lattice_csv_lists_minimal_orbits_first() {
    let o = solvspec(&["lattice", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m1,m2,mu,muPrime,norm"));
    let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    let c = 4.0 * std::f64::consts::PI.powi(2) / 5.0;
    assert!((first[4].abs() - c).abs() < 1e-9);
}

#[test]
fn lattice_json_has_schema_version() {
    let o = solvspec(&["lattice", "--scale", "0.5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schemaVersion"], "1");
    assert!(v["threshold"]["tStar"].as_f64().unwrap() > 0.99);
}

#[test]
fn base_dirac_kernel_is_two() {
    let o = solvspec(&["dirac", "--structure", "base"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["totalKernelDim"], 2);
}

#[test]
fn scalar_csv_starts_with_constants() {
    let o = solvspec(&["scalar", "--cutoff", "10", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eigenvalue,source,multiplicity,error"));
    assert!(lines.next().unwrap().starts_with("0"));
}

#[test]
fn non_anosov_matrix_is_rejected() {
    let o = solvspec(&["lattice", "--matrix", "1,1,0,1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("NotAnosov"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let path = std::env::temp_dir().join(format!("solvspec-cli-test-{}.toml", std::process::id()));
    std::fs::write(&path, "grid = 1000\nbogus = 1\n").unwrap();
    let o = solvspec(&["certify", "--config", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn coexact_above_threshold_is_not_certified() {
    let o = solvspec(&["coexact", "--scale", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}
