use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

const SMALL: &str = "theta_grid_size = 41\nn_tau_l = 5\nn_tau_b = 21\n";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    std::fs::write(dir.join("config.toml"), config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_trustax"))
        .args(["--config", "config.toml", "--out", "out"])
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn body(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# params: "));
    lines.map(str::to_owned).collect()
}

#[test]
fn unknown_key_exits_2_and_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "betta = 0.9\n", &["solve-static"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn descending_garbling_list_exits_2() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "eps_list = [0.2, 0.1]\n", &["sweep", "garble"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_policy_file_exits_3() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SMALL}policy_file = \"nowhere.csv\"\n");
    let out = run(dir.path(), &cfg, &["simulate"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn static_cutoff_file() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "theta_probes = [0.5]\n", &["solve-static"]);
    assert!(out.status.success());
    let cutoff = body(&dir.path().join("out/cutoff.txt"));
    assert_eq!(cutoff[0], "theta_bar = 0.594603558");
    let policy = body(&dir.path().join("out/static_policy.csv"));
    assert_eq!(policy[0], "theta,R_star,S_star,tau_L,tau_B,value");
    assert_eq!(policy.len(), 2);
    assert!(policy[1].starts_with("0.500000000,0.000000000,1.000000000,"));
}

#[test]
fn simulation_is_reproducible() {
    let cfg = format!("{SMALL}n_paths = 2\nhorizon = 3\nhistory_probes = [0.7, 0.8]\n");
    let read = || {
        let dir = TempDir::new().unwrap();
        let out = run(dir.path(), &cfg, &["--seed", "42", "simulate"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        body(&dir.path().join("out/paths.csv"))
    };
    let first = read();
    assert_eq!(first.len(), 7);
    assert_eq!(first[0], "path_id,t,type,theta,tau_L,tau_B,R,G,s,theta_next");
    assert_eq!(first, read());
}

#[test]
fn honest_absorbing_paths_stay_honest() {
    let dir = TempDir::new().unwrap();
    let cfg = format!("{SMALL}n_paths = 3\nhorizon = 5\ninitial_theta = 1.0\npi_hh = 1.0\nhistory_probes = [0.7]\n");
    let out = run(dir.path(), &cfg, &["simulate"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(&dir.path().join("out/paths.csv"));
    assert_eq!(rows.len(), 16);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(2) == Some("H")));
}

#[test]
fn figures_pass() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), "", &["replicate-figures"]);
    assert!(out.status.success());
    assert_eq!(body(&dir.path().join("out/figure1.csv")).len(), 17);
    assert_eq!(body(&dir.path().join("out/figure2.csv"))[0], "theta,tau_Y,tau_L,tau_Y_reference");
}

#[test]
fn dynamic_outputs() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), SMALL, &["solve-dynamic"]);
    assert!(out.status.success());
    assert_eq!(body(&dir.path().join("out/dynamic_policy.csv")).len(), 42);
    let diag = body(&dir.path().join("out/diagnostics.txt"));
    assert!(diag.iter().any(|l| l == "cutoff_ordered = true"));
}

#[test]
fn persistence_sweep_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(dir.path(), SMALL, &["sweep", "persist"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = body(&dir.path().join("out/sweep_persist.csv"));
    assert_eq!(rows.len(), 1 + 2 * 41);
    assert!(rows[1..].iter().all(|r| !r.contains("fail")));
}
