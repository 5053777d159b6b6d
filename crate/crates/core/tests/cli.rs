use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qbdissim"))
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn run(dir: &Path, cfg: &Path) -> Output {
    bin().args(["run", "--config"]).arg(cfg).arg("--out").arg(dir).env("QBDISSIM_THREADS", "1").output().unwrap()
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn collective_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "experiment": "collective-advantage",
        "parameters": {"epsilon": 10f64.sqrt(), "omega": 1.5, "delta": 0.01, "beta": [8.0 / 1.5, 0.033], "n": [1, 2, 3, 4, 5]},
        "output_path": "fig2.csv",
        "seed": 4
    });
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = run(dir.path(), &path);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = dir.path().join("fig2.csv");
    assert_eq!(first_line(&csv), "N,beta,omega,epsilon,delta,T_parallel,T_collective,gamma");
    let first = fs::read(&csv).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 11);
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fig2.json")).unwrap()).unwrap();
    assert_eq!(side["converged"], json!(true));
    assert_eq!(side["parameters"]["delta"], json!(0.01));
    assert_eq!(side["seed"], json!(4));

    let again = run(dir.path(), &path);
    assert!(again.status.success());
    assert_eq!(first, fs::read(&csv).unwrap());
    // Low temperature: the advantage grows with N.
    let gammas: Vec<f64> = String::from_utf8(first)
        .unwrap()
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap() > 1.0)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(gammas.windows(2).all(|w| w[1] > w[0]), "{gammas:?}");
}

#[test]
fn schemas_of_other_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            json!({"experiment": "charge-single", "parameters": {"omega": 1.5, "epsilon": 0.5, "beta": 1.0, "t_d": 2.0, "t_final": 6.0}, "output_path": "a.csv"}),
            "t,E_frac,coherence,W,Q,eta_heat,eta_ergo",
        ),
        (
            json!({"experiment": "finite-time-cycle", "parameters": {"omega_c": 1.0, "omega_h": 2.0, "beta_c": 10.0, "beta_h": 0.1, "epsilon": 0.5, "t_d": 2.0, "t_cycle": [5.0, 1.0]}, "output_path": "b.csv"}),
            "t_cycle,variant,eta,power,converged",
        ),
        (
            json!({"experiment": "cycle-sweep", "parameters": {"omega_c": 1.0, "beta_c": 10.0, "epsilon": 0.5, "t_d": 2.0, "t_cycle": 20.0, "omega_h": [2.5], "beta_h": [0.1]}, "output_path": "c.csv"}),
            "omega_h,beta_h,variant,eta,power,C_max,W1,W2,W4,W5,Qh,Qc",
        ),
        (
            json!({"experiment": "dephasing-sweep", "parameters": {"omega": 1.5, "epsilon": 0.5, "beta": 1.0, "t_d": 2.0, "p": [1.0, 0.0]}, "output_path": "d.csv"}),
            "p,t_charge,power,eta_heat,eta_ergo,power_ratio,eta_ratio",
        ),
        (
            json!({"experiment": "optimize-protocol", "parameters": {"omega": 1.5, "epsilon": 0.5, "beta": 1.0, "t_n": 4.0, "n_segments": 8, "restarts": 2, "max_iter": 200}, "output_path": "e.csv"}),
            "k,t,dt,alpha",
        ),
    ];
    for (k, (cfg, header)) in cases.iter().enumerate() {
        let path = write_config(dir.path(), &format!("cfg{k}.json"), cfg);
        let out = run(dir.path(), &path);
        assert!(out.status.success(), "{header}: {}", String::from_utf8_lossy(&out.stderr));
        let csv = dir.path().join(cfg["output_path"].as_str().unwrap());
        assert_eq!(first_line(&csv), *header);
    }
    // Rows follow the sorted sweep keys, not the config order.
    let b = fs::read_to_string(dir.path().join("b.csv")).unwrap();
    let keys: Vec<&str> = b
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(2).collect::<Vec<_>>().join(","))
        .map(|s| Box::leak(s.into_boxed_str()) as &str)
        .collect();
    assert_eq!(keys, ["1,coherent", "1,dephased", "5,coherent", "5,dephased"]);
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e.json")).unwrap()).unwrap();
    assert_eq!(side["diagnostics"]["restarts"].as_array().unwrap().len(), 2);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write_config(
        dir.path(),
        "empty.json",
        &json!({"experiment": "collective-advantage", "parameters": {"epsilon": 1.0, "omega": 1.5, "beta": [], "n": [2]}, "output_path": "x.csv"}),
    );
    let out = run(dir.path(), &empty);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty list"));

    let missing = write_config(
        dir.path(),
        "missing.json",
        &json!({"experiment": "cycle-sweep", "parameters": {"omega_c": 1.0, "epsilon": 0.5, "t_d": 2.0, "t_cycle": 20.0, "omega_h": [2.0], "beta_h": [0.1]}, "output_path": "x.csv"}),
    );
    let out = bin().args(["validate", "--config"]).arg(&missing).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta_c"));

    let unknown = write_config(dir.path(), "u.json", &json!({"experiment": "cycle-swep", "output_path": "x.csv"}));
    let out = bin().args(["validate", "--config"]).arg(&unknown).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cycle-sweep"));

    let good = write_config(
        dir.path(),
        "good.json",
        &json!({"experiment": "advantage-vs-beta", "parameters": {"epsilon": 1.0, "omega": 1.5, "beta": [1.0], "n": [2]}, "output_path": "x.csv"}),
    );
    let out = bin().args(["validate", "--config"]).arg(&good).output().unwrap();
    assert!(out.status.success());
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // The charge target rounds onto the asymptotic energy, so it is never crossed.
    let cfg = write_config(
        dir.path(),
        "hot.json",
        &json!({"experiment": "collective-advantage", "parameters": {"epsilon": 1.0, "omega": 1.5, "beta": [1.0], "n": [2], "delta": 1e-18}, "output_path": "hot.csv"}),
    );
    let out = run(dir.path(), &cfg);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("hot.json")).unwrap()).unwrap();
    assert_eq!(side["converged"], json!(false));
}

#[test]
fn list_shows_catalog() {
    let out = bin().args(["list", "--json"]).output().unwrap();
    assert!(out.status.success());
    let cat: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cat.as_array().unwrap().len(), 8);
}
