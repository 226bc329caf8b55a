use std::process::Command;

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tempered-nqs"))
}

const TINY: &str = r#"
name = "tiny"
runs = 2
total_updates = 60
seed = 5
trace_every = 10

[hamiltonian]
kind = "precipice"
n = 6

[ansatz]
kind = "symmetric_rbm"
n = 6
hidden = 2

[training.sampler]
kind = "exact_symmetric"

[learning_rate]
mode = "fixed"
eta = 0.05

[tempering]
n_replicas = 4
t_min = 0.1
t_max = 2.0
n_swap = 5
temp_update_period = 10
optimize_temperatures = true

[success]
kind = "threshold_exact"
threshold = { oracle = "ground" }
relative_tolerance = 1e-3
"#;

#[test]
fn oracle_prints_precipice_levels() {
    let out = cli().args(["oracle", "precipice", "--n", "32"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let e0 = v["eigenvalues"][0].as_f64().unwrap();
    assert!((e0 - tempered_nqs::oracle::PRECIPICE_32_GROUND_ENERGY).abs() < 1e-10);
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 2);
}

#[test]
fn oracle_j1j2_plaquette() {
    let out = cli().args(["oracle", "j1j2", "--lx", "2", "--ly", "2", "--j2", "0"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["eigenvalues"][0].as_f64().unwrap() + 8.0).abs() < 1e-10);
}

#[test]
fn run_then_plotdata_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(&config, TINY).unwrap();
    let out = cli()
        .args(["run", "--config", config.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap(), "--runs", "3"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["runs"], 3);

    let run_dir = dir.path().join("runs").join("tiny");
    for f in ["events.jsonl", "summary.csv", "summary.json", "config.toml"] {
        assert!(run_dir.join(f).is_file(), "missing {f}");
    }
    let plot = dir.path().join("plot-again");
    let out = cli()
        .args(["plotdata", "--run-dir", run_dir.to_str().unwrap(), "--out-dir", plot.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in std::fs::read_dir(run_dir.join("plot")).unwrap() {
        let name = f.unwrap().file_name();
        let original = std::fs::read(run_dir.join("plot").join(&name)).unwrap();
        let rebuilt = std::fs::read(plot.join(&name)).unwrap();
        assert_eq!(original, rebuilt, "{name:?} differs after reload");
    }
}

#[test]
fn same_seed_same_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tiny.toml");
    std::fs::write(&config, TINY).unwrap();
    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = cli()
            .args(["--threads", "1", "run", "--config", config.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()])
            .output()
            .unwrap();
        assert!(out.status.success());
        std::fs::read_to_string(out_dir.join("runs/tiny/events.jsonl")).unwrap()
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn bad_config_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, TINY.replace("n_replicas = 4", "n_replicas = 1")).unwrap();
    let out = cli().args(["run", "--config", config.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}
