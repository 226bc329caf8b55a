use std::ffi::{CStr, CString};
use std::ptr;

use tempered_nqs_ffi::*;

const PLAQUETTE: &str = r#"
name = "plaquette"
runs = 2
total_updates = 30
seed = 4

[hamiltonian]
kind = "j1j2"
lx = 2
ly = 2
j2 = 0.0

[ansatz]
kind = "rbm"
n = 4
hidden = 4

[training.sampler]
kind = "exact_sector"

[learning_rate]
mode = "fixed"
eta = 0.05

[tempering]
n_replicas = 3
t_min = 0.1
t_max = 2.0
n_swap = 5

[success]
kind = "threshold_exact"
threshold = { oracle = "first_excited" }
"#;

fn last_error() -> String {
    let p = tnqs_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn config() -> *mut TnqsConfig {
    let toml = CString::new(PLAQUETTE).unwrap();
    let mut cfg = ptr::null_mut();
    assert_eq!(tnqs_config_from_toml(toml.as_ptr(), &mut cfg), TnqsStatus::Ok);
    assert!(!cfg.is_null());
    cfg
}

#[test]
fn precipice_spectrum_through_the_abi() {
    let mut sp = ptr::null_mut();
    assert_eq!(tnqs_precipice_spectrum(32, 0.8, 2, &mut sp), TnqsStatus::Ok);
    let (mut len, mut dim, mut e0) = (0usize, 0usize, 0.0f64);
    assert_eq!(tnqs_spectrum_len(sp, &mut len), TnqsStatus::Ok);
    assert_eq!(tnqs_spectrum_dimension(sp, &mut dim), TnqsStatus::Ok);
    assert_eq!(tnqs_spectrum_eigenvalue(sp, 0, &mut e0), TnqsStatus::Ok);
    assert_eq!((len, dim), (2, 33));
    assert!((e0 - tempered_nqs::oracle::PRECIPICE_32_GROUND_ENERGY).abs() < 1e-12);
    assert_eq!(tnqs_spectrum_eigenvalue(sp, 2, &mut e0), TnqsStatus::OutOfRange);
    assert!(last_error().contains("level 2"));
    tnqs_spectrum_free(sp);
}

#[test]
fn plaquette_ground_energy() {
    let mut sp = ptr::null_mut();
    assert_eq!(tnqs_j1j2_spectrum(2, 2, 1.0, 0.0, false, 2, 1, &mut sp), TnqsStatus::Ok);
    let mut e0 = 0.0;
    assert_eq!(tnqs_spectrum_eigenvalue(sp, 0, &mut e0), TnqsStatus::Ok);
    assert!((e0 + 8.0).abs() < 1e-10);
    tnqs_spectrum_free(sp);
}

#[test]
fn experiment_round_trip() {
    let cfg = config();
    assert_eq!(tnqs_config_set_total_updates(cfg, 20), TnqsStatus::Ok);
    let mut res = ptr::null_mut();
    assert_eq!(tnqs_run_experiment(cfg, &mut res), TnqsStatus::Ok);
    let (mut runs, mut successes) = (0usize, 0usize);
    assert_eq!(tnqs_result_run_count(res, &mut runs), TnqsStatus::Ok);
    assert_eq!(tnqs_result_success_count(res, &mut successes), TnqsStatus::Ok);
    assert_eq!(runs, 2);
    assert!(successes <= runs);
    let mut e = 0.0;
    assert_eq!(tnqs_result_final_energy(res, 1, &mut e), TnqsStatus::Ok);
    assert!(e.is_finite() && e >= -8.0 - 1e-9);
    let (mut ok, mut step) = (false, 0usize);
    assert_eq!(tnqs_result_run_success(res, 5, &mut ok, &mut step), TnqsStatus::OutOfRange);

    let mut json = ptr::null_mut();
    assert_eq!(tnqs_result_summary_json(res, &mut json), TnqsStatus::Ok);
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_owned();
    tnqs_string_free(json);
    let summary: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(summary["runs"], 2);

    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().to_str().unwrap()).unwrap();
    assert_eq!(tnqs_result_write(cfg, res, path.as_ptr()), TnqsStatus::Ok);
    assert!(dir.path().join("events.jsonl").exists());
    tnqs_result_free(res);
    tnqs_config_free(cfg);
}

#[test]
fn config_toml_round_trip() {
    let cfg = config();
    assert_eq!(tnqs_config_set_seed(cfg, 99), TnqsStatus::Ok);
    let mut text = ptr::null_mut();
    assert_eq!(tnqs_config_to_toml(cfg, &mut text), TnqsStatus::Ok);
    let s = unsafe { CStr::from_ptr(text) }.to_str().unwrap().to_owned();
    tnqs_string_free(text);
    assert!(s.contains("seed = 99"));
    tnqs_config_free(cfg);
}

#[test]
fn errors_map_to_status_codes() {
    let mut cfg = ptr::null_mut();
    assert_eq!(tnqs_config_from_toml(ptr::null(), &mut cfg), TnqsStatus::NullPointer);
    let bad = CString::new("name = 1").unwrap();
    assert_eq!(tnqs_config_from_toml(bad.as_ptr(), &mut cfg), TnqsStatus::Parse);
    assert!(cfg.is_null());
    let invalid = CString::new(PLAQUETTE.replace("n = 4", "n = 5")).unwrap();
    assert_eq!(tnqs_config_from_toml(invalid.as_ptr(), &mut cfg), TnqsStatus::Config);
    assert!(last_error().contains("sites"));
    let missing = CString::new("/nonexistent/config.toml").unwrap();
    assert_eq!(tnqs_config_load(missing.as_ptr(), &mut cfg), TnqsStatus::Io);
    let mut sp = ptr::null_mut();
    assert_eq!(tnqs_precipice_spectrum(0, 0.8, 1, &mut sp), TnqsStatus::Config);
    assert_eq!(tnqs_run_experiment(ptr::null(), ptr::null_mut()), TnqsStatus::NullPointer);
    let mut n = 0usize;
    assert_eq!(tnqs_result_run_count(ptr::null(), &mut n), TnqsStatus::NullPointer);
    tnqs_config_free(ptr::null_mut());
    tnqs_result_free(ptr::null_mut());
    tnqs_spectrum_free(ptr::null_mut());
    tnqs_string_free(ptr::null_mut());
}

#[test]
fn swap_probability_values() {
    let mut p = 0.0;
    assert_eq!(tnqs_swap_probability(1.0, 0.5, -5.0, -3.0, &mut p), TnqsStatus::Ok);
    assert!((p - (-1.0f64).exp()).abs() < 1e-15);
    assert_eq!(tnqs_swap_probability(f64::INFINITY, 1.0, -1.0, -2.0, &mut p), TnqsStatus::Ok);
    assert_eq!(p, 1.0);
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(tnqs_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_abi() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/tempered_nqs.h")).unwrap();
    for symbol in ["tnqs_run_experiment", "tnqs_precipice_spectrum", "tnqs_last_error", "TNQS_STATUS_OK", "TnqsConfig"] {
        assert!(header.contains(symbol), "{symbol}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = std::process::Command::new("cc").arg("--version").output() else {
        return;
    };
    assert!(cc.status.success());
    let dir = env!("CARGO_MANIFEST_DIR");
    let status = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(format!("{dir}/include"))
        .arg(format!("{dir}/examples/oracle.c"))
        .status()
        .unwrap();
    assert!(status.success());
}
