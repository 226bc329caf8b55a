//! C ABI over the tempered-nqs engine.
//!
//! Objects cross the boundary as opaque handles created by `tnqs_*_new`-style
//! constructors and released with the matching `tnqs_*_free`. Every fallible
//! call returns a [`TnqsStatus`]; on failure the message is available from
//! [`tnqs_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use tempered_nqs::hamiltonian::Boundary;
use tempered_nqs::harness::{run_experiment, write_experiment, ExperimentConfig, ExperimentResult};
use tempered_nqs::oracle::{j1j2_spectrum, precipice_spectrum, SpectrumResult};
use tempered_nqs::tempering::swap_probability;
use tempered_nqs::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TnqsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    OutOfRange = 3,
    Config = 4,
    Numeric = 5,
    Capacity = 6,
    Solver = 7,
    Controller = 8,
    Convergence = 9,
    Io = 10,
    Parse = 11,
    Panic = 12,
}

impl From<&Error> for TnqsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Config(_) => Self::Config,
            Error::Numeric(_) => Self::Numeric,
            Error::Capacity(_) => Self::Capacity,
            Error::Solver(_) => Self::Solver,
            Error::Controller(_) => Self::Controller,
            Error::Convergence(_) => Self::Convergence,
            Error::Io(_) => Self::Io,
            Error::Json(_) | Error::Toml(_) | Error::Csv(_) => Self::Parse,
        }
    }
}

/// An experiment configuration.
pub struct TnqsConfig(ExperimentConfig);

/// The records and summary of a finished experiment.
pub struct TnqsResult(ExperimentResult);

/// Lowest levels of an exact spectrum.
pub struct TnqsSpectrum(SpectrumResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(message));
}

struct Failure(TnqsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(TnqsStatus::from(&e), e.to_string())
    }
}

fn fail<T>(status: TnqsStatus, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, message.into()))
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), Failure>>(body: F) -> TnqsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => TnqsStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {message}"));
            TnqsStatus::Panic
        }
    }
}

fn non_null<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { ptr.as_ref() }.ok_or_else(|| Failure(TnqsStatus::NullPointer, format!("{what} is null")))
}

fn non_null_mut<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as in `non_null`, and the caller guarantees exclusive access.
    unsafe { ptr.as_mut() }.ok_or_else(|| Failure(TnqsStatus::NullPointer, format!("{what} is null")))
}

fn c_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if ptr.is_null() {
        return fail(TnqsStatus::NullPointer, format!("{what} is null"));
    }
    // SAFETY: non-null and, by contract, NUL-terminated.
    unsafe { CStr::from_ptr(ptr) }
        .to_str()
        .map_err(|e| Failure(TnqsStatus::InvalidUtf8, format!("{what} is not UTF-8: {e}")))
}

fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    *non_null_mut(out, what)? = value;
    Ok(())
}

fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    write_out(out, Box::into_raw(Box::new(value)), "output handle")
}

fn free<T>(ptr: *mut T) {
    if !ptr.is_null() {
        // SAFETY: `ptr` came from `Box::into_raw` in this library and is freed once.
        drop(unsafe { Box::from_raw(ptr) });
    }
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn tnqs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tnqs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library.
#[no_mangle]
pub extern "C" fn tnqs_string_free(s: *mut c_char) {
    if !s.is_null() {
        // SAFETY: `s` came from `CString::into_raw` in this library.
        drop(unsafe { CString::from_raw(s) });
    }
}

fn string_out(out: *mut *mut c_char, text: String) -> Result<(), Failure> {
    let s = CString::new(text).map_err(|e| Failure(TnqsStatus::Parse, e.to_string()))?;
    write_out(out, s.into_raw(), "output string")
}

/// Parses a TOML experiment config.
#[no_mangle]
pub extern "C" fn tnqs_config_from_toml(toml: *const c_char, out: *mut *mut TnqsConfig) -> TnqsStatus {
    guard(|| {
        let config = ExperimentConfig::from_toml(c_str(toml, "toml")?)?;
        boxed(out, TnqsConfig(config))
    })
}

/// Loads a TOML experiment config from a file.
#[no_mangle]
pub extern "C" fn tnqs_config_load(path: *const c_char, out: *mut *mut TnqsConfig) -> TnqsStatus {
    guard(|| {
        let config = ExperimentConfig::load(Path::new(c_str(path, "path")?))?;
        boxed(out, TnqsConfig(config))
    })
}

/// Serializes a config back to TOML; free the string with [`tnqs_string_free`].
#[no_mangle]
pub extern "C" fn tnqs_config_to_toml(config: *const TnqsConfig, out: *mut *mut c_char) -> TnqsStatus {
    guard(|| string_out(out, non_null(config, "config")?.0.to_toml()?))
}

#[no_mangle]
pub extern "C" fn tnqs_config_set_seed(config: *mut TnqsConfig, seed: u64) -> TnqsStatus {
    guard(|| {
        non_null_mut(config, "config")?.0.seed = seed;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tnqs_config_set_runs(config: *mut TnqsConfig, runs: usize) -> TnqsStatus {
    guard(|| {
        non_null_mut(config, "config")?.0.runs = runs;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tnqs_config_set_total_updates(config: *mut TnqsConfig, updates: usize) -> TnqsStatus {
    guard(|| {
        non_null_mut(config, "config")?.0.total_updates = updates;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tnqs_config_free(config: *mut TnqsConfig) {
    free(config);
}

/// Runs every run of the experiment; blocks until all finish.
#[no_mangle]
pub extern "C" fn tnqs_run_experiment(config: *const TnqsConfig, out: *mut *mut TnqsResult) -> TnqsStatus {
    guard(|| {
        let result = run_experiment(&non_null(config, "config")?.0)?;
        boxed(out, TnqsResult(result))
    })
}

/// Writes the on-disk output tree of a finished experiment into `dir`.
#[no_mangle]
pub extern "C" fn tnqs_result_write(
    config: *const TnqsConfig,
    result: *const TnqsResult,
    dir: *const c_char,
) -> TnqsStatus {
    guard(|| {
        let config = &non_null(config, "config")?.0;
        let result = &non_null(result, "result")?.0;
        write_experiment(config, result, Path::new(c_str(dir, "dir")?))?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn tnqs_result_run_count(result: *const TnqsResult, out: *mut usize) -> TnqsStatus {
    guard(|| write_out(out, non_null(result, "result")?.0.records.len(), "out"))
}

/// Number of runs that met the success rule.
#[no_mangle]
pub extern "C" fn tnqs_result_success_count(result: *const TnqsResult, out: *mut usize) -> TnqsStatus {
    guard(|| {
        let n = non_null(result, "result")?.0.records.iter().filter(|r| r.succeeded()).count();
        write_out(out, n, "out")
    })
}

/// Success flag of run `index` and, when it succeeded, the update at which it did.
#[no_mangle]
pub extern "C" fn tnqs_result_run_success(
    result: *const TnqsResult,
    index: usize,
    succeeded: *mut bool,
    step: *mut usize,
) -> TnqsStatus {
    guard(|| {
        let records = &non_null(result, "result")?.0.records;
        let Some(record) = records.get(index) else {
            return fail(TnqsStatus::OutOfRange, format!("run {index} of {}", records.len()));
        };
        write_out(succeeded, record.succeeded(), "succeeded")?;
        write_out(step, record.success_step.unwrap_or(0), "step")
    })
}

/// Final energy of the zero-temperature replica of run `index`; NaN if unknown.
#[no_mangle]
pub extern "C" fn tnqs_result_final_energy(result: *const TnqsResult, index: usize, out: *mut f64) -> TnqsStatus {
    guard(|| {
        let records = &non_null(result, "result")?.0.records;
        let Some(record) = records.get(index) else {
            return fail(TnqsStatus::OutOfRange, format!("run {index} of {}", records.len()));
        };
        write_out(out, record.final_energy.unwrap_or(f64::NAN), "out")
    })
}

/// Summary as JSON; free the string with [`tnqs_string_free`].
#[no_mangle]
pub extern "C" fn tnqs_result_summary_json(result: *const TnqsResult, out: *mut *mut c_char) -> TnqsStatus {
    guard(|| {
        let json = serde_json::to_string(&non_null(result, "result")?.0.summary).map_err(Error::from)?;
        string_out(out, json)
    })
}

#[no_mangle]
pub extern "C" fn tnqs_result_free(result: *mut TnqsResult) {
    free(result);
}

/// Lowest `levels` energies of the Precipice problem in the symmetric sector.
#[no_mangle]
pub extern "C" fn tnqs_precipice_spectrum(n: usize, s: f64, levels: usize, out: *mut *mut TnqsSpectrum) -> TnqsStatus {
    guard(|| boxed(out, TnqsSpectrum(precipice_spectrum(n, s, levels)?)))
}

/// Lowest `levels` energies of the J1-J2 model with `weight` up spins.
#[no_mangle]
pub extern "C" fn tnqs_j1j2_spectrum(
    lx: usize,
    ly: usize,
    j1: f64,
    j2: f64,
    periodic: bool,
    weight: usize,
    levels: usize,
    out: *mut *mut TnqsSpectrum,
) -> TnqsStatus {
    guard(|| {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Open };
        boxed(out, TnqsSpectrum(j1j2_spectrum(lx, ly, j1, j2, boundary, weight, levels)?))
    })
}

#[no_mangle]
pub extern "C" fn tnqs_spectrum_len(spectrum: *const TnqsSpectrum, out: *mut usize) -> TnqsStatus {
    guard(|| write_out(out, non_null(spectrum, "spectrum")?.0.eigenvalues.len(), "out"))
}

/// Sector dimension the spectrum was computed in.
#[no_mangle]
pub extern "C" fn tnqs_spectrum_dimension(spectrum: *const TnqsSpectrum, out: *mut usize) -> TnqsStatus {
    guard(|| write_out(out, non_null(spectrum, "spectrum")?.0.dimension, "out"))
}

#[no_mangle]
pub extern "C" fn tnqs_spectrum_eigenvalue(spectrum: *const TnqsSpectrum, index: usize, out: *mut f64) -> TnqsStatus {
    guard(|| {
        let values = &non_null(spectrum, "spectrum")?.0.eigenvalues;
        match values.get(index) {
            Some(v) => write_out(out, *v, "out"),
            None => fail(TnqsStatus::OutOfRange, format!("level {index} of {}", values.len())),
        }
    })
}

#[no_mangle]
pub extern "C" fn tnqs_spectrum_free(spectrum: *mut TnqsSpectrum) {
    free(spectrum);
}

/// Replica-exchange acceptance probability; infinite `beta` marks the
/// zero-temperature slot.
#[no_mangle]
pub extern "C" fn tnqs_swap_probability(
    beta_i: f64,
    beta_j: f64,
    energy_i: f64,
    energy_j: f64,
    out: *mut f64,
) -> TnqsStatus {
    guard(|| write_out(out, swap_probability(beta_i, beta_j, energy_i, energy_j), "out"))
}
