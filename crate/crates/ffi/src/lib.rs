//! C ABI for the darksim simulator: opaque handles, integer status codes,
//! and a direct numerical entry point for the protected-subspace finder.
//!
//! Ownership rules: every `*_new`/`*_load`/`*_run` pointer must be released
//! with the matching `*_free`; strings returned from report accessors belong
//! to the report handle and die with it.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

use darksim::config::Config;
use darksim::error::Error;
use darksim::linalg::kernel_default_tol;
use darksim::operator::Operator;
use darksim::scenario::{run_scenario, write_outputs, ScenarioOutput};
use darksim::subspace::find_protected;
use darksim::C64;

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    InvalidArgument = 1,
    ConfigError = 2,
    NumericalError = 3,
    IoError = 4,
    InternalError = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap());
}

fn status_of(err: &Error) -> DsStatus {
    match err {
        Error::Config(_) => DsStatus::ConfigError,
        Error::StepSize { .. } | Error::NumericalContract(_) => DsStatus::NumericalError,
        Error::Io(_) => DsStatus::IoError,
        _ => DsStatus::InvalidArgument,
    }
}

/// Opaque configuration handle.
pub struct DsConfig {
    inner: Config,
}

/// Opaque scenario-report handle (owns its key/value storage).
pub struct DsReport {
    entries: Vec<(CString, CString, f64)>,
}

impl DsReport {
    fn from_output(out: &ScenarioOutput) -> Self {
        let entries = out
            .summary
            .iter()
            .map(|(k, v)| {
                let num = v.parse::<f64>().unwrap_or(f64::NAN);
                (
                    CString::new(k.as_str()).unwrap_or_default(),
                    CString::new(v.as_str()).unwrap_or_default(),
                    num,
                )
            })
            .collect();
        Self { entries }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn darksim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copy the last error message on this thread into `buf` (truncated to
/// `len − 1` bytes, always NUL-terminated). Returns the full message length.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be null (in which
/// case only the length is returned).
#[no_mangle]
pub unsafe extern "C" fn darksim_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// New empty configuration.
#[no_mangle]
pub extern "C" fn darksim_config_new() -> *mut DsConfig {
    Box::into_raw(Box::new(DsConfig {
        inner: Config::default(),
    }))
}

/// Load a configuration file. Returns null on error (see darksim_last_error).
///
/// # Safety
/// `path` must be a valid NUL-terminated string or null.
#[no_mangle]
pub unsafe extern "C" fn darksim_config_load(path: *const c_char) -> *mut DsConfig {
    let Some(path) = cstr_arg(path) else {
        set_error("null or non-UTF8 path");
        return ptr::null_mut();
    };
    match Config::load(&PathBuf::from(path)) {
        Ok(inner) => Box::into_raw(Box::new(DsConfig { inner })),
        Err(e) => {
            set_error(&e.to_string());
            ptr::null_mut()
        }
    }
}

/// Apply a `key=value` override.
///
/// # Safety
/// `cfg` must be a live handle from this library; `assignment` a valid
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn darksim_config_set(
    cfg: *mut DsConfig,
    assignment: *const c_char,
) -> DsStatus {
    let Some(cfg) = cfg.as_mut() else {
        set_error("null config handle");
        return DsStatus::InvalidArgument;
    };
    let Some(assignment) = cstr_arg(assignment) else {
        set_error("null or non-UTF8 assignment");
        return DsStatus::InvalidArgument;
    };
    match cfg.inner.set_override(assignment) {
        Ok(()) => DsStatus::Ok,
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// # Safety
/// `cfg` must come from darksim_config_new/load and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn darksim_config_free(cfg: *mut DsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Run a scenario. `out_dir` may be null to skip writing artifacts;
/// `has_seed` gates whether `seed` is applied. Returns null on error.
///
/// # Safety
/// `cfg` must be a live handle; `scenario` and (if non-null) `out_dir` valid
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn darksim_run_scenario(
    cfg: *const DsConfig,
    scenario: *const c_char,
    has_seed: bool,
    seed: u64,
    out_dir: *const c_char,
) -> *mut DsReport {
    let Some(cfg) = cfg.as_ref() else {
        set_error("null config handle");
        return ptr::null_mut();
    };
    let Some(name) = cstr_arg(scenario) else {
        set_error("null or non-UTF8 scenario name");
        return ptr::null_mut();
    };
    let seed = has_seed.then_some(seed);
    let output = match run_scenario(name, &cfg.inner, seed) {
        Ok(o) => o,
        Err(e) => {
            set_error(&e.to_string());
            return ptr::null_mut();
        }
    };
    if !out_dir.is_null() {
        let Some(dir) = cstr_arg(out_dir) else {
            set_error("non-UTF8 output directory");
            return ptr::null_mut();
        };
        if let Err(e) = write_outputs(&PathBuf::from(dir), name, &cfg.inner, &output, seed) {
            set_error(&e.to_string());
            return ptr::null_mut();
        }
    }
    Box::into_raw(Box::new(DsReport::from_output(&output)))
}

/// Number of summary entries in a report.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn darksim_report_len(report: *const DsReport) -> usize {
    report.as_ref().map(|r| r.entries.len()).unwrap_or(0)
}

/// Key of the idx-th entry; owned by the report. Null when out of range.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn darksim_report_key(report: *const DsReport, idx: usize) -> *const c_char {
    report
        .as_ref()
        .and_then(|r| r.entries.get(idx))
        .map(|(k, _, _)| k.as_ptr())
        .unwrap_or(ptr::null())
}

/// Numeric value for a summary key. Non-numeric entries report NaN.
///
/// # Safety
/// `report` must be a live handle, `key` a valid NUL-terminated string and
/// `value` a writable f64 slot.
#[no_mangle]
pub unsafe extern "C" fn darksim_report_get(
    report: *const DsReport,
    key: *const c_char,
    value: *mut f64,
) -> DsStatus {
    let (Some(report), Some(key)) = (report.as_ref(), cstr_arg(key)) else {
        set_error("null report handle or key");
        return DsStatus::InvalidArgument;
    };
    if value.is_null() {
        set_error("null value slot");
        return DsStatus::InvalidArgument;
    }
    for (k, _, num) in &report.entries {
        if k.to_bytes() == key.as_bytes() {
            *value = *num;
            return DsStatus::Ok;
        }
    }
    set_error("key not found in report");
    DsStatus::InvalidArgument
}

/// String value for a summary key; owned by the report.
///
/// # Safety
/// As for darksim_report_get.
#[no_mangle]
pub unsafe extern "C" fn darksim_report_get_str(
    report: *const DsReport,
    key: *const c_char,
) -> *const c_char {
    let (Some(report), Some(key)) = (report.as_ref(), cstr_arg(key)) else {
        return ptr::null();
    };
    for (k, v, _) in &report.entries {
        if k.to_bytes() == key.as_bytes() {
            return v.as_ptr();
        }
    }
    ptr::null()
}

/// # Safety
/// `report` must come from darksim_run_scenario and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn darksim_report_free(report: *mut DsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Protected-subspace finder over raw buffers.
///
/// `h_re`/`h_im` and `jz_re`/`jz_im` are row-major dim×dim matrices. On
/// success, up to `*dark_count` orthonormal dark vectors are written into
/// `dark_out` (interleaved re, im; vector k occupies entries
/// [2·k·dim, 2·(k+1)·dim)) and `*dark_count` holds the subspace dimension.
/// `tol ≤ 0` selects the default 1e-9 × matrix scale.
///
/// # Safety
/// All matrix pointers must reference `dim²` readable f64s, `dark_out`
/// `2·dim·capacity` writable f64s where `capacity = *dark_count` on entry,
/// and `dark_count` a writable usize.
#[no_mangle]
pub unsafe extern "C" fn darksim_find_protected(
    dim: usize,
    h_re: *const f64,
    h_im: *const f64,
    jz_re: *const f64,
    jz_im: *const f64,
    tol: f64,
    dark_out: *mut f64,
    dark_count: *mut usize,
) -> DsStatus {
    if dim == 0
        || h_re.is_null()
        || h_im.is_null()
        || jz_re.is_null()
        || jz_im.is_null()
        || dark_out.is_null()
        || dark_count.is_null()
    {
        set_error("null buffer or zero dimension");
        return DsStatus::InvalidArgument;
    }
    let capacity = *dark_count;
    let build = |re: *const f64, im: *const f64| {
        Operator::from_fn(dim, |i, j| {
            C64::new(*re.add(i * dim + j), *im.add(i * dim + j))
        })
    };
    let h = build(h_re, h_im);
    let jz = build(jz_re, jz_im);
    let tol = if tol > 0.0 {
        tol
    } else {
        kernel_default_tol(&h)
    };
    match find_protected(&h, &jz, tol) {
        Ok(sub) => {
            if sub.dimension() > capacity {
                set_error("dark_out capacity too small for the subspace");
                *dark_count = sub.dimension();
                return DsStatus::InvalidArgument;
            }
            for (k, v) in sub.dark_basis.iter().enumerate() {
                for i in 0..dim {
                    let amp = v.amp(i);
                    *dark_out.add(2 * (k * dim + i)) = amp.re;
                    *dark_out.add(2 * (k * dim + i) + 1) = amp.im;
                }
            }
            *dark_count = sub.dimension();
            DsStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}
