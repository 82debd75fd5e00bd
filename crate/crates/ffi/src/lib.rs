//! C ABI for the kwb assessment engine.
//!
//! Handles are opaque and owned by the caller once returned; release each with
//! its `_free` function. Every fallible call returns a [`KwbStatus`] and, on
//! failure, leaves a message retrievable with [`kwb_last_error`] on the same
//! thread. Strings returned as `char *` must be released with
//! [`kwb_string_free`]; `const char *` results are borrowed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use kwb_core::config::ThresholdConfig;
use kwb_core::ink::{parse_ink, InkError};
use kwb_core::report::{assess_character, AssessError, AssessmentReport};
use kwb_core::scoring::MetricId;
use kwb_core::store::{StoreError, TemplateStore};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KwbStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Ink or configuration JSON violated its schema or invariants.
    InvalidInput = 3,
    /// The sketch had no strokes to assess.
    EmptySketch = 4,
    /// Unknown character label or metric id.
    NotFound = 5,
    /// The store could not be read.
    Io = 6,
    /// Engine panic; the handle arguments are still valid.
    Internal = 99,
}

/// Loaded template store.
pub struct KwbStore(TemplateStore);

/// Threshold configuration.
pub struct KwbConfig(ThresholdConfig);

/// One assessment report.
pub struct KwbReport(AssessmentReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: KwbStatus, message: impl Into<String>) -> KwbStatus {
    set_error(message);
    status
}

/// Runs `f`, turning a panic into [`KwbStatus::Internal`].
fn guard(f: impl FnOnce() -> KwbStatus) -> KwbStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(KwbStatus::Internal, format!("internal error: {msg}"))
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, KwbStatus> {
    if p.is_null() {
        return Err(fail(KwbStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(KwbStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

fn metric_of(id: &str) -> Result<MetricId, KwbStatus> {
    id.parse::<MetricId>()
        .map_err(|e| fail(KwbStatus::NotFound, e.to_string()))
}

fn assess_status(e: &AssessError) -> KwbStatus {
    if e.is_empty_sketch() {
        KwbStatus::EmptySketch
    } else if e.is_not_found() {
        KwbStatus::NotFound
    } else {
        KwbStatus::InvalidInput
    }
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version, e.g. "0.1.0". Static; do not free.
#[no_mangle]
pub extern "C" fn kwb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failure on this thread, or null. Valid until
/// the next kwb call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn kwb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer returned as `char *` by this library that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn kwb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a preprocessed template store directory.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kwb_store_open(dir: *const c_char, out: *mut *mut KwbStore) -> KwbStatus {
    guard(|| {
        if out.is_null() {
            return fail(KwbStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let dir = match read_str(dir, "dir") {
            Ok(d) => d,
            Err(s) => return s,
        };
        match TemplateStore::load(Path::new(dir)) {
            Ok(store) => {
                *out = Box::into_raw(Box::new(KwbStore(store)));
                KwbStatus::Ok
            }
            Err(e @ StoreError::Io { .. }) => fail(KwbStatus::Io, e.to_string()),
            Err(e) => fail(KwbStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `store` must be null or a handle from [`kwb_store_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kwb_store_free(store: *mut KwbStore) {
    if !store.is_null() {
        drop(Box::from_raw(store));
    }
}

/// Number of templates in the store; 0 for a null handle.
///
/// # Safety
/// `store` must be null or a live store handle.
#[no_mangle]
pub unsafe extern "C" fn kwb_store_len(store: *const KwbStore) -> usize {
    store.as_ref().map_or(0, |s| s.0.len())
}

/// Content hash identifying the store. Free with [`kwb_string_free`].
///
/// # Safety
/// `store` must be null or a live store handle.
#[no_mangle]
pub unsafe extern "C" fn kwb_store_version(store: *const KwbStore) -> *mut c_char {
    store.as_ref().map_or(ptr::null_mut(), |s| into_c_string(s.0.version().to_string()))
}

/// Default thresholds. Never null.
#[no_mangle]
pub extern "C" fn kwb_config_default() -> *mut KwbConfig {
    Box::into_raw(Box::new(KwbConfig(ThresholdConfig::default())))
}

/// Parses a thresholds JSON document; omitted keys take their defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kwb_config_from_json(json: *const c_char, out: *mut *mut KwbConfig) -> KwbStatus {
    guard(|| {
        if out.is_null() {
            return fail(KwbStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ThresholdConfig::from_json(text) {
            Ok(cfg) => {
                *out = Box::into_raw(Box::new(KwbConfig(cfg)));
                KwbStatus::Ok
            }
            Err(e) => fail(KwbStatus::InvalidInput, e.to_string()),
        }
    })
}

/// # Safety
/// `config` must be null or a config handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kwb_config_free(config: *mut KwbConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Assesses one ink JSON document against the template named by its label.
/// A null `config` means the defaults.
///
/// # Safety
/// `store` must be a live store handle, `config` null or a live config
/// handle, `ink_json` a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kwb_assess(
    store: *const KwbStore,
    config: *const KwbConfig,
    ink_json: *const c_char,
    out: *mut *mut KwbReport,
) -> KwbStatus {
    guard(|| {
        if out.is_null() {
            return fail(KwbStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let Some(store) = store.as_ref() else {
            return fail(KwbStatus::NullArgument, "store is null");
        };
        let default;
        let cfg = match config.as_ref() {
            Some(c) => &c.0,
            None => {
                default = ThresholdConfig::default();
                &default
            }
        };
        let text = match read_str(ink_json, "ink_json") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let sketch = match parse_ink(text) {
            Ok(s) => s,
            Err(e @ InkError::EmptySketch) => return fail(KwbStatus::EmptySketch, e.to_string()),
            Err(e) => return fail(KwbStatus::InvalidInput, e.to_string()),
        };
        let template = match store.0.lookup_template(sketch.label()) {
            Ok(t) => t,
            Err(e) => return fail(KwbStatus::NotFound, e.to_string()),
        };
        match assess_character(template, &sketch, None, cfg) {
            Ok(report) => {
                *out = Box::into_raw(Box::new(KwbReport(report)));
                KwbStatus::Ok
            }
            Err(e) => fail(assess_status(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `report` must be null or a report handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kwb_report_free(report: *mut KwbReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Stars (1..3) for a metric id such as "stroke_order".
///
/// # Safety
/// `report` must be a live report handle, `metric_id` a NUL-terminated
/// string and `out_stars` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kwb_report_stars(
    report: *const KwbReport,
    metric_id: *const c_char,
    out_stars: *mut u8,
) -> KwbStatus {
    guard(|| {
        let (Some(report), false) = (report.as_ref(), out_stars.is_null()) else {
            return fail(KwbStatus::NullArgument, "report or out_stars is null");
        };
        match read_str(metric_id, "metric_id").and_then(metric_of) {
            Ok(id) => {
                *out_stars = report.0.stars(id);
                KwbStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// Raw value of a metric. `*out_present` is false when the metric had
/// nothing comparable, in which case `*out_value` is NaN.
///
/// # Safety
/// `report` must be a live report handle, `metric_id` a NUL-terminated
/// string, and both out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn kwb_report_raw(
    report: *const KwbReport,
    metric_id: *const c_char,
    out_value: *mut f64,
    out_present: *mut bool,
) -> KwbStatus {
    guard(|| {
        let (Some(report), false, false) = (report.as_ref(), out_value.is_null(), out_present.is_null()) else {
            return fail(KwbStatus::NullArgument, "report or an out pointer is null");
        };
        match read_str(metric_id, "metric_id").and_then(metric_of) {
            Ok(id) => {
                let raw = report.0.metric(id).raw;
                *out_present = raw.is_some();
                *out_value = raw.unwrap_or(f64::NAN);
                KwbStatus::Ok
            }
            Err(s) => s,
        }
    })
}

/// The full report as JSON. Free with [`kwb_string_free`]; null for a null
/// handle.
///
/// # Safety
/// `report` must be null or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn kwb_report_to_json(report: *const KwbReport) -> *mut c_char {
    report.as_ref().map_or(ptr::null_mut(), |r| into_c_string(r.0.to_json()))
}

/// Stars for a raw metric value under `config` (null for defaults). Pass
/// `has_raw = false` when the metric had nothing comparable.
///
/// # Safety
/// `metric_id` must be a NUL-terminated string, `config` null or a live
/// config handle, and `out_stars` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kwb_score_metric(
    metric_id: *const c_char,
    raw: f64,
    has_raw: bool,
    config: *const KwbConfig,
    out_stars: *mut u8,
) -> KwbStatus {
    guard(|| {
        if out_stars.is_null() {
            return fail(KwbStatus::NullArgument, "out_stars is null");
        }
        let id = match read_str(metric_id, "metric_id").and_then(metric_of) {
            Ok(id) => id,
            Err(s) => return s,
        };
        let default = ThresholdConfig::default();
        let cfg = config.as_ref().map_or(&default, |c| &c.0);
        *out_stars = id.stars(has_raw.then_some(raw), cfg);
        KwbStatus::Ok
    })
}
