//! C interface: an opaque service handle, status codes, and owned strings.
//!
//! Strings returned through out-parameters are heap-allocated and must be
//! released with `sps_string_free`. After a non-OK status,
//! `sps_last_error_message` describes the failure on the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use sps_core::notify::topic_namespace_document;
use sps_core::service::{default_config, load, Service};
use sps_core::swe::{decode_parameter_data, encode_parameter_data, parse_tasking_description, TextEncoding};
use sps_core::task::format_instant;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    /// The response holds an exception report.
    ServiceException = 4,
    Codec = 5,
    ClockUnavailable = 6,
    Panic = 7,
}

/// A service instance. Safe to share between threads.
pub struct SpsService {
    inner: Service,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: SpsStatus, msg: impl Into<String>) -> SpsStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> SpsStatus) -> SpsStatus {
    set_error("");
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(SpsStatus::Panic, "internal panic"))
}

unsafe fn arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, SpsStatus> {
    if p.is_null() {
        return Err(fail(SpsStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(SpsStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn put(out: *mut *mut c_char, s: String) {
    *out = CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw();
}

macro_rules! need {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Creates a service from a JSON configuration file, or from the built-in
/// configuration when `config_path` is null.
///
/// # Safety
/// `config_path` is null or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sps_service_new(config_path: *const c_char, out: *mut *mut SpsService) -> SpsStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpsStatus::NullArgument, "out is null");
        }
        *out = ptr::null_mut();
        let cfg = if config_path.is_null() {
            default_config()
        } else {
            match load(Path::new(need!(arg(config_path, "config_path")))) {
                Ok(c) => c,
                Err(e) => return fail(SpsStatus::Config, e.to_string()),
            }
        };
        match Service::new(cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SpsService { inner }));
                SpsStatus::Ok
            }
            Err(e) => fail(SpsStatus::Config, e.to_string()),
        }
    })
}

/// # Safety
/// `svc` is null or came from `sps_service_new` and is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sps_service_free(svc: *mut SpsService) {
    if !svc.is_null() {
        drop(Box::from_raw(svc));
    }
}

/// Dispatches one operation document. The response document is written
/// to `out_response` for both success and exception reports;
/// `out_http_status` (optional) receives the HTTP status it maps to.
///
/// # Safety
/// `svc` is a live handle, `request_xml` a NUL-terminated string,
/// `out_response` writable, `out_http_status` null or writable.
#[no_mangle]
pub unsafe extern "C" fn sps_service_dispatch(
    svc: *const SpsService,
    request_xml: *const c_char,
    out_response: *mut *mut c_char,
    out_http_status: *mut u16,
) -> SpsStatus {
    guard(|| {
        if svc.is_null() || out_response.is_null() {
            return fail(SpsStatus::NullArgument, "svc or out_response is null");
        }
        *out_response = ptr::null_mut();
        let xml = need!(arg(request_xml, "request_xml"));
        let reply = (*svc).inner.dispatch(xml);
        if !out_http_status.is_null() {
            *out_http_status = reply.status;
        }
        let status = if reply.status == 200 {
            SpsStatus::Ok
        } else {
            let code = sps_core::service::parse_exception_report(&reply.body).map(|e| e.0).unwrap_or_default();
            fail(SpsStatus::ServiceException, code)
        };
        put(out_response, reply.body);
        status
    })
}

/// Advances the virtual clock and fires due timers. `out_now` (optional)
/// receives the new instant.
///
/// # Safety
/// `svc` is a live handle; `out_now` is null or writable.
#[no_mangle]
pub unsafe extern "C" fn sps_service_advance_clock(
    svc: *const SpsService,
    seconds: i64,
    out_now: *mut *mut c_char,
) -> SpsStatus {
    guard(|| {
        if svc.is_null() {
            return fail(SpsStatus::NullArgument, "svc is null");
        }
        if seconds < 0 {
            return fail(SpsStatus::ClockUnavailable, "seconds must be non-negative");
        }
        match (*svc).inner.advance_clock(seconds) {
            Some(now) => {
                if !out_now.is_null() {
                    put(out_now, format_instant(now));
                }
                SpsStatus::Ok
            }
            None => fail(SpsStatus::ClockUnavailable, "service runs on the system clock"),
        }
    })
}

/// The notification topic namespace document.
///
/// # Safety
/// `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn sps_topic_namespace(out: *mut *mut c_char) -> SpsStatus {
    guard(|| {
        if out.is_null() {
            return fail(SpsStatus::NullArgument, "out is null");
        }
        put(out, topic_namespace_document());
        SpsStatus::Ok
    })
}

/// Decodes `values` under a tasking description document and re-encodes
/// the result into `out_values`.
///
/// # Safety
/// All string arguments are NUL-terminated; `out_values` is writable.
#[no_mangle]
pub unsafe extern "C" fn sps_codec_roundtrip(
    description_xml: *const c_char,
    values: *const c_char,
    token_separator: *const c_char,
    block_separator: *const c_char,
    out_values: *mut *mut c_char,
) -> SpsStatus {
    guard(|| {
        if out_values.is_null() {
            return fail(SpsStatus::NullArgument, "out_values is null");
        }
        *out_values = ptr::null_mut();
        let desc = need!(arg(description_xml, "description_xml"));
        let values = need!(arg(values, "values"));
        let tok = need!(arg(token_separator, "token_separator"));
        let blk = need!(arg(block_separator, "block_separator"));
        let result = parse_tasking_description(desc)
            .map_err(|e| e.to_string())
            .and_then(|d| {
                let enc = TextEncoding::new(tok, blk).map_err(|e| e.to_string())?;
                let data = decode_parameter_data(&d, &enc, values).map_err(|e| e.to_string())?;
                encode_parameter_data(&d, &data).map_err(|e| e.to_string())
            });
        match result {
            Ok(s) => {
                put(out_values, s);
                SpsStatus::Ok
            }
            Err(e) => fail(SpsStatus::Codec, e),
        }
    })
}

/// # Safety
/// `s` is null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn sps_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread; empty after success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
