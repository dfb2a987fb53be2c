//! C ABI over the `qqbf` crate. Circuits are opaque handles; every call
//! returns a `QqbfStatus` and leaves a message for `qqbf_last_error` on
//! failure. Strings handed out must be released with `qqbf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qqbf::json as qjson;
use qqbf::{ExtendedComplex, MultiRationalFn, NumericPolicy, QqbfError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QqbfStatus {
    Ok = 0,
    /// Null pointer or buffer of the wrong size.
    InvalidArgument = 1,
    /// Malformed JSON, non-coprime pair, dimension mismatch.
    InvalidInput = 2,
    /// Capacity, incompatibility or numerical breakdown.
    Infeasible = 3,
    Verification = 4,
    /// A panic was caught at the boundary.
    Internal = 5,
}

/// Synthesized circuit.
pub struct QqbfCircuit {
    inner: qqbf::QqbfCircuit,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &QqbfError) -> QqbfStatus {
    match e.exit_code() {
        3 => QqbfStatus::Infeasible,
        4 => QqbfStatus::Verification,
        _ => QqbfStatus::InvalidInput,
    }
}

struct Fail(QqbfStatus, String);

impl From<QqbfError> for Fail {
    fn from(e: QqbfError) -> Self {
        Fail(status_of(&e), qjson::error_to_json(&e).to_string())
    }
}

fn bad_arg(msg: &str) -> Fail {
    Fail(QqbfStatus::InvalidArgument, msg.to_string())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QqbfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QqbfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            QqbfStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(bad_arg(&format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| bad_arg(&format!("{what} is not UTF-8")))
}

unsafe fn ns_arg(ns: *const usize, len: usize) -> Result<Option<Vec<usize>>, Fail> {
    if len == 0 {
        return Ok(None);
    }
    if ns.is_null() {
        return Err(bad_arg("ns is null but ns_len > 0"));
    }
    Ok(Some(std::slice::from_raw_parts(ns, len).to_vec()))
}

unsafe fn circuit_arg<'a>(c: *const QqbfCircuit) -> Result<&'a QqbfCircuit, Fail> {
    c.as_ref().ok_or_else(|| bad_arg("circuit is null"))
}

fn function(text: &str) -> Result<MultiRationalFn, Fail> {
    Ok(qjson::parse_function(text, NumericPolicy::default().coprime)?)
}

fn point(text: &str) -> Result<Vec<ExtendedComplex>, Fail> {
    Ok(qqbf::cli::parse_point(text)?)
}

unsafe fn give_string(s: String, out: *mut *mut c_char) -> Result<(), Fail> {
    if out.is_null() {
        return Err(bad_arg("out is null"));
    }
    *out = CString::new(s).map_err(|_| Fail(QqbfStatus::Internal, "interior NUL".into()))?.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call on the same thread.
#[no_mangle]
pub extern "C" fn qqbf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Synthesizes `fn_json`. `ns` may be null with `ns_len == 0` to use the
/// function's own degrees.
///
/// # Safety
/// Pointers must be valid; `ns` must hold `ns_len` entries.
#[no_mangle]
pub unsafe extern "C" fn qqbf_synthesize_json(
    fn_json: *const c_char,
    ns: *const usize,
    ns_len: usize,
    out: *mut *mut QqbfCircuit,
) -> QqbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let f = function(str_arg(fn_json, "fn_json")?)?;
        let ns = ns_arg(ns, ns_len)?;
        let inner = qqbf::synth::synthesize(&f, ns.as_deref())?;
        *out = Box::into_raw(Box::new(QqbfCircuit { inner }));
        Ok(())
    })
}

/// Loads a circuit from the JSON written by `qqbf_circuit_to_json`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qqbf_circuit_from_json(json: *const c_char, out: *mut *mut QqbfCircuit) -> QqbfStatus {
    guard(|| {
        if out.is_null() {
            return Err(bad_arg("out is null"));
        }
        let inner = qjson::parse_circuit(str_arg(json, "json")?, &NumericPolicy::default())?;
        *out = Box::into_raw(Box::new(QqbfCircuit { inner }));
        Ok(())
    })
}

/// # Safety
/// `c` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qqbf_circuit_free(c: *mut QqbfCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qqbf_circuit_num_qubits(c: *const QqbfCircuit, out: *mut usize) -> QqbfStatus {
    guard(|| {
        let c = circuit_arg(c)?;
        let out = out.as_mut().ok_or_else(|| bad_arg("out is null"))?;
        *out = c.inner.num_qubits();
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qqbf_circuit_dim(c: *const QqbfCircuit, out: *mut usize) -> QqbfStatus {
    guard(|| {
        let c = circuit_arg(c)?;
        let out = out.as_mut().ok_or_else(|| bad_arg("out is null"))?;
        *out = c.inner.unitary.dim();
        Ok(())
    })
}

/// Copies the unitary row-major as interleaved (re, im); `len` must be
/// `2 * dim * dim`.
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qqbf_circuit_unitary(c: *const QqbfCircuit, buf: *mut f64, len: usize) -> QqbfStatus {
    guard(|| {
        let c = circuit_arg(c)?;
        let d = c.inner.unitary.dim();
        if buf.is_null() || len != 2 * d * d {
            return Err(bad_arg("buffer must hold 2*dim*dim doubles"));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for i in 0..d {
            for j in 0..d {
                let v = c.inner.unitary.get(i, j);
                out[2 * (i * d + j)] = v.re;
                out[2 * (i * d + j) + 1] = v.im;
            }
        }
        Ok(())
    })
}

/// Simulates at `z` (e.g. `"1+2i,inf"`). Writes the herald probability and,
/// if `out_state` is non-null, the normalized output qubit as four doubles
/// (zeros when the herald probability vanishes).
///
/// # Safety
/// Pointers must be valid; `out_state` holds 4 doubles when non-null.
#[no_mangle]
pub unsafe extern "C" fn qqbf_circuit_run(
    c: *const QqbfCircuit,
    z: *const c_char,
    out_prob: *mut f64,
    out_state: *mut f64,
) -> QqbfStatus {
    guard(|| {
        let c = circuit_arg(c)?;
        let prob = out_prob.as_mut().ok_or_else(|| bad_arg("out_prob is null"))?;
        let r = qqbf::sim::run(&c.inner, &point(str_arg(z, "z")?)?)?;
        *prob = r.success_prob;
        if !out_state.is_null() {
            let s = std::slice::from_raw_parts_mut(out_state, 4);
            let amps = r.output.map(|o| o.into_amps()).unwrap_or_default();
            for (i, slot) in s.iter_mut().enumerate() {
                *slot = amps.get(i / 2).map_or(0.0, |a| if i % 2 == 0 { a.re } else { a.im });
            }
        }
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid. Free the string with `qqbf_string_free`.
#[no_mangle]
pub unsafe extern "C" fn qqbf_circuit_to_json(c: *const QqbfCircuit, out: *mut *mut c_char) -> QqbfStatus {
    guard(|| {
        let c = circuit_arg(c)?;
        let text = serde_json::to_string(&qjson::circuit_to_json(&c.inner))
            .map_err(|e| Fail(QqbfStatus::Internal, e.to_string()))?;
        give_string(text, out)
    })
}

/// # Safety
/// `s` must come from this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qqbf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Compatibility report of g1 with g0 as JSON.
///
/// # Safety
/// Pointers must be valid; `ns` holds `ns_len` entries.
#[no_mangle]
pub unsafe extern "C" fn qqbf_compatibility_json(
    g0_json: *const c_char,
    g1_json: *const c_char,
    ns: *const usize,
    ns_len: usize,
    out: *mut *mut c_char,
) -> QqbfStatus {
    guard(|| {
        let g0 = function(str_arg(g0_json, "g0_json")?)?;
        let g1 = function(str_arg(g1_json, "g1_json")?)?;
        let ns = ns_arg(ns, ns_len)?.unwrap_or_else(|| g0.degrees());
        let r = qqbf::multifunc::compatibility(&g0, &g1, &ns)?;
        give_string(qjson::compatibility_to_json(&r).to_string(), out)
    })
}

/// Closed-form success probability at `z`.
///
/// # Safety
/// Pointers must be valid; `ns` holds `ns_len` entries.
#[no_mangle]
pub unsafe extern "C" fn qqbf_success_probability(
    fn_json: *const c_char,
    ns: *const usize,
    ns_len: usize,
    z: *const c_char,
    out: *mut f64,
) -> QqbfStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| bad_arg("out is null"))?;
        let f = function(str_arg(fn_json, "fn_json")?)?;
        let ns = ns_arg(ns, ns_len)?.unwrap_or_else(|| f.degrees());
        *out = qqbf::prob::success_probability(&f, &ns, &point(str_arg(z, "z")?)?)?;
        Ok(())
    })
}
