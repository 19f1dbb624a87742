//! C ABI over the workbench.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `_free` function. Every fallible call returns an [`SfStatus`];
//! on anything but `SF_STATUS_OK` a message is kept per thread and can be
//! read with [`sf_last_error`]. Strings returned through out-parameters are
//! released with [`sf_string_free`].

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};
use scattered_forge::amalgam::{BarrierKind, OrderIso};
use scattered_forge::condition::{amalgamate_conditions, validate, Condition, SystemMode};
use scattered_forge::io::{self, OrderFile, DEFAULT_THRESHOLD_TOP};
use scattered_forge::order::check_admissible;
use scattered_forge::sim::{full_schedule, run_schedule};
use scattered_forge::space::cardinal_sequence;
use scattered_forge::{dot, Error, Universe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    /// A checked property fails; the message names the witness.
    Violation = 1,
    /// Input could not be parsed or is out of shape.
    Malformed = 2,
    NullPointer = 3,
    /// Input parsed but breaks an operation's precondition.
    Invalid = 4,
    /// Two conditions cannot be amalgamated.
    Incompatible = 5,
    /// A schedule cannot be met within the universe.
    Infeasible = 6,
    /// The output buffer is too small; the needed length is still reported.
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfBarrierKind {
    /// The recursive barrier amalgamation.
    Recursive = 0,
    /// The amalgamation read off the canonical sequences.
    Canonical = 1,
}

/// An order with an optional barrier map.
pub struct SfOrder {
    inner: OrderFile,
}

/// A condition.
pub struct SfCondition {
    inner: Condition,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> SfStatus {
    match err {
        Error::Violation(_) => SfStatus::Violation,
        Error::Incompatible { .. } => SfStatus::Incompatible,
        Error::Infeasible { .. } => SfStatus::Infeasible,
        Error::Malformed(_) | Error::Json(_) | Error::Io(_) | Error::OutOfBounds(_) => SfStatus::Malformed,
        _ => SfStatus::Invalid,
    }
}

fn fail(err: Error) -> SfStatus {
    set_error(err.to_string());
    status_of(&err)
}

/// Runs `f`, turning panics into `SF_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> SfStatus) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            SfStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SfStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(SfStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        SfStatus::Malformed
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> SfStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            SfStatus::Ok
        }
        Err(_) => {
            set_error("output contains a nul byte");
            SfStatus::Invalid
        }
    }
}

macro_rules! non_null {
    ($($p:expr),+) => {
        $(if $p.is_null() {
            set_error(concat!("null pointer: ", stringify!($p)));
            return SfStatus::NullPointer;
        })+
    };
}

macro_rules! tri {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// The message for the last failing call on this thread, or NULL. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an order file.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_order_from_json(json: *const c_char, out: *mut *mut SfOrder) -> SfStatus {
    guard(|| {
        non_null!(out);
        let text = tri!(read_str(json));
        match io::from_str::<OrderFile>(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SfOrder { inner }));
                SfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `order` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_order_free(order: *mut SfOrder) {
    if !order.is_null() {
        drop(Box::from_raw(order));
    }
}

/// Checks admissibility; the stored barriers are used when present, the
/// minimal ones otherwise.
///
/// # Safety
/// `order` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_order_check_admissible(order: *const SfOrder) -> SfStatus {
    guard(|| {
        non_null!(order);
        let frame = (*order).inner.frame();
        match check_admissible(&frame.order, &frame.barriers) {
            Ok(()) => SfStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Writes the level sizes of the derivation into `buf` and their count into
/// `len`. With `cap` too small only `len` is written.
///
/// # Safety
/// `order` must be a live handle; `buf` must hold `cap` entries; `len` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_order_cardinal_sequence(
    order: *const SfOrder,
    buf: *mut size_t,
    cap: size_t,
    len: *mut size_t,
) -> SfStatus {
    guard(|| {
        non_null!(order, len);
        let seq = cardinal_sequence(&(*order).inner.order);
        *len = seq.sizes.len();
        if seq.sizes.len() > cap {
            set_error(format!("sequence has {} levels, buffer holds {cap}", seq.sizes.len()));
            return SfStatus::BufferTooSmall;
        }
        if !seq.sizes.is_empty() {
            non_null!(buf);
            ptr::copy_nonoverlapping(seq.sizes.as_ptr(), buf, seq.sizes.len());
        }
        if !seq.scattered {
            set_error("space is not scattered; the sequence is partial");
            return SfStatus::Violation;
        }
        SfStatus::Ok
    })
}

/// The Hasse diagram in DOT syntax.
///
/// # Safety
/// `order` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_order_to_dot(order: *const SfOrder, out: *mut *mut c_char) -> SfStatus {
    guard(|| {
        non_null!(order, out);
        write_string(out, dot::export_dot(&(*order).inner.order))
    })
}

/// Parses a condition file.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_condition_from_json(json: *const c_char, out: *mut *mut SfCondition) -> SfStatus {
    guard(|| {
        non_null!(out);
        let text = tri!(read_str(json));
        match io::from_str::<Condition>(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SfCondition { inner }));
                SfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `cond` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_condition_free(cond: *mut SfCondition) {
    if !cond.is_null() {
        drop(Box::from_raw(cond));
    }
}

/// Checks clauses (1) to (5).
///
/// # Safety
/// `cond` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_condition_validate(cond: *const SfCondition) -> SfStatus {
    guard(|| {
        non_null!(cond);
        match validate(&(*cond).inner) {
            Ok(()) => SfStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Amalgamates two conditions along the point isomorphism `iso_json`.
///
/// The systems are combined by union along `sys_iso_json` when it is not
/// NULL, otherwise by copying the first system into node `into_code` of the
/// second when `into_code` is non-negative, otherwise by union along the
/// empty map.
///
/// # Safety
/// `q1`, `q2` must be live handles; `iso_json` a nul-terminated string;
/// `sys_iso_json` NULL or a nul-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sf_condition_amalgamate(
    q1: *const SfCondition,
    q2: *const SfCondition,
    iso_json: *const c_char,
    sys_iso_json: *const c_char,
    into_code: i64,
    kind: SfBarrierKind,
    out: *mut *mut SfCondition,
) -> SfStatus {
    guard(|| {
        non_null!(q1, q2, out);
        let psi: OrderIso = match io::from_str(tri!(read_str(iso_json))) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let mode = if !sys_iso_json.is_null() {
            match io::ordinal_iso_from_str(tri!(read_str(sys_iso_json))) {
                Ok(iso) => SystemMode::Union(iso),
                Err(e) => return fail(e),
            }
        } else if into_code >= 0 {
            match u32::try_from(into_code) {
                Ok(c) => SystemMode::Into(c),
                Err(_) => return fail(Error::InvalidInput(format!("node code {into_code} out of range"))),
            }
        } else {
            SystemMode::Union(Default::default())
        };
        let kind = match kind {
            SfBarrierKind::Recursive => BarrierKind::Recursive,
            SfBarrierKind::Canonical => BarrierKind::Canonical,
        };
        match amalgamate_conditions(&(*q1).inner, &(*q2).inner, &psi, &mode, kind) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SfCondition { inner }));
                SfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the full density schedule of the universe from the empty condition.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_simulate(
    width: u32,
    height: u32,
    fanout: u32,
    seed: u64,
    out: *mut *mut SfCondition,
) -> SfStatus {
    guard(|| {
        non_null!(out);
        let run = Universe::new(width, height, fanout).and_then(|u| {
            let sched = full_schedule(u)?;
            run_schedule(&Condition::empty(u, DEFAULT_THRESHOLD_TOP), &sched, seed)
        });
        match run {
            Ok(run) => {
                *out = Box::into_raw(Box::new(SfCondition { inner: run.result }));
                SfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// A copy of the condition's order and barriers as an order handle.
///
/// # Safety
/// `cond` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_condition_order(cond: *const SfCondition, out: *mut *mut SfOrder) -> SfStatus {
    guard(|| {
        non_null!(cond, out);
        let q = &(*cond).inner;
        let inner = OrderFile {
            order: q.order.clone(),
            barriers: Some(q.barriers.clone()),
        };
        *out = Box::into_raw(Box::new(SfOrder { inner }));
        SfStatus::Ok
    })
}

/// The condition as JSON.
///
/// # Safety
/// `cond` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sf_condition_to_json(cond: *const SfCondition, out: *mut *mut c_char) -> SfStatus {
    guard(|| {
        non_null!(cond, out);
        write_string(out, io::to_string(&(*cond).inner))
    })
}
