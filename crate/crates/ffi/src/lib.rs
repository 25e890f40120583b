//! C interface to `intergrow`. Every call returns an `IgStatus`; on failure
//! `ig_last_error()` describes the problem until the next call on the same
//! thread. Strings returned through `char **` belong to the caller and are
//! released with `ig_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use intergrow::cli::{self, ExperimentConfig};
use intergrow::difference::change_of_basis;
use intergrow::expsum::{partial_sum, SequenceSpec};
use intergrow::growth::{eval_g_u64, Coefficient, GrowthParams, ShiftedCombination};
use intergrow::precision::{reduce_mod1, validate_precision, PrecisionChoice};
use intergrow::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Domain = 3,
    Precision = 4,
    Range = 5,
    Input = 6,
    Budget = 7,
    Unsupported = 8,
    Io = 9,
    Json = 10,
    Panic = 11,
}

/// Opaque `sum_j alpha_j G(x + h_j)`.
pub struct IgCombination {
    comb: ShiftedCombination,
}

/// Result of `ig_partial_sum`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct IgSum {
    pub re: f64,
    pub im: f64,
    /// `|sum| / N`.
    pub normalized: f64,
    pub precision_bits: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> IgStatus {
    match e {
        Error::Domain(_) => IgStatus::Domain,
        Error::Precision(_) => IgStatus::Precision,
        Error::Range(_) => IgStatus::Range,
        Error::Input(_) => IgStatus::Input,
        Error::Budget { .. } => IgStatus::Budget,
        Error::Unsupported(_) => IgStatus::Unsupported,
        Error::Io(_) => IgStatus::Io,
        Error::Json(_) => IgStatus::Json,
    }
}

enum Fail {
    Status(IgStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> IgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IgStatus::Ok,
        Ok(Err(Fail::Status(s, m))) => {
            set_error(m);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            IgStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(IgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Status(IgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail::Status(IgStatus::InvalidUtf8, "output holds a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn precision(bits: u32) -> Result<PrecisionChoice, Fail> {
    Ok(if bits == 0 { PrecisionChoice::Auto } else { PrecisionChoice::Bits(validate_precision(bits)?) })
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call.
#[no_mangle]
pub extern "C" fn ig_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ig_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Build a combination from `len` shifts and coefficient strings
/// (integers, `p/q`, decimals or expressions such as `sqrt(2)-1`).
///
/// # Safety
/// `shifts` and `alphas` must point to `len` valid elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ig_combination_new(
    c: f64,
    shifts: *const i64,
    alphas: *const *const c_char,
    len: usize,
    out: *mut *mut IgCombination,
) -> IgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        if len > 0 && (shifts.is_null() || alphas.is_null()) {
            return Err(null("shifts or alphas"));
        }
        let hs = if len == 0 { &[][..] } else { std::slice::from_raw_parts(shifts, len) };
        let mut coeffs = Vec::with_capacity(len);
        for i in 0..len {
            coeffs.push(Coefficient::parse(text(*alphas.add(i), "alpha")?)?);
        }
        let comb = ShiftedCombination::new(GrowthParams::new(c)?, coeffs, hs.to_vec())?;
        *out = Box::into_raw(Box::new(IgCombination { comb }));
        Ok(())
    })
}

/// # Safety
/// `h` must come from `ig_combination_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ig_combination_free(h: *mut IgCombination) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// `sum_{n<=N} e(F(n))`, or the floor-phase sum when `floor` is nonzero.
/// `precision_bits = 0` picks the precision automatically; `threads = 0`
/// uses every core.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ig_partial_sum(
    h: *const IgCombination,
    n: u64,
    floor: i32,
    precision_bits: u32,
    threads: u32,
    out: *mut IgSum,
) -> IgStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), out.is_null()) else {
            return Err(null("handle or out"));
        };
        let spec = if floor != 0 { SequenceSpec::floor(&h.comb) } else { SequenceSpec::smooth(&h.comb) };
        let threads = (threads > 0).then_some(threads as usize);
        let r = partial_sum(&spec, n, precision(precision_bits)?, threads)?;
        *out = IgSum { re: r.sum.re, im: r.sum.im, normalized: r.normalized, precision_bits: r.precision_bits };
        Ok(())
    })
}

/// The difference-polynomial form of a combination as a JSON object with
/// `coefficients`, `tau` and `d_tau`.
///
/// # Safety
/// `h` must be a live handle and `json` writable.
#[no_mangle]
pub unsafe extern "C" fn ig_change_of_basis(h: *const IgCombination, json: *mut *mut c_char) -> IgStatus {
    guard(|| {
        let (Some(h), false) = (h.as_ref(), json.is_null()) else {
            return Err(null("handle or json"));
        };
        let p = change_of_basis(&h.comb)?;
        let doc = serde_json::json!({
            "coefficients": p.coeffs.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
            "tau": p.tau,
            "d_tau": p.d_tau().to_string(),
        });
        put_string(json, doc.to_string())
    })
}

/// Fractional part of `G(m)` at `precision_bits` (0 for automatic).
///
/// # Safety
/// `frac` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ig_growth_frac(m: u64, c: f64, precision_bits: u32, frac: *mut f64) -> IgStatus {
    guard(|| {
        if frac.is_null() {
            return Err(null("frac"));
        }
        GrowthParams::new(c)?;
        let bits = precision(precision_bits)?.resolve(intergrow::precision::required_bits(m.max(2), c)?)?;
        let v = reduce_mod1(&eval_g_u64(m, c, bits)?)?;
        if !v.trusted() {
            return Err(Error::Precision(format!("fractional part of G({m}) not trusted at {bits} bits")).into());
        }
        *frac = v.frac_f64();
        Ok(())
    })
}

/// Run a command-line subcommand (`"expsum"`, `"certify"`, ...) on a JSON
/// configuration with the command line's field names. The report text is
/// written to `*report` (CSV or JSON as the command would print it) and
/// `*passed` is 1 when the command's criterion holds.
///
/// # Safety
/// Strings must be NUL-terminated; `report` and `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn ig_run(
    command: *const c_char,
    config_json: *const c_char,
    report: *mut *mut c_char,
    passed: *mut i32,
) -> IgStatus {
    guard(|| {
        if report.is_null() || passed.is_null() {
            return Err(null("report or passed"));
        }
        *report = ptr::null_mut();
        let name = text(command, "command")?;
        let cfg: ExperimentConfig = serde_json::from_str(text(config_json, "config_json")?).map_err(Error::from)?;
        if cfg.out.is_some() {
            return Err(Error::Input("`out` is not supported through the C interface".into()).into());
        }
        let o = cli::execute(name, cfg)?;
        *passed = o.passed as i32;
        put_string(report, o.body)
    })
}
