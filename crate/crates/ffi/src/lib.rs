//! C ABI for the `lacunary` library.
//!
//! Every fallible function returns a [`LacunaryStatus`]; on failure the
//! message is available from [`lacunary_last_error_message`] on the same
//! thread. Strings handed out by the library are freed with
//! [`lacunary_string_free`], sequences with [`lacunary_sequence_free`].
//! Big integers cross the boundary as decimal strings.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lacunary::diophantine::{count_fast, max_count, EquationParams, DEFAULT_PAIR_BUDGET};
use lacunary::dyadic::{lacunary_sum, sigma_n_squared, DyadicPoint, TrigPolySpec};
use lacunary::sequence::{parse_rational, ConstructionParams, SequenceSpec, TowerSpec};
use lacunary::stats::{clt_experiment, erdos_fortet_identity_check};
use lacunary::Error;
use num_bigint::BigUint;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LacunaryStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    TowerOverflow = 4,
    PairBudgetExceeded = 5,
    NotIncreasing = 6,
    InvalidCase = 7,
    DegenerateWeights = 8,
    WeightsNotNormalized = 9,
    IndexOverflow = 10,
    Io = 11,
    Panic = 12,
}

/// Tower rule for [`lacunary_sequence_paper`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LacunaryTower {
    Paper = 0,
    Reduced = 1,
}

/// Opaque sequence handle.
pub struct LacunarySequence {
    spec: SequenceSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LacunaryStatus {
    match e {
        Error::TowerOverflow { .. } => LacunaryStatus::TowerOverflow,
        Error::NotIncreasing { .. } => LacunaryStatus::NotIncreasing,
        Error::PairBudgetExceeded { .. } => LacunaryStatus::PairBudgetExceeded,
        Error::InvalidCase(_) => LacunaryStatus::InvalidCase,
        Error::DegenerateWeights => LacunaryStatus::DegenerateWeights,
        Error::WeightsNotNormalized(_) => LacunaryStatus::WeightsNotNormalized,
        Error::InvalidParameter(_) => LacunaryStatus::InvalidParameter,
        Error::IndexOverflow(_) => LacunaryStatus::IndexOverflow,
        Error::Io(_) => LacunaryStatus::Io,
    }
}

struct Failure(LacunaryStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = std::result::Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> LacunaryStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LacunaryStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside the lacunary library".into());
            LacunaryStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(LacunaryStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(LacunaryStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn read_seq<'a>(p: *const LacunarySequence) -> FfiResult<&'a SequenceSpec> {
    p.as_ref().map(|s| &s.spec).ok_or_else(|| null("sequence"))
}

unsafe fn write_out<T>(out: *mut T, v: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> FfiResult<()> {
    let c = CString::new(s).map_err(|_| Failure(LacunaryStatus::InvalidParameter, "interior NUL".into()))?;
    write_out(out, c.into_raw(), "output string pointer")
}

fn parse_big(s: &str, what: &str) -> FfiResult<BigUint> {
    s.trim()
        .parse()
        .map_err(|_| Failure(LacunaryStatus::InvalidParameter, format!("{what} {s:?} is not a non-negative integer")))
}

unsafe fn read_point(num: *const c_char, precision: u64) -> FfiResult<DyadicPoint> {
    let x = parse_big(read_str(num, "x numerator")?, "x numerator")?;
    Ok(DyadicPoint::new(x, precision)?)
}

unsafe fn new_sequence(out: *mut *mut LacunarySequence, spec: SequenceSpec) -> FfiResult<()> {
    spec.validate()?;
    if out.is_null() {
        return Err(null("output handle"));
    }
    out.write(Box::into_raw(Box::new(LacunarySequence { spec })));
    Ok(())
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lacunary_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn lacunary_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lacunary_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `n_k = q^k`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lacunary_sequence_geometric(q: u64, out: *mut *mut LacunarySequence) -> LacunaryStatus {
    guard(|| new_sequence(out, SequenceSpec::Geometric { q }))
}

/// `n_k = 2^k − 1`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lacunary_sequence_erdos_fortet(out: *mut *mut LacunarySequence) -> LacunaryStatus {
    guard(|| new_sequence(out, SequenceSpec::ErdosFortet))
}

/// Block construction with growth base `r`, `ε = eps` (e.g. `"1/2"`), degree
/// `d`, target constant `k` (e.g. `"1"`) and the given tower rule.
///
/// # Safety
/// `eps` and `k` must be NUL-terminated strings; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lacunary_sequence_paper(
    r: u64,
    eps: *const c_char,
    d: u32,
    k: *const c_char,
    tower: LacunaryTower,
    out: *mut *mut LacunarySequence,
) -> LacunaryStatus {
    guard(|| {
        let eps = parse_rational(read_str(eps, "eps")?)?;
        let k = parse_rational(read_str(k, "K")?)?;
        let tower = match tower {
            LacunaryTower::Paper => TowerSpec::PaperTower,
            LacunaryTower::Reduced => TowerSpec::ReducedTower,
        };
        let params = ConstructionParams::new(r, eps, d, k, tower)?;
        new_sequence(out, SequenceSpec::Paper(params))
    })
}

/// # Safety
/// `seq` must come from a constructor here and not have been freed; NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn lacunary_sequence_free(seq: *mut LacunarySequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// `n_k` as a decimal string; free with [`lacunary_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lacunary_sequence_term(
    seq: *const LacunarySequence,
    k: u64,
    out: *mut *mut c_char,
) -> LacunaryStatus {
    guard(|| {
        let v = read_seq(seq)?.term(k)?;
        write_string(out, v.to_string())
    })
}

/// `L(N, a, b, c)` with `c` given in decimal.
///
/// # Safety
/// Pointers must be valid; `c` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lacunary_count(
    seq: *const LacunarySequence,
    n: u64,
    a: u64,
    b: u64,
    c: *const c_char,
    out: *mut u64,
) -> LacunaryStatus {
    guard(|| {
        let spec = read_seq(seq)?;
        let eq = EquationParams::new(a, b, parse_big(read_str(c, "c")?, "c")?);
        eq.validate()?;
        let prefix = spec.prefix(n)?;
        write_out(out, count_fast(&prefix, &eq), "output count")
    })
}

/// `max_{c ≥ 1} L(N, a, b, c)`; `out_c` receives the smallest maximizing
/// `c` in decimal, or NULL when no `c ≥ 1` has a solution.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lacunary_max_count(
    seq: *const LacunarySequence,
    n: u64,
    a: u64,
    b: u64,
    out_count: *mut u64,
    out_c: *mut *mut c_char,
) -> LacunaryStatus {
    guard(|| {
        let spec = read_seq(seq)?;
        if out_c.is_null() {
            return Err(null("output c pointer"));
        }
        let prefix = spec.prefix(n)?;
        let best = max_count(&prefix, a, b, true, DEFAULT_PAIR_BUDGET)?;
        write_out(out_count, best.count, "output count")?;
        match best.c {
            Some(c) => write_string(out_c, c.to_string()),
            None => write_out(out_c, ptr::null_mut(), "output c pointer"),
        }
    })
}

/// `Σ_{k≤N} f(n_k x)` at `x = x_numerator / 2^precision`; `f` is one of
/// `"poly:D"`, `"erdos-fortet"`, `"cos:F"`, `"sin:F"`.
///
/// # Safety
/// Pointers must be valid; strings NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn lacunary_sum_at(
    seq: *const LacunarySequence,
    f: *const c_char,
    n: u64,
    x_numerator: *const c_char,
    precision: u64,
    out: *mut f64,
) -> LacunaryStatus {
    guard(|| {
        let spec = read_seq(seq)?;
        let f: TrigPolySpec = read_str(f, "f")?.parse()?;
        let x = read_point(x_numerator, precision)?;
        write_out(out, lacunary_sum(&f, spec, n, &x)?, "output value")
    })
}

/// `σ_N²` as an exact rational `"p/q"` (or `"p"`).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lacunary_sigma_squared(
    seq: *const LacunarySequence,
    f: *const c_char,
    n: u64,
    out: *mut *mut c_char,
) -> LacunaryStatus {
    guard(|| {
        let spec = read_seq(seq)?;
        let f: TrigPolySpec = read_str(f, "f")?.parse()?;
        write_string(out, sigma_n_squared(&f, spec, n)?.to_string())
    })
}

/// Residual of the Erdős–Fortet factorization at `x`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lacunary_erdos_fortet_residual(
    n: u64,
    x_numerator: *const c_char,
    precision: u64,
    out: *mut f64,
) -> LacunaryStatus {
    guard(|| {
        let x = read_point(x_numerator, precision)?;
        write_out(out, erdos_fortet_identity_check(n, &x), "output value")
    })
}

/// Runs the CLT experiment and returns its report as JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn lacunary_clt_report_json(
    seq: *const LacunarySequence,
    f: *const c_char,
    n: u64,
    m: u64,
    seed: u64,
    out: *mut *mut c_char,
) -> LacunaryStatus {
    guard(|| {
        let spec = read_seq(seq)?;
        let f: TrigPolySpec = read_str(f, "f")?.parse()?;
        let m = usize::try_from(m).map_err(|_| Failure(LacunaryStatus::InvalidParameter, "M too large".into()))?;
        let outcome = clt_experiment(&f, spec, n, m, seed)?;
        write_string(out, outcome.report.to_json()?)
    })
}
