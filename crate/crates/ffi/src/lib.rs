//! C ABI over `annealed-ising`.
//!
//! Every fallible function returns an `AI_*` status code and writes its result
//! through an out-pointer. On failure the message is available from
//! [`ai_last_error_message`] on the same thread. Weight tables are opaque
//! handles released with [`ai_weight_table_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use annealed_ising::cache::{GTableCache, GTableSource};
use annealed_ising::finiten::{self, LogWeightTable};
use annealed_ising::matching::cross_count_law;
use annealed_ising::thermo::{self, ModelParams};
use annealed_ising::Error;

pub const AI_OK: c_int = 0;
pub const AI_ERR_NULL: c_int = 1;
pub const AI_ERR_DOMAIN: c_int = 2;
pub const AI_ERR_PARITY: c_int = 3;
pub const AI_ERR_SIZE: c_int = 4;
pub const AI_ERR_UNDEFINED: c_int = 5;
pub const AI_ERR_NUMERIC: c_int = 6;
pub const AI_ERR_IO: c_int = 7;
pub const AI_ERR_PANIC: c_int = 8;

/// Finite-`n` weights `log x_j`, `j = 0..=n`, for fixed `(d, n, β)`.
pub struct AiWeightTable(LogWeightTable);

/// Limit quantities at one `(d, β, B)`; `has_specific_heat` is 0 at `(β_c, 0)`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct AiThermoPoint {
    pub psi: f64,
    pub magnetization: f64,
    pub susceptibility: f64,
    pub specific_heat: f64,
    pub has_specific_heat: c_int,
    pub t_star: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

enum FfiError {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

type FfiResult = Result<(), FfiError>;

fn core_code(err: &Error) -> c_int {
    match err {
        Error::Domain(_) | Error::Precondition(_) | Error::Consistency(_) => AI_ERR_DOMAIN,
        Error::Parity(_) => AI_ERR_PARITY,
        Error::Size(_) => AI_ERR_SIZE,
        Error::UndefinedAtCriticality(_) => AI_ERR_UNDEFINED,
        Error::SingularEndpoint(_) | Error::RootBracket(_) | Error::NoNontrivialRoot { .. } => AI_ERR_NUMERIC,
        Error::Cache { .. } | Error::Io(_) | Error::Json(_) => AI_ERR_IO,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard<F: FnOnce() -> FfiResult>(f: F) -> c_int {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AI_OK,
        Ok(Err(FfiError::Null(what))) => {
            set_error(format!("{what} is null"));
            AI_ERR_NULL
        }
        Ok(Err(FfiError::Core(e))) => {
            let code = core_code(&e);
            set_error(e.to_string());
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            AI_ERR_PANIC
        }
    }
}

/// Writes `value` through `out`.
///
/// # Safety
/// `out` must be null or valid for writes.
unsafe fn write_out<T>(out: *mut T, what: &'static str, value: T) -> FfiResult {
    if out.is_null() {
        return Err(FfiError::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn table_ref<'a>(table: *const AiWeightTable) -> Result<&'a LogWeightTable, FfiError> {
    table.as_ref().map(|t| &t.0).ok_or(FfiError::Null("table"))
}

/// Message for the most recent failure on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ai_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |m| m.as_ptr()))
}

/// `β_c = atanh(1/(d−1))`; infinite for `d = 2`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_critical_beta(d: u32, out: *mut f64) -> c_int {
    guard(|| write_out(out, "out", thermo::critical_beta(d)?))
}

unsafe fn scalar(
    d: u32,
    beta: f64,
    field: f64,
    out: *mut f64,
    f: fn(&ModelParams) -> annealed_ising::Result<f64>,
) -> c_int {
    guard(|| {
        let v = f(&ModelParams::new(d, beta, field)?)?;
        write_out(out, "out", v)
    })
}

/// Limit pressure `ψ(β, B)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_pressure(d: u32, beta: f64, field: f64, out: *mut f64) -> c_int {
    scalar(d, beta, field, out, thermo::pressure)
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_magnetization(d: u32, beta: f64, field: f64, out: *mut f64) -> c_int {
    scalar(d, beta, field, out, thermo::magnetization)
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_susceptibility(d: u32, beta: f64, field: f64, out: *mut f64) -> c_int {
    scalar(d, beta, field, out, thermo::susceptibility)
}

/// `AI_ERR_UNDEFINED` at `(β_c, 0)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_specific_heat(d: u32, beta: f64, field: f64, out: *mut f64) -> c_int {
    scalar(d, beta, field, out, thermo::specific_heat)
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_thermo_point(d: u32, beta: f64, field: f64, out: *mut AiThermoPoint) -> c_int {
    guard(|| {
        let p = thermo::thermo_point(&ModelParams::new(d, beta, field)?)?;
        let point = AiThermoPoint {
            psi: p.psi,
            magnetization: p.magnetization,
            susceptibility: p.susceptibility,
            specific_heat: p.specific_heat.unwrap_or(f64::NAN),
            has_specific_heat: p.specific_heat.is_some() as c_int,
            t_star: p.point.t_star,
        };
        write_out(out, "out", point)
    })
}

/// `log P(X(k, m) = x)`; `-inf` off the support.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_cross_count_log_prob(k: usize, m: usize, x: usize, out: *mut f64) -> c_int {
    guard(|| write_out(out, "out", cross_count_law(k, m)?.log_prob(x)))
}

/// Builds the table for `(d, n, β)`. `cache_dir` may be null; otherwise tables
/// are read from and written to that directory.
///
/// # Safety
/// `out` must be valid for writes; `cache_dir` must be null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ai_weight_table_new(
    d: u32,
    n: usize,
    beta: f64,
    cache_dir: *const c_char,
    out: *mut *mut AiWeightTable,
) -> c_int {
    guard(|| {
        if out.is_null() {
            return Err(FfiError::Null("out"));
        }
        let table = if cache_dir.is_null() {
            LogWeightTable::compute(d, n, beta)?
        } else {
            let dir = CStr::from_ptr(cache_dir).to_str().map_err(|_| Error::Domain("cache_dir is not UTF-8".into()))?;
            let g = GTableCache::new(Path::new(dir)).log_g(d, n, beta)?;
            LogWeightTable::new(d, n, beta, &g)?
        };
        out.write(Box::into_raw(Box::new(AiWeightTable(table))));
        Ok(())
    })
}

/// Releases a table; null is ignored.
///
/// # Safety
/// `table` must be null or come from [`ai_weight_table_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ai_weight_table_free(table: *mut AiWeightTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of vertices `n`; 0 for null.
///
/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ai_weight_table_n(table: *const AiWeightTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.n())
}

/// Copies `log x_j` into `buf`, which must hold `n + 1` values.
///
/// # Safety
/// `table` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ai_weight_table_log_weights(table: *const AiWeightTable, buf: *mut f64, len: usize) -> c_int {
    guard(|| copy_into(table_ref(table)?.log_x(), buf, len))
}

unsafe fn copy_into(src: &[f64], buf: *mut f64, len: usize) -> FfiResult {
    if buf.is_null() {
        return Err(FfiError::Null("buf"));
    }
    if len < src.len() {
        return Err(FfiError::Core(Error::Size(format!("buffer holds {len} values, need {}", src.len()))));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// `ψ_n(β, B)`.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_finite_pressure(table: *const AiWeightTable, field: f64, out: *mut f64) -> c_int {
    guard(|| write_out(out, "out", finiten::finite_pressure(table_ref(table)?, field)))
}

/// `M_n = E[S_n]/n`.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_finite_magnetization(table: *const AiWeightTable, field: f64, out: *mut f64) -> c_int {
    guard(|| write_out(out, "out", finiten::spin_law(table_ref(table)?, field).magnetization()))
}

/// `χ_n = Var(S_n)/n`.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_finite_susceptibility(table: *const AiWeightTable, field: f64, out: *mut f64) -> c_int {
    guard(|| write_out(out, "out", finiten::finite_susceptibility(table_ref(table)?, field)))
}

/// `E[exp(r S_n / n^{3/4})]` at `B = 0`, for `|r| ≤ 10`.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_mgf_scaled(table: *const AiWeightTable, r: f64, out: *mut f64) -> c_int {
    guard(|| write_out(out, "out", finiten::mgf_scaled(table_ref(table)?, r)?))
}

/// Raw moment `E[S_n^k]`.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_spin_moment(table: *const AiWeightTable, field: f64, k: c_int, out: *mut f64) -> c_int {
    guard(|| write_out(out, "out", finiten::spin_law(table_ref(table)?, field).moment(k)))
}

/// Scaled moment `E[(S_n / n^scale)^k]`.
///
/// # Safety
/// `table` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ai_spin_scaled_moment(
    table: *const AiWeightTable,
    field: f64,
    k: c_int,
    scale: f64,
    out: *mut f64,
) -> c_int {
    guard(|| write_out(out, "out", finiten::spin_law(table_ref(table)?, field).scaled_moment(k, scale)))
}

/// Probabilities `P(j up-spins)`, `j = 0..=n`, into `buf` of at least `n + 1` values.
///
/// # Safety
/// `table` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ai_spin_law_masses(
    table: *const AiWeightTable,
    field: f64,
    buf: *mut f64,
    len: usize,
) -> c_int {
    guard(|| copy_into(&finiten::spin_law(table_ref(table)?, field).masses(), buf, len))
}
