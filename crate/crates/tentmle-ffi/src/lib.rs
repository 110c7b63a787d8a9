//! C ABI for the tentmle library: opaque handles, status codes, and flat
//! buffers, so other languages can drive the solver without touching Rust
//! types. See `include/tentmle.h` for the generated header.
//!
//! Conventions: coordinates are passed row-major (`n * d` doubles), cell
//! vertex indices are returned 1-based to match the JSON file formats, and
//! every fallible call returns a `TentmleStatus` with the last error message
//! retrievable per thread via `tentmle_last_error`.

use std::cell::RefCell;
use std::os::raw::c_char;

use tentmle::geometry::PointConfiguration;
use tentmle::solver::{solve_mle, MleResult, SolverOptions, WeightVector};

/// Status codes mirroring the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TentmleStatus {
    Ok = 0,
    Error = 1,
    InvalidInput = 2,
    NotConverged = 3,
    TooLarge = 4,
    NullPointer = 5,
}

/// Opaque point configuration handle.
pub struct TentmleConfig {
    inner: PointConfiguration,
}

/// Opaque solve result handle.
pub struct TentmleResult {
    inner: MleResult,
}

/// Options for `tentmle_solve`; zero-initialization is not valid, use
/// `tentmle_default_options`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TentmleSolveOptions {
    pub grad_tol: f64,
    pub max_iters: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn status_for(err: &tentmle::Error) -> TentmleStatus {
    use tentmle::Error as E;
    set_error(err.to_string());
    match err {
        E::TooLarge { .. } => TentmleStatus::TooLarge,
        E::NotConverged(_) => TentmleStatus::NotConverged,
        E::DegenerateInput(_)
        | E::DimensionMismatch(_)
        | E::InvalidWeights(_)
        | E::InvalidInput(_)
        | E::NotRegular => TentmleStatus::InvalidInput,
        _ => TentmleStatus::Error,
    }
}

/// Copy the last error message on this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to at least `cap` writable bytes, or be null (in which
/// case only the length is returned).
#[no_mangle]
pub unsafe extern "C" fn tentmle_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Build a configuration from `n` points of dimension `d`, row-major.
///
/// # Safety
/// `coords` must point to `n * d` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tentmle_config_new(
    coords: *const f64,
    n: usize,
    d: usize,
    out: *mut *mut TentmleConfig,
) -> TentmleStatus {
    if coords.is_null() || out.is_null() || n == 0 || d == 0 {
        set_error("null pointer or empty configuration");
        return TentmleStatus::NullPointer;
    }
    let flat = unsafe { std::slice::from_raw_parts(coords, n * d) };
    let points: Vec<Vec<f64>> = flat.chunks(d).map(|c| c.to_vec()).collect();
    match PointConfiguration::new(points) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(TentmleConfig { inner })) };
            TentmleStatus::Ok
        }
        Err(e) => status_for(&e),
    }
}

/// # Safety
/// `config` must be a pointer from `tentmle_config_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tentmle_config_free(config: *mut TentmleConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Number of points and dimension of a configuration.
///
/// # Safety
/// `config` must be valid; `n`/`d` may be null.
#[no_mangle]
pub unsafe extern "C" fn tentmle_config_shape(
    config: *const TentmleConfig,
    n: *mut usize,
    d: *mut usize,
) -> TentmleStatus {
    let Some(cfg) = (unsafe { config.as_ref() }) else {
        set_error("null configuration");
        return TentmleStatus::NullPointer;
    };
    if !n.is_null() {
        unsafe { *n = cfg.inner.n() };
    }
    if !d.is_null() {
        unsafe { *d = cfg.inner.dim() };
    }
    TentmleStatus::Ok
}

/// Evaluate the symmetric function H at `d` arguments.
///
/// # Safety
/// `u` must point to `d` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_h_eval(u: *const f64, d: usize, out: *mut f64) -> TentmleStatus {
    if u.is_null() || out.is_null() || d == 0 {
        set_error("null pointer or empty argument list");
        return TentmleStatus::NullPointer;
    }
    let args = unsafe { std::slice::from_raw_parts(u, d) };
    if args.iter().any(|v| !v.is_finite()) {
        set_error("non-finite H argument");
        return TentmleStatus::InvalidInput;
    }
    unsafe { *out = tentmle::hfunc::h_eval(args) };
    TentmleStatus::Ok
}

/// Total mass of `exp(tent)` for the given heights.
///
/// # Safety
/// `heights` must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_total_mass(
    config: *const TentmleConfig,
    heights: *const f64,
    out: *mut f64,
) -> TentmleStatus {
    let Some(cfg) = (unsafe { config.as_ref() }) else {
        set_error("null configuration");
        return TentmleStatus::NullPointer;
    };
    if heights.is_null() || out.is_null() {
        set_error("null heights or output");
        return TentmleStatus::NullPointer;
    }
    let h = unsafe { std::slice::from_raw_parts(heights, cfg.inner.n()) };
    match tentmle::quadrature::total_mass(&cfg.inner, h) {
        Ok(m) => {
            unsafe { *out = m.total_mass };
            TentmleStatus::Ok
        }
        Err(e) => status_for(&e),
    }
}

/// Default solver options.
#[no_mangle]
pub extern "C" fn tentmle_default_options() -> TentmleSolveOptions {
    let d = SolverOptions::default();
    TentmleSolveOptions {
        grad_tol: d.grad_tol,
        max_iters: d.max_iters as u64,
        seed: d.seed,
    }
}

/// Solve the estimation problem. `weights` may be null for unit weights;
/// `options` may be null for defaults. On success `out` owns a result handle
/// (including the non-converged case, which returns `NotConverged`).
///
/// # Safety
/// `weights`, when non-null, must point to `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_solve(
    config: *const TentmleConfig,
    weights: *const f64,
    options: *const TentmleSolveOptions,
    out: *mut *mut TentmleResult,
) -> TentmleStatus {
    let Some(cfg) = (unsafe { config.as_ref() }) else {
        set_error("null configuration");
        return TentmleStatus::NullPointer;
    };
    if out.is_null() {
        set_error("null output handle");
        return TentmleStatus::NullPointer;
    }
    let w = if weights.is_null() {
        WeightVector::unit(cfg.inner.n())
    } else {
        let raw = unsafe { std::slice::from_raw_parts(weights, cfg.inner.n()) };
        match WeightVector::new(raw.to_vec()) {
            Ok(w) => w,
            Err(e) => return status_for(&e),
        }
    };
    let opts = unsafe { options.as_ref() }.map_or_else(SolverOptions::default, |o| SolverOptions {
        grad_tol: o.grad_tol,
        max_iters: o.max_iters as usize,
        seed: o.seed,
        start: None,
    });
    match solve_mle(&cfg.inner, &w, &opts) {
        Ok(result) => {
            let converged = result.converged;
            unsafe { *out = Box::into_raw(Box::new(TentmleResult { inner: result })) };
            if converged {
                TentmleStatus::Ok
            } else {
                set_error("solver did not converge; result still available");
                TentmleStatus::NotConverged
            }
        }
        Err(e) => status_for(&e),
    }
}

/// # Safety
/// `result` must be a pointer from `tentmle_solve`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_free(result: *mut TentmleResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// Copy the optimal heights into `buf` (length `n`).
///
/// # Safety
/// `buf` must point to `n` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_heights(
    result: *const TentmleResult,
    buf: *mut f64,
) -> TentmleStatus {
    let Some(res) = (unsafe { result.as_ref() }) else {
        set_error("null result");
        return TentmleStatus::NullPointer;
    };
    if buf.is_null() {
        set_error("null buffer");
        return TentmleStatus::NullPointer;
    }
    let h = res.inner.heights.as_slice();
    unsafe { std::ptr::copy_nonoverlapping(h.as_ptr(), buf, h.len()) };
    TentmleStatus::Ok
}

/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_mass(result: *const TentmleResult) -> f64 {
    unsafe { result.as_ref() }.map_or(f64::NAN, |r| r.inner.mass)
}

/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_log_likelihood(result: *const TentmleResult) -> f64 {
    unsafe { result.as_ref() }.map_or(f64::NAN, |r| r.inner.log_likelihood)
}

/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_grad_norm(result: *const TentmleResult) -> f64 {
    unsafe { result.as_ref() }.map_or(f64::NAN, |r| r.inner.grad_norm)
}

/// 1 when the optimality certificate passed.
///
/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_converged(result: *const TentmleResult) -> i32 {
    unsafe { result.as_ref() }.map_or(0, |r| i32::from(r.inner.converged))
}

/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_iterations(result: *const TentmleResult) -> u64 {
    unsafe { result.as_ref() }.map_or(0, |r| r.inner.iterations as u64)
}

/// Number of cells in the optimal subdivision.
///
/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_num_cells(result: *const TentmleResult) -> usize {
    unsafe { result.as_ref() }.map_or(0, |r| r.inner.subdivision.num_cells())
}

/// Number of vertex indices in cell `cell` (0-based cell position).
///
/// # Safety
/// `result` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_cell_len(
    result: *const TentmleResult,
    cell: usize,
) -> usize {
    unsafe { result.as_ref() }
        .and_then(|r| r.inner.subdivision.cells().get(cell))
        .map_or(0, |c| c.len())
}

/// Copy cell `cell`'s vertex indices (1-based) into `buf`.
///
/// # Safety
/// `buf` must point to at least `tentmle_result_cell_len` writable u32s.
#[no_mangle]
pub unsafe extern "C" fn tentmle_result_cell(
    result: *const TentmleResult,
    cell: usize,
    buf: *mut u32,
) -> TentmleStatus {
    let Some(res) = (unsafe { result.as_ref() }) else {
        set_error("null result");
        return TentmleStatus::NullPointer;
    };
    let Some(indices) = res.inner.subdivision.cells().get(cell) else {
        set_error("cell index out of range");
        return TentmleStatus::InvalidInput;
    };
    if buf.is_null() {
        set_error("null buffer");
        return TentmleStatus::NullPointer;
    }
    for (i, &v) in indices.iter().enumerate() {
        unsafe { *buf.add(i) = (v + 1) as u32 };
    }
    TentmleStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_through_the_c_surface() {
        let coords = [
            0.0, 0.0, 100.0, 0.0, 0.0, 100.0, 22.0, 37.0, 43.0, 22.0, 36.0, 41.0,
        ];
        let mut cfg: *mut TentmleConfig = std::ptr::null_mut();
        let st = unsafe { tentmle_config_new(coords.as_ptr(), 6, 2, &mut cfg) };
        assert_eq!(st, TentmleStatus::Ok);
        let (mut n, mut d) = (0usize, 0usize);
        unsafe { tentmle_config_shape(cfg, &mut n, &mut d) };
        assert_eq!((n, d), (6, 2));

        let mut res: *mut TentmleResult = std::ptr::null_mut();
        let st = unsafe { tentmle_solve(cfg, std::ptr::null(), std::ptr::null(), &mut res) };
        assert_eq!(st, TentmleStatus::Ok);
        assert_eq!(unsafe { tentmle_result_converged(res) }, 1);
        assert_eq!(unsafe { tentmle_result_num_cells(res) }, 7);
        let mass = unsafe { tentmle_result_mass(res) };
        assert!((mass - 1.0).abs() < 1e-6);
        let mut heights = [0.0f64; 6];
        unsafe { tentmle_result_heights(res, heights.as_mut_ptr()) };
        assert!(heights.iter().all(|h| h.is_finite()));
        let len = unsafe { tentmle_result_cell_len(res, 0) };
        assert_eq!(len, 3);
        let mut cell = [0u32; 3];
        unsafe { tentmle_result_cell(res, 0, cell.as_mut_ptr()) };
        assert!(cell.iter().all(|&v| (1..=6).contains(&v)));

        unsafe { tentmle_result_free(res) };
        unsafe { tentmle_config_free(cfg) };
    }

    #[test]
    fn h_eval_and_mass_via_c_surface() {
        let mut v = 0.0f64;
        let st = unsafe { tentmle_h_eval([0.0, 0.0].as_ptr(), 2, &mut v) };
        assert_eq!(st, TentmleStatus::Ok);
        assert!((v - 1.0 / 6.0).abs() < 1e-14);

        let coords = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
        let mut cfg: *mut TentmleConfig = std::ptr::null_mut();
        unsafe { tentmle_config_new(coords.as_ptr(), 4, 2, &mut cfg) };
        let mut mass = 0.0f64;
        let st = unsafe { tentmle_total_mass(cfg, [0.0; 4].as_ptr(), &mut mass) };
        assert_eq!(st, TentmleStatus::Ok);
        assert!((mass - 1.0).abs() < 1e-12);
        unsafe { tentmle_config_free(cfg) };
    }

    #[test]
    fn errors_set_messages_and_codes() {
        let coords = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let mut cfg: *mut TentmleConfig = std::ptr::null_mut();
        let st = unsafe { tentmle_config_new(coords.as_ptr(), 3, 2, &mut cfg) };
        assert_eq!(st, TentmleStatus::InvalidInput);
        let mut buf = [0i8; 128];
        let len = unsafe { tentmle_last_error(buf.as_mut_ptr(), buf.len()) };
        assert!(len > 0);
        let st = unsafe { tentmle_config_new(std::ptr::null(), 3, 2, &mut cfg) };
        assert_eq!(st, TentmleStatus::NullPointer);
    }
}
