//! C interface to the fractional operators and the variational solver.
//!
//! Every function returns an [`FvStatus`]. On failure the message of the
//! last error on the calling thread is available through
//! [`fv_last_error_message`]. Handles are opaque and must be released with
//! their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use fracvar::solve::{self, ProblemConfig, SolveReport, SolverOptions, Termination};
use fracvar::{Backend, FracError, FracOperator, FracParams, Field, Grid, ScalarField, VectorField};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    SupportViolation = 3,
    NonFinite = 4,
    GridMismatch = 5,
    OddGrid = 6,
    UnsupportedDimension = 7,
    InvalidMinor = 8,
    NonFiniteEnergy = 9,
    Format = 10,
    Config = 11,
    Io = 12,
    BufferTooSmall = 13,
    InvalidUtf8 = 14,
    Panic = 15,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvBackend {
    Quadrature = 0,
    Spectral = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FvTermination {
    Converged = 0,
    MaxIterations = 1,
    LineSearchFailure = 2,
}

/// Scalar results of a solver run.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FvSolveSummary {
    pub iterations: usize,
    pub final_energy: f64,
    pub final_gradient: f64,
    pub tol_g: f64,
    pub el_residual: f64,
    pub wall_time_s: f64,
    pub termination: FvTermination,
}

/// Fractional gradient and divergence on a fixed grid.
pub struct FvOperator {
    op: FracOperator,
}

/// Minimizer and report of a solver run.
pub struct FvSolution {
    u: VectorField,
    report: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &FracError) -> FvStatus {
    match err {
        FracError::InvalidParameter { .. } => FvStatus::InvalidParameter,
        FracError::SupportViolation { .. } => FvStatus::SupportViolation,
        FracError::NonFinite { .. } => FvStatus::NonFinite,
        FracError::GridMismatch(_) => FvStatus::GridMismatch,
        FracError::OddGrid(_) => FvStatus::OddGrid,
        FracError::UnsupportedDimension(_) => FvStatus::UnsupportedDimension,
        FracError::InvalidMinor(_) => FvStatus::InvalidMinor,
        FracError::NonFiniteEnergy { .. } => FvStatus::NonFiniteEnergy,
        FracError::Format(_) => FvStatus::Format,
        FracError::Config { .. } => FvStatus::Config,
        FracError::Io(_) => FvStatus::Io,
    }
}

struct Failure(FvStatus, String);

impl From<FracError> for Failure {
    fn from(e: FracError) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FvStatus::NullPointer, format!("null pointer passed for `{what}`"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FvStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FvStatus::Panic
        }
    }
}

unsafe fn input<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a>(ptr: *mut f64, len: usize, need: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Failure(
            FvStatus::BufferTooSmall,
            format!("`{what}` holds {len} values, {need} required"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, need))
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating if needed. Returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fv_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let k = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast::<u8>(), k);
            *buf.add(k) = 0;
        }
        msg.len()
    })
}

/// Creates an operator for dimension `n`, order `s`, integrability `p` on
/// the grid `[-extent, extent]^n` with `points` nodes per axis.
///
/// # Safety
/// `out` must be valid for one pointer write.
#[no_mangle]
pub unsafe extern "C" fn fv_operator_new(
    n: usize,
    s: f64,
    p: f64,
    extent: f64,
    points: usize,
    backend: FvBackend,
    out: *mut *mut FvOperator,
) -> FvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let backend = match backend {
            FvBackend::Quadrature => Backend::Quadrature,
            FvBackend::Spectral => Backend::Spectral,
        };
        let op = FracOperator::new(FracParams::new(n, s, p)?, Grid::new(n, extent, points)?, backend)?;
        *out = Box::into_raw(Box::new(FvOperator { op }));
        Ok(())
    })
}

/// # Safety
/// `op` must be null or a handle from [`fv_operator_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fv_operator_free(op: *mut FvOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Number of grid nodes, `points^n`.
///
/// # Safety
/// `op` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fv_operator_num_nodes(op: *const FvOperator, out: *mut usize) -> FvStatus {
    guard(|| {
        let op = op.as_ref().ok_or_else(|| null("op"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = op.op.grid().num_nodes();
        Ok(())
    })
}

/// Fractional gradient of a scalar field with `num_nodes` samples in
/// row-major order. Writes `n * num_nodes` values, node-major.
///
/// # Safety
/// `u` must be valid for `u_len` reads and `out` for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn fv_ds_grad(
    op: *const FvOperator,
    u: *const f64,
    u_len: usize,
    out: *mut f64,
    out_len: usize,
) -> FvStatus {
    guard(|| {
        let op = &op.as_ref().ok_or_else(|| null("op"))?.op;
        let grid = *op.grid();
        let u = ScalarField::from_values(grid, input(u, u_len, "u")?.to_vec())?;
        let d = op.ds_grad(&u)?;
        output(out, out_len, d.values().len(), "out")?.copy_from_slice(d.values());
        Ok(())
    })
}

/// Fractional divergence of a vector field with `n * num_nodes` samples,
/// node-major. Writes `num_nodes` values.
///
/// # Safety
/// `phi` must be valid for `phi_len` reads and `out` for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn fv_ds_div(
    op: *const FvOperator,
    phi: *const f64,
    phi_len: usize,
    out: *mut f64,
    out_len: usize,
) -> FvStatus {
    guard(|| {
        let op = &op.as_ref().ok_or_else(|| null("op"))?.op;
        let grid = *op.grid();
        let phi = VectorField::from_values(grid, input(phi, phi_len, "phi")?.to_vec())?;
        let d = op.ds_div(&phi)?;
        output(out, out_len, d.values().len(), "out")?.copy_from_slice(d.values());
        Ok(())
    })
}

/// Minimizes the problem described by a TOML configuration, starting from
/// the complement datum.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fv_solve_config(config: *const c_char, out: *mut *mut FvSolution) -> FvStatus {
    guard(|| {
        if config.is_null() {
            return Err(null("config"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|e| Failure(FvStatus::InvalidUtf8, e.to_string()))?;
        let cfg = ProblemConfig::parse(text)?;
        let opts = SolverOptions {
            tol_g: cfg.tol_g,
            max_iters: cfg.max_iters,
            ..SolverOptions::default()
        };
        let prob = &cfg.problem;
        let (u, report) = solve::minimize(prob, prob.complement(), opts)?;
        *out = Box::into_raw(Box::new(FvSolution { u, report }));
        Ok(())
    })
}

/// # Safety
/// `sol` must be null or a handle from [`fv_solve_config`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fv_solution_free(sol: *mut FvSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `sol` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fv_solution_summary(sol: *const FvSolution, out: *mut FvSolveSummary) -> FvStatus {
    guard(|| {
        let r = &sol.as_ref().ok_or_else(|| null("sol"))?.report;
        *out.as_mut().ok_or_else(|| null("out"))? = FvSolveSummary {
            iterations: r.iterations,
            final_energy: r.final_energy(),
            final_gradient: r.final_gradient(),
            tol_g: r.tol_g,
            el_residual: r.el_residual,
            wall_time_s: r.wall_time_s,
            termination: match r.termination {
                Termination::Converged => FvTermination::Converged,
                Termination::MaxIterations => FvTermination::MaxIterations,
                Termination::LineSearchFailure => FvTermination::LineSearchFailure,
            },
        };
        Ok(())
    })
}

/// Number of samples in the minimizer, `n * num_nodes`.
///
/// # Safety
/// `sol` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn fv_solution_len(sol: *const FvSolution, out: *mut usize) -> FvStatus {
    guard(|| {
        let sol = sol.as_ref().ok_or_else(|| null("sol"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = sol.u.values().len();
        Ok(())
    })
}

/// Copies the minimizer, node-major.
///
/// # Safety
/// `sol` must be a live handle and `out` valid for `out_len` writes.
#[no_mangle]
pub unsafe extern "C" fn fv_solution_values(sol: *const FvSolution, out: *mut f64, out_len: usize) -> FvStatus {
    guard(|| {
        let v = sol.as_ref().ok_or_else(|| null("sol"))?.u.values();
        output(out, out_len, v.len(), "out")?.copy_from_slice(v);
        Ok(())
    })
}
