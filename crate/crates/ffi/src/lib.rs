//! C ABI for the sspf library.
//!
//! Handles are opaque pointers created and destroyed by paired functions;
//! every fallible call returns an `SspfStatus` and leaves a message for
//! `sspf_last_error` on failure. The message pointer is thread-local and
//! valid until the next failing call on the same thread. Panics are caught
//! at the boundary and reported as `SSPF_STATUS_PANIC`; they never unwind
//! into the caller.
//!
//! The header `include/sspf.h` is generated from this file at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sspf::ellipticity::{make_barrier, max_sound_speed, verify_max_principle, Verdict};
use sspf::error::Error;
use sspf::exact::uniform_flow;
use sspf::field::{grad_chi_at, residual_chi, ScalarField, Variable};
use sspf::gas::{pseudo_mach_classify, GasModel, DEFAULT_TOL_L};
use sspf::grid::{GridSpec, WallEdge, WallSet};
use sspf::solver::{solve_dirichlet, SolverConfig};

/// Outcome of a call. Anything but `Ok` leaves a message for
/// `sspf_last_error`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SspfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGas = 3,
    InvalidState = 4,
    Precondition = 5,
    InconsistentIc = 6,
    Degenerate = 7,
    Format = 8,
    Io = 9,
    Panic = 10,
}

/// Verdict of the maximum-principle check.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SspfVerdict {
    MaxOnBoundary = 0,
    UniformlySubElliptic = 1,
    ViolationCandidate = 2,
}

/// Local equation type at a node.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SspfTypeTag {
    Elliptic = 0,
    Parabolic = 1,
    Hyperbolic = 2,
}

/// Wall mask bits for field construction.
pub const SSPF_WALL_LEFT: u32 = 1;
pub const SSPF_WALL_RIGHT: u32 = 2;
pub const SSPF_WALL_BOTTOM: u32 = 4;
pub const SSPF_WALL_TOP: u32 = 8;

/// Solver options. Zero or negative fields select the built-in default;
/// pass NULL to `sspf_solve` for all defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SspfSolverOptions {
    /// Newton iteration cap; 0 for the default.
    pub max_newton_iters: u64,
    /// Residual max-norm target; <= 0 for the default gauge-scaled value.
    pub residual_tol: f64,
    /// Frozen-coefficient warmup iterations; < 0 for the default.
    pub picard_warmup_iters: i64,
    /// Lower clamp for c^2 during iteration; <= 0 for the default.
    pub c2_floor: f64,
    /// Pseudo-Mach damping threshold; <= 0 for the default.
    pub l_guard: f64,
}

/// Summary of a solve, filled by `sspf_solve`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SspfSolveInfo {
    /// 1 when the residual target was reached.
    pub converged: i32,
    pub iterations: u64,
    pub final_residual: f64,
    pub residual_tol: f64,
    pub max_l_interior: f64,
    pub l_guard_hits: u64,
    pub c2_clamped_nodes: u64,
    /// 1 when every unknown stayed strictly below L = 1.
    pub uniformly_elliptic: i32,
}

/// Summary of a maximum-principle check, filled by `sspf_verify`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SspfVerifyInfo {
    pub verdict: SspfVerdict,
    pub max_interior_l2: f64,
    pub max_boundary_value: f64,
    pub residual_inf: f64,
    pub tol: f64,
    pub delta: f64,
    /// Argmax node of L^2 + b, folded back into the input grid.
    pub argmax_i1: u64,
    pub argmax_i2: u64,
    pub argmax_value: f64,
}

/// Opaque gas handle.
pub struct SspfGas(GasModel);

/// Opaque field handle.
pub struct SspfField(ScalarField);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap_or_default();
    });
}

fn status_of(e: &Error) -> SspfStatus {
    match e {
        Error::InvalidGas(_) => SspfStatus::InvalidGas,
        Error::InvalidState { .. } => SspfStatus::InvalidState,
        Error::Precondition(_) => SspfStatus::Precondition,
        Error::InconsistentIc(_) => SspfStatus::InconsistentIc,
        Error::Degenerate(_) => SspfStatus::Degenerate,
        Error::InvalidArgument(_) => SspfStatus::InvalidArgument,
        Error::Format(_) => SspfStatus::Format,
        Error::Io(_) => SspfStatus::Io,
        Error::Json(_) => SspfStatus::Format,
    }
}

fn fail(e: Error) -> SspfStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null_arg(name: &str) -> SspfStatus {
    set_error(&format!("{name} is NULL"));
    SspfStatus::NullPointer
}

/// Runs `f` with a panic guard; a panic becomes `SSPF_STATUS_PANIC`.
fn guarded(f: impl FnOnce() -> SspfStatus) -> SspfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in library call".into());
            set_error(&msg);
            SspfStatus::Panic
        }
    }
}

fn wall_set_from_mask(mask: u32) -> Result<WallSet, Error> {
    if mask > 0b1111 {
        return Err(Error::InvalidArgument(format!(
            "wall mask {mask:#x} has bits outside the four edges"
        )));
    }
    let mut walls = WallSet::empty();
    for (bit, edge) in [
        (SSPF_WALL_LEFT, WallEdge::Left),
        (SSPF_WALL_RIGHT, WallEdge::Right),
        (SSPF_WALL_BOTTOM, WallEdge::Bottom),
        (SSPF_WALL_TOP, WallEdge::Top),
    ] {
        if mask & bit != 0 {
            walls = walls.with(edge);
        }
    }
    Ok(walls)
}

fn grid_from_parts(
    origin1: f64,
    origin2: f64,
    spacing1: f64,
    spacing2: f64,
    n1: u64,
    n2: u64,
    walls_mask: u32,
) -> Result<GridSpec, Error> {
    let grid = GridSpec::new(
        [origin1, origin2],
        [spacing1, spacing2],
        [n1 as usize, n2 as usize],
    )?;
    Ok(grid.with_walls(wall_set_from_mask(walls_mask)?))
}

/// Version of the library as a static C string.
#[no_mangle]
pub extern "C" fn sspf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failing call on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sspf_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates a gas handle. `bernoulli_a` is the additive Bernoulli
/// constant; 0 is the natural normalization.
///
/// # Safety
/// `out` must be a valid pointer; on `Ok` it receives a handle to release
/// with `sspf_gas_free`.
#[no_mangle]
pub unsafe extern "C" fn sspf_gas_new(
    gamma: f64,
    c0: f64,
    rho0: f64,
    bernoulli_a: f64,
    out: *mut *mut SspfGas,
) -> SspfStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match GasModel::new(gamma, c0, rho0) {
            Ok(gas) => {
                let gas = gas.with_bernoulli(bernoulli_a);
                unsafe { *out = Box::into_raw(Box::new(SspfGas(gas))) };
                SspfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a gas handle. NULL is a no-op.
///
/// # Safety
/// `gas` must be NULL or a handle from `sspf_gas_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sspf_gas_free(gas: *mut SspfGas) {
    if !gas.is_null() {
        drop(unsafe { Box::from_raw(gas) });
    }
}

/// Creates a chi field from nodal values in node order (second axis
/// fastest). `walls_mask` is a combination of the `SSPF_WALL_*` bits.
///
/// # Safety
/// `values` must point to `n1 * n2` doubles; `out` must be valid and on
/// `Ok` receives a handle to release with `sspf_field_free`.
#[no_mangle]
pub unsafe extern "C" fn sspf_field_create(
    origin1: f64,
    origin2: f64,
    spacing1: f64,
    spacing2: f64,
    n1: u64,
    n2: u64,
    walls_mask: u32,
    values: *const f64,
    out: *mut *mut SspfField,
) -> SspfStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if values.is_null() {
            return null_arg("values");
        }
        let build = || -> Result<ScalarField, Error> {
            let grid = grid_from_parts(origin1, origin2, spacing1, spacing2, n1, n2, walls_mask)?;
            let data = unsafe { std::slice::from_raw_parts(values, grid.len()) };
            ScalarField::from_values(grid, Variable::Chi, data.to_vec())
        };
        match build() {
            Ok(field) => {
                unsafe { *out = Box::into_raw(Box::new(SspfField(field))) };
                SspfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Samples the constant-velocity solution chi = v.xi - |xi|^2/2 + a_prime.
///
/// # Safety
/// `gas` must be a live gas handle; `out` must be valid and on `Ok`
/// receives a handle to release with `sspf_field_free`.
#[no_mangle]
pub unsafe extern "C" fn sspf_field_uniform(
    gas: *const SspfGas,
    v1: f64,
    v2: f64,
    a_prime: f64,
    origin1: f64,
    origin2: f64,
    spacing1: f64,
    spacing2: f64,
    n1: u64,
    n2: u64,
    walls_mask: u32,
    out: *mut *mut SspfField,
) -> SspfStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if gas.is_null() {
            return null_arg("gas");
        }
        let gas = unsafe { &(*gas).0 };
        let build = || -> Result<ScalarField, Error> {
            let grid = grid_from_parts(origin1, origin2, spacing1, spacing2, n1, n2, walls_mask)?;
            uniform_flow([v1, v2], a_prime, gas, grid)
        };
        match build() {
            Ok(field) => {
                unsafe { *out = Box::into_raw(Box::new(SspfField(field))) };
                SspfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a field handle. NULL is a no-op.
///
/// # Safety
/// `field` must be NULL or a live field handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sspf_field_free(field: *mut SspfField) {
    if !field.is_null() {
        drop(unsafe { Box::from_raw(field) });
    }
}

/// Grid dimensions of a field.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sspf_field_dims(
    field: *const SspfField,
    n1: *mut u64,
    n2: *mut u64,
) -> SspfStatus {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if n1.is_null() || n2.is_null() {
            return null_arg("n1/n2");
        }
        let dims = unsafe { &(*field).0 }.grid().dims;
        unsafe {
            *n1 = dims[0] as u64;
            *n2 = dims[1] as u64;
        }
        SspfStatus::Ok
    })
}

/// Copies the nodal values into `buf` in node order.
///
/// # Safety
/// `buf` must point to at least `len` doubles; `len` must be at least the
/// node count of the field.
#[no_mangle]
pub unsafe extern "C" fn sspf_field_copy_values(
    field: *const SspfField,
    buf: *mut f64,
    len: u64,
) -> SspfStatus {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if buf.is_null() {
            return null_arg("buf");
        }
        let values = unsafe { &(*field).0 }.values();
        if (len as usize) < values.len() {
            set_error(&format!(
                "buffer holds {len} values, field has {}",
                values.len()
            ));
            return SspfStatus::InvalidArgument;
        }
        unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
        SspfStatus::Ok
    })
}

/// Value at node (i1, i2).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sspf_field_value(
    field: *const SspfField,
    i1: u64,
    i2: u64,
    out: *mut f64,
) -> SspfStatus {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let f = unsafe { &(*field).0 };
        let dims = f.grid().dims;
        if i1 as usize >= dims[0] || i2 as usize >= dims[1] {
            set_error(&format!(
                "node ({i1}, {i2}) outside a {}x{} grid",
                dims[0], dims[1]
            ));
            return SspfStatus::InvalidArgument;
        }
        unsafe { *out = f.value(i1 as usize, i2 as usize) };
        SspfStatus::Ok
    })
}

/// Max-norm of the interior residual of a chi field.
///
/// # Safety
/// All pointers must be valid handles or outputs.
#[no_mangle]
pub unsafe extern "C" fn sspf_residual_inf_norm(
    field: *const SspfField,
    gas: *const SspfGas,
    out: *mut f64,
) -> SspfStatus {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if gas.is_null() {
            return null_arg("gas");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let field = unsafe { &(*field).0 };
        let gas = unsafe { &(*gas).0 };
        match residual_chi(field, gas) {
            Ok(res) => {
                unsafe { *out = res.inf_norm() };
                SspfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Pseudo-Mach number and type tag at a node, with the default sonic
/// band. Boundary nodes use one-sided gradients.
///
/// # Safety
/// All pointers must be valid; `l` and `tag` may each be NULL when the
/// caller does not need them.
#[no_mangle]
pub unsafe extern "C" fn sspf_point_mach(
    field: *const SspfField,
    gas: *const SspfGas,
    i1: u64,
    i2: u64,
    l: *mut f64,
    tag: *mut SspfTypeTag,
) -> SspfStatus {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if gas.is_null() {
            return null_arg("gas");
        }
        let field = unsafe { &(*field).0 };
        let gas = unsafe { &(*gas).0 };
        let dims = field.grid().dims;
        if i1 as usize >= dims[0] || i2 as usize >= dims[1] {
            set_error(&format!(
                "node ({i1}, {i2}) outside a {}x{} grid",
                dims[0], dims[1]
            ));
            return SspfStatus::InvalidArgument;
        }
        if field.var() != Variable::Chi {
            set_error("field is not a chi field");
            return SspfStatus::Precondition;
        }
        let run = || -> Result<(f64, SspfTypeTag), Error> {
            let grad = grad_chi_at(field, i1 as usize, i2 as usize);
            let c2 = gas.sound_speed_sq(field.value(i1 as usize, i2 as usize), &grad)?;
            let (lv, t) = pseudo_mach_classify(&grad, c2, DEFAULT_TOL_L)?;
            let t = match t {
                sspf::gas::TypeTag::Elliptic => SspfTypeTag::Elliptic,
                sspf::gas::TypeTag::Parabolic => SspfTypeTag::Parabolic,
                sspf::gas::TypeTag::Hyperbolic => SspfTypeTag::Hyperbolic,
            };
            Ok((lv, t))
        };
        match run() {
            Ok((lv, t)) => {
                if !l.is_null() {
                    unsafe { *l = lv };
                }
                if !tag.is_null() {
                    unsafe { *tag = t };
                }
                SspfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

fn config_from_options(opts: Option<&SspfSolverOptions>) -> SolverConfig {
    let mut config = SolverConfig::default();
    let Some(o) = opts else { return config };
    if o.max_newton_iters > 0 {
        config.max_newton_iters = o.max_newton_iters as usize;
    }
    if o.residual_tol > 0.0 {
        config.residual_tol = Some(o.residual_tol);
    }
    if o.picard_warmup_iters >= 0 {
        config.picard_warmup_iters = o.picard_warmup_iters as usize;
    }
    if o.c2_floor > 0.0 {
        config.c2_floor = Some(o.c2_floor);
    }
    if o.l_guard > 0.0 {
        config.l_guard = o.l_guard;
    }
    config
}

/// Solves the interior chi problem with the boundary field's grid, walls
/// and Dirichlet-edge values.
///
/// # Safety
/// `boundary` and `gas` must be live handles; `options` may be NULL for
/// defaults; `info` may be NULL. On `Ok`, `out` receives a handle to
/// release with `sspf_field_free`.
#[no_mangle]
pub unsafe extern "C" fn sspf_solve(
    boundary: *const SspfField,
    gas: *const SspfGas,
    options: *const SspfSolverOptions,
    out: *mut *mut SspfField,
    info: *mut SspfSolveInfo,
) -> SspfStatus {
    guarded(|| {
        if boundary.is_null() {
            return null_arg("boundary");
        }
        if gas.is_null() {
            return null_arg("gas");
        }
        if out.is_null() {
            return null_arg("out");
        }
        let boundary = unsafe { &(*boundary).0 };
        let gas = unsafe { &(*gas).0 };
        let opts = unsafe { options.as_ref() };
        let config = config_from_options(opts);
        match solve_dirichlet(*boundary.grid(), boundary, gas, &config, None) {
            Ok((field, report)) => {
                if !info.is_null() {
                    unsafe {
                        *info = SspfSolveInfo {
                            converged: report.converged as i32,
                            iterations: report.iterations as u64,
                            final_residual: report
                                .residual_history
                                .last()
                                .copied()
                                .unwrap_or(f64::NAN),
                            residual_tol: report.residual_tol,
                            max_l_interior: report.max_l_interior,
                            l_guard_hits: report.l_guard_hits as u64,
                            c2_clamped_nodes: report.c2_clamped_nodes as u64,
                            uniformly_elliptic: report.uniformly_elliptic as i32,
                        };
                    }
                }
                unsafe { *out = Box::into_raw(Box::new(SspfField(field))) };
                SspfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Checks the maximum principle for L^2 + barrier on a chi field.
/// `c_hat <= 0` selects the automatic gauge (largest computed sound speed
/// times 1 + 1e-12); `k_ver <= 0` selects the default tolerance constant.
///
/// # Safety
/// `field` and `gas` must be live handles; `info` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sspf_verify(
    field: *const SspfField,
    gas: *const SspfGas,
    delta: f64,
    c_hat: f64,
    k_ver: f64,
    info: *mut SspfVerifyInfo,
) -> SspfStatus {
    guarded(|| {
        if field.is_null() {
            return null_arg("field");
        }
        if gas.is_null() {
            return null_arg("gas");
        }
        if info.is_null() {
            return null_arg("info");
        }
        let field = unsafe { &(*field).0 };
        let gas = unsafe { &(*gas).0 };
        let run = || -> Result<SspfVerifyInfo, Error> {
            let c_hat = if c_hat > 0.0 {
                c_hat
            } else {
                max_sound_speed(field, gas)? * (1.0 + 1e-12)
            };
            let barrier = make_barrier(field.grid(), c_hat, delta)?;
            let report = verify_max_principle(
                field,
                gas,
                &barrier,
                delta,
                (k_ver > 0.0).then_some(k_ver),
            )?;
            Ok(SspfVerifyInfo {
                verdict: match report.verdict {
                    Verdict::MaxOnBoundary => SspfVerdict::MaxOnBoundary,
                    Verdict::UniformlySubElliptic => SspfVerdict::UniformlySubElliptic,
                    Verdict::ViolationCandidate => SspfVerdict::ViolationCandidate,
                },
                max_interior_l2: report.max_interior_l2,
                max_boundary_value: report.max_boundary_value,
                residual_inf: report.residual_inf,
                tol: report.tol,
                delta: report.delta,
                argmax_i1: report.argmax_node[0] as u64,
                argmax_i2: report.argmax_node[1] as u64,
                argmax_value: report.argmax_value,
            })
        };
        match run() {
            Ok(v) => {
                unsafe { *info = v };
                SspfStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}
