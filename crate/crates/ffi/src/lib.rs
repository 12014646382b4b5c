//! C interface to `feec`.
//!
//! Every fallible function returns a [`FeecStatus`]; on failure the message
//! is kept per thread and read with [`feec_last_error_message`]. Objects are
//! opaque handles released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use feec::derham::{Bc, DiscreteComplex};
use feec::estimator::{gap_bound, ErrorSource, EstimatorReport, Mode};
use feec::harness::{evaluate_level, find_problem, StudyConfig};
use feec::hodge::harmonic_basis;
use feec::mesh::{generate, read_mesh, refine_uniform, write_mesh, Domain, SimplicialComplex};
use feec::FeecError;

pub const FEEC_BC_NATURAL: u32 = 0;
pub const FEEC_BC_ESSENTIAL: u32 = 1;
pub const FEEC_MODE_CRUDE: u32 = 0;
pub const FEEC_MODE_SHARP: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    InvalidMesh = 4,
    Unsupported = 5,
    Numerical = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Simplicial mesh.
pub struct FeecMesh(Arc<SimplicialComplex>);

/// Estimator report of one solve.
pub struct FeecReport {
    report: EstimatorReport,
    error: Option<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FeecStatus, String);

impl From<FeecError> for Failure {
    fn from(e: FeecError) -> Self {
        let status = match &e {
            FeecError::Io { .. } => FeecStatus::Io,
            FeecError::InvalidMesh(_)
            | FeecError::NonConforming(_)
            | FeecError::DegenerateCell { .. }
            | FeecError::Parse { .. } => FeecStatus::InvalidMesh,
            FeecError::Unsupported(_) | FeecError::UnsupportedDimension(_) => {
                FeecStatus::Unsupported
            }
            FeecError::UnknownDomain(_)
            | FeecError::UnknownProblem(_)
            | FeecError::InvalidDegree { .. }
            | FeecError::InvalidArgument(_)
            | FeecError::Missing(_)
            | FeecError::RegularityDataRequired(_) => FeecStatus::InvalidArgument,
            FeecError::PolyDegreeOverflow(_)
            | FeecError::DimensionMismatch(_)
            | FeecError::RankAmbiguous(_)
            | FeecError::RankDeficient(_)
            | FeecError::Singular(_)
            | FeecError::SolveTolerance { .. } => FeecStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FeecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FeecStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal error: {msg}"));
            FeecStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(FeecStatus::NullPointer, format!("`{name}` is NULL"))
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            FeecStatus::InvalidArgument,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

fn bc_arg(bc: u32) -> Result<Bc, Failure> {
    match bc {
        FEEC_BC_NATURAL => Ok(Bc::Natural),
        FEEC_BC_ESSENTIAL => Ok(Bc::Essential),
        _ => Err(Failure(
            FeecStatus::InvalidArgument,
            format!("unknown boundary condition {bc}"),
        )),
    }
}

fn mode_arg(mode: u32) -> Result<Mode, Failure> {
    match mode {
        FEEC_MODE_CRUDE => Ok(Mode::Crude),
        FEEC_MODE_SHARP => Ok(Mode::Sharp),
        _ => Err(Failure(
            FeecStatus::InvalidArgument,
            format!("unknown estimator mode {mode}"),
        )),
    }
}

/// Copy `text` and a terminating NUL into `buf` when it fits. `required`
/// receives the buffer size needed, NUL included.
unsafe fn copy_text(
    text: &str,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> Result<(), Failure> {
    let bytes = text.as_bytes();
    if let Some(r) = required.as_mut() {
        *r = bytes.len() + 1;
    }
    if buf.is_null() && len == 0 {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    if len < bytes.len() + 1 {
        return Err(Failure(
            FeecStatus::BufferTooSmall,
            format!("buffer holds {len} bytes, {} needed", bytes.len() + 1),
        ));
    }
    ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, bytes.len());
    *buf.add(bytes.len()) = 0;
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn feec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message into `buf` (truncated to
/// `len - 1` bytes and NUL-terminated). Returns the full message length plus
/// one, or 0 when the last call succeeded.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn feec_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Generate a mesh of a built-in domain (`square`, `l_shape`,
/// `square_annulus`, `cube`, `cube_with_tunnel`).
///
/// # Safety
/// `domain` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn feec_mesh_generate(
    domain: *const c_char,
    resolution: usize,
    out: *mut *mut FeecMesh,
) -> FeecStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let domain: Domain = str_arg(domain, "domain")?.parse()?;
        let mesh = generate(domain, resolution)?;
        *out = Box::into_raw(Box::new(FeecMesh(Arc::new(mesh))));
        Ok(())
    })
}

/// Read a mesh file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn feec_mesh_read(
    path: *const c_char,
    out: *mut *mut FeecMesh,
) -> FeecStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let mesh = read_mesh(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(FeecMesh(Arc::new(mesh))));
        Ok(())
    })
}

/// Write a mesh file.
///
/// # Safety
/// `mesh` must come from this library and `path` be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn feec_mesh_write(mesh: *const FeecMesh, path: *const c_char) -> FeecStatus {
    guard(|| {
        let mesh = handle(mesh, "mesh")?;
        write_mesh(&mesh.0, str_arg(path, "path")?)?;
        Ok(())
    })
}

/// Uniformly refine `mesh` into a new handle.
///
/// # Safety
/// `mesh` must come from this library and `out` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn feec_mesh_refine_uniform(
    mesh: *const FeecMesh,
    out: *mut *mut FeecMesh,
) -> FeecStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let mesh = handle(mesh, "mesh")?;
        *out = Box::into_raw(Box::new(FeecMesh(Arc::new(refine_uniform(&mesh.0)))));
        Ok(())
    })
}

/// Ambient dimension, vertex count and cell count of `mesh`. Any output
/// pointer may be NULL.
///
/// # Safety
/// `mesh` must come from this library; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn feec_mesh_counts(
    mesh: *const FeecMesh,
    dim: *mut usize,
    vertices: *mut usize,
    cells: *mut usize,
) -> FeecStatus {
    guard(|| {
        let mesh = &handle(mesh, "mesh")?.0;
        for (p, v) in [
            (dim, mesh.dim()),
            (vertices, mesh.num_vertices()),
            (cells, mesh.num_cells()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Release a mesh. NULL is ignored.
///
/// # Safety
/// `mesh` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn feec_mesh_free(mesh: *mut FeecMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// Dimension of the discrete harmonic `k`-forms and the gap bound `μ`.
///
/// # Safety
/// `mesh` must come from this library; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn feec_harmonic(
    mesh: *const FeecMesh,
    k: usize,
    bc: u32,
    dim: *mut usize,
    mu: *mut f64,
) -> FeecStatus {
    guard(|| {
        let mesh = handle(mesh, "mesh")?;
        let cx = DiscreteComplex::new(mesh.0.clone(), bc_arg(bc)?);
        let basis = harmonic_basis(&cx, k)?;
        if let Some(d) = dim.as_mut() {
            *d = basis.dim();
        }
        if let Some(m) = mu.as_mut() {
            *m = gap_bound(&cx, &basis)?.mu;
        }
        Ok(())
    })
}

/// Solve a registry problem and evaluate its estimator. `mesh` may be NULL
/// for the problem's base mesh.
///
/// # Safety
/// `problem` must be a NUL-terminated string, `mesh` NULL or a handle from
/// this library, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn feec_estimate(
    problem: *const c_char,
    mesh: *const FeecMesh,
    mode: u32,
    out: *mut *mut FeecReport,
) -> FeecStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = find_problem(str_arg(problem, "problem")?)?;
        let mesh = match mesh.as_ref() {
            Some(m) => m.0.clone(),
            None => Arc::new(spec.base_mesh()?),
        };
        if mesh.dim() != spec.n() {
            return Err(Failure(
                FeecStatus::InvalidArgument,
                format!(
                    "problem `{}` is {}-D but the mesh is {}-D",
                    spec.name,
                    spec.n(),
                    mesh.dim()
                ),
            ));
        }
        let cfg = StudyConfig {
            mode: mode_arg(mode)?,
            ..Default::default()
        };
        let source = spec.exact.as_ref().map(ErrorSource::Exact);
        let result = evaluate_level(&spec, mesh, &cfg, 0, source.as_ref())?;
        *out = Box::into_raw(Box::new(FeecReport {
            report: result.report,
            error: result.row.error_h,
        }));
        Ok(())
    })
}

/// Global quantities of a report: total estimate, `μ`, and the true error
/// (NaN when the problem has no exact solution). Any output may be NULL.
///
/// # Safety
/// `report` must come from this library; non-NULL outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn feec_report_summary(
    report: *const FeecReport,
    total: *mut f64,
    mu: *mut f64,
    error: *mut f64,
) -> FeecStatus {
    guard(|| {
        let r = handle(report, "report")?;
        for (p, v) in [
            (total, r.report.total()),
            (mu, r.report.mu),
            (error, r.error.unwrap_or(f64::NAN)),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Number of cells of the report's mesh.
///
/// # Safety
/// `report` must come from this library and `cells` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn feec_report_num_cells(
    report: *const FeecReport,
    cells: *mut usize,
) -> FeecStatus {
    guard(|| {
        *out_arg(cells, "cells")? = handle(report, "report")?.report.elements.len();
        Ok(())
    })
}

/// Copy the per-cell indicators `η(K)` into `eta`, which holds `len` values.
///
/// # Safety
/// `report` must come from this library and `eta` point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn feec_report_indicators(
    report: *const FeecReport,
    eta: *mut f64,
    len: usize,
) -> FeecStatus {
    guard(|| {
        let values = handle(report, "report")?.report.eta();
        if eta.is_null() {
            return Err(null("eta"));
        }
        if len < values.len() {
            return Err(Failure(
                FeecStatus::BufferTooSmall,
                format!("buffer holds {len} values, {} needed", values.len()),
            ));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), eta, values.len());
        Ok(())
    })
}

/// Write the JSON report into `buf`. `required` (may be NULL) receives the
/// size needed including the NUL; pass `buf = NULL, len = 0` to query it.
///
/// # Safety
/// `report` must come from this library, `buf` be NULL or point to `len`
/// writable bytes, and `required` be NULL or valid.
#[no_mangle]
pub unsafe extern "C" fn feec_report_json(
    report: *const FeecReport,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> FeecStatus {
    guard(|| {
        copy_text(
            &handle(report, "report")?.report.to_json(),
            buf,
            len,
            required,
        )
    })
}

/// Per-cell indicator table as CSV, with the same buffer protocol as
/// [`feec_report_json`].
///
/// # Safety
/// As for [`feec_report_json`].
#[no_mangle]
pub unsafe extern "C" fn feec_report_csv(
    report: *const FeecReport,
    buf: *mut c_char,
    len: usize,
    required: *mut usize,
) -> FeecStatus {
    guard(|| {
        copy_text(
            &handle(report, "report")?.report.to_csv(),
            buf,
            len,
            required,
        )
    })
}

/// Release a report. NULL is ignored.
///
/// # Safety
/// `report` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn feec_report_free(report: *mut FeecReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
