//! C ABI for the bi-invariant regression library.
//!
//! Conventions:
//! - SE(3) elements cross the boundary as 12 doubles: the 3x3 rotation in
//!   row-major order followed by the translation vector.
//! - All functions return a [`BigeoStatus`]; results are written through out
//!   pointers, which are untouched on failure.
//! - `BigeoDataset` and `BigeoFit` are opaque handles owned by the library;
//!   release them with the matching `_free` function. Passing null where a
//!   handle is expected yields `BIGEO_STATUS_NULL_POINTER`.

use bigeo::regression::Init;
use bigeo::{
    fit_biinvariant, fit_riemannian, geodesic, group_exp, group_log, r_squared, Dataset,
    FitResult, GeodesicParams, GroupId, GroupPoint, Sample, SolverConfig, Tangent,
};
use nalgebra::{Matrix3, Vector3};

/// Status codes returned by every FFI entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BigeoStatus {
    /// Success.
    BigeoStatusOk = 0,
    /// A required pointer argument was null.
    BigeoStatusNullPointer = 1,
    /// A matrix argument is not a valid group element.
    BigeoStatusInvalidPoint = 2,
    /// The dataset is unusable (fewer than two samples or no two distinct
    /// times).
    BigeoStatusInvalidDataset = 3,
    /// A rotation angle reached the principal-branch cut of the logarithm.
    BigeoStatusBranchCut = 4,
    /// A solver precondition or configuration was violated.
    BigeoStatusSolverError = 5,
    /// The coefficient of determination is undefined (zero data variance).
    BigeoStatusUndefined = 6,
}

fn status_of(e: &bigeo::Error) -> BigeoStatus {
    use bigeo::Error::*;
    match e {
        InvalidPoint(_) => BigeoStatus::BigeoStatusInvalidPoint,
        BranchCut { .. } => BigeoStatus::BigeoStatusBranchCut,
        UndefinedRSquared => BigeoStatus::BigeoStatusUndefined,
        GroupMismatch(_, _) | BaseMismatch(_) | Usage(_) => BigeoStatus::BigeoStatusSolverError,
        DegenerateSpectrum(_) | Io(_) => BigeoStatus::BigeoStatusSolverError,
    }
}

/// Opaque builder for an SE(3) regression dataset.
pub struct BigeoDataset {
    samples: Vec<Sample>,
}

/// Opaque fitted geodesic.
pub struct BigeoFit {
    result: FitResult,
}

fn pose_from_raw(pose: &[f64; 12]) -> bigeo::Result<GroupPoint> {
    let r = Matrix3::from_row_slice(&pose[..9]);
    let x = Vector3::new(pose[9], pose[10], pose[11]);
    GroupPoint::se3_from_parts(&r, &x)
}

fn pose_to_raw(g: &GroupPoint, out: &mut [f64; 12]) {
    let r = g.rotation();
    for i in 0..3 {
        for j in 0..3 {
            out[3 * i + j] = r[(i, j)];
        }
    }
    let t = g.translation();
    out[9..12].copy_from_slice(&t);
}

/// Create an empty dataset builder. Free with `bigeo_dataset_free`.
#[no_mangle]
pub extern "C" fn bigeo_dataset_new() -> *mut BigeoDataset {
    Box::into_raw(Box::new(BigeoDataset {
        samples: Vec::new(),
    }))
}

/// Append one sample: an SE(3) pose (9 rotation doubles row-major, then 3
/// translation doubles) observed at scalar parameter `t` in [0, 1].
///
/// # Safety
/// `ds` must be a live handle from `bigeo_dataset_new`; `pose` must point to
/// 12 readable doubles.
#[no_mangle]
pub unsafe extern "C" fn bigeo_dataset_push(
    ds: *mut BigeoDataset,
    pose: *const f64,
    t: f64,
) -> BigeoStatus {
    if ds.is_null() || pose.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    let raw: &[f64; 12] = &*(pose as *const [f64; 12]);
    let point = match pose_from_raw(raw) {
        Ok(p) => p,
        Err(e) => return status_of(&e),
    };
    match Sample::new(point, t) {
        Ok(s) => {
            (*ds).samples.push(s);
            BigeoStatus::BigeoStatusOk
        }
        Err(e) => status_of(&e),
    }
}

/// Number of samples currently in the builder (0 for a null handle).
///
/// # Safety
/// `ds` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bigeo_dataset_len(ds: *const BigeoDataset) -> usize {
    if ds.is_null() {
        0
    } else {
        (*ds).samples.len()
    }
}

/// Release a dataset handle; null is a no-op.
///
/// # Safety
/// `ds` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn bigeo_dataset_free(ds: *mut BigeoDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Solver configuration; zero/negative fields select the library defaults
/// (lambda 0.1, 5000 iterations, tolerance 1e-9).
#[repr(C)]
#[derive(Clone, Copy)]
pub struct BigeoSolverConfig {
    pub lambda: f64,
    pub max_iters: u64,
    pub tol: f64,
}

fn solver_config(cfg: *const BigeoSolverConfig) -> SolverConfig {
    let mut out = SolverConfig::default();
    if !cfg.is_null() {
        let cfg = unsafe { &*cfg };
        if cfg.lambda > 0.0 {
            out.lambda = cfg.lambda;
        }
        if cfg.max_iters > 0 {
            out.max_iters = cfg.max_iters as usize;
        }
        if cfg.tol > 0.0 {
            out.tol = cfg.tol;
        }
    }
    out.init = Init::ExtremalSamples;
    out
}

unsafe fn fit_with(
    ds: *const BigeoDataset,
    cfg: *const BigeoSolverConfig,
    out: *mut *mut BigeoFit,
    f: impl Fn(&Dataset, &SolverConfig) -> bigeo::Result<FitResult>,
) -> BigeoStatus {
    if ds.is_null() || out.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    let data = match Dataset::new((*ds).samples.clone()) {
        Ok(d) => d,
        Err(_) => return BigeoStatus::BigeoStatusInvalidDataset,
    };
    match f(&data, &solver_config(cfg)) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(BigeoFit { result }));
            BigeoStatus::BigeoStatusOk
        }
        Err(e) => status_of(&e),
    }
}

/// Fit the bi-invariant geodesic regressor (net-force fixed point). On
/// success `*out` owns the fit; free with `bigeo_fit_free`.
///
/// # Safety
/// `ds` must be a live dataset handle; `cfg` may be null for defaults; `out`
/// must point to writable pointer storage.
#[no_mangle]
pub unsafe extern "C" fn bigeo_fit_biinvariant(
    ds: *const BigeoDataset,
    cfg: *const BigeoSolverConfig,
    out: *mut *mut BigeoFit,
) -> BigeoStatus {
    fit_with(ds, cfg, out, |d, c| fit_biinvariant(d, c))
}

/// Fit the Riemannian (product-metric) baseline by gradient descent.
///
/// # Safety
/// Same contract as `bigeo_fit_biinvariant`.
#[no_mangle]
pub unsafe extern "C" fn bigeo_fit_riemannian(
    ds: *const BigeoDataset,
    cfg: *const BigeoSolverConfig,
    out: *mut *mut BigeoFit,
) -> BigeoStatus {
    fit_with(ds, cfg, out, |d, c| fit_riemannian(d, c))
}

/// Read back the fitted endpoints and diagnostics. Any out pointer may be
/// null to skip that field; pose buffers receive 12 doubles.
///
/// # Safety
/// `fit` must be a live handle; non-null out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn bigeo_fit_read(
    fit: *const BigeoFit,
    g0: *mut f64,
    g1: *mut f64,
    iterations: *mut u64,
    final_update_norm: *mut f64,
    converged: *mut bool,
) -> BigeoStatus {
    if fit.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    let r = &(*fit).result;
    if !g0.is_null() {
        pose_to_raw(r.params.g0(), &mut *(g0 as *mut [f64; 12]));
    }
    if !g1.is_null() {
        pose_to_raw(r.params.g1(), &mut *(g1 as *mut [f64; 12]));
    }
    if !iterations.is_null() {
        *iterations = r.iterations as u64;
    }
    if !final_update_norm.is_null() {
        *final_update_norm = r.final_update_norm;
    }
    if !converged.is_null() {
        *converged = r.converged;
    }
    BigeoStatus::BigeoStatusOk
}

/// Coefficient of determination of a fit on a dataset.
///
/// # Safety
/// `fit` and `ds` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn bigeo_r_squared(
    fit: *const BigeoFit,
    ds: *const BigeoDataset,
    out: *mut f64,
) -> BigeoStatus {
    if fit.is_null() || ds.is_null() || out.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    let data = match Dataset::new((*ds).samples.clone()) {
        Ok(d) => d,
        Err(_) => return BigeoStatus::BigeoStatusInvalidDataset,
    };
    match r_squared(&data, &(*fit).result.params) {
        Ok(v) => {
            *out = v;
            BigeoStatus::BigeoStatusOk
        }
        Err(e) => status_of(&e),
    }
}

/// Release a fit handle; null is a no-op.
///
/// # Safety
/// `fit` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn bigeo_fit_free(fit: *mut BigeoFit) {
    if !fit.is_null() {
        drop(Box::from_raw(fit));
    }
}

/// Evaluate the fitted geodesic at parameter `t` (any real; the geodesic is
/// global). Writes 12 doubles.
///
/// # Safety
/// `fit` must be a live handle; `pose` must point to 12 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bigeo_fit_eval(
    fit: *const BigeoFit,
    t: f64,
    pose: *mut f64,
) -> BigeoStatus {
    if fit.is_null() || pose.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    match geodesic(t, &(*fit).result.params) {
        Ok(g) => {
            pose_to_raw(&g, &mut *(pose as *mut [f64; 12]));
            BigeoStatus::BigeoStatusOk
        }
        Err(e) => status_of(&e),
    }
}

/// Geodesic between two SE(3) poses at parameter `t` (12 doubles per pose).
///
/// # Safety
/// `g0`, `g1` must point to 12 readable doubles each; `pose` to 12 writable.
#[no_mangle]
pub unsafe extern "C" fn bigeo_geodesic(
    g0: *const f64,
    g1: *const f64,
    t: f64,
    pose: *mut f64,
) -> BigeoStatus {
    if g0.is_null() || g1.is_null() || pose.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    let inner = || -> bigeo::Result<GroupPoint> {
        let a = pose_from_raw(&*(g0 as *const [f64; 12]))?;
        let b = pose_from_raw(&*(g1 as *const [f64; 12]))?;
        geodesic(t, &GeodesicParams::new(a, b)?)
    };
    match inner() {
        Ok(g) => {
            pose_to_raw(&g, &mut *(pose as *mut [f64; 12]));
            BigeoStatus::BigeoStatusOk
        }
        Err(e) => status_of(&e),
    }
}

/// SE(3) group exponential: 6 algebra coordinates (rotation then translation
/// part) to a pose of 12 doubles.
///
/// # Safety
/// `coords` must point to 6 readable doubles; `pose` to 12 writable.
#[no_mangle]
pub unsafe extern "C" fn bigeo_se3_exp(coords: *const f64, pose: *mut f64) -> BigeoStatus {
    if coords.is_null() || pose.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    let c = std::slice::from_raw_parts(coords, 6);
    let inner = || -> bigeo::Result<GroupPoint> {
        let v = Tangent::from_identity_coords(GroupId::SE3, c)?;
        group_exp(&v)
    };
    match inner() {
        Ok(g) => {
            pose_to_raw(&g, &mut *(pose as *mut [f64; 12]));
            BigeoStatus::BigeoStatusOk
        }
        Err(e) => status_of(&e),
    }
}

/// SE(3) group logarithm (principal branch): pose of 12 doubles to 6 algebra
/// coordinates. Fails with `BIGEO_STATUS_BRANCH_CUT` near rotation angle pi.
///
/// # Safety
/// `pose` must point to 12 readable doubles; `coords` to 6 writable.
#[no_mangle]
pub unsafe extern "C" fn bigeo_se3_log(pose: *const f64, coords: *mut f64) -> BigeoStatus {
    if pose.is_null() || coords.is_null() {
        return BigeoStatus::BigeoStatusNullPointer;
    }
    let inner = || -> bigeo::Result<Vec<f64>> {
        let g = pose_from_raw(&*(pose as *const [f64; 12]))?;
        Ok(group_log(&g)?.identity_coords())
    };
    match inner() {
        Ok(c) => {
            std::slice::from_raw_parts_mut(coords, 6).copy_from_slice(&c);
            BigeoStatus::BigeoStatusOk
        }
        Err(e) => status_of(&e),
    }
}
