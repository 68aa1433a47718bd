//! C ABI for `fsde-drift`.
//!
//! Every fallible function returns an [`FsdeStatus`]; on failure a message is
//! kept per thread and can be read with [`fsde_last_error_message`]. Path
//! bundles are opaque [`FsdeBundle`] handles released with [`fsde_bundle_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fsde_drift::error::exit_code;
use fsde_drift::estimators::{dmax_from_lower_bound, dmax_ou, estimate_bm, estimate_fbm, FbmParams};
use fsde_drift::fbm::{BundleKind, CrossCorrelation, FbmSampler, Grid, HurstParams, PathBundle};
use fsde_drift::linalg::Matrix;
use fsde_drift::rng::stream;
use fsde_drift::sde::{euler_additive, DriftModel, SdeSpec, VolModel};
use fsde_drift::Error;

/// Status codes; the nonzero values match the CLI exit codes where they overlap.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsdeStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Degenerate = 3,
    Io = 4,
    Panic = 5,
}

/// Drift catalog entry: `kind` 1 is `π − arctan x`, 2 is `−x`, 3 is
/// `intercept + slope·x`. Any other kind is rejected.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsdeDrift {
    pub kind: u32,
    pub intercept: f64,
    pub slope: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FsdeFbmParams {
    /// Contraction constant in (0, 1).
    pub c: f64,
    /// Truncation threshold on D_N (0 disables).
    pub d: f64,
    /// Interval level; a value `<= 0` skips the interval.
    pub alpha: f64,
    /// Nonzero: skip the iteration and zero the estimate outside the contraction event.
    pub enforce_omega: i32,
    /// Picard steps; 0 uses the default schedule.
    pub max_iters: u32,
    pub tol: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsdeFbmEstimate {
    pub theta_tilde: f64,
    pub r_n: f64,
    pub iterations: u32,
    pub residual: f64,
    pub d_n: f64,
    pub i_n: f64,
    pub m_n: f64,
    pub omega_holds: i32,
    pub theta_tilde_c: f64,
    pub theta_tilde_cd: f64,
    pub has_aci: i32,
    pub aci_lower: f64,
    pub aci_upper: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FsdeBmEstimate {
    pub d_nn: f64,
    pub v_nn: f64,
    /// NaN when D_{N,n} = 0.
    pub theta_hat: f64,
    pub theta_hat_d: f64,
    pub has_aci: i32,
    pub aci_lower: f64,
    pub aci_upper: f64,
}

/// Opaque handle to `N` paths on a uniform grid.
pub struct FsdeBundle {
    inner: PathBundle,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FsdeStatus {
    match e.exit_code() {
        exit_code::DEGENERATE => FsdeStatus::Degenerate,
        exit_code::IO => FsdeStatus::Io,
        _ => FsdeStatus::Validation,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FsdeStatus>) -> FsdeStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FsdeStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            FsdeStatus::Panic
        }
    }
}

fn lift<T>(r: fsde_drift::Result<T>) -> Result<T, FsdeStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> FsdeStatus {
    set_error(format!("`{what}` is null"));
    FsdeStatus::NullPointer
}

impl FsdeDrift {
    fn model(&self) -> Result<DriftModel, FsdeStatus> {
        match self.kind {
            1 => Ok(DriftModel::ArcTan),
            2 => Ok(DriftModel::NegIdentity),
            3 => Ok(DriftModel::Affine {
                intercept: self.intercept,
                slope: self.slope,
            }),
            k => lift(Err(Error::config("kind", format!("unknown drift kind {k}")))),
        }
    }
}

impl From<FsdeFbmParams> for FbmParams {
    fn from(p: FsdeFbmParams) -> Self {
        FbmParams {
            c: p.c,
            d_threshold: p.d,
            alpha: (p.alpha > 0.0).then_some(p.alpha),
            enforce_omega: p.enforce_omega != 0,
            max_iters: (p.max_iters > 0).then_some(p.max_iters as usize),
            tol: p.tol,
        }
    }
}

/// Defaults: c = 0.5, d = 0, alpha = 0.05, no enforcement, scheduled iterations, tol = 1e-12.
#[no_mangle]
pub extern "C" fn fsde_default_fbm_params() -> FsdeFbmParams {
    let p = FbmParams::default();
    FsdeFbmParams {
        c: p.c,
        d: p.d_threshold,
        alpha: p.alpha.unwrap_or(0.0),
        enforce_omega: p.enforce_omega as i32,
        max_iters: p.max_iters.unwrap_or(0) as u32,
        tol: p.tol,
    }
}

/// Message of the last failure on this thread, or NULL. Valid until the next
/// call into this library from the same thread.
#[no_mangle]
pub extern "C" fn fsde_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Wraps `n_paths × (steps + 1)` row-major `values` observed on the uniform
/// grid of `[0, horizon]`.
///
/// # Safety
/// `values` must point to `n_paths * (steps + 1)` readable doubles and `out`
/// to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn fsde_bundle_from_values(
    horizon: f64,
    steps: usize,
    n_paths: usize,
    values: *const f64,
    out: *mut *mut FsdeBundle,
) -> FsdeStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = lift(Grid::new(horizon, steps))?;
        let cols = steps + 1;
        let Some(len) = n_paths.checked_mul(cols) else {
            return lift(Err(Error::InvalidInput("bundle too large".into())));
        };
        let data = std::slice::from_raw_parts(values, len);
        let matrix = lift(Matrix::from_rows(n_paths, cols, data.to_vec()))?;
        let bundle = lift(PathBundle::new(grid, matrix, BundleKind::Solution))?;
        *out = Box::into_raw(Box::new(FsdeBundle { inner: bundle }));
        Ok(())
    })
}

/// Simulates `n_paths` independent copies of `dX = θ₀ b(X) dt + σ dB^H` with
/// exact fBm increments. The noise and solution bundles are returned through
/// `out_noise` (may be NULL) and `out_paths`.
///
/// # Safety
/// `drift` must be readable; `out_paths` writable; `out_noise` writable or NULL.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fsde_simulate(
    drift: *const FsdeDrift,
    hurst: f64,
    horizon: f64,
    steps: usize,
    n_paths: usize,
    x0: f64,
    theta0: f64,
    sigma: f64,
    seed: u64,
    out_noise: *mut *mut FsdeBundle,
    out_paths: *mut *mut FsdeBundle,
) -> FsdeStatus {
    guard(|| {
        if drift.is_null() {
            return Err(null("drift"));
        }
        if out_paths.is_null() {
            return Err(null("out_paths"));
        }
        let drift = (*drift).model()?;
        let hurst = lift(HurstParams::new(hurst))?;
        let grid = lift(Grid::new(horizon, steps))?;
        if n_paths == 0 {
            return lift(Err(Error::config("n_paths", "at least one path is required")));
        }
        let spec = lift(SdeSpec::new(x0, theta0, sigma, drift, hurst, grid))?;
        let sampler = lift(FbmSampler::new(hurst, grid, CrossCorrelation::identity(n_paths)))?;
        let noise = sampler.sample(&mut stream(seed, &[0]));
        let paths = lift(euler_additive(&spec, &noise))?;
        if !out_noise.is_null() {
            *out_noise = Box::into_raw(Box::new(FsdeBundle { inner: noise }));
        }
        *out_paths = Box::into_raw(Box::new(FsdeBundle { inner: paths }));
        Ok(())
    })
}

/// # Safety
/// `bundle` must be NULL or a handle from this library that was not freed yet.
#[no_mangle]
pub unsafe extern "C" fn fsde_bundle_free(bundle: *mut FsdeBundle) {
    if !bundle.is_null() {
        drop(Box::from_raw(bundle));
    }
}

/// Number of paths, 0 for NULL.
///
/// # Safety
/// `bundle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fsde_bundle_len(bundle: *const FsdeBundle) -> usize {
    bundle.as_ref().map_or(0, |b| b.inner.len())
}

/// Number of grid steps ν (each path has ν + 1 values), 0 for NULL.
///
/// # Safety
/// `bundle` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fsde_bundle_steps(bundle: *const FsdeBundle) -> usize {
    bundle.as_ref().map_or(0, |b| b.inner.grid().steps())
}

/// Copies the row-major values into `buf`, which must hold `len · (steps + 1)` doubles.
///
/// # Safety
/// `bundle` must be a live handle and `buf` writable for `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fsde_bundle_copy_values(
    bundle: *const FsdeBundle,
    buf: *mut f64,
    buf_len: usize,
) -> FsdeStatus {
    guard(|| {
        let Some(b) = bundle.as_ref() else {
            return Err(null("bundle"));
        };
        if buf.is_null() {
            return Err(null("buf"));
        }
        let values = b.inner.values().as_slice();
        if buf_len < values.len() {
            return lift(Err(Error::InvalidInput(format!(
                "buffer holds {buf_len} values, {} needed",
                values.len()
            ))));
        }
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
        Ok(())
    })
}

/// Fixed-point estimator for `H > 1/2`.
///
/// # Safety
/// `bundle`, `drift` and `params` must be readable (`params` may be NULL for
/// defaults); `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_estimate_fbm(
    bundle: *const FsdeBundle,
    drift: *const FsdeDrift,
    hurst: f64,
    sigma: f64,
    params: *const FsdeFbmParams,
    out: *mut FsdeFbmEstimate,
) -> FsdeStatus {
    guard(|| {
        let Some(b) = bundle.as_ref() else {
            return Err(null("bundle"));
        };
        let Some(drift) = drift.as_ref() else {
            return Err(null("drift"));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let params: FbmParams = params.as_ref().map_or_else(FbmParams::default, |p| (*p).into());
        let hurst = lift(HurstParams::new(hurst))?;
        let est = lift(estimate_fbm(&b.inner, &drift.model()?, hurst, sigma, &params))?;
        *out = FsdeFbmEstimate {
            theta_tilde: est.theta_tilde,
            r_n: est.r_n,
            iterations: est.iterations as u32,
            residual: est.residual,
            d_n: est.d_n,
            i_n: est.i_n,
            m_n: est.m_n,
            omega_holds: est.omega_holds as i32,
            theta_tilde_c: est.theta_tilde_c,
            theta_tilde_cd: est.theta_tilde_cd,
            has_aci: est.aci.is_some() as i32,
            aci_lower: est.aci.map_or(f64::NAN, |c| c.lower),
            aci_upper: est.aci.map_or(f64::NAN, |c| c.upper),
        };
        Ok(())
    })
}

/// Least-squares estimator for Brownian noise with constant volatility `sigma`.
/// `alpha <= 0` skips the interval.
///
/// # Safety
/// `bundle` and `drift` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_estimate_bm(
    bundle: *const FsdeBundle,
    drift: *const FsdeDrift,
    sigma: f64,
    d: f64,
    alpha: f64,
    out: *mut FsdeBmEstimate,
) -> FsdeStatus {
    guard(|| {
        let Some(b) = bundle.as_ref() else {
            return Err(null("bundle"));
        };
        let Some(drift) = drift.as_ref() else {
            return Err(null("drift"));
        };
        if out.is_null() {
            return Err(null("out"));
        }
        let vol = VolModel::Constant(sigma);
        lift(vol.validate())?;
        let est = lift(estimate_bm(
            &b.inner,
            &drift.model()?,
            Some(&vol),
            d,
            (alpha > 0.0).then_some(alpha),
        ))?;
        *out = FsdeBmEstimate {
            d_nn: est.d_nn,
            v_nn: est.v_nn,
            theta_hat: est.theta_hat.unwrap_or(f64::NAN),
            theta_hat_d: est.theta_hat_d,
            has_aci: est.aci.is_some() as i32,
            aci_lower: est.aci.map_or(f64::NAN, |c| c.lower),
            aci_upper: est.aci.map_or(f64::NAN, |c| c.upper),
        };
        Ok(())
    })
}

/// Threshold `𝔟/2` from a lower bound `b(x)² ≥ 𝔟`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_dmax_from_lower_bound(frak_b: f64, out: *mut f64) -> FsdeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(dmax_from_lower_bound(frak_b))?;
        Ok(())
    })
}

/// Ornstein–Uhlenbeck threshold `(x₀²/2) e^{−2 θ_max T_max}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_dmax_ou(x0: f64, theta_max: f64, t_max: f64, out: *mut f64) -> FsdeStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = lift(dmax_ou(x0, theta_max, t_max))?;
        Ok(())
    })
}
