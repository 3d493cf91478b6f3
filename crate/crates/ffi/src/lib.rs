//! C ABI for the dimers library: opaque handles, status codes, and plain
//! double in/out parameters. The header `include/dimers.h` is generated by
//! cbindgen at build time.

use dimers::error::Error;
use dimers::frozen::FrozenBoundaryModel;
use dimers::geom::harmonic_measure;
use dimers::height::{aztec_density, aztec_f, eval_f, invert_g};
use dimers::tension::{lobachevsky, lozenge_grad_sigma, lozenge_sigma};
use num_complex::Complex64;

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimersStatus {
    Ok = 0,
    /// Invalid argument or input outside the admissible domain.
    InvalidInput = 1,
    /// A validation check failed (non-univalent configuration, mismatched
    /// cusp count, infeasible boundary data, ...).
    ValidationFailed = 2,
    /// An iterative solver did not converge.
    NoConvergence = 3,
    /// Null pointer passed where a handle or output slot was required.
    NullPointer = 4,
}

fn status_of(e: &Error) -> DimersStatus {
    match e.exit_code() {
        2 => DimersStatus::InvalidInput,
        3 => DimersStatus::ValidationFailed,
        _ => DimersStatus::NoConvergence,
    }
}

/// Opaque frozen-boundary model handle.
pub struct DimersModel {
    inner: FrozenBoundaryModel,
}

/// Opaque Aztec tiling handle.
pub struct DimersTiling {
    inner: dimers::aztec::AztecTiling,
}

/// Lobachevsky function 𝓛(θ).
#[no_mangle]
pub extern "C" fn dimers_lobachevsky(theta: f64) -> f64 {
    lobachevsky(theta)
}

/// Lozenge surface tension σ_Lo(s, t).
#[no_mangle]
pub extern "C" fn dimers_lozenge_sigma(s: f64, t: f64, out: *mut f64) -> DimersStatus {
    if out.is_null() {
        return DimersStatus::NullPointer;
    }
    match lozenge_sigma(s, t) {
        Ok(v) => {
            unsafe { *out = v };
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// ∇σ_Lo(s, t).
#[no_mangle]
pub extern "C" fn dimers_lozenge_grad_sigma(
    s: f64,
    t: f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> DimersStatus {
    if out_x.is_null() || out_y.is_null() {
        return DimersStatus::NullPointer;
    }
    match lozenge_grad_sigma(s, t) {
        Ok(g) => {
            unsafe {
                *out_x = g.re;
                *out_y = g.im;
            }
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Harmonic measure ω(ζ; arc from η₁ to η₂ counterclockwise).
#[no_mangle]
pub extern "C" fn dimers_harmonic_measure(
    zeta_re: f64,
    zeta_im: f64,
    eta1_re: f64,
    eta1_im: f64,
    eta2_re: f64,
    eta2_im: f64,
    out: *mut f64,
) -> DimersStatus {
    if out.is_null() {
        return DimersStatus::NullPointer;
    }
    match harmonic_measure(
        Complex64::new(zeta_re, zeta_im),
        Complex64::new(eta1_re, eta1_im),
        Complex64::new(eta2_re, eta2_im),
    ) {
        Ok(v) => {
            unsafe { *out = v };
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Asymptotic northbound-domino density of the normalized Aztec diamond.
#[no_mangle]
pub extern "C" fn dimers_aztec_density(x: f64, y: f64) -> f64 {
    aztec_density(x, y)
}

/// Closed-form Aztec inverse map g⁻¹.
#[no_mangle]
pub extern "C" fn dimers_aztec_f(
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DimersStatus {
    if out_re.is_null() || out_im.is_null() {
        return DimersStatus::NullPointer;
    }
    let f = aztec_f(Complex64::new(z_re, z_im));
    unsafe {
        *out_re = f.re;
        *out_im = f.im;
    }
    DimersStatus::Ok
}

/// Canonical epicycloid model of degree d. The returned handle must be
/// released with `dimers_model_free`.
#[no_mangle]
pub extern "C" fn dimers_model_canonical(d: u32, out: *mut *mut DimersModel) -> DimersStatus {
    if out.is_null() {
        return DimersStatus::NullPointer;
    }
    match FrozenBoundaryModel::canonical(d as usize) {
        Ok(inner) => {
            unsafe { *out = Box::into_raw(Box::new(DimersModel { inner })) };
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Univalent polynomial model with d−2 prescribed cusp preimage angles.
///
/// # Safety
/// `angles` must point to `n_angles` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_univalent(
    d: u32,
    angles: *const f64,
    n_angles: usize,
    out: *mut *mut DimersModel,
) -> DimersStatus {
    if out.is_null() || (angles.is_null() && n_angles > 0) {
        return DimersStatus::NullPointer;
    }
    let slice = if n_angles == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(angles, n_angles)
    };
    match FrozenBoundaryModel::univalent_polynomial(d as usize, slice) {
        Ok((inner, _)) => {
            *out = Box::into_raw(Box::new(DimersModel { inner }));
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// # Safety
/// `model` must be a handle returned by one of the constructors, not yet
/// freed; passing anything else is undefined behavior.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_free(model: *mut DimersModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn model_ref<'a>(model: *const DimersModel) -> Option<&'a DimersModel> {
    model.as_ref()
}

/// Boundary parametrization R(e^{iθ}).
///
/// # Safety
/// `model` must be a live handle from a constructor.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_boundary(
    model: *const DimersModel,
    theta: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DimersStatus {
    let Some(m) = model_ref(model) else {
        return DimersStatus::NullPointer;
    };
    if out_re.is_null() || out_im.is_null() {
        return DimersStatus::NullPointer;
    }
    match m.inner.boundary_param(Complex64::from_polar(1.0, theta)) {
        Ok(v) => {
            *out_re = v.re;
            *out_im = v.im;
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Teleomorphic homeomorphism g(z).
///
/// # Safety
/// `model` must be a live handle from a constructor.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_g(
    model: *const DimersModel,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DimersStatus {
    let Some(m) = model_ref(model) else {
        return DimersStatus::NullPointer;
    };
    if out_re.is_null() || out_im.is_null() {
        return DimersStatus::NullPointer;
    }
    match m.inner.g(Complex64::new(z_re, z_im)) {
        Ok(v) => {
            *out_re = v.re;
            *out_im = v.im;
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Proper Beltrami solution f = B ∘ g⁻¹ at a point of the liquid domain.
///
/// # Safety
/// `model` must be a live handle from a constructor.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_f(
    model: *const DimersModel,
    z_re: f64,
    z_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DimersStatus {
    let Some(m) = model_ref(model) else {
        return DimersStatus::NullPointer;
    };
    if out_re.is_null() || out_im.is_null() {
        return DimersStatus::NullPointer;
    }
    match eval_f(&m.inner, Complex64::new(z_re, z_im), None) {
        Ok(v) => {
            *out_re = v.re;
            *out_im = v.im;
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Invert g at a point of the liquid domain.
///
/// # Safety
/// `model` must be a live handle from a constructor.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_invert_g(
    model: *const DimersModel,
    target_re: f64,
    target_im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DimersStatus {
    let Some(m) = model_ref(model) else {
        return DimersStatus::NullPointer;
    };
    if out_re.is_null() || out_im.is_null() {
        return DimersStatus::NullPointer;
    }
    match invert_g(&m.inner, Complex64::new(target_re, target_im), None) {
        Ok(v) => {
            *out_re = v.re;
            *out_im = v.im;
            DimersStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Number of cusps of the frozen boundary.
///
/// # Safety
/// `model` must be a live handle from a constructor.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_cusp_count(model: *const DimersModel) -> usize {
    model_ref(model).map_or(0, |m| m.inner.cusps().len())
}

/// Cusp `index`: preimage angle and boundary point.
///
/// # Safety
/// `model` must be a live handle from a constructor.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_cusp(
    model: *const DimersModel,
    index: usize,
    out_angle: *mut f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> DimersStatus {
    let Some(m) = model_ref(model) else {
        return DimersStatus::NullPointer;
    };
    if out_angle.is_null() || out_re.is_null() || out_im.is_null() {
        return DimersStatus::NullPointer;
    }
    let Some(c) = m.inner.cusps().get(index) else {
        return DimersStatus::InvalidInput;
    };
    *out_angle = c.angle;
    *out_re = c.point.re;
    *out_im = c.point.im;
    DimersStatus::Ok
}

/// Run the Theorem-5.5 characterization checks; each flag is 0/1.
///
/// # Safety
/// `model` must be a live handle from a constructor.
#[no_mangle]
pub unsafe extern "C" fn dimers_model_check(
    model: *const DimersModel,
    out_univalent: *mut i32,
    out_self_reflective: *mut i32,
    out_pole_free: *mut i32,
    out_residual: *mut f64,
) -> DimersStatus {
    let Some(m) = model_ref(model) else {
        return DimersStatus::NullPointer;
    };
    if out_univalent.is_null()
        || out_self_reflective.is_null()
        || out_pole_free.is_null()
        || out_residual.is_null()
    {
        return DimersStatus::NullPointer;
    }
    let report = m.inner.check_characterization();
    *out_univalent = report.univalence_pass as i32;
    *out_self_reflective = report.self_reflect_pass as i32;
    *out_pole_free = report.pole_free_pass as i32;
    *out_residual = report.self_reflect_residual;
    DimersStatus::Ok
}

/// Sample a uniform tiling of the order-n Aztec diamond.
#[no_mangle]
pub extern "C" fn dimers_sample_tiling(
    n: u32,
    seed: u64,
    out: *mut *mut DimersTiling,
) -> DimersStatus {
    if out.is_null() {
        return DimersStatus::NullPointer;
    }
    if n == 0 {
        return DimersStatus::InvalidInput;
    }
    let inner = dimers::aztec::sample_tiling(n as usize, seed);
    unsafe { *out = Box::into_raw(Box::new(DimersTiling { inner })) };
    DimersStatus::Ok
}

/// # Safety
/// `tiling` must be a handle returned by `dimers_sample_tiling`, not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn dimers_tiling_free(tiling: *mut DimersTiling) {
    if !tiling.is_null() {
        drop(Box::from_raw(tiling));
    }
}

/// # Safety
/// `tiling` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dimers_tiling_len(tiling: *const DimersTiling) -> usize {
    tiling.as_ref().map_or(0, |t| t.inner.dominoes.len())
}

/// Domino `index`: root cell and orientation ('N', 'S', 'E' or 'W').
///
/// # Safety
/// `tiling` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn dimers_tiling_domino(
    tiling: *const DimersTiling,
    index: usize,
    out_x: *mut i32,
    out_y: *mut i32,
    out_type: *mut u8,
) -> DimersStatus {
    let Some(t) = tiling.as_ref() else {
        return DimersStatus::NullPointer;
    };
    if out_x.is_null() || out_y.is_null() || out_type.is_null() {
        return DimersStatus::NullPointer;
    }
    let Some(d) = t.inner.dominoes.get(index) else {
        return DimersStatus::InvalidInput;
    };
    *out_x = d.x;
    *out_y = d.y;
    *out_type = t.inner.domino_type(d).letter() as u8;
    DimersStatus::Ok
}
