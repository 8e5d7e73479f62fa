//! C ABI for `stability-lab`.
//!
//! Objects cross the boundary as opaque handles created by `sl_*_new` /
//! `sl_*_from_json` and released with the matching `sl_*_free`. Every fallible
//! function returns an [`SlStatus`]; on failure, [`sl_last_error`] describes
//! the problem for the calling thread. Exact rationals are returned as
//! `"num/den"` strings that must be released with [`sl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stability_lab::bundle::{brute_force_sup_psi, harder_narasimhan, phi, BundleError, BundleSpec};
use stability_lab::embed::{
    holder_chain, moment_bound_check, DegenerationExample, InvariantMetricCP1, Quadrature,
};
use stability_lab::exact::DEFAULT_GUARD;
use stability_lab::test_config::{invariants_with_fits, ConfigInvariants, WeightSpectrum};
use stability_lab::toric::{weight_spectrum, LatticePolytope, PLConvexFunction};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidInput = 4,
    TooLarge = 5,
    Numerical = 6,
    NotAvailable = 7,
    Panic = 8,
}

/// A direct sum of stable bundles.
pub struct SlBundle {
    spec: BundleSpec,
}

/// Test-configuration invariants.
pub struct SlConfig {
    inv: ConfigInvariants,
}

/// A circle-invariant metric on the projective line.
pub struct SlMetric {
    metric: InvariantMetricCP1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(SlStatus, String);

impl Failure {
    fn input(e: impl ToString) -> Self {
        Failure(SlStatus::InvalidInput, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SlStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SlStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(
            SlStatus::NullPointer,
            "null string argument".into(),
        ));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| Failure(SlStatus::InvalidUtf8, e.to_string()))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure(SlStatus::Parse, e.to_string()))
}

unsafe fn out_ref<'a, T>(out: *mut T) -> Result<&'a mut T, Failure> {
    out.as_mut()
        .ok_or_else(|| Failure(SlStatus::NullPointer, "null output pointer".into()))
}

unsafe fn handle<'a, T>(h: *const T) -> Result<&'a T, Failure> {
    h.as_ref()
        .ok_or_else(|| Failure(SlStatus::NullPointer, "null handle".into()))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("no interior nul").into_raw()
}

/// Message for the most recent failure on this thread, or null. Owned by the
/// library and valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `{"pieces": [{"rank": r, "degree": d, "multiplicity": m}, …]}`.
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_bundle_from_json(
    json: *const c_char,
    out: *mut *mut SlBundle,
) -> SlStatus {
    guard(|| {
        let out = out_ref(out)?;
        let spec: BundleSpec = parse(read_str(json)?)?;
        spec.validate().map_err(Failure::input)?;
        *out = Box::into_raw(Box::new(SlBundle { spec }));
        Ok(())
    })
}

/// # Safety
/// `b` must be null or a handle from [`sl_bundle_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_bundle_free(b: *mut SlBundle) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Writes Φ² of the Harder–Narasimhan flag as a `"num/den"` string.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_bundle_phi_squared(
    b: *const SlBundle,
    out: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let b = handle(b)?;
        let out = out_ref(out)?;
        let hn = harder_narasimhan(&b.spec).map_err(Failure::input)?;
        let value = phi(&hn).map_err(Failure::input)?;
        *out = c_string(value.radicand.to_string());
        Ok(())
    })
}

/// Number of quotients in the Harder–Narasimhan flag.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_bundle_hn_length(b: *const SlBundle, out: *mut usize) -> SlStatus {
    guard(|| {
        let b = handle(b)?;
        let out = out_ref(out)?;
        *out = harder_narasimhan(&b.spec).map_err(Failure::input)?.len();
        Ok(())
    })
}

/// Runs the exhaustive search over flags and weights in `[-bound, bound]`
/// (`bound <= 0` selects a sufficient bound) and reports whether its maximum
/// equals Φ of the Harder–Narasimhan flag.
///
/// # Safety
/// `b` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_bundle_verify(
    b: *const SlBundle,
    bound: i64,
    out: *mut bool,
) -> SlStatus {
    guard(|| {
        let b = handle(b)?;
        let out = out_ref(out)?;
        let bound = if bound <= 0 {
            b.spec.sufficient_weight_bound()
        } else {
            bound
        };
        let hn = harder_narasimhan(&b.spec).map_err(Failure::input)?;
        let target = phi(&hn).map_err(Failure::input)?.value;
        let sup = brute_force_sup_psi(&b.spec, bound).map_err(|e| match e {
            BundleError::TooLarge { .. } => Failure(SlStatus::TooLarge, e.to_string()),
            other => Failure::input(other),
        })?;
        *out = sup.value == target;
        Ok(())
    })
}

fn even_exponents(p_list: *const u32, p_len: usize) -> Result<Vec<u32>, Failure> {
    if p_len == 0 {
        return Ok(Vec::new());
    }
    if p_list.is_null() {
        return Err(Failure(SlStatus::NullPointer, "null exponent list".into()));
    }
    // SAFETY: the caller guarantees p_len readable elements.
    let ps = unsafe { std::slice::from_raw_parts(p_list, p_len) }.to_vec();
    if let Some(p) = ps.iter().find(|&&p| p == 0 || p % 2 == 1) {
        return Err(Failure::input(format!(
            "p = {p} is not a positive even integer"
        )));
    }
    Ok(ps)
}

fn config_from_spectrum(s: &WeightSpectrum, ps: &[u32]) -> Result<*mut SlConfig, Failure> {
    let (inv, _) = invariants_with_fits(s, ps, DEFAULT_GUARD).map_err(Failure::input)?;
    Ok(Box::into_raw(Box::new(SlConfig { inv })))
}

/// Builds invariants from a weight-spectrum JSON document, fitting `N_p^p`
/// for each even `p` in `p_list`.
///
/// # Safety
/// `json` must be a nul-terminated string, `p_list` must hold `p_len`
/// values, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_config_from_spectrum_json(
    json: *const c_char,
    p_list: *const u32,
    p_len: usize,
    out: *mut *mut SlConfig,
) -> SlStatus {
    guard(|| {
        let out = out_ref(out)?;
        let s: WeightSpectrum = parse(read_str(json)?)?;
        *out = config_from_spectrum(&s, &even_exponents(p_list, p_len)?)?;
        Ok(())
    })
}

#[derive(serde::Deserialize)]
struct ToricInput {
    polytope: LatticePolytope,
    function: PLConvexFunction,
}

/// Builds invariants from `{"polytope": …, "function": …}` using the lattice
/// sums for `k` in `k_min..=k_max`.
///
/// # Safety
/// As for [`sl_config_from_spectrum_json`].
#[no_mangle]
pub unsafe extern "C" fn sl_config_from_toric_json(
    json: *const c_char,
    k_min: i64,
    k_max: i64,
    p_list: *const u32,
    p_len: usize,
    out: *mut *mut SlConfig,
) -> SlStatus {
    guard(|| {
        let out = out_ref(out)?;
        let input: ToricInput = parse(read_str(json)?)?;
        let s = weight_spectrum(&input.polytope, &input.function, k_min, k_max)
            .map_err(Failure::input)?;
        *out = config_from_spectrum(&s, &even_exponents(p_list, p_len)?)?;
        Ok(())
    })
}

/// # Safety
/// `c` must be null or a handle from an `sl_config_from_*` call not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_config_free(c: *mut SlConfig) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Exact invariant by name: `a0`, `a1`, `b0`, `b1`, `Q`, `futaki`, `N2^2`,
/// or `Np^p` for a fitted even `p`.
///
/// # Safety
/// `c` must be a live handle, `name` a nul-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sl_config_get(
    c: *const SlConfig,
    name: *const c_char,
    out: *mut *mut c_char,
) -> SlStatus {
    guard(|| {
        let inv = &handle(c)?.inv;
        let name = read_str(name)?;
        let out = out_ref(out)?;
        let value = match name {
            "a0" => inv.a0.clone(),
            "a1" => inv.a1.clone(),
            "b0" => inv.b0.clone(),
            "b1" => inv.b1.clone(),
            "Q" => inv.q.clone(),
            "futaki" => inv.futaki.clone(),
            "N2^2" => inv.n2_squared(),
            other => other
                .strip_prefix('N')
                .and_then(|rest| rest.split_once('^'))
                .filter(|(a, b)| a == b)
                .and_then(|(a, _)| a.parse::<u32>().ok())
                .and_then(|p| inv.np_pow_p.get(&p).cloned())
                .ok_or_else(|| {
                    Failure(
                        SlStatus::NotAvailable,
                        format!("no invariant named {other:?}"),
                    )
                })?,
        };
        *out = c_string(value.to_string());
        Ok(())
    })
}

/// Ψ̂_p as a double, for a fitted even `p` with `N_p > 0`.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_config_psi_hat(c: *const SlConfig, p: u32, out: *mut f64) -> SlStatus {
    guard(|| {
        let inv = &handle(c)?.inv;
        let out = out_ref(out)?;
        let v = inv.psi_hat.get(&p).ok_or_else(|| {
            Failure(
                SlStatus::NotAvailable,
                format!("psi_hat_{p} was not computed"),
            )
        })?;
        *out = v.to_f64();
        Ok(())
    })
}

/// The round metric (`epsilon = 0`) or its perturbation by
/// `epsilon·x²(1−x)²`, `|epsilon| <= 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_metric_new(epsilon: f64, out: *mut *mut SlMetric) -> SlStatus {
    guard(|| {
        let out = out_ref(out)?;
        let metric = InvariantMetricCP1::perturbed(epsilon).map_err(Failure::input)?;
        *out = Box::into_raw(Box::new(SlMetric { metric }));
        Ok(())
    })
}

/// # Safety
/// `m` must be null or a handle from [`sl_metric_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sl_metric_free(m: *mut SlMetric) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// `sup |η_k − S|` for the Bergman density of states at level `k`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_metric_density_error(
    m: *const SlMetric,
    k: u32,
    out: *mut f64,
) -> SlStatus {
    guard(|| {
        let m = &handle(m)?.metric;
        let out = out_ref(out)?;
        let dos = m
            .density_of_states(k)
            .map_err(|e| Failure(SlStatus::Numerical, e.to_string()))?;
        *out = dos.sup_deviation(m);
        Ok(())
    })
}

/// Schatten q-norm of the trace-free moment matrix at level `k`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_metric_moment_norm(
    m: *const SlMetric,
    k: u32,
    q: f64,
    out: *mut f64,
) -> SlStatus {
    guard(|| {
        let m = &handle(m)?.metric;
        let out = out_ref(out)?;
        if q.is_nan() || q < 1.0 {
            return Err(Failure::input(format!("q = {q} must be at least 1")));
        }
        let rep = moment_bound_check(m, &[k], q, 0.0)
            .map_err(|e| Failure(SlStatus::Numerical, e.to_string()))?;
        *out = rep.rows[0].norm;
        Ok(())
    })
}

/// `‖S − Ŝ‖_{L^q}` and the Hölder quotient for exponent `p` (q conjugate).
///
/// # Safety
/// `m` must be a live handle; `lhs` and `rhs` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_metric_holder(
    m: *const SlMetric,
    p: f64,
    lhs: *mut f64,
    rhs: *mut f64,
) -> SlStatus {
    guard(|| {
        let m = &handle(m)?.metric;
        let (lhs, rhs) = (out_ref(lhs)?, out_ref(rhs)?);
        let rep = holder_chain(m, p).map_err(|e| Failure(SlStatus::Numerical, e.to_string()))?;
        *lhs = rep.lhs;
        *rhs = rep.rhs;
        Ok(())
    })
}

/// Chow weight `FCh` of a named conic degeneration
/// (`conic-a`, `conic-b`, `conic-trivial`).
///
/// # Safety
/// `name` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sl_conic_fch(name: *const c_char, out: *mut f64) -> SlStatus {
    guard(|| {
        let ex = DegenerationExample::by_name(read_str(name)?).map_err(Failure::input)?;
        let out = out_ref(out)?;
        *out = ex
            .fch(&Quadrature::default())
            .map_err(|e| Failure(SlStatus::Numerical, e.to_string()))?
            .fch;
        Ok(())
    })
}
