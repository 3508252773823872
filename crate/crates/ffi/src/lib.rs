//! C ABI over `vilenkin-lab`.
//!
//! Groups and weight sequences are opaque handles created by `vl_*_new`
//! functions and released with the matching `vl_*_free`. Every fallible
//! call returns a [`VlStatus`]; on failure a message is kept per thread and
//! can be read with [`vl_last_error_message`]. Function values are arrays of
//! [`VlComplex`] of length `M_N`, indexed by cell.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use vilenkin_lab::kernels::{
    dirichlet_kernel, fejer_kernel, fejer_kernel_closed, norlund_kernel_spectral,
    tail_kernel_spectral,
};
use vilenkin_lab::spaces::{make_atom, quasi_norm_report};
use vilenkin_lab::spectral::{forward_transform, inverse_transform};
use vilenkin_lab::summability::norlund_mean_spectral;
use vilenkin_lab::{Atom, Complex64, CylinderFunction, Error, GroupSpec, Spectrum, WeightSequence};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidGroup = 2,
    OutOfRange = 3,
    LengthMismatch = 4,
    InvalidWeights = 5,
    InvalidAtom = 6,
    InvalidValue = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VlComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VlKernelKind {
    Dirichlet = 0,
    Fejer = 1,
    /// Closed form of `K_{M_j}`; `n` is `j`.
    FejerClosed = 2,
    Norlund = 3,
    Tail = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VlQuasiNorms {
    pub lp: f64,
    pub weak_lp: f64,
    pub hp: f64,
}

/// Opaque group handle.
pub struct VlGroup(Arc<GroupSpec>);

/// Opaque weight-sequence handle.
pub struct VlWeights(WeightSequence);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(e: &Error) -> VlStatus {
    match e {
        Error::InvalidRadix { .. }
        | Error::LevelTooLarge { .. }
        | Error::ZeroLevel
        | Error::Overflow => VlStatus::InvalidGroup,
        Error::OutOfRange { .. } | Error::InvalidDigit { .. } => VlStatus::OutOfRange,
        Error::LengthMismatch { .. } | Error::SpecMismatch => VlStatus::LengthMismatch,
        Error::InvalidWeights(_) => VlStatus::InvalidWeights,
        Error::InvalidAtom(_) => VlStatus::InvalidAtom,
        Error::NonFinite(_) | Error::Parse(_) => VlStatus::InvalidValue,
        _ => VlStatus::Internal,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `body`, translating errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> VlStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            VlStatus::Ok
        }
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("{what} is null"));
            VlStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            VlStatus::Internal
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a, T>(p: *mut T, len: usize, what: &'static str) -> Result<&'a mut [T], Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

fn check_len(expected: usize, actual: usize) -> Result<(), Failure> {
    if expected != actual {
        return Err(Error::LengthMismatch { expected, actual }.into());
    }
    Ok(())
}

fn to_complex(v: &[VlComplex]) -> Vec<Complex64> {
    v.iter().map(|c| Complex64::new(c.re, c.im)).collect()
}

fn write_out(dst: &mut [VlComplex], src: &[Complex64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = VlComplex { re: s.re, im: s.im };
    }
}

unsafe fn function_in(
    group: &VlGroup,
    values: *const VlComplex,
    len: usize,
) -> Result<CylinderFunction, Failure> {
    let v = input(values, len, "values")?;
    check_len(group.0.size(), len)?;
    Ok(CylinderFunction::new(group.0.clone(), to_complex(v))?)
}

/// Length in bytes, without the terminating nul, of the last error message
/// on this thread; 0 if the last call succeeded.
#[no_mangle]
pub extern "C" fn vl_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |m| m.as_bytes().len()))
}

/// Copies the last error message into `buf` (nul-terminated, truncated to
/// `len - 1` bytes). Returns the number of bytes written without the nul.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn vl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |m| m.as_bytes());
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Creates the level-`level` group from the first `level` of `count`
/// radices.
///
/// # Safety
/// `radices` must point to `count` values and `out` to a writable handle
/// slot.
#[no_mangle]
pub unsafe extern "C" fn vl_group_new(
    radices: *const usize,
    count: usize,
    level: usize,
    out: *mut *mut VlGroup,
) -> VlStatus {
    guard(|| {
        let radices = input(radices, count, "radices")?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let spec = GroupSpec::new(radices, level)?;
        *out = Box::into_raw(Box::new(VlGroup(Arc::new(spec))));
        Ok(())
    })
}

/// # Safety
/// `group` must be null or a handle from [`vl_group_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vl_group_free(group: *mut VlGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// `M_N`, or 0 for a null handle.
///
/// # Safety
/// `group` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vl_group_size(group: *const VlGroup) -> usize {
    group.as_ref().map_or(0, |g| g.0.size())
}

/// `N`, or 0 for a null handle.
///
/// # Safety
/// `group` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn vl_group_level(group: *const VlGroup) -> usize {
    group.as_ref().map_or(0, |g| g.0.level())
}

unsafe fn new_weights(
    out: *mut *mut VlWeights,
    build: impl FnOnce() -> vilenkin_lab::Result<WeightSequence>,
) -> VlStatus {
    guard(|| {
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = Box::into_raw(Box::new(VlWeights(build()?)));
        Ok(())
    })
}

/// Unit weights `q_0..q_{n_max-1}`.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn vl_weights_constant(n_max: usize, out: *mut *mut VlWeights) -> VlStatus {
    new_weights(out, || WeightSequence::constant(n_max))
}

/// Iterated-logarithm weights `log^(beta)(k^alpha)`.
///
/// # Safety
/// `out` must point to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn vl_weights_log(
    alpha: f64,
    beta: u32,
    n_max: usize,
    out: *mut *mut VlWeights,
) -> VlStatus {
    new_weights(out, || WeightSequence::log_family(alpha, beta, n_max))
}

/// Caller-supplied weights; rejected unless finite, `q_0 > 0` and
/// non-decreasing.
///
/// # Safety
/// `q` must point to `len` values and `out` to a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn vl_weights_custom(
    q: *const f64,
    len: usize,
    out: *mut *mut VlWeights,
) -> VlStatus {
    if q.is_null() {
        return guard(|| Err(Failure::Null("q")));
    }
    let q = slice::from_raw_parts(q, len).to_vec();
    new_weights(out, || WeightSequence::custom(q))
}

/// # Safety
/// `weights` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vl_weights_free(weights: *mut VlWeights) {
    if !weights.is_null() {
        drop(Box::from_raw(weights));
    }
}

/// Vilenkin-Fourier coefficients of `values` (both arrays of length `M_N`).
///
/// # Safety
/// `values` and `coeffs` must point to `len` elements; `group` must be live.
#[no_mangle]
pub unsafe extern "C" fn vl_forward_transform(
    group: *const VlGroup,
    values: *const VlComplex,
    coeffs: *mut VlComplex,
    len: usize,
) -> VlStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let f = function_in(g, values, len)?;
        let dst = output(coeffs, len, "coeffs")?;
        write_out(dst, forward_transform(&f).coeffs());
        Ok(())
    })
}

/// Synthesizes cell values from coefficients.
///
/// # Safety
/// `coeffs` and `values` must point to `len` elements; `group` must be live.
#[no_mangle]
pub unsafe extern "C" fn vl_inverse_transform(
    group: *const VlGroup,
    coeffs: *const VlComplex,
    values: *mut VlComplex,
    len: usize,
) -> VlStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let c = input(coeffs, len, "coeffs")?;
        check_len(g.0.size(), len)?;
        let s = Spectrum::new(g.0.clone(), to_complex(c))?;
        let dst = output(values, len, "values")?;
        write_out(dst, inverse_transform(&s).values());
        Ok(())
    })
}

/// Evaluates a kernel on every cell. `weights` is needed for `Norlund` and
/// `Tail`, `n0` only for `Tail`.
///
/// # Safety
/// `values` must point to `len` elements; handles must be live or null.
#[no_mangle]
pub unsafe extern "C" fn vl_kernel(
    group: *const VlGroup,
    kind: VlKernelKind,
    n: usize,
    n0: usize,
    weights: *const VlWeights,
    values: *mut VlComplex,
    len: usize,
) -> VlStatus {
    guard(|| {
        let g = deref(group, "group")?;
        check_len(g.0.size(), len)?;
        let spec = &g.0;
        let kernel = match kind {
            VlKernelKind::Dirichlet => dirichlet_kernel(n, spec)?,
            VlKernelKind::Fejer => fejer_kernel(n, spec)?,
            VlKernelKind::FejerClosed => fejer_kernel_closed(n, spec)?,
            VlKernelKind::Norlund => {
                norlund_kernel_spectral(n, &deref(weights, "weights")?.0, spec)?
            }
            VlKernelKind::Tail => tail_kernel_spectral(n, n0, &deref(weights, "weights")?.0, spec)?,
        };
        write_out(output(values, len, "values")?, kernel.values());
        Ok(())
    })
}

/// The Nörlund mean `t_n f`.
///
/// # Safety
/// `values` and `mean` must point to `len` elements; handles must be live.
#[no_mangle]
pub unsafe extern "C" fn vl_norlund_mean(
    group: *const VlGroup,
    weights: *const VlWeights,
    values: *const VlComplex,
    n: usize,
    mean: *mut VlComplex,
    len: usize,
) -> VlStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let w = deref(weights, "weights")?;
        let f = function_in(g, values, len)?;
        let t = norlund_mean_spectral(&forward_transform(&f), n, &w.0)?;
        write_out(output(mean, len, "mean")?, t.values());
        Ok(())
    })
}

/// `L_p`, weak-`L_p` and `H_p` quasi-norms of `values`, `0 < p <= 1`.
///
/// # Safety
/// `values` must point to `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn vl_quasi_norms(
    group: *const VlGroup,
    values: *const VlComplex,
    len: usize,
    p: f64,
    out: *mut VlQuasiNorms,
) -> VlStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let f = function_in(g, values, len)?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        let r = quasi_norm_report(&f, p)?;
        *out = VlQuasiNorms {
            lp: r.lp,
            weak_lp: r.weak_lp,
            hp: r.hp,
        };
        Ok(())
    })
}

/// Draws the seeded `p`-atom supported on `I_{support_level}(0)`.
///
/// # Safety
/// `values` must point to `len` elements; `group` must be live.
#[no_mangle]
pub unsafe extern "C" fn vl_make_atom(
    group: *const VlGroup,
    support_level: usize,
    p: f64,
    seed: u64,
    values: *mut VlComplex,
    len: usize,
) -> VlStatus {
    guard(|| {
        let g = deref(group, "group")?;
        check_len(g.0.size(), len)?;
        let atom = make_atom(&g.0, support_level, p, seed)?;
        write_out(output(values, len, "values")?, atom.function().values());
        Ok(())
    })
}

/// Checks the `p`-atom conditions; `VL_STATUS_INVALID_ATOM` if they fail.
///
/// # Safety
/// `values` must point to `len` elements; `group` must be live.
#[no_mangle]
pub unsafe extern "C" fn vl_check_atom(
    group: *const VlGroup,
    values: *const VlComplex,
    len: usize,
    p: f64,
    support_level: usize,
) -> VlStatus {
    guard(|| {
        let g = deref(group, "group")?;
        let f = function_in(g, values, len)?;
        Atom::new(f, p, support_level)?;
        Ok(())
    })
}
