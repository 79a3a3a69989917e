//! C ABI over the exact free-probability library: opaque handles for spaces,
//! jump measures, and test functions, plus trace/moment evaluators that write
//! `"p/q"` strings into caller-supplied buffers.
//!
//! All functions return an `FpStatus`; no Rust panic crosses the boundary.

use std::ffi::CStr;
use std::os::raw::{c_char, c_longlong};
use std::panic::{catch_unwind, AssertUnwindSafe};

use freepart::rational::{rat, rat_str, Rat};
use freepart::space::{DiscreteSpace, JumpMeasure, TestFunction};
use freepart::systems::{
    centered_fixed_n_trace, centered_poissonized_trace, fixed_n_trace, poissonized_trace,
    ParticleCount, ParticleSystemSpec,
};
use freepart::targets::{centered_levy_moment, levy_free_cumulant, levy_moment};
use freepart::Error;

/// Status codes shared by every entry point.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpStatus {
    /// Success.
    Ok = 0,
    /// Invalid argument (null pointer, zero denominator, bad data).
    ErrInvalid = 1,
    /// The input describes an inconsistent model (e.g. nonpositive total mass).
    ErrConfig = 2,
    /// A size cap or truncation bound was exceeded.
    ErrResource = 3,
    /// The caller's output buffer is too small.
    ErrBuffer = 4,
    /// An internal invariant failed.
    ErrInternal = 5,
}

/// Opaque discrete spatial measure.
pub struct FpSpace(DiscreteSpace);
/// Opaque jump-size measure.
pub struct FpJumpMeasure(JumpMeasure);
/// Opaque test function on a space.
pub struct FpFunction(TestFunction);

fn status_of(e: &Error) -> FpStatus {
    match e.exit_code() {
        3 => FpStatus::ErrResource,
        _ => FpStatus::ErrConfig,
    }
}

fn guard<F: FnOnce() -> FpStatus>(f: F) -> FpStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(FpStatus::ErrInternal)
}

/// Copy a rational into `buf` as a NUL-terminated `"p/q"` string.
fn write_rat(x: &Rat, buf: *mut c_char, buf_len: usize) -> FpStatus {
    let s = rat_str(x);
    let bytes = s.as_bytes();
    if buf.is_null() || buf_len < bytes.len() + 1 {
        return FpStatus::ErrBuffer;
    }
    unsafe {
        std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
        *buf.add(bytes.len()) = 0;
    }
    FpStatus::Ok
}

unsafe fn slice_or_invalid<'a, T>(ptr: *const T, len: usize) -> Option<&'a [T]> {
    if len == 0 {
        Some(&[])
    } else if ptr.is_null() {
        None
    } else {
        Some(std::slice::from_raw_parts(ptr, len))
    }
}

fn build_rats(nums: &[c_longlong], dens: &[c_longlong]) -> Option<Vec<Rat>> {
    nums.iter()
        .zip(dens)
        .map(|(&n, &d)| if d == 0 { None } else { Some(rat(n, d)) })
        .collect()
}

/// Create a discrete space from cell names and `num[i]/den[i]` masses.
///
/// # Safety
/// `names` must point to `n_cells` valid NUL-terminated UTF-8 strings, and
/// `mass_num`/`mass_den` to `n_cells` integers; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_space_new(
    names: *const *const c_char,
    mass_num: *const c_longlong,
    mass_den: *const c_longlong,
    n_cells: usize,
    out: *mut *mut FpSpace,
) -> FpStatus {
    guard(|| {
        if out.is_null() || n_cells == 0 {
            return FpStatus::ErrInvalid;
        }
        let (names, nums, dens) = match (
            slice_or_invalid(names, n_cells),
            slice_or_invalid(mass_num, n_cells),
            slice_or_invalid(mass_den, n_cells),
        ) {
            (Some(a), Some(b), Some(c)) => (a, b, c),
            _ => return FpStatus::ErrInvalid,
        };
        let Some(masses) = build_rats(nums, dens) else {
            return FpStatus::ErrInvalid;
        };
        let mut cells = Vec::with_capacity(n_cells);
        for (&name_ptr, mass) in names.iter().zip(masses) {
            if name_ptr.is_null() {
                return FpStatus::ErrInvalid;
            }
            let Ok(name) = CStr::from_ptr(name_ptr).to_str() else {
                return FpStatus::ErrInvalid;
            };
            cells.push((name.to_string(), mass));
        }
        match DiscreteSpace::new(cells) {
            Ok(sp) => {
                *out = Box::into_raw(Box::new(FpSpace(sp)));
                FpStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Destroy a space handle. Null is a no-op.
///
/// # Safety
/// `sp` must be null or a pointer from `fp_space_new`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fp_space_free(sp: *mut FpSpace) {
    if !sp.is_null() {
        drop(Box::from_raw(sp));
    }
}

/// Create a jump-size measure from atoms `size[i] -> mass[i]` (rationals as
/// num/den pairs).
///
/// # Safety
/// The four arrays must hold `n_atoms` integers each; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fp_jump_measure_new(
    size_num: *const c_longlong,
    size_den: *const c_longlong,
    mass_num: *const c_longlong,
    mass_den: *const c_longlong,
    n_atoms: usize,
    out: *mut *mut FpJumpMeasure,
) -> FpStatus {
    guard(|| {
        if out.is_null() || n_atoms == 0 {
            return FpStatus::ErrInvalid;
        }
        let parts = (
            slice_or_invalid(size_num, n_atoms),
            slice_or_invalid(size_den, n_atoms),
            slice_or_invalid(mass_num, n_atoms),
            slice_or_invalid(mass_den, n_atoms),
        );
        let (Some(sn), Some(sd), Some(mn), Some(md)) = parts else {
            return FpStatus::ErrInvalid;
        };
        let (Some(sizes), Some(masses)) = (build_rats(sn, sd), build_rats(mn, md)) else {
            return FpStatus::ErrInvalid;
        };
        match JumpMeasure::new(sizes.into_iter().zip(masses).collect()) {
            Ok(jm) => {
                *out = Box::into_raw(Box::new(FpJumpMeasure(jm)));
                FpStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// The unit point mass at jump size 1 (the unmarked / free Poisson case).
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fp_jump_measure_delta_one(out: *mut *mut FpJumpMeasure) -> FpStatus {
    guard(|| {
        if out.is_null() {
            return FpStatus::ErrInvalid;
        }
        *out = Box::into_raw(Box::new(FpJumpMeasure(JumpMeasure::delta_one())));
        FpStatus::Ok
    })
}

/// Destroy a jump-measure handle. Null is a no-op.
///
/// # Safety
/// `jm` must be null or an unfreed pointer from a jump-measure constructor.
#[no_mangle]
pub unsafe extern "C" fn fp_jump_measure_free(jm: *mut FpJumpMeasure) {
    if !jm.is_null() {
        drop(Box::from_raw(jm));
    }
}

/// Create a test function with value `num[i]/den[i]` on cell `i` of `sp`.
///
/// # Safety
/// `sp` must be a live space handle; `num`/`den` must hold one entry per cell.
#[no_mangle]
pub unsafe extern "C" fn fp_function_new(
    sp: *const FpSpace,
    num: *const c_longlong,
    den: *const c_longlong,
    n_values: usize,
    out: *mut *mut FpFunction,
) -> FpStatus {
    guard(|| {
        if sp.is_null() || out.is_null() {
            return FpStatus::ErrInvalid;
        }
        let space = &(*sp).0;
        let (Some(nums), Some(dens)) = (
            slice_or_invalid(num, n_values),
            slice_or_invalid(den, n_values),
        ) else {
            return FpStatus::ErrInvalid;
        };
        let Some(values) = build_rats(nums, dens) else {
            return FpStatus::ErrInvalid;
        };
        match TestFunction::new(space, values) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(FpFunction(f)));
                FpStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Destroy a function handle. Null is a no-op.
///
/// # Safety
/// `f` must be null or an unfreed pointer from `fp_function_new`.
#[no_mangle]
pub unsafe extern "C" fn fp_function_free(f: *mut FpFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

unsafe fn collect_word<'a>(
    word: *const *const FpFunction,
    word_len: usize,
) -> Option<Vec<&'a TestFunction>> {
    let ptrs = slice_or_invalid(word, word_len)?;
    if word_len == 0 {
        return None;
    }
    ptrs.iter()
        .map(|&p| if p.is_null() { None } else { Some(&(*p).0) })
        .collect()
}

/// Exact mixed moment of `n_particles` free particles in the vacuum-type
/// state; `centered != 0` subtracts each particle's mean first. The result
/// is written to `buf` as `"p/q"`.
///
/// # Safety
/// `sp` must be live; `jm` may be null (treated as a point mass at 1);
/// `word` must hold `word_len` live function handles; `buf` must have room
/// for `buf_len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fp_fixed_n_trace(
    sp: *const FpSpace,
    jm: *const FpJumpMeasure,
    n_particles: u64,
    word: *const *const FpFunction,
    word_len: usize,
    centered: i32,
    buf: *mut c_char,
    buf_len: usize,
) -> FpStatus {
    guard(|| {
        if sp.is_null() {
            return FpStatus::ErrInvalid;
        }
        let Some(fs) = collect_word(word, word_len) else {
            return FpStatus::ErrInvalid;
        };
        let spec = ParticleSystemSpec {
            space: (*sp).0.clone(),
            jumps: (!jm.is_null()).then(|| (*jm).0.clone()),
            count: ParticleCount::FixedN(n_particles),
        };
        let result = if centered != 0 {
            centered_fixed_n_trace(&spec, &fs)
        } else {
            fixed_n_trace(&spec, &fs)
        };
        match result {
            Ok(v) => write_rat(&v, buf, buf_len),
            Err(e) => status_of(&e),
        }
    })
}

/// Exact mixed moment with a Poisson(`alpha_num/alpha_den`) particle number.
///
/// # Safety
/// Same contract as `fp_fixed_n_trace`; `alpha_den` must be nonzero.
#[no_mangle]
pub unsafe extern "C" fn fp_poissonized_trace(
    sp: *const FpSpace,
    jm: *const FpJumpMeasure,
    alpha_num: c_longlong,
    alpha_den: c_longlong,
    word: *const *const FpFunction,
    word_len: usize,
    centered: i32,
    buf: *mut c_char,
    buf_len: usize,
) -> FpStatus {
    guard(|| {
        if sp.is_null() || alpha_den == 0 {
            return FpStatus::ErrInvalid;
        }
        let Some(fs) = collect_word(word, word_len) else {
            return FpStatus::ErrInvalid;
        };
        let spec = ParticleSystemSpec {
            space: (*sp).0.clone(),
            jumps: (!jm.is_null()).then(|| (*jm).0.clone()),
            count: ParticleCount::PoissonAlpha(rat(alpha_num, alpha_den)),
        };
        let result = if centered != 0 {
            centered_poissonized_trace(&spec, &fs)
        } else {
            poissonized_trace(&spec, &fs)
        };
        match result {
            Ok(v) => write_rat(&v, buf, buf_len),
            Err(e) => status_of(&e),
        }
    })
}

/// Moment of the limiting free Poisson / free Levy white noise.
///
/// # Safety
/// Same pointer contract as `fp_fixed_n_trace`.
#[no_mangle]
pub unsafe extern "C" fn fp_levy_moment(
    sp: *const FpSpace,
    jm: *const FpJumpMeasure,
    word: *const *const FpFunction,
    word_len: usize,
    centered: i32,
    buf: *mut c_char,
    buf_len: usize,
) -> FpStatus {
    guard(|| {
        if sp.is_null() {
            return FpStatus::ErrInvalid;
        }
        let Some(fs) = collect_word(word, word_len) else {
            return FpStatus::ErrInvalid;
        };
        let delta = JumpMeasure::delta_one();
        let jumps = if jm.is_null() { &delta } else { &(*jm).0 };
        let result = if centered != 0 {
            centered_levy_moment(&(*sp).0, jumps, &fs)
        } else {
            levy_moment(&(*sp).0, jumps, &fs)
        };
        match result {
            Ok(v) => write_rat(&v, buf, buf_len),
            Err(e) => status_of(&e),
        }
    })
}

/// Free cumulant of the limiting white noise for the given word.
///
/// # Safety
/// Same pointer contract as `fp_fixed_n_trace`.
#[no_mangle]
pub unsafe extern "C" fn fp_levy_free_cumulant(
    sp: *const FpSpace,
    jm: *const FpJumpMeasure,
    word: *const *const FpFunction,
    word_len: usize,
    buf: *mut c_char,
    buf_len: usize,
) -> FpStatus {
    guard(|| {
        if sp.is_null() {
            return FpStatus::ErrInvalid;
        }
        let Some(fs) = collect_word(word, word_len) else {
            return FpStatus::ErrInvalid;
        };
        let delta = JumpMeasure::delta_one();
        let jumps = if jm.is_null() { &delta } else { &(*jm).0 };
        match levy_free_cumulant(&(*sp).0, jumps, &fs) {
            Ok(v) => write_rat(&v, buf, buf_len),
            Err(e) => status_of(&e),
        }
    })
}
