//! C ABI for the repvol library.
//!
//! Handles are opaque pointers owned by Rust; every constructor has a
//! matching `_free`. Functions return `RvStatus`; on failure a thread-local
//! message is readable through `rv_last_error_message` until the next call
//! on the same thread. Complex arrays are interleaved (re, im) doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use repvol::equations::{
    build_equations_with, newton_solve, residual, volume_of_shapes, NewtonOptions, ShapeVector,
};
use repvol::holonomy::{develop, straighten_volume, Representation};
use repvol::moebius::FixedPointPolicy;
use repvol::trig::Triangulation;

/// Status codes mirrored by the CLI's exit-code discipline.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum RvStatus {
    Ok = 0,
    InvalidArgument = 1,
    ParseError = 2,
    NoSolution = 3,
    RelatorGate = 4,
    NumericError = 5,
}

pub struct RvTriangulation {
    inner: Triangulation,
}

pub struct RvRepresentation {
    inner: Representation,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(cleaned).unwrap();
    });
}

fn fail(status: RvStatus, msg: &str) -> RvStatus {
    set_error(msg);
    status
}

/// Message for the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a TRIG JSON document into a triangulation handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string; `out` must be a valid
/// pointer. On success `*out` owns the handle and must be released with
/// `rv_triangulation_free`.
#[no_mangle]
pub unsafe extern "C" fn rv_triangulation_parse(
    json: *const c_char,
    out: *mut *mut RvTriangulation,
) -> RvStatus {
    if json.is_null() || out.is_null() {
        return fail(RvStatus::InvalidArgument, "null pointer argument");
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => return fail(RvStatus::InvalidArgument, "input is not valid UTF-8"),
    };
    match Triangulation::parse(text) {
        Ok(t) => {
            *out = Box::into_raw(Box::new(RvTriangulation { inner: t }));
            RvStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            fail(RvStatus::ParseError, &e.to_string())
        }
    }
}

/// # Safety
/// `t` must be a handle from `rv_triangulation_parse`, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rv_triangulation_free(t: *mut RvTriangulation) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live triangulation handle.
#[no_mangle]
pub unsafe extern "C" fn rv_tet_count(t: *const RvTriangulation) -> usize {
    t.as_ref().map_or(0, |t| t.inner.tet_count)
}

/// # Safety
/// `t` must be a live triangulation handle.
#[no_mangle]
pub unsafe extern "C" fn rv_cusp_count(t: *const RvTriangulation) -> usize {
    t.as_ref().map_or(0, |t| t.inner.cusp_count)
}

/// # Safety
/// `t` must be a live triangulation handle.
#[no_mangle]
pub unsafe extern "C" fn rv_edge_class_count(t: *const RvTriangulation) -> usize {
    t.as_ref().map_or(0, |t| t.inner.edge_classes().len())
}

/// # Safety
/// `t` must be a live triangulation handle.
#[no_mangle]
pub unsafe extern "C" fn rv_generator_count(t: *const RvTriangulation) -> usize {
    t.as_ref().map_or(0, |t| t.inner.generator_count())
}

unsafe fn filling_from(t: &Triangulation, fillings: *const i64) -> Vec<Option<(i64, i64)>> {
    if fillings.is_null() {
        return t.filling.clone();
    }
    let slice = std::slice::from_raw_parts(fillings, 2 * t.cusp_count);
    (0..t.cusp_count)
        .map(|c| {
            let (p, q) = (slice[2 * c], slice[2 * c + 1]);
            if p == 0 && q == 0 {
                None
            } else {
                Some((p, q))
            }
        })
        .collect()
}

/// Solves the gluing equations from the regular starting point.
///
/// `fillings` is either NULL (use the file's filling spec) or an array of
/// 2 * cusp_count integers, the slope (p, q) per cusp with (0, 0) meaning
/// unfilled. `shapes_out` receives 2 * tet_count doubles (re, im per
/// tetrahedron); `volume_out` and `residual_out` may be NULL.
///
/// # Safety
/// Pointers must be valid for the sizes described above.
#[no_mangle]
pub unsafe extern "C" fn rv_solve(
    t: *const RvTriangulation,
    fillings: *const i64,
    shapes_out: *mut f64,
    volume_out: *mut f64,
    residual_out: *mut f64,
) -> RvStatus {
    let Some(t) = t.as_ref() else {
        return fail(RvStatus::InvalidArgument, "null triangulation");
    };
    if shapes_out.is_null() {
        return fail(RvStatus::InvalidArgument, "null shapes_out");
    }
    let filling = filling_from(&t.inner, fillings);
    let sys = match build_equations_with(&t.inner, &filling) {
        Ok(s) => s,
        Err(e) => return fail(RvStatus::ParseError, &e.to_string()),
    };
    let start = ShapeVector::regular(t.inner.tet_count);
    match newton_solve(&sys, &start, &NewtonOptions::default()) {
        Ok(result) => {
            let out = std::slice::from_raw_parts_mut(shapes_out, 2 * t.inner.tet_count);
            for (i, z) in result.shapes.entries().iter().enumerate() {
                out[2 * i] = z.re;
                out[2 * i + 1] = z.im;
            }
            if !volume_out.is_null() {
                *volume_out = volume_of_shapes(&result.shapes).total;
            }
            if !residual_out.is_null() {
                *residual_out = residual(&sys, &result.shapes);
            }
            RvStatus::Ok
        }
        Err(e) => fail(RvStatus::NoSolution, &e.to_string()),
    }
}

unsafe fn shapes_from(t: &Triangulation, shapes: *const f64) -> Result<ShapeVector, String> {
    if shapes.is_null() {
        return Err("null shapes".into());
    }
    let slice = std::slice::from_raw_parts(shapes, 2 * t.tet_count);
    let entries = (0..t.tet_count)
        .map(|i| repvol::num_complex::Complex64::new(slice[2 * i], slice[2 * i + 1]))
        .collect();
    ShapeVector::new(entries).map_err(|e| e.to_string())
}

/// Total signed volume of a shape vector (2 * tet_count interleaved doubles).
///
/// # Safety
/// `shapes` must point to 2 * tet_count doubles.
#[no_mangle]
pub unsafe extern "C" fn rv_shapes_volume(
    t: *const RvTriangulation,
    shapes: *const f64,
    volume_out: *mut f64,
) -> RvStatus {
    let Some(t) = t.as_ref() else {
        return fail(RvStatus::InvalidArgument, "null triangulation");
    };
    if volume_out.is_null() {
        return fail(RvStatus::InvalidArgument, "null volume_out");
    }
    match shapes_from(&t.inner, shapes) {
        Ok(sv) => {
            *volume_out = volume_of_shapes(&sv).total;
            RvStatus::Ok
        }
        Err(e) => fail(RvStatus::InvalidArgument, &e),
    }
}

/// Develops a shape solution into a representation handle.
///
/// # Safety
/// `shapes` must point to 2 * tet_count doubles satisfying the edge
/// equations; `out` must be valid and is owned by the caller on success.
#[no_mangle]
pub unsafe extern "C" fn rv_develop(
    t: *const RvTriangulation,
    shapes: *const f64,
    out: *mut *mut RvRepresentation,
) -> RvStatus {
    let Some(t) = t.as_ref() else {
        return fail(RvStatus::InvalidArgument, "null triangulation");
    };
    if out.is_null() {
        return fail(RvStatus::InvalidArgument, "null out");
    }
    let sv = match shapes_from(&t.inner, shapes) {
        Ok(sv) => sv,
        Err(e) => return fail(RvStatus::InvalidArgument, &e),
    };
    match develop(&t.inner, &sv) {
        Ok((_, rep)) => {
            *out = Box::into_raw(Box::new(RvRepresentation { inner: rep }));
            RvStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            fail(RvStatus::NumericError, &e.to_string())
        }
    }
}

/// Parses a representation JSON document against a triangulation.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rv_representation_parse(
    t: *const RvTriangulation,
    json: *const c_char,
    out: *mut *mut RvRepresentation,
) -> RvStatus {
    let Some(t) = t.as_ref() else {
        return fail(RvStatus::InvalidArgument, "null triangulation");
    };
    if json.is_null() || out.is_null() {
        return fail(RvStatus::InvalidArgument, "null pointer argument");
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(s) => s,
        Err(_) => return fail(RvStatus::InvalidArgument, "input is not valid UTF-8"),
    };
    match Representation::parse(&t.inner, text) {
        Ok(rep) => {
            *out = Box::into_raw(Box::new(RvRepresentation { inner: rep }));
            RvStatus::Ok
        }
        Err(e) => {
            *out = ptr::null_mut();
            fail(RvStatus::ParseError, &e.to_string())
        }
    }
}

/// # Safety
/// `r` must be a handle from `rv_develop`/`rv_representation_parse`.
#[no_mangle]
pub unsafe extern "C" fn rv_representation_free(r: *mut RvRepresentation) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// # Safety
/// `r` must be a live representation handle.
#[no_mangle]
pub unsafe extern "C" fn rv_relator_residual(r: *const RvRepresentation) -> f64 {
    r.as_ref().map_or(f64::NAN, |r| r.inner.relator_residual)
}

/// Straightened volume of a representation. `repelling` selects the
/// fixed-point policy (0 attracting, nonzero repelling).
///
/// # Safety
/// Handles must be live; `volume_out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn rv_straighten_volume(
    t: *const RvTriangulation,
    r: *const RvRepresentation,
    repelling: i32,
    volume_out: *mut f64,
) -> RvStatus {
    let (Some(t), Some(r)) = (t.as_ref(), r.as_ref()) else {
        return fail(RvStatus::InvalidArgument, "null handle");
    };
    if volume_out.is_null() {
        return fail(RvStatus::InvalidArgument, "null volume_out");
    }
    let policy = if repelling != 0 {
        FixedPointPolicy::repelling()
    } else {
        FixedPointPolicy::attracting()
    };
    match straighten_volume(&t.inner, &r.inner, policy) {
        Ok(report) => {
            *volume_out = report.total;
            RvStatus::Ok
        }
        Err(e) => {
            let status = match e {
                repvol::holonomy::HolonomyError::RelatorResidualTooLarge(_) => {
                    RvStatus::RelatorGate
                }
                _ => RvStatus::NumericError,
            };
            fail(status, &e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG8: &str = include_str!("../../core/fixtures/fig8.trig.json");

    unsafe fn parse_fixture() -> *mut RvTriangulation {
        let json = CString::new(FIG8).unwrap();
        let mut handle: *mut RvTriangulation = ptr::null_mut();
        let status = rv_triangulation_parse(json.as_ptr(), &mut handle);
        assert!(matches!(status, RvStatus::Ok));
        assert!(!handle.is_null());
        handle
    }

    #[test]
    fn parse_counts_solve_and_straighten() {
        unsafe {
            let t = parse_fixture();
            assert_eq!(rv_tet_count(t), 2);
            assert_eq!(rv_cusp_count(t), 1);
            assert_eq!(rv_edge_class_count(t), 2);
            assert_eq!(rv_generator_count(t), 3);

            let mut shapes = [0.0f64; 4];
            let mut volume = 0.0f64;
            let mut res = 0.0f64;
            let status = rv_solve(t, ptr::null(), shapes.as_mut_ptr(), &mut volume, &mut res);
            assert!(matches!(status, RvStatus::Ok));
            assert!((volume - 2.0298832128).abs() < 1e-9);
            assert!(res < 1e-12);
            assert!((shapes[0] - 0.5).abs() < 1e-10);

            let mut vol2 = 0.0f64;
            let status = rv_shapes_volume(t, shapes.as_ptr(), &mut vol2);
            assert!(matches!(status, RvStatus::Ok));
            assert!((vol2 - volume).abs() < 1e-12);

            let mut rep: *mut RvRepresentation = ptr::null_mut();
            let status = rv_develop(t, shapes.as_ptr(), &mut rep);
            assert!(matches!(status, RvStatus::Ok));
            assert!(rv_relator_residual(rep) < 1e-10);

            let mut straightened = 0.0f64;
            let status = rv_straighten_volume(t, rep, 0, &mut straightened);
            assert!(matches!(status, RvStatus::Ok));
            assert!((straightened - volume).abs() < 1e-8);

            rv_representation_free(rep);
            rv_triangulation_free(t);
        }
    }

    #[test]
    fn filled_solve_through_ffi() {
        unsafe {
            let t = parse_fixture();
            let fillings: [i64; 2] = [5, 1];
            let mut shapes = [0.0f64; 4];
            let mut volume = 0.0f64;
            let status = rv_solve(
                t,
                fillings.as_ptr(),
                shapes.as_mut_ptr(),
                &mut volume,
                ptr::null_mut(),
            );
            assert!(matches!(status, RvStatus::Ok));
            assert!((volume - 0.9813688289).abs() < 1e-9);
            rv_triangulation_free(t);
        }
    }

    #[test]
    fn errors_set_message_and_status() {
        unsafe {
            let json = CString::new("{ not json").unwrap();
            let mut handle: *mut RvTriangulation = ptr::null_mut();
            let status = rv_triangulation_parse(json.as_ptr(), &mut handle);
            assert!(matches!(status, RvStatus::ParseError));
            assert!(handle.is_null());
            let msg = CStr::from_ptr(rv_last_error_message());
            assert!(msg.to_str().unwrap().contains("MalformedInput"));

            let status = rv_triangulation_parse(ptr::null(), &mut handle);
            assert!(matches!(status, RvStatus::InvalidArgument));
        }
    }
}
