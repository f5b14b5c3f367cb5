//! C ABI for the liverseg pipeline.
//!
//! Every object crosses the boundary as an opaque handle created and
//! destroyed by this library; every fallible call returns an [`LsStatus`]
//! and leaves a human-readable message retrievable through
//! [`ls_last_error_message`]. Out-parameters are written only on
//! `LS_STATUS_OK`. The generated header lives at `include/liverseg.h`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use liverseg::error::Error;
use liverseg::evaluation;
use liverseg::filtering::SeShape;
use liverseg::histogram::ThresholdPair;
use liverseg::imgio::{self, make_phantom, mask_to_image, BinaryMask, GrayImage};
use liverseg::pipeline::{dump_stages, run_pipeline, PipelineConfig, SegmentationResult};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A parameter was outside its documented range.
    InvalidArgument = 2,
    /// Reading or writing a file failed.
    IoError = 3,
    /// Input bytes did not parse as the expected format.
    MalformedInput = 4,
    /// The pipeline found no acceptable liver candidate.
    LiverNotFound = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Structuring element shape for [`ls_config_set_structuring_element`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LsSeShape {
    Square = 0,
    Cross = 1,
}

/// Opaque grayscale image handle.
pub struct LsImage(GrayImage);
/// Opaque binary mask handle.
pub struct LsMask(BinaryMask);
/// Opaque pipeline configuration handle.
pub struct LsConfig(PipelineConfig);
/// Opaque segmentation result handle.
pub struct LsResult(SegmentationResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: LsStatus, message: &str) -> LsStatus {
    set_error(message);
    status
}

fn fail_with(err: &Error) -> LsStatus {
    let status = match err {
        Error::MalformedHeader(_) | Error::TruncatedData { .. } | Error::UnsupportedMaxval(_) => {
            LsStatus::MalformedInput
        }
        Error::Io { .. } => LsStatus::IoError,
        Error::LiverNotFound { .. } => LsStatus::LiverNotFound,
        _ => LsStatus::InvalidArgument,
    };
    fail(status, &err.to_string())
}

fn guard(f: impl FnOnce() -> LsStatus) -> LsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(LsStatus::Panic, &format!("internal panic: {message}"))
        }
    }
}

/// # Safety
/// `ptr` must be null or valid for reads.
unsafe fn borrow<'a, T>(ptr: *const T) -> Option<&'a T> {
    ptr.as_ref()
}

unsafe fn path_from(ptr: *const c_char) -> Result<PathBuf, LsStatus> {
    if ptr.is_null() {
        return Err(fail(LsStatus::NullArgument, "path is null"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(LsStatus::InvalidArgument, "path is not valid UTF-8")),
    }
}

unsafe fn emit<T>(out: *mut *mut T, value: T) -> LsStatus {
    if out.is_null() {
        return fail(LsStatus::NullArgument, "output pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    LsStatus::Ok
}

/// Message describing the most recent failure on this thread. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ls_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ---- images ----------------------------------------------------------

/// Parses a binary PGM (P5) from memory.
///
/// # Safety
/// `bytes` must be valid for `len` reads; `out` must be a valid output
/// slot.
#[no_mangle]
pub unsafe extern "C" fn ls_image_read_pgm(
    bytes: *const u8,
    len: usize,
    out: *mut *mut LsImage,
) -> LsStatus {
    guard(|| {
        if bytes.is_null() {
            return fail(LsStatus::NullArgument, "bytes is null");
        }
        let data = std::slice::from_raw_parts(bytes, len);
        match imgio::read_pgm(data) {
            Ok(img) => emit(out, LsImage(img)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Reads a binary PGM file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn ls_image_read_pgm_file(
    path: *const c_char,
    out: *mut *mut LsImage,
) -> LsStatus {
    guard(|| {
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match imgio::read_pgm_file(&path) {
            Ok(img) => emit(out, LsImage(img)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Wraps an 8-bit pixel buffer (row-major, length `width * height`).
///
/// # Safety
/// `pixels` must be valid for `width * height` reads; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn ls_image_from_gray8(
    pixels: *const u8,
    width: usize,
    height: usize,
    out: *mut *mut LsImage,
) -> LsStatus {
    guard(|| {
        if pixels.is_null() {
            return fail(LsStatus::NullArgument, "pixels is null");
        }
        let Some(len) = width.checked_mul(height) else {
            return fail(LsStatus::InvalidArgument, "dimensions overflow");
        };
        let data = std::slice::from_raw_parts(pixels, len);
        let pixels16: Vec<u16> = data.iter().map(|&p| p as u16).collect();
        match GrayImage::new(width, height, 255, pixels16) {
            Ok(img) => emit(out, LsImage(img)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Writes the image as a binary PGM file.
///
/// # Safety
/// Pointers must be valid; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ls_image_write_pgm_file(
    img: *const LsImage,
    path: *const c_char,
) -> LsStatus {
    guard(|| {
        let Some(img) = borrow(img) else {
            return fail(LsStatus::NullArgument, "image is null");
        };
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match imgio::write_pgm_file(&path, &img.0) {
            Ok(()) => LsStatus::Ok,
            Err(e) => fail_with(&e),
        }
    })
}

/// Rescales any image to the 8-bit intensity axis the pipeline expects.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_image_rescale_8bit(
    img: *const LsImage,
    out: *mut *mut LsImage,
) -> LsStatus {
    guard(|| {
        let Some(img) = borrow(img) else {
            return fail(LsStatus::NullArgument, "image is null");
        };
        emit(out, LsImage(img.0.to_8bit()))
    })
}

/// Image width in pixels; 0 if `img` is null.
///
/// # Safety
/// `img` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ls_image_width(img: *const LsImage) -> usize {
    borrow(img).map_or(0, |i| i.0.width())
}

/// Image height in pixels; 0 if `img` is null.
///
/// # Safety
/// `img` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ls_image_height(img: *const LsImage) -> usize {
    borrow(img).map_or(0, |i| i.0.height())
}

/// Declared intensity ceiling; 0 if `img` is null.
///
/// # Safety
/// `img` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ls_image_max_value(img: *const LsImage) -> u16 {
    borrow(img).map_or(0, |i| i.0.max_value())
}

/// Frees an image handle. Null is ignored.
///
/// # Safety
/// `img` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_image_free(img: *mut LsImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

// ---- masks -----------------------------------------------------------

/// Builds a mask from a row-major 0/1 byte buffer.
///
/// # Safety
/// `bits` must be valid for `width * height` reads; `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_from_bits(
    bits: *const u8,
    width: usize,
    height: usize,
    out: *mut *mut LsMask,
) -> LsStatus {
    guard(|| {
        if bits.is_null() {
            return fail(LsStatus::NullArgument, "bits is null");
        }
        let Some(len) = width.checked_mul(height) else {
            return fail(LsStatus::InvalidArgument, "dimensions overflow");
        };
        let data = std::slice::from_raw_parts(bits, len).to_vec();
        match BinaryMask::new(width, height, data) {
            Ok(mask) => emit(out, LsMask(mask)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Copies the mask's 0/1 bytes into `buf` (length must be exactly
/// `width * height`).
///
/// # Safety
/// `mask` must be valid; `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_copy_bits(
    mask: *const LsMask,
    buf: *mut u8,
    len: usize,
) -> LsStatus {
    guard(|| {
        let Some(mask) = borrow(mask) else {
            return fail(LsStatus::NullArgument, "mask is null");
        };
        if buf.is_null() {
            return fail(LsStatus::NullArgument, "buffer is null");
        }
        let bits = mask.0.bits();
        if len != bits.len() {
            return fail(
                LsStatus::InvalidArgument,
                &format!(
                    "buffer length {len} does not match mask size {}",
                    bits.len()
                ),
            );
        }
        std::ptr::copy_nonoverlapping(bits.as_ptr(), buf, bits.len());
        LsStatus::Ok
    })
}

/// Renders the mask as a 0/255 PGM file.
///
/// # Safety
/// Pointers must be valid; `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_write_pgm_file(
    mask: *const LsMask,
    path: *const c_char,
) -> LsStatus {
    guard(|| {
        let Some(mask) = borrow(mask) else {
            return fail(LsStatus::NullArgument, "mask is null");
        };
        let path = match path_from(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match imgio::write_pgm_file(&path, &mask_to_image(&mask.0)) {
            Ok(()) => LsStatus::Ok,
            Err(e) => fail_with(&e),
        }
    })
}

/// Mask width in pixels; 0 if null.
///
/// # Safety
/// `mask` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_width(mask: *const LsMask) -> usize {
    borrow(mask).map_or(0, |m| m.0.width())
}

/// Mask height in pixels; 0 if null.
///
/// # Safety
/// `mask` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_height(mask: *const LsMask) -> usize {
    borrow(mask).map_or(0, |m| m.0.height())
}

/// Number of foreground pixels; 0 if null.
///
/// # Safety
/// `mask` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_count_ones(mask: *const LsMask) -> usize {
    borrow(mask).map_or(0, |m| m.0.count_ones())
}

/// Frees a mask handle. Null is ignored.
///
/// # Safety
/// `mask` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_mask_free(mask: *mut LsMask) {
    if !mask.is_null() {
        drop(Box::from_raw(mask));
    }
}

// ---- configuration ---------------------------------------------------

/// Creates a configuration with the built-in defaults.
///
/// # Safety
/// `out` must be a valid slot.
#[no_mangle]
pub unsafe extern "C" fn ls_config_new(out: *mut *mut LsConfig) -> LsStatus {
    guard(|| emit(out, LsConfig(PipelineConfig::default())))
}

/// Sets the intensity band `[s1, s2]`.
///
/// # Safety
/// `cfg` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_band(cfg: *mut LsConfig, s1: u8, s2: u8) -> LsStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(LsStatus::NullArgument, "config is null");
        };
        match ThresholdPair::new(s1, s2) {
            Ok(pair) => {
                cfg.0.thresholds = pair;
                LsStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Sets the median window side (3, 5, 7 or 9).
///
/// # Safety
/// `cfg` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_median_window(
    cfg: *mut LsConfig,
    window: usize,
) -> LsStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(LsStatus::NullArgument, "config is null");
        };
        if !matches!(window, 3 | 5 | 7 | 9) {
            return fail(
                LsStatus::InvalidArgument,
                &format!("invalid median window {window} (must be one of 3, 5, 7, 9)"),
            );
        }
        cfg.0.median_window = window;
        LsStatus::Ok
    })
}

/// Sets the closing's structuring element.
///
/// # Safety
/// `cfg` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_structuring_element(
    cfg: *mut LsConfig,
    shape: LsSeShape,
    radius: usize,
) -> LsStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(LsStatus::NullArgument, "config is null");
        };
        if radius == 0 {
            return fail(
                LsStatus::InvalidArgument,
                "structuring element radius must be >= 1",
            );
        }
        cfg.0.se_shape = match shape {
            LsSeShape::Square => SeShape::Square,
            LsSeShape::Cross => SeShape::Cross,
        };
        cfg.0.se_radius = radius;
        LsStatus::Ok
    })
}

/// Sets the minimum component area as a fraction of the image area.
///
/// # Safety
/// `cfg` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_config_set_min_area_fraction(
    cfg: *mut LsConfig,
    fraction: f64,
) -> LsStatus {
    guard(|| {
        let Some(cfg) = cfg.as_mut() else {
            return fail(LsStatus::NullArgument, "config is null");
        };
        if !fraction.is_finite() || !(0.0..1.0).contains(&fraction) {
            return fail(
                LsStatus::InvalidArgument,
                &format!("min_area_fraction must be in [0, 1) (got {fraction})"),
            );
        }
        cfg.0.min_area_fraction = fraction;
        LsStatus::Ok
    })
}

/// Frees a configuration handle. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a pointer previously returned by this library
/// and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_config_free(cfg: *mut LsConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

// ---- segmentation ----------------------------------------------------

/// Runs the full pipeline on an 8-bit image. `cfg` may be null for the
/// defaults. Returns `LS_STATUS_LIVER_NOT_FOUND` when no acceptable
/// candidate exists.
///
/// # Safety
/// Pointers must be valid (or null where documented).
#[no_mangle]
pub unsafe extern "C" fn ls_segment(
    img: *const LsImage,
    cfg: *const LsConfig,
    out: *mut *mut LsResult,
) -> LsStatus {
    guard(|| {
        let Some(img) = borrow(img) else {
            return fail(LsStatus::NullArgument, "image is null");
        };
        let config = borrow(cfg).map_or_else(PipelineConfig::default, |c| c.0);
        match run_pipeline(&img.0, &config) {
            Ok(result) => emit(out, LsResult(result)),
            Err(e) => fail_with(&e),
        }
    })
}

/// Pixel count of the greatest connected component (stage d); 0 if null.
///
/// # Safety
/// `result` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn ls_result_area_pixels(result: *const LsResult) -> u64 {
    borrow(result).map_or(0, |r| r.0.area_pixels() as u64)
}

/// Clones the final liver mask (stage e) into a new handle.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_result_liver_mask(
    result: *const LsResult,
    out: *mut *mut LsMask,
) -> LsStatus {
    guard(|| {
        let Some(result) = borrow(result) else {
            return fail(LsStatus::NullArgument, "result is null");
        };
        emit(out, LsMask(result.0.liver_mask().clone()))
    })
}

/// Clones the contour mask (stage f) into a new handle.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_result_contour(
    result: *const LsResult,
    out: *mut *mut LsMask,
) -> LsStatus {
    guard(|| {
        let Some(result) = borrow(result) else {
            return fail(LsStatus::NullArgument, "result is null");
        };
        emit(out, LsMask(result.0.contour().clone()))
    })
}

/// Writes `stage_a.pgm` .. `stage_g.ppm` plus `result.json` into `dir`.
///
/// # Safety
/// Pointers must be valid; `dir` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ls_result_dump_stages(
    result: *const LsResult,
    dir: *const c_char,
) -> LsStatus {
    guard(|| {
        let Some(result) = borrow(result) else {
            return fail(LsStatus::NullArgument, "result is null");
        };
        let dir = match path_from(dir) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match dump_stages(&result.0, &dir) {
            Ok(_) => LsStatus::Ok,
            Err(e) => fail_with(&e),
        }
    })
}

/// Frees a result handle. Null is ignored.
///
/// # Safety
/// `result` must be null or a pointer previously returned by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ls_result_free(result: *mut LsResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

// ---- metrics and phantoms --------------------------------------------

/// Dice coefficient of two masks of equal dimensions.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_dice(a: *const LsMask, b: *const LsMask, out: *mut f64) -> LsStatus {
    guard(|| {
        let (Some(a), Some(b)) = (borrow(a), borrow(b)) else {
            return fail(LsStatus::NullArgument, "mask is null");
        };
        if out.is_null() {
            return fail(LsStatus::NullArgument, "output pointer is null");
        }
        match evaluation::dice(&a.0, &b.0) {
            Ok(v) => {
                *out = v;
                LsStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Jaccard index of two masks of equal dimensions.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_jaccard(a: *const LsMask, b: *const LsMask, out: *mut f64) -> LsStatus {
    guard(|| {
        let (Some(a), Some(b)) = (borrow(a), borrow(b)) else {
            return fail(LsStatus::NullArgument, "mask is null");
        };
        if out.is_null() {
            return fail(LsStatus::NullArgument, "output pointer is null");
        }
        match evaluation::jaccard(&a.0, &b.0) {
            Ok(v) => {
                *out = v;
                LsStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}

/// Generates a deterministic synthetic slice and its ground truth.
/// Liver and distractor intensities fall inside `[s1, s2]`; dimensions
/// must be at least 64.
///
/// # Safety
/// Output slots must be valid.
#[no_mangle]
pub unsafe extern "C" fn ls_phantom(
    width: usize,
    height: usize,
    seed: u64,
    noise_sigma: f64,
    s1: u8,
    s2: u8,
    out_image: *mut *mut LsImage,
    out_truth: *mut *mut LsMask,
) -> LsStatus {
    guard(|| {
        if out_image.is_null() || out_truth.is_null() {
            return fail(LsStatus::NullArgument, "output pointer is null");
        }
        let band = match ThresholdPair::new(s1, s2) {
            Ok(band) => band,
            Err(e) => return fail_with(&e),
        };
        match make_phantom(width, height, seed, noise_sigma, band) {
            Ok(phantom) => {
                let status = emit(out_image, LsImage(phantom.image));
                if status != LsStatus::Ok {
                    return status;
                }
                let status = emit(out_truth, LsMask(phantom.truth));
                if status != LsStatus::Ok {
                    ls_image_free(*out_image);
                    *out_image = std::ptr::null_mut();
                    return status;
                }
                LsStatus::Ok
            }
            Err(e) => fail_with(&e),
        }
    })
}
