//! C interface to `pansharp`.
//!
//! Images cross the boundary as opaque `PsImage` handles owned by the caller
//! and released with `ps_image_free`. Every call returns a `PsStatus`; on
//! failure `ps_last_error_message` describes the problem for the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use pansharp::bench::synth_dataset;
use pansharp::fusion::{fuse, DwtRule, FusionMethod, FusionParams, PanMatch};
use pansharp::metrics::full_report;
use pansharp::preprocess::Resample;
use pansharp::raster::{load_image, save_image, Clamp, FileFormat};
use pansharp::{Error, MultiBandImage};

/// Opaque multi-band image.
pub struct PsImage(MultiBandImage);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Degenerate = 4,
    UnsupportedFormat = 5,
    Io = 6,
    Panic = 7,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsMethod {
    Brovey = 0,
    Ihs = 1,
    AdaptiveIhs = 2,
    Pca = 3,
    Hpf = 4,
    DwtAtrous = 5,
    DwtMallat = 6,
    Identity = 7,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsDwtRule {
    Additive = 0,
    Substitutive = 1,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsResample {
    Nearest = 0,
    Bilinear = 1,
    Bicubic = 2,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsHistMatch {
    None = 0,
    MeanStd = 1,
    Cdf = 2,
}

/// Fusion settings. Enum-valued fields hold `PsMethod`, `PsDwtRule`,
/// `PsResample` and `PsHistMatch` values; `levels == 0` picks the default.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PsFusionOptions {
    pub method: u32,
    pub ratio: u32,
    pub levels: u32,
    pub dwt_rule: u32,
    pub resample: u32,
    pub histmatch: u32,
}

/// Band-averaged quality indices. `scc` is meaningful only when `has_scc`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct PsMetrics {
    pub cc: f64,
    pub ergas: f64,
    pub quality: f64,
    pub rase: f64,
    pub rmse: f64,
    pub scc: f64,
    pub has_scc: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(PsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::DimensionMismatch(_) => PsStatus::DimensionMismatch,
            Error::Degenerate(_) | Error::RankDeficient(_) => PsStatus::Degenerate,
            Error::UnsupportedFormat(_) => PsStatus::UnsupportedFormat,
            Error::Io(_) | Error::Decode { .. } | Error::Config(_) => PsStatus::Io,
            _ => PsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PsStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(PsStatus::NullPointer, format!("`{name}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            PsStatus::Panic
        }
    }
}

unsafe fn image<'a>(p: *const PsImage, name: &str) -> Result<&'a MultiBandImage, Failure> {
    p.as_ref().map(|i| &i.0).ok_or_else(|| null(name))
}

unsafe fn c_path(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p).to_str().map_err(|_| invalid("path is not valid UTF-8"))?;
    Ok(PathBuf::from(s))
}

unsafe fn hand_out(out: *mut *mut PsImage, img: MultiBandImage) {
    *out = Box::into_raw(Box::new(PsImage(img)));
}

fn method(v: u32) -> Result<FusionMethod, Failure> {
    Ok(match v {
        0 => FusionMethod::Brovey,
        1 => FusionMethod::Ihs,
        2 => FusionMethod::AdaptiveIhs,
        3 => FusionMethod::Pca,
        4 => FusionMethod::Hpf,
        5 => FusionMethod::DwtAtrous,
        6 => FusionMethod::DwtMallat,
        7 => FusionMethod::Identity,
        _ => return Err(invalid(format!("unknown method {v}"))),
    })
}

fn params(o: &PsFusionOptions) -> Result<FusionParams, Failure> {
    let dwt_rule = match o.dwt_rule {
        0 => DwtRule::Additive,
        1 => DwtRule::Substitutive,
        v => return Err(invalid(format!("unknown DWT rule {v}"))),
    };
    let resample = match o.resample {
        0 => Resample::Nearest,
        1 => Resample::Bilinear,
        2 => Resample::Bicubic,
        v => return Err(invalid(format!("unknown resampler {v}"))),
    };
    let histmatch = match o.histmatch {
        0 => PanMatch::None,
        1 => PanMatch::MeanStd,
        2 => PanMatch::Cdf,
        v => return Err(invalid(format!("unknown histogram mode {v}"))),
    };
    Ok(FusionParams {
        ratio: o.ratio as usize,
        levels: (o.levels > 0).then_some(o.levels as usize),
        dwt_rule,
        resample,
        histmatch,
        ..FusionParams::new(method(o.method)?)
    })
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds an image from `width * height * bands` band-major samples.
///
/// # Safety
/// `samples` must point to that many readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_image_new(
    width: usize,
    height: usize,
    bands: usize,
    samples: *const f64,
    out: *mut *mut PsImage,
) -> PsStatus {
    guard(|| {
        if samples.is_null() {
            return Err(null("samples"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(bands))
            .ok_or_else(|| invalid("image size overflows"))?;
        let data = std::slice::from_raw_parts(samples, len);
        hand_out(out, MultiBandImage::from_band_major(width, height, bands, data)?);
        Ok(())
    })
}

/// # Safety
/// `img` must be NULL or a handle from this library that was not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_image_free(img: *mut PsImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// # Safety
/// `img` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_image_width(img: *const PsImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.width())
}

/// # Safety
/// `img` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_image_height(img: *const PsImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.height())
}

/// # Safety
/// `img` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_image_bands(img: *const PsImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.band_count())
}

/// Copies band-major samples into `out`, which holds `len` doubles.
///
/// # Safety
/// `img` must be a live handle and `out` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ps_image_copy_samples(img: *const PsImage, out: *mut f64, len: usize) -> PsStatus {
    guard(|| {
        let img = image(img, "img")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let data = img.to_band_major();
        if len < data.len() {
            return Err(invalid(format!("buffer holds {len} samples, image has {}", data.len())));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), out, data.len());
        Ok(())
    })
}

/// Loads a PNG, TIFF or raw-f64 file; the format is sniffed from its contents.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_image_load(path: *const c_char, out: *mut *mut PsImage) -> PsStatus {
    guard(|| {
        let p = c_path(path)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let img = load_image(&p, FileFormat::detect(&p)?)?;
        hand_out(out, img);
        Ok(())
    })
}

/// Saves with the format implied by the file extension. Integer formats
/// fail on out-of-range samples unless `clamp` is set.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ps_image_save(img: *const PsImage, path: *const c_char, clamp: bool) -> PsStatus {
    guard(|| {
        let img = image(img, "img")?;
        let p = c_path(path)?;
        let format = FileFormat::from_extension(&p)
            .ok_or_else(|| Failure(PsStatus::UnsupportedFormat, format!("unknown extension: {}", p.display())))?;
        let clamp = if clamp { Clamp::ClampToDepth } else { Clamp::None };
        save_image(img, &p, format, clamp)?;
        Ok(())
    })
}

/// Defaults for `method` (a `PsMethod` value): ratio 4, bicubic
/// resampling, mean/std matching, additive wavelet rule, automatic level
/// count. An unknown method is rejected later by `ps_fuse`.
#[no_mangle]
pub extern "C" fn ps_fusion_options_default(method: u32) -> PsFusionOptions {
    PsFusionOptions {
        method,
        ratio: 4,
        levels: 0,
        dwt_rule: PsDwtRule::Additive as u32,
        resample: PsResample::Bicubic as u32,
        histmatch: PsHistMatch::MeanStd as u32,
    }
}

/// Fuses `ms` with the single-band `pan`, which must be `ratio` times larger.
///
/// # Safety
/// `ms`, `pan` and `options` must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_fuse(
    ms: *const PsImage,
    pan: *const PsImage,
    options: *const PsFusionOptions,
    out: *mut *mut PsImage,
) -> PsStatus {
    guard(|| {
        let ms = image(ms, "ms")?;
        let pan = image(pan, "pan")?;
        let options = options.as_ref().ok_or_else(|| null("options"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if pan.band_count() != 1 {
            return Err(invalid(format!("PAN has {} bands, expected 1", pan.band_count())));
        }
        let result = fuse(ms, pan.band(0), &params(options)?)?;
        hand_out(out, result.fused);
        Ok(())
    })
}

/// Scores `fused` against a same-sized `reference`. SCC is computed when
/// `pan` is not NULL.
///
/// # Safety
/// `reference` and `fused` must be live handles, `pan` NULL or live, and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_metrics(
    reference: *const PsImage,
    fused: *const PsImage,
    pan: *const PsImage,
    ratio_hl: f64,
    out: *mut PsMetrics,
) -> PsStatus {
    guard(|| {
        let r = image(reference, "reference")?;
        let f = image(fused, "fused")?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(ratio_hl.is_finite() && ratio_hl > 0.0) {
            return Err(invalid("ratio_hl must be positive"));
        }
        let report = match pan.as_ref() {
            Some(p) => {
                if p.0.band_count() != 1 {
                    return Err(invalid("PAN must have one band"));
                }
                full_report(r, f, p.0.band(0), ratio_hl)?
            }
            None => pansharp::metrics::spectral_report(r, f, ratio_hl)?,
        };
        let a = report.aggregate;
        *out = PsMetrics {
            cc: a.cc,
            ergas: a.ergas,
            quality: a.quality,
            rase: a.rase,
            rmse: a.rmse,
            scc: a.scc.unwrap_or(f64::NAN),
            has_scc: a.scc.is_some(),
        };
        Ok(())
    })
}

/// Seeded synthetic scene: `size`-square truth and PAN, MS reduced by `ratio`.
///
/// # Safety
/// The three output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ps_synth(
    seed: u64,
    size: usize,
    ratio: usize,
    bands: usize,
    truth: *mut *mut PsImage,
    ms: *mut *mut PsImage,
    pan: *mut *mut PsImage,
) -> PsStatus {
    guard(|| {
        if truth.is_null() || ms.is_null() || pan.is_null() {
            return Err(null("output"));
        }
        let d = synth_dataset(seed, size, ratio, bands)?;
        hand_out(truth, d.truth);
        hand_out(ms, d.ms);
        hand_out(pan, MultiBandImage::single(d.pan));
        Ok(())
    })
}
