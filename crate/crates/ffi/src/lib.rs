//! C ABI over the heartwin pipeline.
//!
//! Conventions:
//!
//! * Every function returns an [`HwStatus`]; results come back through out
//!   pointers.
//! * Models and feature matrices are opaque handles owned by the caller and
//!   released with their `*_free` function.
//! * On failure a message is kept per thread and can be read with
//!   [`hw_last_error_message`] until the next failing call on that thread.
//! * Array outputs take a capacity; `HW_STATUS_BUFFER_TOO_SMALL` is returned
//!   with the required length stored in `*written`.
//! * Panics never cross the boundary; they map to `HW_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heartwin::eval::{metrics, Confusion};
use heartwin::features::{extract_signal, normalize_sequence, ExtractionConfig, NUM_FEATURES};
use heartwin::ingest::{preprocess, AudioRecord, Label};
use heartwin::nnet::{argmax, forward, read_model, BiLstmModel};
use heartwin::windows::{make_window, WindowShape, WindowSpec};
use heartwin::{Error, FeatureSequence};

pub const HW_SHAPE_RECTANGULAR: u32 = 0;
pub const HW_SHAPE_TRIANGULAR: u32 = 1;
pub const HW_SHAPE_GAUSSIAN: u32 = 2;
/// Columns of every feature matrix.
pub const HW_NUM_FEATURES: usize = 10;
const _: () = assert!(HW_NUM_FEATURES == NUM_FEATURES);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HwStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// File missing, unreadable or malformed.
    Io = 3,
    /// The pipeline rejected the input (bad window, too short a signal, ...).
    Domain = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Percentages; NaN where the denominator is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HwMetrics {
    pub sensitivity: f64,
    pub specificity: f64,
    pub accuracy: f64,
}

/// A trained classifier.
pub struct HwModel {
    model: BiLstmModel,
}

/// A `rows x HW_NUM_FEATURES` feature matrix.
pub struct HwFeatures {
    seq: FeatureSequence,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let msg = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Failure(HwStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_io() { HwStatus::Io } else { HwStatus::Domain };
        Failure(status, e.to_string())
    }
}

fn fail<T>(status: HwStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> HwStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HwStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            HwStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, name: &str) -> Result<&'a [T], Failure> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(HwStatus::NullPointer, format!("{name} is null"));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn copy_out(values: &[f64], out: *mut f64, capacity: usize, written: *mut usize) -> Result<(), Failure> {
    if !written.is_null() {
        *written = values.len();
    }
    if values.len() > capacity {
        return fail(
            HwStatus::BufferTooSmall,
            format!("need room for {} values, got {capacity}", values.len()),
        );
    }
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return fail(HwStatus::NullPointer, "output buffer is null");
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn shape_of(code: u32) -> Result<WindowShape, Failure> {
    match code {
        HW_SHAPE_RECTANGULAR => Ok(WindowShape::Rectangular),
        HW_SHAPE_TRIANGULAR => Ok(WindowShape::Triangular),
        HW_SHAPE_GAUSSIAN => Ok(WindowShape::Gaussian),
        other => fail(HwStatus::InvalidArgument, format!("unknown window shape {other}")),
    }
}

fn spec_of(shape: u32, l: usize, alpha: f64) -> Result<WindowSpec, Failure> {
    WindowSpec::new(shape_of(shape)?, l, alpha).map_err(|e| Failure(HwStatus::Domain, e.to_string()))
}

/// Message of the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Writes the `l + 1` coefficients of a window.
///
/// # Safety
/// `out` must hold `capacity` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn hw_window_coefficients(
    shape: u32,
    l: usize,
    alpha: f64,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> HwStatus {
    guard(|| {
        let spec = spec_of(shape, l, alpha)?;
        copy_out(&make_window(&spec), out, capacity, written)
    })
}

/// Filters, decimates to 500 Hz and fixes the length to 5000 samples.
///
/// # Safety
/// `samples` must hold `n` doubles and `out` `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hw_preprocess(
    samples: *const f64,
    n: usize,
    rate_hz: u32,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> HwStatus {
    guard(|| {
        let x = slice(samples, n, "samples")?;
        let record = AudioRecord::new("ffi", x.to_vec(), rate_hz, Label::Unlabeled);
        let p = preprocess(&record).map_err(|e| Failure::from(Error::from(e)))?;
        copy_out(&p.samples, out, capacity, written)
    })
}

/// Frames an (already preprocessed) signal and extracts its feature matrix,
/// optionally z-scored per column.
///
/// # Safety
/// `samples` must hold `n` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hw_features_extract(
    samples: *const f64,
    n: usize,
    shape: u32,
    l: usize,
    alpha: f64,
    hop: usize,
    bins: usize,
    normalize: bool,
    out: *mut *mut HwFeatures,
) -> HwStatus {
    guard(|| {
        if out.is_null() {
            return fail(HwStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let x = slice(samples, n, "samples")?;
        if hop == 0 || bins == 0 {
            return fail(HwStatus::InvalidArgument, "hop and bins must be positive");
        }
        let config = ExtractionConfig { window: spec_of(shape, l, alpha)?, hop, bins };
        let mut seq = extract_signal("ffi", Label::Unlabeled, x, config)?;
        if normalize {
            seq = normalize_sequence(&seq).map_err(|e| Failure::from(Error::from(e)))?;
        }
        *out = Box::into_raw(Box::new(HwFeatures { seq }));
        Ok(())
    })
}

/// Builds a feature matrix from `rows * HW_NUM_FEATURES` row-major values.
///
/// # Safety
/// `values` must hold `rows * HW_NUM_FEATURES` doubles.
#[no_mangle]
pub unsafe extern "C" fn hw_features_from_rows(
    values: *const f64,
    rows: usize,
    out: *mut *mut HwFeatures,
) -> HwStatus {
    guard(|| {
        if out.is_null() {
            return fail(HwStatus::NullPointer, "out is null");
        }
        *out = ptr::null_mut();
        let v = slice(values, rows * NUM_FEATURES, "values")?;
        let rows = v
            .chunks_exact(NUM_FEATURES)
            .map(|c| c.try_into().expect("chunk width"))
            .collect();
        *out = Box::into_raw(Box::new(HwFeatures { seq: FeatureSequence::from_rows("ffi", Label::Unlabeled, rows) }));
        Ok(())
    })
}

/// Number of rows (frames); 0 for a null handle.
///
/// # Safety
/// `features` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hw_features_rows(features: *const HwFeatures) -> usize {
    features.as_ref().map_or(0, |f| f.seq.len())
}

/// Copies the matrix row-major.
///
/// # Safety
/// `features` must be a live handle and `out` hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn hw_features_copy(
    features: *const HwFeatures,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> HwStatus {
    guard(|| {
        let f = features.as_ref().ok_or(Failure(HwStatus::NullPointer, "features is null".into()))?;
        let flat: Vec<f64> = f.seq.rows.iter().flatten().copied().collect();
        copy_out(&flat, out, capacity, written)
    })
}

/// # Safety
/// `features` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hw_features_free(features: *mut HwFeatures) {
    if !features.is_null() {
        drop(Box::from_raw(features));
    }
}

/// Loads a model file written by `heartwin train`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hw_model_load(path: *const c_char, out: *mut *mut HwModel) -> HwStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return fail(HwStatus::NullPointer, "path or out is null");
        }
        *out = ptr::null_mut();
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(HwStatus::InvalidArgument, "path is not UTF-8".into()))?;
        let (model, _) = read_model(path)?;
        *out = Box::into_raw(Box::new(HwModel { model }));
        Ok(())
    })
}

/// Hidden units per direction; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hw_model_hidden_size(model: *const HwModel) -> usize {
    model.as_ref().map_or(0, |m| m.model.hidden_size)
}

/// Classifies one feature matrix. `class_out` receives 0 (healthy) or 1
/// (pathological); `probs_out`, if not null, receives two probabilities.
///
/// # Safety
/// Handles must be live; `class_out` valid; `probs_out` null or room for 2.
#[no_mangle]
pub unsafe extern "C" fn hw_model_predict(
    model: *const HwModel,
    features: *const HwFeatures,
    class_out: *mut u32,
    probs_out: *mut f64,
) -> HwStatus {
    guard(|| {
        let m = model.as_ref().ok_or(Failure(HwStatus::NullPointer, "model is null".into()))?;
        let f = features.as_ref().ok_or(Failure(HwStatus::NullPointer, "features is null".into()))?;
        if class_out.is_null() {
            return fail(HwStatus::NullPointer, "class_out is null");
        }
        let cache = forward(&m.model, &f.seq.rows).map_err(|e| Failure::from(Error::from(e)))?;
        *class_out = argmax(&cache.probabilities) as u32;
        if !probs_out.is_null() {
            ptr::copy_nonoverlapping(cache.probabilities.as_ptr(), probs_out, 2);
        }
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hw_model_free(model: *mut HwModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Sensitivity, specificity and accuracy from confusion counts, with
/// pathological as the positive class.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hw_metrics(tp: u64, tn: u64, fp: u64, fn_count: u64, out: *mut HwMetrics) -> HwStatus {
    guard(|| {
        if out.is_null() {
            return fail(HwStatus::NullPointer, "out is null");
        }
        let m = metrics(&Confusion { tp, tn, fp, fn_: fn_count });
        *out = HwMetrics {
            sensitivity: m.sensitivity.unwrap_or(f64::NAN),
            specificity: m.specificity.unwrap_or(f64::NAN),
            accuracy: m.accuracy.unwrap_or(f64::NAN),
        };
        Ok(())
    })
}
