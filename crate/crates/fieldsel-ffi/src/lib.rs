//! C ABI for the neighborhood-selection library.
//!
//! Conventions:
//! - Every constructor hands back an opaque handle through an out-pointer
//!   and returns a status code; handles are released with the matching
//!   `*_free` function (null-safe).
//! - Configurations cross the boundary as arrays of raw symbol values (for
//!   spin models `-1`/`+1`), one entry per site in dense site order.
//! - Site subsets are bitmasks over dense site indices.
//! - On any non-`FS_STATUS_OK` return, `fs_last_error` gives a message for
//!   the calling thread, valid until its next call into the library.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use fieldsel::empirical::EmpiricalMeasure;
use fieldsel::field::{Alphabet, Configuration, GibbsModel, SampleBatch, SiteSet, SiteSubset};
use fieldsel::model_file;
use fieldsel::risk::LossKind;
use fieldsel::selection::{self, PenaltySpec};
use fieldsel::slope::{self, ComplexityKind, JumpRule};
use fieldsel::tables::Estimator;
use fieldsel::Error;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    CapacityExceeded = 3,
    ParseError = 4,
    Unsupported = 5,
    EmptyCollection = 6,
    NoJump = 7,
    IoError = 8,
    InvalidUtf8 = 9,
    InternalPanic = 10,
}

/// Opaque ground-truth model handle.
pub struct FsModel {
    model: GibbsModel,
}

/// Opaque sample-batch handle; remembers the sites and alphabet it was
/// drawn against.
pub struct FsBatch {
    batch: SampleBatch,
    sites: SiteSet,
    alphabet: Alphabet,
}

/// Opaque fitted empirical measure.
pub struct FsEmpirical {
    measure: EmpiricalMeasure,
    sites: SiteSet,
    alphabet: Alphabet,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> FsStatus {
    match err {
        Error::Validation(_) => FsStatus::InvalidArgument,
        Error::Capacity(_) => FsStatus::CapacityExceeded,
        Error::Unsupported(_) => FsStatus::Unsupported,
        Error::Parse { .. } => FsStatus::ParseError,
        Error::EmptyCollection => FsStatus::EmptyCollection,
        Error::NoJump => FsStatus::NoJump,
        Error::Io { .. } => FsStatus::IoError,
    }
}

fn fail(err: Error) -> FsStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn guarded(f: impl FnOnce() -> FsStatus) -> FsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            FsStatus::InternalPanic
        }
    }
}

/// Message for the last failure on this thread. The pointer stays valid
/// until the thread's next call into this library.
#[no_mangle]
pub extern "C" fn fs_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, FsStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(FsStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        FsStatus::InvalidUtf8
    })
}

unsafe fn configuration_from_raw(
    model_sites: usize,
    alphabet: &Alphabet,
    symbols: *const i64,
    len: usize,
) -> Result<Configuration, FsStatus> {
    if symbols.is_null() {
        set_error("null symbol array");
        return Err(FsStatus::NullArgument);
    }
    if len != model_sites {
        set_error(&format!("expected {model_sites} symbols, got {len}"));
        return Err(FsStatus::InvalidArgument);
    }
    let raw = std::slice::from_raw_parts(symbols, len);
    Configuration::from_symbols(alphabet, raw).map_err(fail)
}

/// Parse a model description file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_model_from_file(
    path: *const c_char,
    out: *mut *mut FsModel,
) -> FsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null out-pointer");
            return FsStatus::NullArgument;
        }
        let path = match read_str(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match model_file::load_model(Path::new(path)) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(FsModel { model }));
                FsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Build an Ising model on a grid with one coupling on every
/// nearest-neighbour edge.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fs_model_ising_grid(
    rows: u32,
    cols: u32,
    coupling: f64,
    out: *mut *mut FsModel,
) -> FsStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null out-pointer");
            return FsStatus::NullArgument;
        }
        match GibbsModel::ising_grid_nn(rows as usize, cols as usize, coupling) {
            Ok(model) => {
                *out = Box::into_raw(Box::new(FsModel { model }));
                FsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `model` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fs_model_free(model: *mut FsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of observed sites; 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_model_site_count(model: *const FsModel) -> u32 {
    if model.is_null() {
        0
    } else {
        (*model).model.site_count() as u32
    }
}

/// Dense index of a site label.
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_model_site_index(
    model: *const FsModel,
    label: *const c_char,
    out: *mut u32,
) -> FsStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let label = match read_str(label) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match (*model).model.site_set().index_of(label) {
            Some(idx) => {
                *out = idx as u32;
                FsStatus::Ok
            }
            None => {
                set_error(&format!("unknown site {label:?}"));
                FsStatus::InvalidArgument
            }
        }
    })
}

/// Joint probability of a complete configuration given as raw symbol values.
///
/// # Safety
/// Pointers must be valid; `symbols` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn fs_model_joint_probability(
    model: *const FsModel,
    symbols: *const i64,
    len: usize,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let m = &(*model).model;
        let x = match configuration_from_raw(m.site_count(), m.alphabet(), symbols, len) {
            Ok(x) => x,
            Err(status) => return status,
        };
        match m.joint_probability(&x) {
            Ok(p) => {
                *out = p;
                FsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Exact conditional probability of the target site given the other sites
/// of `subset_mask` (which must contain the target).
///
/// # Safety
/// Pointers must be valid; `symbols` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn fs_model_conditional(
    model: *const FsModel,
    site: u32,
    subset_mask: u32,
    symbols: *const i64,
    len: usize,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let m = &(*model).model;
        let x = match configuration_from_raw(m.site_count(), m.alphabet(), symbols, len) {
            Ok(x) => x,
            Err(status) => return status,
        };
        match m.exact_conditional(site as usize, SiteSubset::from_mask(subset_mask), &x) {
            Ok(p) => {
                *out = p;
                FsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Closed-form one-point conditional of a pairwise spin model.
///
/// # Safety
/// Pointers must be valid; `symbols` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn fs_model_closed_form_conditional(
    model: *const FsModel,
    site: u32,
    symbols: *const i64,
    len: usize,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let m = &(*model).model;
        let x = match configuration_from_raw(m.site_count(), m.alphabet(), symbols, len) {
            Ok(x) => x,
            Err(status) => return status,
        };
        match m.ising_closed_form_conditional(site as usize, &x) {
            Ok(p) => {
                *out = p;
                FsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Draw `n` i.i.d. configurations; reproducible for fixed `(seed, stream)`.
///
/// # Safety
/// Pointers must be valid; `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_model_sample(
    model: *const FsModel,
    n: u64,
    seed: u64,
    stream: u64,
    out: *mut *mut FsBatch,
) -> FsStatus {
    guarded(|| {
        if model.is_null() || out.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let m = &(*model).model;
        match m.sample(n as usize, seed, stream) {
            Ok(batch) => {
                *out = Box::into_raw(Box::new(FsBatch {
                    batch,
                    sites: m.site_set().clone(),
                    alphabet: m.alphabet().clone(),
                }));
                FsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `batch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_batch_free(batch: *mut FsBatch) {
    if !batch.is_null() {
        drop(Box::from_raw(batch));
    }
}

/// Number of rows; 0 for a null handle.
///
/// # Safety
/// `batch` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_batch_len(batch: *const FsBatch) -> u64 {
    if batch.is_null() {
        0
    } else {
        (*batch).batch.len() as u64
    }
}

/// Aggregate a batch into an empirical measure.
///
/// # Safety
/// Pointers must be valid; `batch` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_empirical_fit(
    batch: *const FsBatch,
    out: *mut *mut FsEmpirical,
) -> FsStatus {
    guarded(|| {
        if batch.is_null() || out.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let b = &*batch;
        match EmpiricalMeasure::fit(&b.batch) {
            Ok(measure) => {
                *out = Box::into_raw(Box::new(FsEmpirical {
                    measure,
                    sites: b.sites.clone(),
                    alphabet: b.alphabet.clone(),
                }));
                FsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `em` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_empirical_free(em: *mut FsEmpirical) {
    if !em.is_null() {
        drop(Box::from_raw(em));
    }
}

/// Empirical conditional with the uniform convention on unseen contexts.
///
/// # Safety
/// Pointers must be valid; `symbols` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn fs_empirical_conditional(
    em: *const FsEmpirical,
    site: u32,
    subset_mask: u32,
    symbols: *const i64,
    len: usize,
    out: *mut f64,
) -> FsStatus {
    guarded(|| {
        if em.is_null() || out.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let e = &*em;
        let x = match configuration_from_raw(e.sites.len(), &e.alphabet, symbols, len) {
            Ok(x) => x,
            Err(status) => return status,
        };
        match e
            .measure
            .empirical_conditional(site as usize, SiteSubset::from_mask(subset_mask), &x)
        {
            Ok(p) => {
                *out = p;
                FsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

#[allow(clippy::too_many_arguments)]
unsafe fn select_common(
    em: *const FsEmpirical,
    site: u32,
    max_cardinality: u32,
    pen: PenaltySpec,
    p_star: Option<f64>,
    lambda: f64,
    delta: f64,
    out_mask: *mut u32,
) -> FsStatus {
    if em.is_null() || out_mask.is_null() {
        set_error("null argument");
        return FsStatus::NullArgument;
    }
    let e = &*em;
    let n = e.measure.sample_size();
    let coll = match selection::enumerate_models(&e.sites, site as usize, max_cardinality as usize)
    {
        Ok(c) => c,
        Err(err) => return fail(err),
    };
    let est = Estimator::Empirical(&e.measure);
    let active = if let Some(floor) = p_star {
        match selection::filter_collection(&coll, est, n, lambda, delta, Some(floor)) {
            Ok(f) => f,
            Err(err) => return fail(err),
        }
    } else {
        coll
    };
    match selection::select(&active, est, &pen, n) {
        Ok(result) => {
            *out_mask = result.chosen.mask();
            FsStatus::Ok
        }
        Err(err) => fail(err),
    }
}

/// Quadratic-criterion selection over all neighborhoods of `site` with
/// cardinality at most `max_cardinality`; the penalty is
/// `penalty_constant · a^v / n`. Writes the chosen subset's bitmask.
///
/// # Safety
/// Pointers must be valid; `em` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn fs_select_l2(
    em: *const FsEmpirical,
    site: u32,
    max_cardinality: u32,
    penalty_constant: f64,
    out_mask: *mut u32,
) -> FsStatus {
    guarded(|| {
        let pen = match PenaltySpec::dimension(LossKind::L2, penalty_constant) {
            Ok(p) => p,
            Err(err) => return fail(err),
        };
        select_common(em, site, max_cardinality, pen, None, 0.0, 0.0, out_mask)
    })
}

/// Küllback-criterion selection over the mass-and-conditional filtered
/// collection. Pass a negative `p_star` for the default floor `1/ln n`.
///
/// # Safety
/// Pointers must be valid; `em` must be a live handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fs_select_kl(
    em: *const FsEmpirical,
    site: u32,
    max_cardinality: u32,
    penalty_constant: f64,
    lambda: f64,
    delta: f64,
    p_star: f64,
    out_mask: *mut u32,
) -> FsStatus {
    guarded(|| {
        if em.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        let n = (*em).measure.sample_size();
        let floor = if p_star < 0.0 {
            1.0 / (n as f64).ln()
        } else {
            p_star
        };
        let pen = match PenaltySpec::dimension(LossKind::Kullback, penalty_constant) {
            Ok(p) => p,
            Err(err) => return fail(err),
        };
        select_common(
            em,
            site,
            max_cardinality,
            pen,
            Some(floor),
            lambda,
            delta,
            out_mask,
        )
    })
}

/// Slope-heuristic calibration with the `a^v/n` complexity over a uniform
/// grid of `k_count` constants on `[k_lo, k_hi]`. Writes the selected
/// subset's bitmask and the detected minimal constant and jump size (NaN
/// when the path never moved).
///
/// # Safety
/// Pointers must be valid; `em` must be a live handle.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fs_calibrate(
    em: *const FsEmpirical,
    site: u32,
    max_cardinality: u32,
    k_lo: f64,
    k_hi: f64,
    k_count: u32,
    out_mask: *mut u32,
    out_k_min: *mut f64,
    out_jump: *mut f64,
) -> FsStatus {
    guarded(|| {
        if em.is_null() || out_mask.is_null() || out_k_min.is_null() || out_jump.is_null() {
            set_error("null argument");
            return FsStatus::NullArgument;
        }
        if k_count < 3 || !(k_hi > k_lo) || !(k_lo > 0.0) {
            set_error("need 0 < k_lo < k_hi and at least 3 grid points");
            return FsStatus::InvalidArgument;
        }
        let e = &*em;
        let n = e.measure.sample_size();
        let coll =
            match selection::enumerate_models(&e.sites, site as usize, max_cardinality as usize) {
                Ok(c) => c,
                Err(err) => return fail(err),
            };
        let grid: Vec<f64> = (0..k_count)
            .map(|j| k_lo + (k_hi - k_lo) * j as f64 / (k_count - 1) as f64)
            .collect();
        match slope::calibrate(
            &coll,
            Estimator::Empirical(&e.measure),
            None,
            LossKind::L2,
            ComplexityKind::DimensionOverN,
            &grid,
            n,
            JumpRule::LargestDrop,
        ) {
            Ok(result) => {
                *out_mask = result.chosen.mask();
                *out_k_min = result.k_min.unwrap_or(f64::NAN);
                *out_jump = result.jump_size.unwrap_or(f64::NAN);
                FsStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}
