//! C ABI over the shape-router engine.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free` function. Every fallible call returns an
//! [`SrStatus`]; on failure [`sr_last_error`] describes the cause for the
//! calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use shape_router::descriptor::{D2Params, DescriptorMethod};
use shape_router::evaluation::{route_query_with, SuccessfulRate};
use shape_router::mesh::load_off;
use shape_router::representatives::build_representative_set;
use shape_router::retrieval::{brute_force_search, retrieve_with, RetrievalResult, RetrieveOptions};
use shape_router::store::DescriptorCache;
use shape_router::taxonomy::{apply_grouping, parse_cla, GroupedClasses, Grouping};
use shape_router::{descriptor_distance, DescriptorMap, Error, ModelId, RepresentativeSet, ShapeDescriptor};

/// Run the exhaustive baseline instead of routing.
pub const SR_FLAG_BRUTE_FORCE: u32 = 1;
/// Re-sort routed answers by distance across classes.
pub const SR_FLAG_GLOBAL_SORT: u32 = 2;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    Mismatch = 6,
    NotFound = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> SrStatus {
    match err {
        Error::Io { .. } => SrStatus::Io,
        Error::Off(_) | Error::Taxonomy(_) | Error::Mesh { .. } | Error::Store(_) => SrStatus::Parse,
        Error::DescriptorMismatch(_) => SrStatus::Mismatch,
        Error::MissingDescriptor(_) | Error::UnknownModel(_) => SrStatus::NotFound,
        Error::ZeroArea | Error::InvalidParameter(_) | Error::EmptySubclass(_) | Error::NoRepresentatives => {
            SrStatus::InvalidArgument
        }
    }
}

struct Failure(SrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> SrStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => SrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SrStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SrStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SrStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

fn null(name: &str) -> Failure {
    Failure(SrStatus::NullArgument, format!("{name} is null"))
}

fn c_string(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).unwrap_or_default()
}

/// Loaded index: grouped classes, descriptors and in-memory representatives.
pub struct SrEngine {
    grouped: GroupedClasses,
    descriptors: DescriptorMap,
    reps: RepresentativeSet,
    method_tag: String,
}

impl SrEngine {
    fn open(cache: &Path, cla: &Path, grouping: &Path) -> Result<Self, Error> {
        let read = |p: &Path| {
            std::fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.to_path_buf(),
                source: e,
            })
        };
        let tree = parse_cla(&read(cla)?)?;
        let grouping = Grouping::parse(&read(grouping)?)?;
        let cache = DescriptorCache::read(cache)?;
        let (grouped, _) = apply_grouping(&tree, &grouping)?.retain_members(|m| cache.descriptors.contains_key(m));
        let reps = build_representative_set(&grouped, &cache.descriptors)?;
        Ok(SrEngine {
            grouped,
            descriptors: cache.descriptors,
            reps,
            method_tag: cache.method_tag,
        })
    }

    fn run(
        &self,
        query: &ShapeDescriptor,
        k: usize,
        class_budget: usize,
        flags: u32,
    ) -> Result<RetrievalResult, Error> {
        if flags & SR_FLAG_BRUTE_FORCE != 0 {
            return brute_force_search(query, &self.grouped, &self.descriptors, k);
        }
        let class_budget = if class_budget == 0 {
            self.grouped.classes.len()
        } else {
            class_budget
        };
        retrieve_with(
            query,
            &self.reps,
            &self.grouped,
            &self.descriptors,
            RetrieveOptions {
                k,
                class_budget,
                global_sort: flags & SR_FLAG_GLOBAL_SORT != 0,
            },
        )
    }
}

/// Ranked answers of one query.
pub struct SrResult {
    ids: Vec<CString>,
    distances: Vec<f64>,
    classes: Vec<CString>,
    visited: Vec<CString>,
    evaluations: u64,
}

impl From<RetrievalResult> for SrResult {
    fn from(r: RetrievalResult) -> Self {
        SrResult {
            ids: r.answers.iter().map(|a| c_string(a.model_id.as_str())).collect(),
            distances: r.answers.iter().map(|a| a.distance).collect(),
            classes: r.answers.iter().map(|a| c_string(&a.class)).collect(),
            visited: r.classes_visited.iter().map(|c| c_string(c)).collect(),
            evaluations: r.distance_evaluations,
        }
    }
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn sr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Opens an index from a descriptor cache, a `.cla` file and a grouping
/// file, selecting representatives in memory.
///
/// # Safety
/// Path arguments must be null or NUL-terminated strings; `out` must be
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_open(
    cache_path: *const c_char,
    cla_path: *const c_char,
    grouping_path: *const c_char,
    out: *mut *mut SrEngine,
) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cache = str_arg(cache_path, "cache_path")?;
        let cla = str_arg(cla_path, "cla_path")?;
        let grouping = str_arg(grouping_path, "grouping_path")?;
        let engine = SrEngine::open(Path::new(cache), Path::new(cla), Path::new(grouping))?;
        *out = Box::into_raw(Box::new(engine));
        Ok(())
    })
}

/// # Safety
/// `engine` must be null or a handle from [`sr_engine_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_free(engine: *mut SrEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// # Safety
/// `engine` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_class_count(engine: *const SrEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.grouped.classes.len())
}

/// # Safety
/// `engine` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_model_count(engine: *const SrEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.grouped.model_count())
}

/// Total number of representatives `R`.
///
/// # Safety
/// `engine` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_representative_count(engine: *const SrEngine) -> usize {
    engine.as_ref().map_or(0, |e| e.reps.total())
}

/// Describes the OFF file at `off_path` with the index's parameters and
/// retrieves `k` answers. `class_budget` 0 means all classes; `flags` is a
/// combination of `SR_FLAG_*`.
///
/// # Safety
/// `engine` must be a live handle, `off_path` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_query_file(
    engine: *const SrEngine,
    off_path: *const c_char,
    k: usize,
    class_budget: usize,
    flags: u32,
    out: *mut *mut SrResult,
) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        let path = str_arg(off_path, "off_path")?;
        let params = D2Params::from_tag(&engine.method_tag)?;
        let query = params.describe(&load_off(Path::new(path))?)?;
        let result = engine.run(&query, k, class_budget, flags)?;
        *out = Box::into_raw(Box::new(SrResult::from(result)));
        Ok(())
    })
}

/// Retrieves with a caller-supplied histogram of `len` bins, which must
/// match the index's bin count and sum to one.
///
/// # Safety
/// `bins` must point to `len` readable doubles; `engine` must be live and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_query_histogram(
    engine: *const SrEngine,
    bins: *const f64,
    len: usize,
    k: usize,
    class_budget: usize,
    flags: u32,
    out: *mut *mut SrResult,
) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        if bins.is_null() {
            return Err(null("bins"));
        }
        let values = std::slice::from_raw_parts(bins, len).to_vec();
        let query = ShapeDescriptor::new(values, engine.method_tag.as_str())?;
        let result = engine.run(&query, k, class_budget, flags)?;
        *out = Box::into_raw(Box::new(SrResult::from(result)));
        Ok(())
    })
}

/// Routes a database model to its top class. The returned string must be
/// released with [`sr_string_free`].
///
/// # Safety
/// `engine` must be live, `model_id` NUL-terminated and `out_class`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn sr_engine_route_model(
    engine: *const SrEngine,
    model_id: *const c_char,
    exclude_self: bool,
    out_class: *mut *mut c_char,
) -> SrStatus {
    guard(|| {
        if out_class.is_null() {
            return Err(null("out_class"));
        }
        *out_class = ptr::null_mut();
        let engine = engine.as_ref().ok_or_else(|| null("engine"))?;
        let id = ModelId::new(str_arg(model_id, "model_id")?);
        let class = route_query_with(&id, &engine.reps, &engine.descriptors, exclude_self)?;
        *out_class = c_string(&class).into_raw();
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sr_result_len(result: *const SrResult) -> usize {
    result.as_ref().map_or(0, |r| r.ids.len())
}

/// Model id of answer `i`; null when out of range. Owned by the result.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sr_result_model_id(result: *const SrResult, i: usize) -> *const c_char {
    result
        .as_ref()
        .and_then(|r| r.ids.get(i))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Class of answer `i`; null when out of range. Owned by the result.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sr_result_class(result: *const SrResult, i: usize) -> *const c_char {
    result
        .as_ref()
        .and_then(|r| r.classes.get(i))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Distance of answer `i`; NaN when out of range.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sr_result_distance(result: *const SrResult, i: usize) -> f64 {
    result
        .as_ref()
        .and_then(|r| r.distances.get(i).copied())
        .unwrap_or(f64::NAN)
}

/// Distance evaluations spent on the query.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sr_result_evaluations(result: *const SrResult) -> u64 {
    result.as_ref().map_or(0, |r| r.evaluations)
}

/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sr_result_visited_len(result: *const SrResult) -> usize {
    result.as_ref().map_or(0, |r| r.visited.len())
}

/// Name of the `i`-th visited class; null when out of range.
///
/// # Safety
/// `result` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn sr_result_visited(result: *const SrResult, i: usize) -> *const c_char {
    result
        .as_ref()
        .and_then(|r| r.visited.get(i))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `result` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_result_free(result: *mut SrResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// L1 distance between two probability histograms of `len` bins.
///
/// # Safety
/// `a` and `b` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_descriptor_distance(a: *const f64, b: *const f64, len: usize, out: *mut f64) -> SrStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let da = ShapeDescriptor::new(std::slice::from_raw_parts(a, len).to_vec(), "ffi")?;
        let db = ShapeDescriptor::new(std::slice::from_raw_parts(b, len).to_vec(), "ffi")?;
        *out = descriptor_distance(&da, &db)?.value();
        Ok(())
    })
}

/// Formats `Q/N` as a report cell such as `90.82% (89/98)`. Release the
/// string with [`sr_string_free`].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sr_successful_rate_cell(q: usize, n: usize, out: *mut *mut c_char) -> SrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = c_string(&SuccessfulRate::new("", q, n)?.cell()).into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
