//! C ABI over `lonkit`.
//!
//! Networks cross the boundary as opaque `LonkitLon` handles. Every function
//! returns a `LonkitStatus`; on failure the message is available from
//! `lonkit_last_error` on the same thread until the next failing call.
//! Panics are caught and reported as `LONKIT_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use lonkit::embedding::{embed, EmbeddingConfig};
use lonkit::evaluator::NkLandscape;
use lonkit::lon::{prune, Lon, LonError};
use lonkit::metrics::{pcc, wilcoxon_rank_sum, MetricReport};
use lonkit::sampler::{sample_run, SamplerParams};

/// Opaque network handle. Release with `lonkit_lon_free`.
pub struct LonkitLon {
    inner: Lon,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LonkitStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    /// The requested quantity is undefined for this input.
    Undefined = 5,
    BufferTooSmall = 6,
    Failure = 7,
    Panic = 8,
}

/// Scalar metrics of one network. `ac` and `nd` are only meaningful when the
/// matching `*_defined` flag is set.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LonkitMetrics {
    pub vn: usize,
    pub en: usize,
    pub spl: f64,
    pub spl_reachable_fraction: f64,
    pub ac: f64,
    pub ac_defined: bool,
    pub acc: f64,
    pub nd: f64,
    pub nd_defined: bool,
    pub funnel_count: usize,
    pub go_neighborhood_radius: usize,
    pub global_optimum_fitness: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    let c = CString::new(msg).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

type Res<T> = Result<T, (LonkitStatus, String)>;

fn fail<T>(status: LonkitStatus, msg: impl Into<String>) -> Res<T> {
    Err((status, msg.into()))
}

fn lon_err(e: LonError) -> (LonkitStatus, String) {
    let status = match e {
        LonError::Format(_) => LonkitStatus::Parse,
        _ => LonkitStatus::InvalidArgument,
    };
    (status, e.to_string())
}

fn guard(f: impl FnOnce() -> Res<()>) -> LonkitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LonkitStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside lonkit");
            LonkitStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Res<&'a str> {
    if p.is_null() {
        return fail(LonkitStatus::NullPointer, format!("{what} is null"));
    }
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .or_else(|_| fail(LonkitStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn lon_arg<'a>(p: *const LonkitLon) -> Res<&'a Lon> {
    match unsafe { p.as_ref() } {
        Some(h) => Ok(&h.inner),
        None => fail(LonkitStatus::NullPointer, "network handle is null"),
    }
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Res<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(LonkitStatus::NullPointer, format!("{what} is null"));
    }
    Ok(unsafe { slice::from_raw_parts(p, len) })
}

unsafe fn put<T>(out: *mut T, value: T) -> Res<()> {
    if out.is_null() {
        return fail(LonkitStatus::NullPointer, "output pointer is null");
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn put_lon(out: *mut *mut LonkitLon, lon: Lon) -> Res<()> {
    unsafe { put(out, Box::into_raw(Box::new(LonkitLon { inner: lon }))) }
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn lonkit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn lonkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a network from its JSON document.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_from_json(json: *const c_char, out: *mut *mut LonkitLon) -> LonkitStatus {
    guard(|| {
        let text = unsafe { str_arg(json, "json") }?;
        let lon = Lon::from_json(text).map_err(lon_err)?;
        unsafe { put_lon(out, lon) }
    })
}

/// Reads a network JSON file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_load(path: *const c_char, out: *mut *mut LonkitLon) -> LonkitStatus {
    guard(|| {
        let path = unsafe { str_arg(path, "path") }?;
        let text = std::fs::read_to_string(Path::new(path)).or_else(|e| fail(LonkitStatus::Io, format!("{path}: {e}")))?;
        let lon = Lon::from_json(&text).map_err(lon_err)?;
        unsafe { put_lon(out, lon) }
    })
}

/// Releases a handle. NULL is ignored.
///
/// # Safety
/// `lon` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_free(lon: *mut LonkitLon) {
    if !lon.is_null() {
        drop(unsafe { Box::from_raw(lon) });
    }
}

/// # Safety
/// `lon` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_vertex_count(lon: *const LonkitLon, out: *mut usize) -> LonkitStatus {
    guard(|| {
        let lon = unsafe { lon_arg(lon) }?;
        unsafe { put(out, lon.vertex_count()) }
    })
}

/// # Safety
/// `lon` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_edge_count(lon: *const LonkitLon, out: *mut usize) -> LonkitStatus {
    guard(|| {
        let lon = unsafe { lon_arg(lon) }?;
        unsafe { put(out, lon.edge_count()) }
    })
}

/// Serializes a network to JSON. Release the string with `lonkit_string_free`.
///
/// # Safety
/// `lon` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_to_json(lon: *const LonkitLon, out: *mut *mut c_char) -> LonkitStatus {
    guard(|| {
        let lon = unsafe { lon_arg(lon) }?;
        let text = CString::new(lon.to_json(None)).or_else(|_| fail(LonkitStatus::Failure, "JSON contains NUL"))?;
        unsafe { put(out, text.into_raw()) }
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn lonkit_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Removes inferior sinks; the input handle is left untouched.
///
/// # Safety
/// `lon` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_prune(lon: *const LonkitLon, out: *mut *mut LonkitLon) -> LonkitStatus {
    guard(|| {
        let lon = unsafe { lon_arg(lon) }?;
        unsafe { put_lon(out, prune(lon).lon) }
    })
}

/// Merges `count` networks into a new one.
///
/// # Safety
/// `lons` must point to `count` live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_synthesize(
    lons: *const *const LonkitLon,
    count: usize,
    out: *mut *mut LonkitLon,
) -> LonkitStatus {
    guard(|| {
        if count == 0 {
            return fail(LonkitStatus::InvalidArgument, "no networks to merge");
        }
        if lons.is_null() {
            return fail(LonkitStatus::NullPointer, "network list is null");
        }
        let handles = unsafe { slice::from_raw_parts(lons, count) };
        let mut parts = Vec::with_capacity(count);
        for &h in handles {
            parts.push(unsafe { lon_arg(h) }?);
        }
        let lon = Lon::synthesize(parts).map_err(lon_err)?;
        unsafe { put_lon(out, lon) }
    })
}

/// # Safety
/// `lon` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_metrics(lon: *const LonkitLon, out: *mut LonkitMetrics) -> LonkitStatus {
    guard(|| {
        let lon = unsafe { lon_arg(lon) }?;
        if lon.is_empty() {
            return fail(LonkitStatus::Undefined, "network has no vertices");
        }
        let (r, _) = MetricReport::compute(lon);
        let m = LonkitMetrics {
            vn: r.vn,
            en: r.en,
            spl: r.spl,
            spl_reachable_fraction: r.spl_reachable_fraction,
            ac: r.ac.unwrap_or(f64::NAN),
            ac_defined: r.ac.is_some(),
            acc: r.acc,
            nd: r.nd.unwrap_or(f64::NAN),
            nd_defined: r.nd.is_some(),
            funnel_count: r.funnel_count,
            go_neighborhood_radius: r.go_neighborhood_radius,
            global_optimum_fitness: r.global_optimum_fitness.unwrap_or(f64::NAN),
        };
        unsafe { put(out, m) }
    })
}

/// Writes the `dimension`-long unit embedding of `lon` into `out`, which must
/// hold at least `dimension` values.
///
/// # Safety
/// `lon` must be a live handle; `out` must point to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lonkit_lon_embed(
    lon: *const LonkitLon,
    wl_iterations: usize,
    dimension: usize,
    hash_seed: u64,
    out: *mut f64,
    out_len: usize,
) -> LonkitStatus {
    guard(|| {
        let lon = unsafe { lon_arg(lon) }?;
        if out.is_null() {
            return fail(LonkitStatus::NullPointer, "output buffer is null");
        }
        if out_len < dimension {
            return fail(LonkitStatus::BufferTooSmall, format!("buffer holds {out_len} values, need {dimension}"));
        }
        let config = EmbeddingConfig { wl_iterations, dimension, hash_seed };
        let v = embed(lon, &config).or_else(|e| fail(LonkitStatus::InvalidArgument, e.to_string()))?;
        unsafe { slice::from_raw_parts_mut(out, dimension) }.copy_from_slice(&v.values);
        Ok(())
    })
}

/// Two-sided rank-sum p-value of samples `a` and `b`.
///
/// # Safety
/// `a` and `b` must point to `a_len` and `b_len` doubles; `p_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_wilcoxon(
    a: *const f64,
    a_len: usize,
    b: *const f64,
    b_len: usize,
    p_value: *mut f64,
) -> LonkitStatus {
    guard(|| {
        let a = unsafe { slice_arg(a, a_len, "a") }?;
        let b = unsafe { slice_arg(b, b_len, "b") }?;
        let r = wilcoxon_rank_sum(a, b).or_else(|e| fail(LonkitStatus::InvalidArgument, e.to_string()))?;
        unsafe { put(p_value, r.p_value) }
    })
}

/// Pearson correlation of two equally long samples.
///
/// # Safety
/// `x` and `y` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_pcc(x: *const f64, y: *const f64, len: usize, out: *mut f64) -> LonkitStatus {
    guard(|| {
        let x = unsafe { slice_arg(x, len, "x") }?;
        let y = unsafe { slice_arg(y, len, "y") }?;
        let r = pcc(x, y).or_else(|e| fail(LonkitStatus::Undefined, e.to_string()))?;
        unsafe { put(out, r) }
    })
}

/// Samples one network from an NK(n, k) landscape with default sampler
/// parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lonkit_sample_nk(
    n: usize,
    k: usize,
    landscape_seed: u64,
    run_seed: u64,
    out: *mut *mut LonkitLon,
) -> LonkitStatus {
    guard(|| {
        let nk = NkLandscape::new(n, k, landscape_seed).or_else(|e| fail(LonkitStatus::InvalidArgument, e.to_string()))?;
        let params = SamplerParams { seed: run_seed, ..SamplerParams::default() };
        let trace = sample_run(&nk.space(), &nk, &params).or_else(|e| fail(LonkitStatus::Failure, e.to_string()))?;
        let lon = Lon::from_trace(&trace).map_err(lon_err)?;
        unsafe { put_lon(out, lon) }
    })
}
