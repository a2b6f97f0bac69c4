//! C interface to hodge-scatter.
//!
//! Objects are opaque handles created by `hs_*_new`/`hs_*_build` and released
//! with the matching `hs_*_free`. Every fallible call returns an `HsStatus`;
//! on failure `hs_last_error` describes the most recent error on the calling
//! thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hodge_scatter::complex::{LaplacianVariant, SimplicialComplex};
use hodge_scatter::dictionary::{DictionaryKind, MultiscaleDictionary, ScaleStack};
use hodge_scatter::partition::BipartitionTree;
use hodge_scatter::scattering::{feature_count, scatter_batch, Pooling, ScatterConfig};
use hodge_scatter::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    MalformedSimplex = 3,
    DimensionOutOfRange = 4,
    EmptyComplex = 5,
    ScaleOutOfRange = 6,
    LengthMismatch = 7,
    BufferTooSmall = 8,
    Numerical = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsDictionaryKind {
    Hglet = 0,
    Ghwt = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsLaplacian {
    Combinatorial = 0,
    Normalized = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsPooling {
    Global = 0,
    None = 1,
    /// Each scale path pooled over the regions of its last scale.
    Local = 2,
    /// Every path pooled over the regions of `pool_scale`.
    LocalFixed = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HsScatterConfig {
    pub max_scale: usize,
    pub max_order: usize,
    pub max_moment: usize,
    pub pooling: HsPooling,
    pub pool_scale: usize,
}

pub struct HsComplex(SimplicialComplex);

pub struct HsTree {
    tree: BipartitionTree,
    variant: LaplacianVariant,
}

pub struct HsDictionary(MultiscaleDictionary);

/// Scale stack of a dictionary together with a scattering configuration.
pub struct HsScatterer {
    stack: ScaleStack,
    config: ScatterConfig,
    width: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> HsStatus {
    match e {
        Error::MalformedSimplex(_) => HsStatus::MalformedSimplex,
        Error::DimensionOutOfRange { .. } | Error::EmptyDimension(_) | Error::DimensionMismatch(_) => HsStatus::DimensionOutOfRange,
        Error::EmptyComplex | Error::EmptyRegion => HsStatus::EmptyComplex,
        Error::ScaleOutOfRange { .. } => HsStatus::ScaleOutOfRange,
        Error::LengthMismatch { .. } => HsStatus::LengthMismatch,
        Error::Singular(_) => HsStatus::Numerical,
        _ => HsStatus::InvalidArgument,
    }
}

struct Fail(HsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(HsStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HsStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output handle"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message for the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Builds the closure of a list of simplices, truncated at `max_dim`.
/// Simplex i has vertices `vertices[offsets[i]..offsets[i+1]]`; `offsets`
/// holds `simplex_count + 1` entries.
///
/// # Safety
/// `vertices` must hold `offsets[simplex_count]` readable entries, `offsets`
/// `simplex_count + 1`, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hs_complex_new(
    vertices: *const usize,
    offsets: *const usize,
    simplex_count: usize,
    max_dim: usize,
    out: *mut *mut HsComplex,
) -> HsStatus {
    guard(|| {
        let offsets = slice(offsets, simplex_count + 1, "offsets")?;
        if offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Fail(HsStatus::InvalidArgument, "offsets must be non-decreasing".into()));
        }
        let vertices = slice(vertices, offsets[simplex_count], "vertices")?;
        let simplices: Vec<Vec<usize>> = offsets.windows(2).map(|w| vertices[w[0]..w[1]].to_vec()).collect();
        put(out, HsComplex(SimplicialComplex::from_simplices(max_dim, &simplices)?))
    })
}

/// Number of κ-simplices, 0 when κ is above the top dimension.
///
/// # Safety
/// `c` must be a live complex handle or null.
#[no_mangle]
pub unsafe extern "C" fn hs_complex_count(c: *const HsComplex, kappa: usize) -> usize {
    c.as_ref().map_or(0, |c| if kappa as isize <= c.0.kappa_max() { c.0.count(kappa) } else { 0 })
}

/// Top dimension, or -1 for the empty complex or a null handle.
///
/// # Safety
/// `c` must be a live complex handle or null.
#[no_mangle]
pub unsafe extern "C" fn hs_complex_max_dim(c: *const HsComplex) -> isize {
    c.as_ref().map_or(-1, |c| c.0.kappa_max())
}

/// # Safety
/// `c` must be null or a handle from `hs_complex_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_complex_free(c: *mut HsComplex) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Fiedler bipartition tree of the κ-simplices.
///
/// # Safety
/// `c` must be a live complex handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_tree_build(c: *const HsComplex, kappa: usize, laplacian: HsLaplacian, out: *mut *mut HsTree) -> HsStatus {
    guard(|| {
        let c = get(c, "complex")?;
        let variant = match laplacian {
            HsLaplacian::Combinatorial => LaplacianVariant::Combinatorial,
            HsLaplacian::Normalized => LaplacianVariant::Normalized,
        };
        put(out, HsTree { tree: BipartitionTree::build(&c.0, kappa, variant)?, variant })
    })
}

/// Depth p_max of the tree, 0 for a null handle.
///
/// # Safety
/// `t` must be a live tree handle or null.
#[no_mangle]
pub unsafe extern "C" fn hs_tree_depth(t: *const HsTree) -> usize {
    t.as_ref().map_or(0, |t| t.tree.p_max())
}

/// Number of simplices the tree partitions, 0 for a null handle.
///
/// # Safety
/// `t` must be a live tree handle or null.
#[no_mangle]
pub unsafe extern "C" fn hs_tree_size(t: *const HsTree) -> usize {
    t.as_ref().map_or(0, |t| t.tree.n)
}

/// Number of regions at level p (0 = root).
///
/// # Safety
/// `t` must be a live tree handle or null.
#[no_mangle]
pub unsafe extern "C" fn hs_tree_region_count(t: *const HsTree, level: usize) -> usize {
    t.as_ref().map_or(0, |t| if level <= t.tree.p_max() { t.tree.regions_at(level).len() } else { 0 })
}

/// Writes the leaf order (simplex indices, left to right) into `out`.
///
/// # Safety
/// `t` must be a live tree handle and `out` must hold `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn hs_tree_leaf_order(t: *const HsTree, out: *mut usize, len: usize) -> HsStatus {
    guard(|| {
        let t = get(t, "tree")?;
        let order = t.tree.leaf_order();
        if len < order.len() {
            return Err(Fail(HsStatus::BufferTooSmall, format!("buffer holds {len}, need {}", order.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(order.as_ptr(), out, order.len());
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from `hs_tree_build` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_tree_free(t: *mut HsTree) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// HGLET or GHWT dictionary on the tree's regions. The complex must be the
/// one the tree was built from.
///
/// # Safety
/// `c` and `t` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_dictionary_build(
    c: *const HsComplex,
    t: *const HsTree,
    kind: HsDictionaryKind,
    out: *mut *mut HsDictionary,
) -> HsStatus {
    guard(|| {
        let c = get(c, "complex")?;
        let t = get(t, "tree")?;
        let kind = match kind {
            HsDictionaryKind::Hglet => DictionaryKind::Hglet,
            HsDictionaryKind::Ghwt => DictionaryKind::Ghwt,
        };
        put(out, HsDictionary(MultiscaleDictionary::build(kind, &c.0, &t.tree, t.variant)?))
    })
}

/// Writes the n expansion coefficients of `signal` at level p in (k, l)
/// order.
///
/// # Safety
/// `d` must be a live handle; `signal` must hold `len` readable and `out`
/// `len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn hs_dictionary_analyze(
    d: *const HsDictionary,
    level: usize,
    signal: *const f64,
    out: *mut f64,
    len: usize,
) -> HsStatus {
    guard(|| {
        let d = get(d, "dictionary")?;
        if level > d.0.p_max() {
            return Err(Fail(HsStatus::InvalidArgument, format!("level {level} exceeds p_max={}", d.0.p_max())));
        }
        let coeffs = d.0.analyze(slice(signal, len, "signal")?)?;
        let flat: Vec<f64> = coeffs.levels[level].iter().flatten().copied().collect();
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(flat.as_ptr(), out, flat.len());
        Ok(())
    })
}

/// # Safety
/// `d` must be null or a handle from `hs_dictionary_build` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_dictionary_free(d: *mut HsDictionary) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Prepares scattering of signals on the dictionary's simplices.
///
/// # Safety
/// `d` and `config` must be valid pointers and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hs_scatterer_new(
    d: *const HsDictionary,
    config: *const HsScatterConfig,
    out: *mut *mut HsScatterer,
) -> HsStatus {
    guard(|| {
        let d = get(d, "dictionary")?;
        let c = get(config, "config")?;
        let pooling = match c.pooling {
            HsPooling::Global => Pooling::Global,
            HsPooling::None => Pooling::None,
            HsPooling::Local => Pooling::Local { scale: None },
            HsPooling::LocalFixed => Pooling::Local { scale: Some(c.pool_scale) },
        };
        let config = ScatterConfig::new(c.max_scale, c.max_order, c.max_moment, pooling);
        config.validate()?;
        let stack = d.0.scale_stack(c.max_scale)?;
        let counts: Vec<usize> = (0..=c.max_scale).map(|j| stack.region_count(j)).collect();
        let width = feature_count(&config, stack.n, &counts);
        put(out, HsScatterer { stack, config, width })
    })
}

/// Features per signal.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hs_scatterer_feature_count(s: *const HsScatterer) -> usize {
    s.as_ref().map_or(0, |s| s.width)
}

/// Signal length the scatterer expects.
///
/// # Safety
/// `s` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn hs_scatterer_signal_len(s: *const HsScatterer) -> usize {
    s.as_ref().map_or(0, |s| s.stack.n)
}

/// Scatters `count` signals stored row-major in `signals` (each of length
/// `signal_len`) into `out`, one row of `hs_scatterer_feature_count`
/// values per signal.
///
/// # Safety
/// `signals` must hold `count * signal_len` readable entries and `out`
/// `out_len` writable entries.
#[no_mangle]
pub unsafe extern "C" fn hs_scatterer_apply(
    s: *const HsScatterer,
    signals: *const f64,
    count: usize,
    signal_len: usize,
    out: *mut f64,
    out_len: usize,
) -> HsStatus {
    guard(|| {
        let s = get(s, "scatterer")?;
        if signal_len != s.stack.n {
            return Err(Error::LengthMismatch { expected: s.stack.n, got: signal_len }.into());
        }
        let need = count * s.width;
        if out_len < need {
            return Err(Fail(HsStatus::BufferTooSmall, format!("buffer holds {out_len}, need {need}")));
        }
        let flat = slice(signals, count * signal_len, "signals")?;
        let rows: Vec<Vec<f64>> = flat.chunks(signal_len.max(1)).take(count).map(<[f64]>::to_vec).collect();
        let features = scatter_batch(&s.stack, &rows, &s.config)?;
        if need > 0 && out.is_null() {
            return Err(null("out"));
        }
        for (i, row) in features.iter().enumerate() {
            ptr::copy_nonoverlapping(row.as_ptr(), out.add(i * s.width), s.width);
        }
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from `hs_scatterer_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_scatterer_free(s: *mut HsScatterer) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
