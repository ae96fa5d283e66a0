//! C ABI over the `ddfen` library.
//!
//! Every fallible function returns a [`DdfenStatus`]. On failure the message
//! is available from [`ddfen_last_error`] on the same thread until the next
//! failing call. Matrices are exchanged row-major, return panels
//! column-major (each asset's series contiguous). Handles are created by the
//! library and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;
use std::slice;

use nalgebra::DMatrix;

use ddfen::dcca::{dccc, dccc_matrix, CorrelationMatrix};
use ddfen::deconv::{convolve_values, deconvolve_values, DeconvolveOptions, DirectMatrix};
use ddfen::graph::{self, IndexName};
use ddfen::ingest::ReturnPanel;
use ddfen::pipeline::detrended_volatility;
use ddfen::synth::{synthetic_codes, synthetic_dates};
use ddfen::threshold::{threshold_network, WeightedNetwork};
use ddfen::ErrorKind;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdfenStatus {
    Ok = 0,
    NullPointer = 1,
    Input = 2,
    Numerical = 3,
    Invariant = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdfenIndex {
    WeightedDegree = 0,
    Authority = 1,
    Closeness = 2,
    Betweenness = 3,
}

impl From<DdfenIndex> for IndexName {
    fn from(i: DdfenIndex) -> Self {
        match i {
            DdfenIndex::WeightedDegree => IndexName::WeightedDegree,
            DdfenIndex::Authority => IndexName::Authority,
            DdfenIndex::Closeness => IndexName::Closeness,
            DdfenIndex::Betweenness => IndexName::Betweenness,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdfenEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DdfenThresholdSummary {
    pub sigma_min: f64,
    /// Node whose strongest tie sets the cut.
    pub weakest_node: usize,
    pub theta: f64,
    pub kept_edges: usize,
    pub total_pairs: usize,
    pub components: usize,
}

/// Square matrix over nodes `0..n`: a correlation matrix, a direct-effect
/// matrix, or a reconvolved one.
pub struct DdfenMatrix {
    codes: Vec<String>,
    values: DMatrix<f64>,
}

pub struct DdfenNetwork {
    inner: WeightedNetwork,
}

enum Failure {
    Null(&'static str),
    Buffer { need: usize, got: usize },
    Lib(ddfen::Error),
}

impl From<ddfen::Error> for Failure {
    fn from(e: ddfen::Error) -> Self {
        Failure::Lib(e)
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DdfenStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DdfenStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("{what} is null"));
            DdfenStatus::NullPointer
        }
        Ok(Err(Failure::Buffer { need, got })) => {
            set_last_error(format!("buffer holds {got} elements, {need} needed"));
            DdfenStatus::BufferTooSmall
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            match e.kind() {
                ErrorKind::Input => DdfenStatus::Input,
                ErrorKind::Numerical => DdfenStatus::Numerical,
                ErrorKind::Invariant => DdfenStatus::Invariant,
            }
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "unknown panic".to_string());
            set_last_error(format!("panic: {msg}"));
            DdfenStatus::Panic
        }
    }
}

unsafe fn input<'a, T>(ptr: *const T, len: usize, what: &'static str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts(ptr, len))
}

unsafe fn output<'a, T>(
    ptr: *mut T,
    len: usize,
    need: usize,
    what: &'static str,
) -> Result<&'a mut [T], Failure> {
    if len < need {
        return Err(Failure::Buffer { need, got: len });
    }
    if need == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(slice::from_raw_parts_mut(ptr, need))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &'static str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or(Failure::Null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ddfen_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ddfen_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// DCCC of two series of length `n` at box size `box_size`.
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles; `out` to one writable.
#[no_mangle]
pub unsafe extern "C" fn ddfen_dccc(
    x: *const f64,
    y: *const f64,
    n: usize,
    box_size: usize,
    out: *mut f64,
) -> DdfenStatus {
    guard(|| {
        let x = input(x, n, "x")?;
        let y = input(y, n, "y")?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = dccc(x, y, box_size)?;
        Ok(())
    })
}

/// Root mean squared residual of `values` around its least-squares line.
///
/// # Safety
/// `values` must point to `n` readable doubles; `out` to one writable.
#[no_mangle]
pub unsafe extern "C" fn ddfen_detrended_volatility(
    values: *const f64,
    n: usize,
    out: *mut f64,
) -> DdfenStatus {
    guard(|| {
        let values = input(values, n, "values")?;
        let out = out.as_mut().ok_or(Failure::Null("out"))?;
        *out = detrended_volatility(values)?;
        Ok(())
    })
}

/// DCCC matrix of a column-major `n_obs x n_assets` return panel.
///
/// # Safety
/// `returns` must point to `n_obs * n_assets` readable doubles; `out` to a
/// writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ddfen_matrix_from_returns(
    returns: *const f64,
    n_obs: usize,
    n_assets: usize,
    box_size: usize,
    out: *mut *mut DdfenMatrix,
) -> DdfenStatus {
    guard(|| {
        let total = n_obs
            .checked_mul(n_assets)
            .ok_or_else(|| ddfen::Error::InvalidInput("panel size overflows".to_string()))?;
        let data = input(returns, total, "returns")?;
        let columns = (0..n_assets)
            .map(|k| data[k * n_obs..(k + 1) * n_obs].to_vec())
            .collect();
        let panel = ReturnPanel::new(synthetic_dates(n_obs), synthetic_codes(n_assets), columns)?;
        let m = dccc_matrix(&panel, box_size)?;
        store(
            out,
            DdfenMatrix {
                codes: m.codes().to_vec(),
                values: m.values().clone(),
            },
        )
    })
}

/// Wrap a row-major `n x n` correlation matrix. It must be symmetric with a
/// unit diagonal and entries in `[-1, 1]`.
///
/// # Safety
/// `values` must point to `n * n` readable doubles; `out` to a writable
/// handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ddfen_matrix_from_values(
    values: *const f64,
    n: usize,
    out: *mut *mut DdfenMatrix,
) -> DdfenStatus {
    guard(|| {
        let total = n
            .checked_mul(n)
            .ok_or_else(|| ddfen::Error::InvalidInput("matrix size overflows".to_string()))?;
        let data = input(values, total, "values")?;
        let m = CorrelationMatrix::new(
            synthetic_codes(n),
            None,
            DMatrix::from_row_slice(n, n, data),
        )?;
        store(
            out,
            DdfenMatrix {
                codes: m.codes().to_vec(),
                values: m.values().clone(),
            },
        )
    })
}

/// Side length of the matrix, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddfen_matrix_size(matrix: *const DdfenMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.codes.len())
}

/// Copy the matrix row-major into `out`, which must hold `n * n` doubles.
///
/// # Safety
/// `matrix` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ddfen_matrix_values(
    matrix: *const DdfenMatrix,
    out: *mut f64,
    len: usize,
) -> DdfenStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let n = m.codes.len();
        let out = output(out, len, n * n, "out")?;
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = m.values[(i, j)];
            }
        }
        Ok(())
    })
}

/// Direct-effect matrix `M (I + M)^-1` of `prescale * M`.
///
/// # Safety
/// `matrix` must be a live handle; `out` a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ddfen_matrix_deconvolve(
    matrix: *const DdfenMatrix,
    prescale: f64,
    out: *mut *mut DdfenMatrix,
) -> DdfenStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let values = deconvolve_values(&m.values, DeconvolveOptions { prescale })?;
        store(
            out,
            DdfenMatrix {
                codes: m.codes.clone(),
                values,
            },
        )
    })
}

/// Observed matrix `G (I - G)^-1` implied by a direct-effect matrix `G`.
///
/// # Safety
/// `matrix` must be a live handle; `out` a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ddfen_matrix_convolve(
    matrix: *const DdfenMatrix,
    out: *mut *mut DdfenMatrix,
) -> DdfenStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        let values = convolve_values(&m.values)?;
        store(
            out,
            DdfenMatrix {
                codes: m.codes.clone(),
                values,
            },
        )
    })
}

/// # Safety
/// `matrix` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddfen_matrix_free(matrix: *mut DdfenMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Keep every entry of a direct-effect matrix at or above the smallest row
/// maximum. `summary` may be null.
///
/// # Safety
/// `direct` must be a live handle; `out` a writable handle pointer;
/// `summary` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ddfen_network_threshold(
    direct: *const DdfenMatrix,
    out: *mut *mut DdfenNetwork,
    summary: *mut DdfenThresholdSummary,
) -> DdfenStatus {
    guard(|| {
        let m = handle(direct, "direct")?;
        let d = DirectMatrix::new(m.codes.clone(), m.values.clone())?;
        let (net, report) = threshold_network(&d)?;
        if let Some(s) = summary.as_mut() {
            *s = DdfenThresholdSummary {
                sigma_min: report.sigma_min,
                weakest_node: m
                    .codes
                    .iter()
                    .position(|c| *c == report.weakest_node)
                    .unwrap_or(0),
                theta: report.theta,
                kept_edges: report.kept_edges,
                total_pairs: report.total_pairs,
                components: report.components,
            };
        }
        store(out, DdfenNetwork { inner: net })
    })
}

/// Minimum spanning tree of a correlation matrix under `sqrt(2 (1 - rho))`.
/// Edge weights are the correlations.
///
/// # Safety
/// `correlation` must be a live handle; `out` a writable handle pointer.
#[no_mangle]
pub unsafe extern "C" fn ddfen_network_mst(
    correlation: *const DdfenMatrix,
    out: *mut *mut DdfenNetwork,
) -> DdfenStatus {
    guard(|| {
        let m = handle(correlation, "correlation")?;
        let c = CorrelationMatrix::new(m.codes.clone(), None, m.values.clone())?;
        store(
            out,
            DdfenNetwork {
                inner: graph::mst(&c)?,
            },
        )
    })
}

/// # Safety
/// `network` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddfen_network_node_count(network: *const DdfenNetwork) -> usize {
    network.as_ref().map_or(0, |n| n.inner.node_count())
}

/// # Safety
/// `network` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ddfen_network_edge_count(network: *const DdfenNetwork) -> usize {
    network.as_ref().map_or(0, |n| n.inner.edges().len())
}

/// Copy edges, sorted by `(source, target)` with `source < target`.
///
/// # Safety
/// `network` must be a live handle; `out` must point to `len` writable edges.
#[no_mangle]
pub unsafe extern "C" fn ddfen_network_edges(
    network: *const DdfenNetwork,
    out: *mut DdfenEdge,
    len: usize,
) -> DdfenStatus {
    guard(|| {
        let net = &handle(network, "network")?.inner;
        let out = output(out, len, net.edges().len(), "out")?;
        for (slot, e) in out.iter_mut().zip(net.edges()) {
            *slot = DdfenEdge {
                source: e.source,
                target: e.target,
                weight: e.weight,
            };
        }
        Ok(())
    })
}

/// Node scores for one index, in node order.
///
/// # Safety
/// `network` must be a live handle; `out` must point to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn ddfen_network_index(
    network: *const DdfenNetwork,
    index: DdfenIndex,
    out: *mut f64,
    len: usize,
) -> DdfenStatus {
    guard(|| {
        let net = &handle(network, "network")?.inner;
        let out = output(out, len, net.node_count(), "out")?;
        let scores = graph::compute_index(net, index.into())?;
        out.copy_from_slice(&scores.scores);
        Ok(())
    })
}

/// # Safety
/// `network` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ddfen_network_free(network: *mut DdfenNetwork) {
    if !network.is_null() {
        drop(Box::from_raw(network));
    }
}
