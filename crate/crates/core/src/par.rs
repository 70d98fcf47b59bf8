//! Execution mode and the row-chunked kernels shared by every module.
//!
//! Every parallel kernel splits its output into fixed-size row blocks and each
//! block is produced by exactly one worker, so the floating point result does
//! not depend on the number of threads or on the execution mode.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array2, ArrayView2, Axis};
#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per block for dense products. Fixed so results are reproducible.
pub const MATMUL_ROW_BLOCK: usize = 128;

/// Rows per block for sparse kernels.
pub const SPARSE_ROW_BLOCK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when the `parallel` feature is disabled.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Calls `f(first_row, block)` for consecutive blocks of `rows_per_block` rows
/// of a row-major buffer with `row_len` columns.
pub(crate) fn for_each_row_block<F>(
    out: &mut [f64],
    row_len: usize,
    rows_per_block: usize,
    exec: Execution,
    f: F,
) where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if row_len == 0 || out.is_empty() {
        return;
    }
    let block_len = row_len * rows_per_block.max(1);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        out.par_chunks_mut(block_len)
            .enumerate()
            .for_each(|(b, chunk)| f(b * rows_per_block, chunk));
        return;
    }
    let _ = exec;
    out.chunks_mut(block_len)
        .enumerate()
        .for_each(|(b, chunk)| f(b * rows_per_block, chunk));
}

/// Maps `f` over `0..n`, preserving order.
pub(crate) fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Dense `a · b`, computed in row blocks of `a`.
pub fn matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, exec: Execution) -> Array2<f64> {
    assert_eq!(a.ncols(), b.nrows(), "matmul inner dimensions differ");
    let mut out = Array2::<f64>::zeros((a.nrows(), b.ncols()));
    if out.is_empty() {
        return out;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        out.axis_chunks_iter_mut(Axis(0), MATMUL_ROW_BLOCK)
            .into_par_iter()
            .zip(a.axis_chunks_iter(Axis(0), MATMUL_ROW_BLOCK).into_par_iter())
            .for_each(|(mut o, a_blk)| general_mat_mul(1.0, &a_blk, &b, 0.0, &mut o));
        return out;
    }
    let _ = exec;
    for (mut o, a_blk) in out
        .axis_chunks_iter_mut(Axis(0), MATMUL_ROW_BLOCK)
        .zip(a.axis_chunks_iter(Axis(0), MATMUL_ROW_BLOCK))
    {
        general_mat_mul(1.0, &a_blk, &b, 0.0, &mut o);
    }
    out
}

/// `aᵀ · b` without materializing the transpose.
pub fn matmul_tn(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, exec: Execution) -> Array2<f64> {
    matmul(a.t(), b, exec)
}
