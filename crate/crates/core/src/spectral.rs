//! FFT plumbing shared by the phase-space solver and the norms.
//!
//! Conventions: spatial modes use the kernel `e^{-2iπkx}` on the unit torus,
//! velocity frequencies use `e^{-2iπηv}` with `η_m = m / (2V)` on `[-V, V)`.
//! Index vectors are in FFT order (`0, 1, …, n/2-1, -n/2, …, -1`).

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Rows per rayon task; below this many elements everything stays on one thread.
const PARALLEL_THRESHOLD: usize = 1 << 15;

pub fn forward_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub fn inverse_plan(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Signed wavenumber of FFT slot `idx` for a transform of length `n`.
#[inline]
pub fn wavenumber(idx: usize, n: usize) -> i64 {
    if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// FFT slot holding wavenumber `k`, if it is representable.
#[inline]
pub fn slot(k: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if k >= -half && k < half {
        Some(if k >= 0 { k as usize } else { (k + n as i64) as usize })
    } else {
        None
    }
}

/// Applies `fft` to every consecutive row of length `fft.len()` in `buf`.
pub fn process_rows(fft: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
    let n = fft.len();
    if buf.len() < PARALLEL_THRESHOLD {
        fft.process(buf);
    } else {
        let rows_per_task = (PARALLEL_THRESHOLD / n).max(1);
        buf.par_chunks_mut(n * rows_per_task)
            .for_each(|chunk| fft.process(chunk));
    }
}

/// Transposes a `rows × cols` row-major matrix.
pub fn transpose<T: Copy + Default>(src: &[T], rows: usize, cols: usize) -> Vec<T> {
    debug_assert_eq!(src.len(), rows * cols);
    let mut out = vec![T::default(); src.len()];
    for r in 0..rows {
        let row = &src[r * cols..(r + 1) * cols];
        for (c, &val) in row.iter().enumerate() {
            out[c * rows + r] = val;
        }
    }
    out
}

/// Runs `op(row_index, row)` over consecutive rows, in parallel for large buffers.
pub fn for_each_row<T, F>(buf: &mut [T], row_len: usize, op: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if buf.len() < PARALLEL_THRESHOLD {
        buf.chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| op(i, row));
    } else {
        buf.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| op(i, row));
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
