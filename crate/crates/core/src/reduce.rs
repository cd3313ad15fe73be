//! Deterministic reductions.
//!
//! Results must be bit-identical for any thread count, so parallel work is
//! collected in index order and folded with a fixed pairwise tree instead of
//! whatever association the scheduler happens to produce.

use num_complex::Complex64;
use rayon::prelude::*;

/// Pairwise tree sum with a fixed association order.
pub fn tree_sum_f64(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let mid = n / 2;
            tree_sum_f64(&values[..mid]) + tree_sum_f64(&values[mid..])
        }
    }
}

pub fn tree_sum_complex(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        n => {
            let mid = n / 2;
            tree_sum_complex(&values[..mid]) + tree_sum_complex(&values[mid..])
        }
    }
}

/// Map `0..n` in parallel, then tree-sum the results in index order.
pub fn par_sum_f64<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let parts: Vec<f64> = (0..n).into_par_iter().map(f).collect();
    tree_sum_f64(&parts)
}

/// Ordered parallel map; the output index matches the input index.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
