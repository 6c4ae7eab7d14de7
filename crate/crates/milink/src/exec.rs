//! Ordered map over an index range, data-parallel when the `parallel`
//! feature is enabled.
//!
//! Sweep points are independent, so they are evaluated concurrently and
//! collected back in index order: output is deterministic regardless of
//! scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f(0..n)` and returns the results in index order. Runs on
/// the rayon pool when the `parallel` feature is enabled, sequentially
/// otherwise.
pub fn map_ordered<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_ordered_seq(n, f)
    }
}

/// Sequential evaluation, independent of the `parallel` feature. Kept
/// public as the comparison baseline for the benchmark suite.
pub fn map_ordered_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
