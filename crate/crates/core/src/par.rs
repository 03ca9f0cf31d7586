//! Data-parallel execution with a deterministic sequential fallback.
//!
//! Heavy loops (lattice scans, quadrature grids, pairwise searches) funnel
//! through [`map_range`]. With the `parallel` feature enabled the work is
//! spread over the rayon pool; results are collected in index order, and all
//! reductions downstream happen sequentially over that ordered buffer, so
//! both lanes produce byte-identical output. The sequential lane exists in
//! two forms: compile the crate without the `parallel` feature, or flip the
//! runtime switch [`force_sequential`] (used by the benchmarks to compare
//! both lanes inside one binary).

use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Force all subsequent [`map_range`] calls onto the sequential lane
/// (process-wide). Intended for benchmarks and debugging.
pub fn force_sequential(on: bool) {
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
}

/// Whether the runtime switch currently forces sequential execution.
pub fn sequential_forced() -> bool {
    FORCE_SEQUENTIAL.load(Ordering::SeqCst)
}

/// Cap the worker pool at `n` threads, process-wide. Must run before the
/// pool is first used; `n = 0` keeps the default. Without the `parallel`
/// feature the call is a no-op — results are identical either way, only
/// throughput changes.
pub fn init_threads(n: usize) -> crate::error::Result<()> {
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| crate::error::Error::InvalidParameter {
                reason: format!("worker pool configuration failed: {e}"),
            })?;
    }
    let _ = n;
    Ok(())
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    if sequential_forced() {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}

/// Map `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_range<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_range_preserves_index_order() {
        let out = map_range(1000, |i| i * i);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, i * i);
        }
    }

    #[test]
    fn both_lanes_agree_bitwise() {
        // A reduction with float cancellation: identical results require
        // identical evaluation order, which ordered collection guarantees.
        let work = |i: usize| {
            let x = (i as f64).sin() * 1e-3 + (i as f64 * 0.01).cos();
            x * x - x.powi(3) / 7.0
        };
        let par: Vec<f64> = map_range(10_000, work);
        force_sequential(true);
        let seq: Vec<f64> = map_range(10_000, work);
        force_sequential(false);
        assert_eq!(par.len(), seq.len());
        for (a, b) in par.iter().zip(seq.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
