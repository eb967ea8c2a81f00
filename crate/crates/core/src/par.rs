//! Data-parallel fan-out with a sequential fallback.
//!
//! Monte Carlo realizations are independent work items; with the `parallel`
//! feature (default) they fan out over the current rayon pool, otherwise they
//! run on one thread. Output order always matches input index order and all
//! reductions happen sequentially afterwards, so numeric results are
//! bit-identical regardless of feature choice or worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..count`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

/// Map `f` over `0..count`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Configure the global worker pool size. Returns an error string if a pool
/// was already installed (harmless: the existing pool is kept).
#[cfg(feature = "parallel")]
pub fn configure_workers(workers: usize) -> std::result::Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| e.to_string())
}

/// Without the `parallel` feature the worker count is fixed at one.
#[cfg(not(feature = "parallel"))]
pub fn configure_workers(_workers: usize) -> std::result::Result<(), String> {
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_index_order() {
        let out = map_indexed(1000, |i| i * i);
        assert_eq!(out[17], 289);
        assert_eq!(out.len(), 1000);
        assert!(out.windows(2).all(|w| w[0] < w[1]));
    }
}
