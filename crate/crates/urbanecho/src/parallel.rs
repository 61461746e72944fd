//! Thin dispatch layer between the rayon data-parallel path (feature
//! `parallel`, on by default) and a plain sequential fallback.
//!
//! Both paths produce results in input order, so callers are bit-identical
//! regardless of the feature, the worker count, or scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over a slice, collecting results in input order.
#[cfg(feature = "parallel")]
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    F: Fn(usize) -> R,
{
    (0..n).map(f).collect()
}

/// Sequential reference implementations, always available so benchmarks can
/// compare against the parallel path within one binary.
pub mod seq {
    pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        F: Fn(&T) -> R,
    {
        items.iter().map(f).collect()
    }

    pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
    where
        F: Fn(usize) -> R,
    {
        (0..n).map(f).collect()
    }
}

/// Runs `job` on a dedicated pool of `workers` threads when the parallel
/// feature is enabled; with the feature disabled (or `workers == 0`) the job
/// runs inline on the caller's thread.
#[cfg(feature = "parallel")]
pub fn with_workers<R: Send>(workers: usize, job: impl FnOnce() -> R + Send) -> R {
    if workers == 0 {
        return job();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("failed to build worker pool");
    pool.install(job)
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<R>(workers: usize, job: impl FnOnce() -> R) -> R {
    let _ = workers;
    job()
}
