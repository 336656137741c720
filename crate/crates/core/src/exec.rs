//! Order-preserving map over trial indices, data-parallel when the
//! `parallel` feature is enabled.
//!
//! Every trial derives its randomness from its own index, so the results are
//! identical whichever backend runs them.

use std::sync::OnceLock;

/// Environment variable capping the worker count of the parallel backend.
pub const THREADS_ENV: &str = "EIGENGAP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Parallel when compiled with the `parallel` feature, else sequential.
    #[default]
    Auto,
    Sequential,
}

impl Backend {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Backend::Auto
    }
}

/// `(0..count).map(f)` collected in index order.
pub fn map_trials<T, F>(count: usize, backend: Backend, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if backend.is_parallel() {
        return parallel_map(count, f);
    }
    let _ = backend;
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match pool() {
        Some(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        None => (0..count).into_par_iter().map(f).collect(),
    }
}

/// A dedicated pool when `EIGENGAP_THREADS` is set to a positive integer.
#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let threads = configured_threads()?;
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
    })
    .as_ref()
}

/// Worker count requested through the environment, if any.
pub fn configured_threads() -> Option<usize> {
    static THREADS: OnceLock<Option<usize>> = OnceLock::new();
    *THREADS.get_or_init(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t > 0)
    })
}
