use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs `f(0) .. f(runs - 1)` on at most `jobs` threads (0: one per core)
/// and returns the results in run order. Each run derives its own seed, so
/// the result does not depend on `jobs`.
pub fn run_parallel<T, F>(runs: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("--jobs: {e}")))?;
    pool.install(|| (0..runs).into_par_iter().map(&f).collect())
}
