//! Replicate-level fan-out. Results always come back in replicate order, so
//! the output does not depend on how many workers ran.

/// Evaluates `f(0), …, f(count - 1)`, in parallel when the `parallel`
/// feature is on (inside whatever rayon pool is current).
#[cfg(feature = "parallel")]
pub fn map_replicates<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count as u64).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_replicates<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count as u64).map(f).collect()
}

/// Runs `job` on a pool of `workers` threads (the global pool when `None`).
#[cfg(feature = "parallel")]
pub fn with_workers<T: Send, J: FnOnce() -> T + Send>(workers: Option<usize>, job: J) -> T {
    match workers {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            Ok(pool) => pool.install(job),
            Err(_) => job(),
        },
        None => job(),
    }
}

#[cfg(not(feature = "parallel"))]
pub fn with_workers<T, J: FnOnce() -> T>(_workers: Option<usize>, job: J) -> T {
    job()
}
