//! Run-level parallelism. Each task is an independent seeded run; results come
//! back in input order whatever the worker count, so downstream output is
//! deterministic. Without the `parallel` feature everything runs sequentially.

/// Environment variable bounding the worker pool.
pub const WORKERS_ENV: &str = "FUSIONPROC_WORKERS";

/// Worker bound from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.trim().parse().ok().filter(|&w| w > 0)
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], workers: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match workers.or_else(workers_from_env) {
        Some(1) => map_sequential(items, f),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.par_iter().map(&f).collect(),
        },
        None => items.par_iter().map(&f).collect(),
    }
}

/// Map `f` over `items` with at most `workers` threads (env bound when `None`).
pub fn map<T, R, F>(items: &[T], workers: Option<usize>, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, workers, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = workers;
        map_sequential(items, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_preserved_for_any_worker_count() {
        let items: Vec<u64> = (0..500).collect();
        let seq = map_sequential(&items, |x| x * x + 1);
        for w in [1, 2, 3, 8] {
            assert_eq!(map(&items, Some(w), |x| x * x + 1), seq);
        }
    }
}
