//! Index-ordered data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature (default) [`Execution::Parallel`] runs on a
//! rayon pool; without it every execution mode runs sequentially. Results are
//! always returned in index order, so output never depends on scheduling.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `workers == 0` uses rayon's global pool.
    Parallel { workers: usize },
}

impl Default for Execution {
    fn default() -> Self {
        Execution::Parallel { workers: 0 }
    }
}

impl Execution {
    /// `1` means sequential, `0` means all available cores.
    pub fn from_workers(workers: usize) -> Self {
        if workers == 1 {
            Execution::Sequential
        } else {
            Execution::Parallel { workers }
        }
    }
}

/// `(0..count).map(f)` collected in index order.
pub fn map_range<T, F>(count: u64, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..count).map(f).collect(),
        Execution::Parallel { workers } => parallel_map(count, workers, f),
    }
}

/// Like [`map_range`] but stops at the first error (lowest index wins).
pub fn try_map_range<T, E, F>(count: u64, exec: Execution, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map_range(count, exec, f).into_iter().collect()
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(count: u64, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 0 {
        return (0..count).into_par_iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(count: u64, _workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree_and_keep_order() {
        let seq = map_range(1000, Execution::Sequential, |i| i * i);
        let par = map_range(1000, Execution::Parallel { workers: 3 }, |i| i * i);
        let global = map_range(1000, Execution::default(), |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq, global);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn first_error_wins() {
        let r: Result<Vec<u64>, u64> =
            try_map_range(100, Execution::default(), |i| if i % 30 == 29 { Err(i) } else { Ok(i) });
        assert_eq!(r, Err(29));
    }
}
