//! Indexed parallel map with a sequential fallback.
//!
//! Results are always returned in index order, so any reduction done by the
//! caller over the returned vector is independent of the schedule.

/// How many workers evaluate independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    /// Rayon's global pool.
    #[default]
    Auto,
    /// A dedicated pool with this many threads.
    Threads(usize),
}

impl Parallelism {
    /// `0` selects the global pool, `1` runs sequentially.
    pub fn from_workers(workers: usize) -> Self {
        match workers {
            0 => Self::Auto,
            1 => Self::Sequential,
            k => Self::Threads(k),
        }
    }
}

/// `(0..n).map(f)` evaluated according to `par`.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    match par {
        Parallelism::Sequential => (0..n).map(f).collect(),
        Parallelism::Auto => (0..n).into_par_iter().map(f).collect(),
        Parallelism::Threads(k) => {
            match rayon::ThreadPoolBuilder::new().num_threads(k).build() {
                Ok(pool) => pool.install(|| (0..n).into_par_iter().map(&f).collect()),
                Err(_) => (0..n).map(f).collect(),
            }
        }
    }
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, _par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}
