//! Replication-level execution: a rayon pool or a plain loop.
//!
//! Results are always returned in replication order, so output never depends
//! on the execution mode or the thread count.

use crate::error::Result;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `threads = None` uses rayon's default pool size.
    Parallel { threads: Option<usize> },
    /// Parallel when the feature is enabled, otherwise sequential.
    #[default]
    Auto,
}

impl Execution {
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(1) => Execution::Sequential,
            t if cfg!(feature = "parallel") => Execution::Parallel { threads: t },
            _ => Execution::Sequential,
        }
    }

    fn resolved(self) -> Self {
        match self {
            Execution::Auto => Execution::from_threads(None),
            other => other,
        }
    }
}

/// `f(0), f(1), .., f(count - 1)` under the given execution mode.
pub fn map_indexed<T, F>(exec: Execution, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec.resolved() {
        Execution::Parallel { threads } => parallel_map(threads, count, f),
        _ => (0..count).map(f).collect(),
    }
}

/// Like [`map_indexed`] but stops at the first error in index order.
pub fn try_map_indexed<T, F>(exec: Execution, count: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indexed(exec, count, f).into_iter().collect()
}

#[cfg(feature = "parallel")]
fn parallel_map<T, F>(threads: Option<usize>, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    let run = || (0..count).into_par_iter().map(&f).collect();
    match threads {
        None => run(),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                log::warn!("could not build a {t}-thread pool ({e}); using the global pool");
                run()
            }
        },
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, F>(_threads: Option<usize>, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    log::debug!("built without the parallel feature; running sequentially");
    (0..count).map(f).collect()
}
