//! Ordered map over independent jobs, on a rayon pool when the `parallel`
//! feature is enabled and sequentially otherwise.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Executor {
    Sequential,
    /// `threads = None` uses the global pool.
    #[default]
    Parallel,
    ParallelWith(usize),
}

impl Executor {
    /// Picks an executor from a requested thread count; `Some(1)` is sequential.
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            Some(0) | None => Executor::Parallel,
            Some(1) => Executor::Sequential,
            Some(k) => Executor::ParallelWith(k),
        }
    }

    /// Applies `f` to every job; output order matches `jobs`.
    pub fn map<T, R, F>(&self, jobs: &[T], f: F) -> Result<Vec<R>>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Executor::Sequential => Ok(jobs.iter().map(f).collect()),
            #[cfg(feature = "parallel")]
            Executor::Parallel => {
                use rayon::prelude::*;
                Ok(jobs.par_iter().map(f).collect())
            }
            #[cfg(feature = "parallel")]
            Executor::ParallelWith(k) => {
                use rayon::prelude::*;
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(*k)
                    .build()
                    .map_err(|e| crate::Error::NumericalFailure(format!("thread pool: {e}")))?;
                Ok(pool.install(|| jobs.par_iter().map(f).collect()))
            }
            #[cfg(not(feature = "parallel"))]
            Executor::Parallel | Executor::ParallelWith(_) => Ok(jobs.iter().map(f).collect()),
        }
    }
}
