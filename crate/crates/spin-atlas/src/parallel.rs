//! Rayon executor.

use std::sync::Arc;

use rayon::prelude::*;
use rayon::ThreadPool;
use spin_atlas_core::sweep::Executor;

/// Environment variable holding the worker count (0 or unset: all cores).
pub const THREADS_ENV: &str = "SPIN_ATLAS_THREADS";

/// Runs independent jobs on a rayon pool; results come back in index order.
#[derive(Debug, Clone, Default)]
pub struct Rayon {
    pool: Option<Arc<ThreadPool>>,
}

impl Rayon {
    /// Use the global rayon pool.
    pub fn global() -> Self {
        Rayon { pool: None }
    }

    /// Dedicated pool of `threads` workers; 0 means the global pool.
    pub fn with_threads(threads: usize) -> Self {
        if threads == 0 {
            return Self::global();
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok().map(Arc::new);
        Rayon { pool }
    }

    /// Sized from [`THREADS_ENV`].
    pub fn from_env() -> Self {
        let n = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(0);
        Self::with_threads(n)
    }
}

impl Executor for Rayon {
    fn map_indexed<T: Send, F: Fn(usize) -> T + Sync>(&self, n: usize, f: F) -> Vec<T> {
        let run = || (0..n).into_par_iter().map(&f).collect();
        match &self.pool {
            Some(p) => p.install(run),
            None => run(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keeps_index_order() {
        for ex in [Rayon::global(), Rayon::with_threads(3)] {
            assert_eq!(ex.map_indexed(100, |i| i * i), (0..100).map(|i| i * i).collect::<Vec<_>>());
        }
    }
}
