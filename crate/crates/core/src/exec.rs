//! Execution strategy for the data-parallel inner loops (per-tree fits,
//! sweep grid cells, permutation cells).
//!
//! Work items are independent and carry their own derived seeds, so the
//! parallel and sequential paths produce identical results; results are
//! always collected in index order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    /// Rayon thread pool. Falls back to sequential when the crate is built
    /// without the `parallel` feature.
    Rayon,
}

impl Default for Parallelism {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Rayon
        } else {
            Parallelism::Sequential
        }
    }
}

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<R, F>(par: Parallelism, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match par {
        Parallelism::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Parallelism::Rayon => (0..n).into_par_iter().map(f).collect(),
        #[cfg(not(feature = "parallel"))]
        Parallelism::Rayon => (0..n).map(f).collect(),
    }
}
