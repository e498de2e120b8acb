//! Row-parallel evaluation with a sequential fallback.
//!
//! With the `parallel` feature (default) grid rows are evaluated on the rayon
//! pool. Every row is computed independently in a fixed order, so both
//! strategies produce bit-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Execution strategy for embarrassingly parallel grid work.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// Evaluates `f(0..n)` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..n).into_par_iter().map(f).collect(),
        }
    }
}
