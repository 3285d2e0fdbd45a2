//! Execution policy for the embarrassingly parallel parts of the pipeline.
//!
//! Jost solves at distinct spectral nodes and Riemann–Hilbert solves at distinct
//! `(y, t)` points are independent. With the `parallel` feature they are
//! distributed with rayon; without it (or with [`Exec::Sequential`]) the same
//! closures run in order. Results are collected by index, so output is
//! bit-identical regardless of schedule.

/// How independent work items are executed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Exec {
    /// Run items one after another on the calling thread.
    Sequential,
    /// Distribute items over the rayon pool (falls back to sequential when the
    /// crate is built without the `parallel` feature).
    #[default]
    Parallel,
}

impl Exec {
    /// Whether this policy actually runs work concurrently in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Evaluates `f(0), …, f(n-1)` and returns the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Like [`Exec::map`] for fallible work; the first error (by index) wins.
    pub fn try_map<T, E, F>(self, n: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map(n, f).into_iter().collect()
    }
}

/// Configures the global worker pool size. Returns `false` when the pool was
/// already initialised or the crate was built without the `parallel` feature.
pub fn set_threads(n: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = n;
        false
    }
}
