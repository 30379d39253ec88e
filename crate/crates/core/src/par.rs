//! Execution strategy for the exhaustive kernels.
//!
//! Every kernel that averages over an enumeration domain is written against
//! [`Exec`]. With the `parallel` feature the index range is split across the
//! rayon pool; without it, or with [`Exec::Sequential`], a plain loop runs.

/// How an exhaustive sum is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    Parallel,
}

impl Default for Exec {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }
}

/// Map every index in `0..len` and fold the results with `reduce`.
pub fn map_reduce<T, M, R>(exec: Exec, len: usize, identity: T, map: M, reduce: R) -> T
where
    T: Send + Sync + Clone,
    M: Fn(usize) -> T + Send + Sync,
    R: Fn(T, T) -> T + Send + Sync,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..len)
                .into_par_iter()
                .map(&map)
                .reduce(|| identity.clone(), &reduce)
        }
        _ => (0..len).map(map).fold(identity, reduce),
    }
}

/// Collect `map(i)` for every index in order.
pub fn map_collect<T, M>(exec: Exec, len: usize, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(usize) -> T + Send + Sync,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => {
            use rayon::prelude::*;
            (0..len).into_par_iter().map(map).collect()
        }
        _ => (0..len).map(map).collect(),
    }
}
