//! Execution strategy for embarrassingly parallel grids. With the `parallel`
//! feature (default) work is distributed via rayon; without it the same API
//! runs sequentially. Either way results come back in input order, so
//! downstream output is byte-identical regardless of scheduling.

/// Applies `f` to every item, in parallel when the `parallel` feature is
/// enabled. Output order always matches input order.
#[cfg(feature = "parallel")]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Applies `f` to every item sequentially (the `parallel` feature is off).
#[cfg(not(feature = "parallel"))]
pub fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}

/// Sequential baseline with the same signature as [`map_collect`], available
/// regardless of features; used by benchmarks to measure the parallel
/// speedup.
pub fn map_collect_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.iter().map(f).collect()
}
