//! Execution helpers: data-parallel maps with a sequential fallback.
//!
//! Every hot loop in this crate is an embarrassingly parallel map over an
//! index range followed by a reduction in a fixed order. With the `parallel`
//! feature (default) the map runs on rayon; without it, or via the `*_seq`
//! variants, it runs sequentially. Reductions are never parallelized, so
//! results are bit-identical regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential counterpart of [`map_indexed`], available unconditionally.
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
