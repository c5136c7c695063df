//! Data-parallel map with a sequential twin.
//!
//! Enumeration and search evaluate many independent candidates; those loops
//! go through [`map_maybe_par`] so the crate runs identically with or
//! without the `parallel` feature, and so benchmarks can compare both
//! drivers within one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the `parallel` feature is
/// compiled in and `par` is true; order of results matches input order.
pub(crate) fn map_maybe_par<T, U, F>(par: bool, items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if par {
            return items.into_par_iter().map(&f).collect();
        }
    }
    let _ = par;
    items.into_iter().map(f).collect()
}
