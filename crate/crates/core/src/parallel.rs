//! Order-preserving map over independent work items.
//!
//! With the `parallel` feature (on by default) the map fans out over the
//! rayon pool; without it the same call runs in place.  Output order and
//! content are identical either way, so downstream artifacts stay
//! byte-stable regardless of how the work was scheduled.

use crate::error::Result;

#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Fallible variant.  All items run to completion; the error reported is
/// the one at the smallest index, so failure is as deterministic as
/// success.
pub fn par_try_map<T, U, F>(items: Vec<T>, f: F) -> Result<Vec<U>>
where
    T: Send,
    U: Send,
    F: Fn(T) -> Result<U> + Sync + Send,
{
    par_map(items, f).into_iter().collect()
}
