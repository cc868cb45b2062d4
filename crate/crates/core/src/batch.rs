//! Index-parallel evaluation of independent samples.
//!
//! With the `parallel` feature (on by default) [`map_indexed`] fans out over
//! rayon's pool; without it, it is a plain loop. Results are returned in index
//! order either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::Result;
use crate::linalg::Tolerances;
use crate::netlist::{reduce_network, NetworkSpec, ReductionResult, Route};

pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed_par<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_par(n, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_seq(n, f)
}

/// Reduces every network independently.
pub fn reduce_many(specs: &[NetworkSpec], route: Route, tol: &Tolerances) -> Vec<Result<ReductionResult>> {
    map_indexed(specs.len(), |k| reduce_network(&specs[k], route, tol))
}
