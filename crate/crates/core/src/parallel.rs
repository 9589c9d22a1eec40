//! Execution policy for the data-parallel inner loops (batched FFT lines,
//! independent per-series solves). Without the `parallel` feature every
//! policy runs sequentially.
//!
//! Parallel execution never changes results: work items are independent and
//! all floating-point reductions stay sequential.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Sets the size of the global worker pool. Returns false when the pool was
/// already initialised or the crate was built without `parallel`.
pub fn configure_threads(threads: usize) -> bool {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .is_ok()
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        false
    }
}

pub fn available_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Runs `f` over consecutive chunks of `data`, each `chunk_len` long.
pub(crate) fn for_each_chunk_mut<T, F>(exec: Execution, data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(&mut [T]) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        data.par_chunks_mut(chunk_len).for_each(f);
        return;
    }
    let _ = exec;
    data.chunks_mut(chunk_len).for_each(f);
}

/// Order-preserving map over independent work items.
pub(crate) fn map_indexed<U, F>(exec: Execution, count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..count).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..count).map(f).collect()
}

/// Chunk length (in whole lines) that gives each worker a few tasks.
pub(crate) fn lines_per_task(exec: Execution, lines: usize) -> usize {
    if !exec.is_parallel() {
        return lines.max(1);
    }
    let tasks = available_threads() * 4;
    lines.div_ceil(tasks).max(1)
}
