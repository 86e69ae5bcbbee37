//! Order-preserving fan-out over independent work items.
//!
//! With the `parallel` feature (on by default) [`Parallelism::Parallel`]
//! uses the rayon pool; without it both settings run sequentially. Output
//! order always matches input order, so results do not depend on the
//! setting.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

pub fn par_map<T, U, F>(mode: Parallelism, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

/// Like [`par_map`] but stops at the first error in input order.
pub fn try_par_map<T, U, E, F>(mode: Parallelism, items: &[T], f: F) -> Result<Vec<U>, E>
where
    T: Sync,
    U: Send,
    E: Send,
    F: Fn(&T) -> Result<U, E> + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Parallelism::Parallel => {
            use rayon::prelude::*;
            // rayon would report whichever error it meets first in time
            let all: Vec<Result<U, E>> = items.par_iter().map(f).collect();
            all.into_iter().collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
