//! Independent runs over many inputs: instances, seeds, sweeps.
//!
//! With the `parallel` feature (default) [`map`] fans out over the rayon
//! global pool; without it, it is [`map_seq`]. Results keep input order
//! either way, and each closure call stays single-threaded, so per-run
//! timings are comparable between the two.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Order-preserving map, parallel when the `parallel` feature is enabled.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

/// Sequential reference for [`map`].
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// [`map`] over `0..count`.
pub fn map_range<R, F>(count: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    let indices: Vec<usize> = (0..count).collect();
    map(&indices, |&i| f(i))
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let items: Vec<u64> = (0..200).collect();
        let squares = map(&items, |x| x * x);
        assert_eq!(squares, map_seq(&items, |x| x * x));
        assert_eq!(map_range(5, |i| i + 1), vec![1, 2, 3, 4, 5]);
    }
}
