//! Replica scheduling.
//!
//! Results are always returned in replica-index order, so a run is
//! reproducible regardless of worker count. With the `parallel` feature
//! (default) work is spread over the ambient rayon pool; without it the
//! sequential path is used.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_replicas<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_replicas_parallel(count, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_replicas_sequential(count, f)
    }
}

/// Like [`map_replicas`] but stops at the first error (lowest index wins
/// in the sequential build; any failing index in the parallel build).
pub fn try_map_replicas<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

pub fn map_replicas_sequential<T, F>(count: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..count).map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_replicas_parallel<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_by_index() {
        let v = map_replicas(100, |i| i * i);
        assert_eq!(v, (0..100).map(|i| i * i).collect::<Vec<_>>());
    }

    #[test]
    fn try_map_propagates_error() {
        let r: Result<Vec<usize>, String> =
            try_map_replicas(10, |i| if i == 7 { Err("boom".into()) } else { Ok(i) });
        assert!(r.is_err());
    }
}
