//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the pointwise maps run on the rayon pool.
//! Reductions use a fixed chunking so both builds return bitwise-identical
//! results independent of the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length for deterministic reductions.
const CHUNK: usize = 4096;

/// Evaluates `f(k)` for `k in 0..n` and collects the results in order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
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

/// Maps a slice elementwise, preserving order.
pub fn map_slice<S, T, F>(xs: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        xs.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        xs.iter().map(f).collect()
    }
}

/// Sum with fixed chunk boundaries; partial sums are combined left to right.
pub fn sum(xs: &[f64]) -> f64 {
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = xs.par_chunks(CHUNK).map(|c| c.iter().sum()).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = xs.chunks(CHUNK).map(|c| c.iter().sum()).collect();
    partials.iter().sum()
}

/// Maximum of a slice, `0.0` for an empty slice. NaN propagates.
pub fn max(xs: &[f64]) -> f64 {
    let fold = |acc: f64, &x: &f64| if x.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(x) };
    #[cfg(feature = "parallel")]
    let partials: Vec<f64> = xs.par_chunks(CHUNK).map(|c| c.iter().fold(0.0, fold)).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<f64> = xs.chunks(CHUNK).map(|c| c.iter().fold(0.0, fold)).collect();
    partials.iter().fold(0.0, fold)
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v = map_indexed(10_000, |k| k * 2);
        assert!(v.iter().enumerate().all(|(k, &x)| x == 2 * k));
    }

    #[test]
    fn chunked_sum_matches_sequential_chunking() {
        let xs: Vec<f64> = (0..20_000).map(|k| (k as f64).sin()).collect();
        let expect: f64 = xs.chunks(CHUNK).map(|c| c.iter().sum::<f64>()).sum();
        assert_eq!(sum(&xs).to_bits(), expect.to_bits());
    }

    #[test]
    fn max_of_nonnegative() {
        assert_eq!(max(&[]), 0.0);
        assert_eq!(max(&[1.0, 3.0, 2.0]), 3.0);
        assert!(max(&[1.0, f64::NAN]).is_nan());
    }
}
