//! Order-preserving data-parallel maps.
//!
//! With the `parallel` feature the maps run on the rayon pool; without it they
//! fall back to plain iterators. Results always come back in input order, so
//! reductions done by the caller are bit-identical across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Whether the crate was built with the rayon backend.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

pub(crate) fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
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
        items.iter().map(f).collect()
    }
}

pub(crate) fn map_range<R, F>(len: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Splits `0..total` into at most `chunks` contiguous ranges of near-equal size.
pub(crate) fn chunk_ranges(total: u64, chunks: u64) -> Vec<(u64, u64)> {
    let chunks = chunks.clamp(1, total.max(1));
    let step = total.div_ceil(chunks);
    (0..chunks)
        .map(|c| (c * step, ((c + 1) * step).min(total)))
        .filter(|(a, b)| a < b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range() {
        for total in [0u64, 1, 7, 64, 1000] {
            let ranges = chunk_ranges(total, 16);
            let covered: u64 = ranges.iter().map(|(a, b)| b - a).sum();
            assert_eq!(covered, total);
            for w in ranges.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
        }
    }

    #[test]
    fn map_preserves_order() {
        let v: Vec<usize> = (0..1000).collect();
        assert_eq!(map(&v, |x| x * 2), map_range(1000, |x| x * 2));
    }
}
