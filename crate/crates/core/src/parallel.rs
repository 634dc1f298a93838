//! Fixed-partition parallel map. Work is split into units indexed `0..units`;
//! results always come back in unit order, so any fold over them is
//! independent of the worker count.

use rayon::prelude::*;

/// Default number of samples per work unit.
pub const UNIT_SIZE: u64 = 4096;

/// `jobs == 0` uses rayon's default thread count.
pub fn map_units<R, F>(jobs: usize, units: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    if jobs == 1 || units <= 1 {
        return (0..units).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .expect("thread pool");
    pool.install(|| (0..units).into_par_iter().map(&f).collect())
}

/// Splits `total` items into `(start, len)` chunks of `unit` items.
pub fn chunks(total: u64, unit: u64) -> Vec<(u64, u64)> {
    let unit = unit.max(1);
    (0..total.div_ceil(unit))
        .map(|i| {
            let start = i * unit;
            (start, unit.min(total - start))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_in_unit_order() {
        let seq = map_units(1, 50, |i| i * i);
        let par = map_units(4, 50, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn chunking_covers_range() {
        assert_eq!(chunks(10, 4), vec![(0, 4), (4, 4), (8, 2)]);
        assert!(chunks(0, 4).is_empty());
    }
}
