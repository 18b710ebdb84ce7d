//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction here sums along a fixed binary tree over the index range,
//! so the result does not depend on how many workers run it.

use std::ops::{Add, Range};

use num_complex::Complex64;

/// Leaf size of the summation tree.
const LEAF: usize = 64;

/// How a data-parallel loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    /// Rayon work-stealing pool (falls back to `Sequential` without the `parallel` feature).
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    #[inline]
    fn parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

pub trait Summand: Copy + Send + Add<Output = Self> {
    const ZERO: Self;
}

impl Summand for f64 {
    const ZERO: Self = 0.0;
}

impl Summand for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
}

/// Pairwise sum of `f(i)` for `i` in `range`.
pub fn tree_sum<T, F>(exec: Exec, range: Range<usize>, f: F) -> T
where
    T: Summand,
    F: Fn(usize) -> T + Sync,
{
    tree_sum_rec(exec.parallel(), range, &f)
}

fn tree_sum_rec<T, F>(par: bool, range: Range<usize>, f: &F) -> T
where
    T: Summand,
    F: Fn(usize) -> T + Sync,
{
    let len = range.end - range.start;
    if len <= LEAF {
        let mut acc = T::ZERO;
        for i in range {
            acc = acc + f(i);
        }
        return acc;
    }
    let mid = range.start + len / 2;
    let (lo, hi) = (range.start..mid, mid..range.end);
    let (a, b) = join(par, || tree_sum_rec(par, lo, f), || tree_sum_rec(par, hi, f));
    a + b
}

/// Pairwise sum of a slice, same tree shape as [`tree_sum`].
pub fn pairwise_sum<T: Summand + Sync>(values: &[T]) -> T {
    tree_sum(Exec::Sequential, 0..values.len(), |i| values[i])
}

/// `f(i)` for every `i` in `range`, in index order.
pub fn map_collect<T, F>(exec: Exec, range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// The first (lowest index) `i` with `f(i)` returning `Some`.
pub fn find_map_first<T, F>(exec: Exec, range: Range<usize>, f: F) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().find_map_first(f);
    }
    let _ = exec;
    range.into_iter().find_map(f)
}

fn join<A, B, RA, RB>(par: bool, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    #[cfg(feature = "parallel")]
    if par {
        return rayon::join(a, b);
    }
    let _ = par;
    (a(), b())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_across_modes() {
        let f = |i: usize| 1.0 / (1.0 + i as f64).powf(1.3);
        let a = tree_sum(Exec::Parallel, 0..100_000, f);
        let b = tree_sum(Exec::Sequential, 0..100_000, f);
        assert_eq!(a.to_bits(), b.to_bits());
        let v: Vec<f64> = (0..100_000).map(f).collect();
        assert_eq!(pairwise_sum(&v).to_bits(), a.to_bits());
    }

    #[test]
    fn empty_range_sums_to_zero() {
        assert_eq!(tree_sum(Exec::Parallel, 5..5, |_| 1.0), 0.0);
    }

    #[test]
    fn find_first_is_lowest_index() {
        let hit = find_map_first(Exec::Parallel, 0..10_000, |i| (i % 977 == 976).then_some(i));
        assert_eq!(hit, Some(976));
        assert_eq!(find_map_first(Exec::Sequential, 0..10, |_| None::<usize>), None);
    }

    #[test]
    fn map_collect_keeps_order() {
        let v = map_collect(Exec::Parallel, 0..1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
