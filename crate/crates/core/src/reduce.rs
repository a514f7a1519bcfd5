//! Deterministic reductions.
//!
//! Sums use a fixed binary tree over fixed-size leaves, so the result depends
//! only on the input order and never on the number of worker threads.

const LEAF: usize = 256;

/// Pairwise sum with a fixed reduction tree; parallel above the leaf size.
pub fn tree_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = split_point(values.len());
    let (a, b) = values.split_at(mid);
    let (sa, sb) = rayon::join(|| tree_sum(a), || tree_sum(b));
    sa + sb
}

/// Tree sum of `f(i)` for `i in 0..len`, evaluated lazily.
pub fn tree_sum_by<F>(len: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    fn rec<F: Fn(usize) -> f64 + Sync>(lo: usize, hi: usize, f: &F) -> f64 {
        let len = hi - lo;
        if len <= LEAF {
            return (lo..hi).map(f).sum();
        }
        let mid = lo + split_point(len);
        let (a, b) = rayon::join(|| rec(lo, mid, f), || rec(mid, hi, f));
        a + b
    }
    rec(0, len, &f)
}

/// Largest power-of-two multiple of the leaf below `len`, so the tree shape is
/// a function of `len` alone.
fn split_point(len: usize) -> usize {
    let leaves = len.div_ceil(LEAF);
    let half = leaves.next_power_of_two() / 2;
    (half.max(1) * LEAF).min(len - 1)
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_sum() {
        let v: Vec<f64> = (0..10_007).map(|i| (i as f64 * 0.37).sin()).collect();
        let naive: f64 = v.iter().sum();
        assert!((tree_sum(&v) - naive).abs() < 1e-10);
        assert_eq!(tree_sum(&v), tree_sum_by(v.len(), |i| v[i]));
    }

    #[test]
    fn independent_of_thread_count() {
        let v: Vec<f64> = (0..100_000).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(7).build().unwrap();
        let a = one.install(|| tree_sum(&v));
        let b = many.install(|| tree_sum(&v));
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn small_inputs() {
        assert_eq!(tree_sum(&[]), 0.0);
        assert_eq!(tree_sum(&[2.5]), 2.5);
        assert_eq!(tree_sum_by(0, |_| 1.0), 0.0);
    }
}
