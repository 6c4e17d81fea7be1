//! Small statistics helpers for campaign comparisons.

/// Exact one-sided Mann-Whitney test by full enumeration of group
/// assignments. Returns the p-value for the alternative "values in `a` tend
/// to be larger than values in `b`". Ties contribute 1/2 to the U statistic.
///
/// Intended for small samples (n + m <= 24); the enumeration is exact even
/// in the presence of ties.
pub fn mann_whitney_one_sided(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let n = a.len();
    let m = b.len();
    assert!(n + m <= 24, "exact enumeration limited to n+m <= 24");
    let pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();

    fn u_stat(xs: &[f64], ys: &[f64]) -> f64 {
        let mut u = 0.0;
        for x in xs {
            for y in ys {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    }

    let observed = u_stat(a, b);
    let total = n + m;
    let mut count: u64 = 0;
    let mut splits: u64 = 0;
    // Gosper's hack over all n-subsets of the pooled indices
    let mut mask: u64 = (1u64 << n) - 1;
    let limit: u64 = 1u64 << total;
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(m);
    while mask < limit {
        xs.clear();
        ys.clear();
        for (i, v) in pooled.iter().enumerate() {
            if mask & (1u64 << i) != 0 {
                xs.push(*v);
            } else {
                ys.push(*v);
            }
        }
        if u_stat(&xs, &ys) >= observed - 1e-9 {
            count += 1;
        }
        splits += 1;
        // next subset with the same popcount
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if c == 0 {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    count as f64 / splits as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clearly_separated_samples() {
        let a = [10.0, 11.0, 12.0, 13.0, 14.0];
        let b = [0.0, 1.0, 2.0, 3.0, 4.0];
        let p = mann_whitney_one_sided(&a, &b);
        // only the observed split achieves the maximal U
        assert!((p - 1.0 / 252.0).abs() < 1e-12);
        // reversed direction: everything is at least as extreme
        assert!(mann_whitney_one_sided(&b, &a) > 0.99);
    }

    #[test]
    fn identical_samples_are_not_significant() {
        let a = [1.0, 2.0, 3.0];
        let b = [1.0, 2.0, 3.0];
        let p = mann_whitney_one_sided(&a, &b);
        assert!(p > 0.4);
    }

    #[test]
    fn known_small_case() {
        // a = {2, 4}, b = {1, 3}: U = 3 of 4; splits with U >= 3: {3,4}(U=4),
        // {2,4}(U=3) -> p = 2/6
        let p = mann_whitney_one_sided(&[2.0, 4.0], &[1.0, 3.0]);
        assert!((p - 2.0 / 6.0).abs() < 1e-12);
    }
}
