//! Two-sample Wilcoxon rank-sum test.

use statrs::function::erf::erfc;

use super::MetricError;

/// Largest combined sample size for which the exact null distribution is used.
pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankSumMethod {
    /// Exact when the combined size is at most [`EXACT_LIMIT`] and there are no
    /// ties, normal approximation otherwise.
    Auto,
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSum {
    /// Sum of the (mid)ranks of the first sample in the pooled ordering.
    pub statistic: f64,
    /// Two-sided p-value in (0, 1].
    pub p_value: f64,
    pub exact: bool,
}

/// Pooled midranks of `a` followed by `b`, and whether any ties occurred.
fn midranks(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let mut order: Vec<usize> = (0..pooled.len()).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; pooled.len()];
    let mut tie_sizes = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && pooled[order[end]] == pooled[order[start]] {
            end += 1;
        }
        // positions start..end hold ranks start+1..=end
        let mid = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = mid;
        }
        if end - start > 1 {
            tie_sizes.push(end - start);
        }
        start = end;
    }
    (ranks, tie_sizes)
}

/// Number of `n`-subsets of `{1..=total}` for each rank sum, indexed by sum.
fn rank_sum_counts(n: usize, total: usize) -> Vec<f64> {
    let max_sum = n * (2 * total - n + 1) / 2;
    // counts[j][s]: subsets of size j with sum s among the items seen so far
    let mut counts = vec![vec![0.0f64; max_sum + 1]; n + 1];
    counts[0][0] = 1.0;
    for item in 1..=total {
        for j in (1..=n.min(item)).rev() {
            for s in (item..=max_sum).rev() {
                let add = counts[j - 1][s - item];
                if add != 0.0 {
                    counts[j][s] += add;
                }
            }
        }
    }
    counts.swap_remove(n)
}

/// Exact two-sided p-value of rank sum `w` for samples of sizes `n` and `m`
/// without ties.
pub fn exact_p_value(n: usize, m: usize, w: f64) -> f64 {
    let counts = rank_sum_counts(n, n + m);
    let total: f64 = counts.iter().sum();
    let (mut lower, mut upper) = (0.0, 0.0);
    for (s, &c) in counts.iter().enumerate() {
        let s = s as f64;
        if s <= w {
            lower += c;
        }
        if s >= w {
            upper += c;
        }
    }
    (2.0 * lower.min(upper) / total).min(1.0)
}

fn normal_p_value(n: usize, m: usize, w: f64, tie_sizes: &[usize]) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let big_n = nf + mf;
    let mean = nf * (big_n + 1.0) / 2.0;
    let tie_term: f64 = tie_sizes
        .iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum();
    let variance = nf * mf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
    if variance <= 0.0 {
        return 1.0;
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / variance.sqrt();
    erfc(z / std::f64::consts::SQRT_2).clamp(f64::MIN_POSITIVE, 1.0)
}

pub fn wilcoxon_rank_sum(a: &[f64], b: &[f64]) -> Result<RankSum, MetricError> {
    wilcoxon_rank_sum_with(a, b, RankSumMethod::Auto)
}

pub fn wilcoxon_rank_sum_with(a: &[f64], b: &[f64], method: RankSumMethod) -> Result<RankSum, MetricError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(MetricError::TooFewSamples {
            needed: 2,
            got: a.len().min(b.len()),
        });
    }
    if a.iter().chain(b).any(|x| x.is_nan()) {
        return Err(MetricError::NotANumber);
    }
    let (ranks, ties) = midranks(a, b);
    let w: f64 = ranks[..a.len()].iter().sum();
    let (n, m) = (a.len(), b.len());
    let exact = match method {
        RankSumMethod::Auto => ties.is_empty() && n + m <= EXACT_LIMIT,
        RankSumMethod::Exact => {
            if !ties.is_empty() {
                return Err(MetricError::Undefined("exact rank-sum distribution with ties".into()));
            }
            true
        }
        RankSumMethod::Normal => false,
    };
    let p_value = if exact {
        exact_p_value(n, m, w)
    } else {
        normal_p_value(n, m, w, &ties)
    };
    Ok(RankSum {
        statistic: w,
        p_value,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    /// Exhaustive oracle: enumerate every way to assign ranks to the first sample.
    fn enumerated_p(n: usize, m: usize, w: f64) -> f64 {
        let total = n + m;
        let (mut lower, mut upper, mut all) = (0u64, 0u64, 0u64);
        for subset in (1..=total).combinations(n) {
            let s = subset.iter().sum::<usize>() as f64;
            all += 1;
            if s <= w {
                lower += 1;
            }
            if s >= w {
                upper += 1;
            }
        }
        (2.0 * lower.min(upper) as f64 / all as f64).min(1.0)
    }

    #[test]
    fn extreme_separation_three_by_three() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!(r.exact);
        assert_eq!(r.statistic, 6.0);
        assert_eq!(r.p_value, 0.1);
    }

    #[test]
    fn identical_samples_are_not_different() {
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(!r.exact);
        assert!(r.p_value >= 0.9);
        let constant = wilcoxon_rank_sum(&[0.5; 20], &[0.5; 20]).unwrap();
        assert_eq!(constant.p_value, 1.0);
    }

    #[test]
    fn midranks_average_ties() {
        let (ranks, ties) = midranks(&[1.0, 2.0, 2.0], &[2.0, 5.0]);
        assert_eq!(ranks, vec![1.0, 3.0, 3.0, 3.0, 5.0]);
        assert_eq!(ties, vec![3]);
    }

    #[test]
    fn counts_match_binomial_totals() {
        for total in 2..=12 {
            for n in 1..total {
                let c = rank_sum_counts(n, total);
                let sum: f64 = c.iter().sum();
                assert_eq!(sum as u64, (1..=total).combinations(n).count() as u64);
            }
        }
    }

    #[test]
    fn exact_matches_enumeration_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(2..=8);
            let m = rng.gen_range(2..=8);
            let a: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let b: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.2).collect();
            let r = wilcoxon_rank_sum(&a, &b).unwrap();
            assert!(r.exact);
            assert!((r.p_value - enumerated_p(n, m, r.statistic)).abs() <= 1e-12);
            assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        }
    }

    #[test]
    fn normal_path_tracks_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        // the continuity-corrected normal approximation is off by up to ~0.088
        // at n = m = 2; it only gets within 0.01 for larger samples
        for (lo, hi, tol) in [(2, 8, 0.09), (12, 14, 0.01)] {
            for _ in 0..200 {
                let n = rng.gen_range(lo..=hi);
                let m = rng.gen_range(lo..=hi);
                let a: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                let b: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() + 0.1).collect();
                let exact = wilcoxon_rank_sum_with(&a, &b, RankSumMethod::Exact).unwrap();
                let approx = wilcoxon_rank_sum_with(&a, &b, RankSumMethod::Normal).unwrap();
                assert!(
                    (exact.p_value - approx.p_value).abs() <= tol,
                    "n={n} m={m} exact={} approx={}",
                    exact.p_value,
                    approx.p_value
                );
            }
        }
    }

    #[test]
    fn symmetric_in_argument_order() {
        let a = [0.3, 1.2, 2.2, 0.9, 4.1];
        let b = [1.0, 5.0, 3.3, 2.5];
        let ab = wilcoxon_rank_sum(&a, &b).unwrap();
        let ba = wilcoxon_rank_sum(&b, &a).unwrap();
        assert_eq!(ab.p_value, ba.p_value);
        let big_a: Vec<f64> = (0..15).map(|i| i as f64 * 0.7).collect();
        let big_b: Vec<f64> = (0..12).map(|i| i as f64 * 0.9 + 0.3).collect();
        let ab = wilcoxon_rank_sum(&big_a, &big_b).unwrap();
        let ba = wilcoxon_rank_sum(&big_b, &big_a).unwrap();
        assert!(!ab.exact);
        assert!((ab.p_value - ba.p_value).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_or_nan_samples() {
        assert!(wilcoxon_rank_sum(&[], &[1.0, 2.0]).is_err());
        assert!(wilcoxon_rank_sum(&[1.0], &[1.0, 2.0]).is_err());
        assert!(wilcoxon_rank_sum(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }
}
