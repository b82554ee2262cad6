//! Nonparametric tests, Benjamini-Hochberg adjustment and coefficient of variation.
//!
//! Tests are computed internally in `f64` and reported in the caller's scalar type.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Exact null distributions are enumerated up to this many observations.
pub const EXACT_LIMIT: usize = 12;

const EXACT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T> {
    pub statistic: T,
    pub p_value: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_p: Option<T>,
    pub method: String,
}

impl<T: Real> TestResult<T> {
    fn new(statistic: f64, p: f64, method: &str) -> Self {
        TestResult {
            statistic: T::of(statistic),
            p_value: T::of(p.clamp(0.0, 1.0)),
            adjusted_p: None,
            method: method.to_string(),
        }
    }
}

/// Midranks of `xs` (1-based) and the tie term `sum(t^3 - t)` over tie groups.
fn midranks(xs: &[f64]) -> (Vec<f64>, f64) {
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).expect("finite sample"));
    let mut ranks = vec![0.0; n];
    let mut ties = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && xs[order[j]] == xs[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = avg;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    (ranks, ties)
}

fn two_sided_normal(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

fn to_f64<T: Real>(xs: &[T]) -> Vec<f64> {
    xs.iter().map(|x| x.f64()).collect()
}

/// Two-sided Wilcoxon rank-sum test. The statistic is the rank sum of `x`.
///
/// Exact when `|x| + |y| <= 12` and there are no ties; otherwise the normal
/// approximation with tie and continuity correction.
pub fn wilcoxon_rank_sum<T: Real>(x: &[T], y: &[T]) -> Result<TestResult<T>> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::invalid("rank-sum test needs two non-empty samples"));
    }
    let (n1, n2) = (x.len(), y.len());
    let n = n1 + n2;
    let pooled: Vec<f64> = to_f64(x).into_iter().chain(to_f64(y)).collect();
    let (ranks, ties) = midranks(&pooled);
    let w: f64 = ranks[..n1].iter().sum();
    let mean = n1 as f64 * (n + 1) as f64 / 2.0;

    if n <= EXACT_LIMIT && ties == 0.0 {
        // counts[j][s]: subsets of {1..n} with j elements summing to s
        let max_sum = n * (n + 1) / 2;
        let mut counts = vec![vec![0u64; max_sum + 1]; n1 + 1];
        counts[0][0] = 1;
        for r in 1..=n {
            for j in (1..=n1.min(r)).rev() {
                for s in (r..=max_sum).rev() {
                    counts[j][s] += counts[j - 1][s - r];
                }
            }
        }
        let total: u64 = counts[n1].iter().sum();
        let dev = (w - mean).abs();
        let extreme: u64 = counts[n1]
            .iter()
            .enumerate()
            .filter(|&(s, _)| (s as f64 - mean).abs() >= dev - EXACT_EPS)
            .map(|(_, &c)| c)
            .sum();
        return Ok(TestResult::new(w, extreme as f64 / total as f64, "rank_sum_exact"));
    }

    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
    if var <= 0.0 {
        return Ok(TestResult::new(w, 1.0, "rank_sum_normal"));
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    Ok(TestResult::new(w, two_sided_normal(z), "rank_sum_normal"))
}

/// Two-sided Wilcoxon signed-rank test on paired samples. The statistic is
/// the sum of ranks of positive differences `x - y`.
///
/// Exact sign enumeration (with midranks of the nonzero |differences|) when
/// at most 12 differences are nonzero; otherwise the normal approximation
/// with Pratt's treatment of zeros, tie correction and continuity correction.
/// All-zero differences give p = 1.
pub fn wilcoxon_signed_rank<T: Real>(x: &[T], y: &[T]) -> Result<TestResult<T>> {
    if x.len() != y.len() {
        return Err(Error::invalid(format!(
            "signed-rank test needs paired samples, got lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::invalid("signed-rank test needs at least one pair"));
    }
    let diffs: Vec<f64> = x.iter().zip(y).map(|(a, b)| a.f64() - b.f64()).collect();
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|&d| d != 0.0).collect();
    let m = nonzero.len();
    if m == 0 {
        return Ok(TestResult::new(0.0, 1.0, "signed_rank_exact"));
    }

    if m <= EXACT_LIMIT {
        let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
        let (ranks, _) = midranks(&abs);
        let w: f64 = ranks.iter().zip(&nonzero).filter(|(_, &d)| d > 0.0).map(|(r, _)| r).sum();
        let mean = ranks.iter().sum::<f64>() / 2.0;
        let dev = (w - mean).abs();
        let mut extreme = 0u64;
        for signs in 0u32..(1 << m) {
            let s: f64 = (0..m).filter(|&i| signs & (1 << i) != 0).map(|i| ranks[i]).sum();
            if (s - mean).abs() >= dev - EXACT_EPS {
                extreme += 1;
            }
        }
        return Ok(TestResult::new(w, extreme as f64 / (1u64 << m) as f64, "signed_rank_exact"));
    }

    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, _) = midranks(&abs);
    let w: f64 = ranks.iter().zip(&diffs).filter(|(_, &d)| d > 0.0).map(|(r, _)| r).sum();
    let n = diffs.len() as f64;
    let n0 = (diffs.len() - m) as f64;
    let mean = (n * (n + 1.0) - n0 * (n0 + 1.0)) / 4.0;
    let (_, nonzero_ties) = midranks(&nonzero.iter().map(|d| d.abs()).collect::<Vec<_>>());
    let var = (n * (n + 1.0) * (2.0 * n + 1.0) - n0 * (n0 + 1.0) * (2.0 * n0 + 1.0)) / 24.0
        - nonzero_ties / 48.0;
    if var <= 0.0 {
        return Ok(TestResult::new(w, 1.0, "signed_rank_normal"));
    }
    let z = ((w - mean).abs() - 0.5).max(0.0) / var.sqrt();
    Ok(TestResult::new(w, two_sided_normal(z), "signed_rank_normal"))
}

fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Exact `P[X = k]` for `X ~ Hypergeometric(N, K, n)`.
pub fn hypergeom_pmf(population: u64, successes: u64, draws: u64, k: u64) -> f64 {
    let num = binomial(successes, k) * binomial(population - successes, draws.saturating_sub(k))
        * BigUint::from(u8::from(k <= draws));
    ratio(num, binomial(population, draws))
}

fn ratio(num: BigUint, den: BigUint) -> f64 {
    BigRational::new(num.into(), den.into())
        .to_f64()
        .expect("probability is representable")
}

/// Upper-tail hypergeometric test, `p = P[X >= k]`, with exact rational arithmetic.
pub fn hypergeom_enrichment<T: Real>(
    population: u64,
    successes: u64,
    draws: u64,
    k: u64,
) -> Result<TestResult<T>> {
    if successes > population || draws > population || k > draws || k > successes {
        return Err(Error::invalid(format!(
            "hypergeometric bounds violated: N={population} K={successes} n={draws} k={k}"
        )));
    }
    let mut num = BigUint::zero();
    for i in k..=draws.min(successes) {
        num += binomial(successes, i) * binomial(population - successes, draws - i);
    }
    let p = ratio(num, binomial(population, draws));
    Ok(TestResult::new(k as f64, p, "hypergeometric_upper"))
}

/// Benjamini-Hochberg step-up adjustment, returned in input order.
pub fn bh_fdr<T: Real>(p_values: &[T]) -> Result<Vec<T>> {
    if let Some(p) = p_values.iter().find(|p| !(T::zero()..=T::one()).contains(*p)) {
        return Err(Error::invalid(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).unwrap().then(a.cmp(&b)));
    let mut adjusted = vec![T::zero(); m];
    let mut running = T::one();
    for (pos, &i) in order.iter().enumerate().rev() {
        let q = p_values[i] * T::of_usize(m) / T::of_usize(pos + 1);
        running = running.min(q);
        adjusted[i] = running.min(T::one()).max(p_values[i]);
    }
    Ok(adjusted)
}

/// Fills `adjusted_p` on every result with the BH adjustment across the slice.
pub fn adjust_all<T: Real>(results: &mut [&mut TestResult<T>]) {
    let ps: Vec<T> = results.iter().map(|r| r.p_value).collect();
    let q = bh_fdr(&ps).expect("p-values are clamped to [0, 1]");
    for (r, q) in results.iter_mut().zip(q) {
        r.adjusted_p = Some(q);
    }
}

/// Sample standard deviation (n - 1) over the mean.
pub fn coefficient_of_variation<T: Real>(series: &[T]) -> Result<T> {
    if series.len() < 2 {
        return Err(Error::invalid("coefficient of variation needs at least 2 values"));
    }
    let mean = crate::scalar::mean(series);
    if mean == T::zero() {
        return Err(Error::invalid("coefficient of variation undefined for zero mean"));
    }
    Ok(crate::scalar::sample_sd(series) / mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Two-sided p by brute force over all C(n, n1) assignments of ranks to x.
    fn brute_rank_sum(x: &[f64], y: &[f64]) -> f64 {
        let pooled: Vec<f64> = x.iter().chain(y).copied().collect();
        let (ranks, _) = midranks(&pooled);
        let n = pooled.len();
        let n1 = x.len();
        let w: f64 = ranks[..n1].iter().sum();
        let mean = n1 as f64 * (n + 1) as f64 / 2.0;
        let (mut hit, mut total) = (0u64, 0u64);
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n1 {
                continue;
            }
            total += 1;
            let s: f64 = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
            if (s - mean).abs() >= (w - mean).abs() - 1e-9 {
                hit += 1;
            }
        }
        hit as f64 / total as f64
    }

    #[test]
    fn rank_sum_examples() {
        let r = wilcoxon_rank_sum(&[1.0f64, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((r.p_value - 0.1).abs() < 1e-12);
        assert_eq!(r.statistic, 6.0);
        let r = wilcoxon_rank_sum(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(r.p_value >= 0.9);
        assert!(wilcoxon_rank_sum::<f64>(&[], &[1.0]).is_err());
    }

    #[test]
    fn rank_sum_zero_variance() {
        let r = wilcoxon_rank_sum(&[0.0; 7], &[0.0; 9]).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn signed_rank_examples() {
        let r = wilcoxon_signed_rank(&[1.0f64, 2.0, 3.0, 4.0, 5.0], &[2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert!((r.p_value - 0.0625).abs() < 1e-12);
        let r = wilcoxon_signed_rank(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(wilcoxon_signed_rank(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn signed_rank_normal_path() {
        // 20 positive differences of distinct size: far in the tail
        let x: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let y = vec![0.0; 20];
        let r = wilcoxon_signed_rank(&x, &y).unwrap();
        assert_eq!(r.method, "signed_rank_normal");
        assert!(r.p_value < 1e-3);
    }

    #[test]
    fn hypergeom_examples() {
        let r: TestResult<f64> = hypergeom_enrichment(10, 5, 5, 5).unwrap();
        assert!((r.p_value - 1.0 / 252.0).abs() < 1e-15);
        let r: TestResult<f64> = hypergeom_enrichment(10, 5, 5, 0).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(hypergeom_enrichment::<f64>(10, 5, 5, 6).is_err());
        assert!(hypergeom_enrichment::<f64>(10, 11, 5, 1).is_err());
    }

    #[test]
    fn hypergeom_pmf_sums_to_one() {
        for &(n, k, d) in &[(10u64, 5u64, 5u64), (274, 67, 40), (576, 100, 300)] {
            let s: f64 = (0..=d.min(k)).map(|i| hypergeom_pmf(n, k, d, i)).sum();
            assert!((s - 1.0).abs() < 1e-12, "{n} {k} {d}: {s}");
        }
    }

    #[test]
    fn bh_examples() {
        let q = bh_fdr(&[0.01f64, 0.02, 0.03, 0.04]).unwrap();
        for v in q {
            assert!((v - 0.04).abs() < 1e-15);
        }
        assert_eq!(bh_fdr(&[0.3]).unwrap(), vec![0.3]);
        assert!(bh_fdr(&[0.5, 1.2]).is_err());
        let q = bh_fdr(&[0.04f64, 0.5, 0.01]).unwrap();
        assert!((q[2] - 0.03).abs() < 1e-15);
        assert!((q[0] - 0.06).abs() < 1e-15);
        assert_eq!(q[1], 0.5);
    }

    #[test]
    fn cv_examples() {
        assert_eq!(coefficient_of_variation(&[3.0, 3.0, 3.0]).unwrap(), 0.0);
        let cv = coefficient_of_variation(&[1.0, 3.0]).unwrap();
        assert!((cv - 2f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(coefficient_of_variation(&[1.0, -1.0]).is_err());
        assert!(coefficient_of_variation(&[1.0]).is_err());
    }

    #[test]
    fn exact_and_normal_agree_at_six_by_six() {
        // every split of 0..12 into two halves; the normal formula is evaluated directly
        let mut worst: f64 = 0.0;
        for mask in 0u32..(1 << 12) {
            if mask.count_ones() != 6 {
                continue;
            }
            let x: Vec<f64> = (0..12).filter(|i| mask & (1 << i) != 0).map(|i| i as f64).collect();
            let y: Vec<f64> = (0..12).filter(|i| mask & (1 << i) == 0).map(|i| i as f64).collect();
            let exact = wilcoxon_rank_sum(&x, &y).unwrap().p_value;
            let pooled: Vec<f64> = x.iter().chain(&y).copied().collect();
            let (ranks, _) = midranks(&pooled);
            let w: f64 = ranks[..6].iter().sum();
            let var: f64 = 36.0 * 13.0 / 12.0;
            let z = ((w - 39.0f64).abs() - 0.5).max(0.0) / var.sqrt();
            worst = worst.max((exact - two_sided_normal(z)).abs());
        }
        assert!(worst < 0.02, "{worst}");
    }

    proptest! {
        #[test]
        fn exact_rank_sum_matches_brute_force(
            x in proptest::collection::vec(0u32..1000, 1..6),
            y in proptest::collection::vec(0u32..1000, 1..6),
        ) {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let yf: Vec<f64> = y.iter().map(|&v| v as f64 + 0.5).collect();
            let mut all: Vec<f64> = xf.iter().chain(&yf).copied().collect();
            all.sort_by(f64::total_cmp);
            all.dedup();
            prop_assume!(all.len() == xf.len() + yf.len());
            let r = wilcoxon_rank_sum(&xf, &yf).unwrap();
            prop_assert!((r.p_value - brute_rank_sum(&xf, &yf)).abs() < 1e-12);
        }

        #[test]
        fn p_values_in_unit_interval(
            x in proptest::collection::vec(-5i32..5, 1..30),
            y in proptest::collection::vec(-5i32..5, 1..30),
        ) {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let yf: Vec<f64> = y.iter().map(|&v| v as f64).collect();
            let p = wilcoxon_rank_sum(&xf, &yf).unwrap().p_value;
            prop_assert!((0.0..=1.0).contains(&p));
            let n = xf.len().min(yf.len());
            let p = wilcoxon_signed_rank(&xf[..n], &yf[..n]).unwrap().p_value;
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn bh_is_monotone_and_bounded(ps in proptest::collection::vec(0.0f64..=1.0, 1..30)) {
            let q = bh_fdr(&ps).unwrap();
            for i in 0..ps.len() {
                prop_assert!(q[i] >= ps[i] && q[i] <= 1.0);
                for j in 0..ps.len() {
                    if ps[i] <= ps[j] {
                        prop_assert!(q[i] <= q[j]);
                    }
                }
            }
        }

        #[test]
        fn complementary_tails_cover(n in 1u64..60, k_frac in 0.0f64..1.0, d_frac in 0.0f64..1.0, x_frac in 0.0f64..1.0) {
            let k = (k_frac * n as f64) as u64;
            let d = (d_frac * n as f64) as u64;
            let lo = d.saturating_sub(n - k);
            let hi = d.min(k);
            let x = lo + ((x_frac * (hi - lo + 1) as f64) as u64).min(hi - lo);
            let upper = hypergeom_enrichment::<f64>(n, k, d, x).unwrap().p_value;
            let lower: f64 = (0..=x).map(|i| hypergeom_pmf(n, k, d, i)).sum();
            prop_assert!(upper + lower >= 1.0 - 1e-12);
        }
    }
}
