//! Symmetric pairwise kernels and degree-two U-statistics.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::sample::Sample;
use crate::sampling::{swor_blocks, PairSubsample};

/// A symmetric real function of two observations, `h(x, y) = h(y, x)`.
pub trait Kernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;

    fn name(&self) -> &str {
        "kernel"
    }
}

impl<K: Kernel + ?Sized> Kernel for &K {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (**self).eval(x, y)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<K: Kernel + ?Sized> Kernel for Box<K> {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (**self).eval(x, y)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<K: Kernel + ?Sized> Kernel for Arc<K> {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (**self).eval(x, y)
    }
    fn name(&self) -> &str {
        (**self).name()
    }
}

/// `h(x, y) = |x - y|^2 / 2`; its expectation is the (total) variance.
#[derive(Debug, Clone, Copy, Default)]
pub struct VarianceKernel;

impl Kernel for VarianceKernel {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        if let ([a], [b]) = (x, y) {
            let d = a - b;
            return 0.5 * d * d;
        }
        0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
    }

    fn name(&self) -> &str {
        "variance"
    }
}

pub fn variance_kernel() -> VarianceKernel {
    VarianceKernel
}

/// A named kernel backed by a closure. Symmetry is the caller's contract.
pub struct FnKernel<F> {
    name: String,
    f: F,
}

impl<F: Fn(&[f64], &[f64]) -> f64> FnKernel<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnKernel { name: name.into(), f }
    }
}

impl<F: Fn(&[f64], &[f64]) -> f64> Kernel for FnKernel<F> {
    #[inline]
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.f)(x, y)
    }
    fn name(&self) -> &str {
        &self.name
    }
}

/// Clustering risk kernel `D(x, y) * 1{x and y share a cell}`.
///
/// `cell` maps an observation to the index of its cell in the partition.
pub struct ClusteringKernel<D, P> {
    metric: D,
    cell: P,
}

pub fn clustering_kernel<D, P>(metric: D, cell: P) -> ClusteringKernel<D, P>
where
    D: Fn(&[f64], &[f64]) -> f64,
    P: Fn(&[f64]) -> usize,
{
    ClusteringKernel { metric, cell }
}

impl<D, P> Kernel for ClusteringKernel<D, P>
where
    D: Fn(&[f64], &[f64]) -> f64,
    P: Fn(&[f64]) -> usize,
{
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        if (self.cell)(x) == (self.cell)(y) {
            (self.metric)(x, y)
        } else {
            0.0
        }
    }
    fn name(&self) -> &str {
        "clustering"
    }
}

/// Pairwise ranking kernel `loss(-r(x, x') * (y - y'))` on labeled
/// observations stored as `(features..., label)`.
///
/// `rule` must be anti-symmetric (`r(x, x') = -r(x', x)`) with values in
/// `{-1, 0, 1}`; the kernel is then symmetric.
pub struct RankingKernel<R, L> {
    rule: R,
    loss: L,
}

pub fn ranking_kernel<R, L>(rule: R, loss: L) -> RankingKernel<R, L>
where
    R: Fn(&[f64], &[f64]) -> f64,
    L: Fn(f64) -> f64,
{
    RankingKernel { rule, loss }
}

impl<R, L> Kernel for RankingKernel<R, L>
where
    R: Fn(&[f64], &[f64]) -> f64,
    L: Fn(f64) -> f64,
{
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        let (xf, xl) = x.split_at(x.len() - 1);
        let (yf, yl) = y.split_at(y.len() - 1);
        (self.loss)(-(self.rule)(xf, yf) * (xl[0] - yl[0]))
    }
    fn name(&self) -> &str {
        "ranking"
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    #[inline]
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Complete U-statistic of the observations at `idx` (positions may repeat).
///
/// Pairs are visited as `(idx[a], idx[b])`, `a < b`, in lexicographic order.
pub fn block_ustat<K: Kernel + ?Sized>(sample: &Sample, idx: &[usize], h: &K) -> Result<f64> {
    let b = idx.len();
    if b < 2 {
        return Err(Error::insufficient(format!(
            "a U-statistic needs at least 2 observations, block has {b}"
        )));
    }
    let mut acc = CompensatedSum::default();
    for (a, &i) in idx.iter().enumerate() {
        let xi = sample.point(i);
        for &j in &idx[a + 1..] {
            acc.add(h.eval(xi, sample.point(j)));
        }
    }
    Ok(acc.value() / (b * (b - 1) / 2) as f64)
}

/// `U_n(h) = (2 / (n(n-1))) * sum_{i<j} h(X_i, X_j)`.
pub fn complete_ustat<K: Kernel + ?Sized>(sample: &Sample, h: &K) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::insufficient(format!(
            "complete U-statistic needs n >= 2, got {n}"
        )));
    }
    let idx: Vec<usize> = (0..n).collect();
    block_ustat(sample, &idx, h)
}

/// Mean of `h` over the `n/2` disjoint pairs `(X_i, X_{i + n/2})`.
pub fn split_pairs_estimate<K: Kernel + ?Sized>(sample: &Sample, h: &K) -> Result<f64> {
    let values = split_pair_values(sample, h)?;
    let mut acc = CompensatedSum::default();
    values.iter().for_each(|&v| acc.add(v));
    Ok(acc.value() / values.len() as f64)
}

/// The i.i.d. values `h(X_i, X_{i + n/2})`, `i < n/2`.
pub fn split_pair_values<K: Kernel + ?Sized>(sample: &Sample, h: &K) -> Result<Vec<f64>> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::insufficient(format!(
            "split-pairs estimate needs n >= 2, got {n}"
        )));
    }
    let half = n / 2;
    Ok((0..half)
        .map(|i| h.eval(sample.point(i), sample.point(i + half)))
        .collect())
}

/// `(1/M) * sum_m h(X_{i_m}, X_{j_m})` over a pair subsample.
pub fn incomplete_ustat<K: Kernel + ?Sized>(sample: &Sample, h: &K, pairs: &PairSubsample) -> Result<f64> {
    let n = sample.len();
    if pairs.n != n {
        return Err(Error::invalid(format!(
            "pair subsample was drawn for n={}, sample has n={n}",
            pairs.n
        )));
    }
    if pairs.is_empty() {
        return Err(Error::invalid("pair subsample is empty"));
    }
    let mut acc = CompensatedSum::default();
    for &(i, j) in &pairs.pairs {
        if i >= n || j >= n {
            return Err(Error::invalid(format!("pair ({i}, {j}) out of range for n={n}")));
        }
        acc.add(h.eval(sample.point(i), sample.point(j)));
    }
    Ok(acc.value() / pairs.len() as f64)
}

/// Plug-in estimates of the Hoeffding decomposition of a kernel.
///
/// `sigma_sq = 2 * sigma1_sq + sigma2_sq + slack`, where the non-negative
/// slack is what clipping `sigma2_sq` at zero added.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingComponents {
    pub theta: f64,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub sigma_sq: f64,
}

impl HoeffdingComponents {
    /// Components known analytically (or by other means). `sigma_sq` is
    /// derived from the identity.
    pub fn new(theta: f64, sigma1_sq: f64, sigma2_sq: f64) -> Self {
        HoeffdingComponents {
            theta,
            sigma1_sq,
            sigma2_sq,
            sigma_sq: 2.0 * sigma1_sq + sigma2_sq,
        }
    }

    pub fn clipping_slack(&self) -> f64 {
        self.sigma_sq - 2.0 * self.sigma1_sq - self.sigma2_sq
    }

    /// `Var U_n = 4 sigma1^2 / n + 2 sigma2^2 / (n (n - 1))`.
    pub fn ustat_variance(&self, n: usize) -> f64 {
        let nf = n as f64;
        4.0 * self.sigma1_sq / nf + 2.0 * self.sigma2_sq / (nf * (nf - 1.0))
    }

    /// Variance of the split-pairs average, `sigma^2 / floor(n/2)`.
    pub fn split_pairs_variance(&self, n: usize) -> f64 {
        self.sigma_sq / (n / 2) as f64
    }

    /// Variance of an incomplete U-statistic built from `m` pairs drawn with
    /// replacement: `(1 - 1/M) Var U_n + sigma^2 / M`.
    pub fn incomplete_variance(&self, n: usize, m: usize) -> f64 {
        let mf = m as f64;
        (1.0 - 1.0 / mf) * self.ustat_variance(n) + self.sigma_sq / mf
    }
}

/// Plug-in Hoeffding components; costs O(n^2) kernel evaluations.
///
/// `theta` is the complete U-statistic, `h1(X_i)` the row mean of the kernel
/// minus `theta`, `sigma1_sq` the mean of `h1^2`, `sigma_sq` the mean squared
/// deviation of the pair values from `theta`, and `sigma2_sq` is
/// `sigma_sq - 2 sigma1_sq` clipped at zero.
pub fn estimate_components<K: Kernel + ?Sized>(sample: &Sample, h: &K) -> Result<HoeffdingComponents> {
    let n = sample.len();
    if n < 4 {
        return Err(Error::insufficient(format!(
            "component estimation needs n >= 4, got {n}"
        )));
    }
    let mut rows = vec![CompensatedSum::default(); n];
    let mut total = CompensatedSum::default();
    for i in 0..n {
        let xi = sample.point(i);
        for j in i + 1..n {
            let v = h.eval(xi, sample.point(j));
            rows[i].add(v);
            rows[j].add(v);
            total.add(v);
        }
    }
    let npairs = (n * (n - 1) / 2) as f64;
    let theta = total.value() / npairs;

    let mut s1 = CompensatedSum::default();
    for r in &rows {
        let h1 = r.value() / (n - 1) as f64 - theta;
        s1.add(h1 * h1);
    }
    let sigma1_sq = s1.value() / n as f64;

    let mut s = CompensatedSum::default();
    for i in 0..n {
        let xi = sample.point(i);
        for j in i + 1..n {
            let d = h.eval(xi, sample.point(j)) - theta;
            s.add(d * d);
        }
    }
    let sigma_sq = s.value() / npairs;
    let sigma2_sq = (sigma_sq - 2.0 * sigma1_sq).max(0.0);
    Ok(HoeffdingComponents {
        theta,
        sigma1_sq,
        sigma2_sq,
        sigma_sq,
    })
}

/// [`estimate_components`] on a uniform subsample of at most `cap`
/// observations, bounding the cost at O(cap^2).
pub fn estimate_components_capped<K: Kernel + ?Sized>(
    sample: &Sample,
    h: &K,
    cap: usize,
    seed: Seed,
) -> Result<HoeffdingComponents> {
    if cap < 4 {
        return Err(Error::invalid(format!("subsample cap must be >= 4, got {cap}")));
    }
    if sample.len() <= cap {
        return estimate_components(sample, h);
    }
    let idx = swor_blocks(sample.len(), 1, cap, seed)?.blocks.swap_remove(0);
    estimate_components(&sample.select(&idx), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{draw, LawSpec};
    use crate::sampling::{sample_pairs, PairScheme};
    use proptest::prelude::*;

    fn s(v: &[f64]) -> Sample {
        Sample::scalar(v.to_vec())
    }

    fn brute_force(v: &[f64], h: impl Fn(f64, f64) -> f64) -> f64 {
        let mut sum = 0.0;
        let mut count = 0.0;
        for i in 0..v.len() {
            for j in 0..v.len() {
                if i != j {
                    sum += h(v[i], v[j]);
                    count += 1.0;
                }
            }
        }
        sum / count
    }

    #[test]
    fn complete_ustat_examples() {
        let h = VarianceKernel;
        assert_eq!(complete_ustat(&s(&[0.0, 2.0]), &h).unwrap(), 2.0);
        let c = FnKernel::new("c", |x: &[f64], y: &[f64]| if x == y { 3.5 } else { 0.0 });
        assert_eq!(complete_ustat(&s(&[1.0, 1.0, 1.0]), &c).unwrap(), 3.5);
        // Brute force over the 6 pairs of {1,2,3,4}: (1+4+9+1+4+1)/2/6 = 5/3.
        let oracle = brute_force(&[1.0, 2.0, 3.0, 4.0], |a, b| (a - b) * (a - b) / 2.0);
        assert!((oracle - 5.0 / 3.0).abs() < 1e-15);
        let u = complete_ustat(&s(&[1.0, 2.0, 3.0, 4.0]), &h).unwrap();
        assert!((u - 5.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            complete_ustat(&s(&[1.0]), &h),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn split_pairs_examples() {
        let h = VarianceKernel;
        assert_eq!(split_pairs_estimate(&s(&[0.0, 2.0]), &h).unwrap(), 2.0);
        assert_eq!(split_pairs_estimate(&s(&[1.0, 2.0, 3.0, 4.0]), &h).unwrap(), 2.0);
        assert_eq!(split_pairs_estimate(&s(&[5.0; 4]), &h).unwrap(), 0.0);
        assert!(split_pairs_estimate(&s(&[]), &h).is_err());
    }

    #[test]
    fn incomplete_ustat_examples() {
        let h = VarianceKernel;
        let x = s(&[1.0, 2.0, 3.0, 4.0]);
        let same = PairSubsample {
            n: 4,
            scheme: PairScheme::WithReplacement,
            pairs: vec![(0, 1); 5],
        };
        assert_eq!(incomplete_ustat(&x, &h, &same).unwrap(), 0.5);

        let two = PairSubsample {
            n: 4,
            scheme: PairScheme::WithoutReplacement,
            pairs: vec![(0, 1), (2, 3)],
        };
        assert_eq!(incomplete_ustat(&x, &h, &two).unwrap(), 0.5 * (0.5 + 0.5));

        let x3 = s(&[1.0, 2.0, 3.0]);
        assert_eq!(
            incomplete_ustat(&x3, &h, &PairSubsample::exhaustive(3)).unwrap(),
            complete_ustat(&x3, &h).unwrap()
        );

        let bad = PairSubsample {
            n: 4,
            scheme: PairScheme::WithReplacement,
            pairs: vec![(0, 7)],
        };
        assert!(matches!(
            incomplete_ustat(&x, &h, &bad),
            Err(Error::InvalidArgument(_))
        ));
        assert!(incomplete_ustat(&x3, &h, &PairSubsample::exhaustive(4)).is_err());
    }

    #[test]
    fn named_kernels() {
        assert_eq!(variance_kernel().eval(&[3.0], &[1.0]), 2.0);
        let same_cell = clustering_kernel(|x: &[f64], y: &[f64]| (x[0] - y[0]).abs(), |_: &[f64]| 0);
        assert_eq!(same_cell.eval(&[0.0], &[1.0]), 1.0);
        let split = clustering_kernel(
            |x: &[f64], y: &[f64]| (x[0] - y[0]).abs(),
            |x: &[f64]| usize::from(x[0] >= 0.5),
        );
        assert_eq!(split.eval(&[0.0], &[1.0]), 0.0);

        // r(x, x') = sign(x - x'); hinge-style loss max(0, 1 + t).
        let rank = ranking_kernel(
            |x: &[f64], y: &[f64]| (x[0] - y[0]).signum(),
            |t: f64| (1.0 + t).max(0.0),
        );
        // Correctly ordered pair: r = +1, y - y' = +1 -> loss(-1) = 0.
        assert_eq!(rank.eval(&[2.0, 1.0], &[1.0, 0.0]), 0.0);
        assert_eq!(rank.eval(&[1.0, 0.0], &[2.0, 1.0]), 0.0);
        // Mis-ordered pair.
        assert_eq!(rank.eval(&[2.0, 0.0], &[1.0, 1.0]), 2.0);
    }

    #[test]
    fn components_of_constant_sample() {
        let c = estimate_components(&s(&[2.5; 10]), &VarianceKernel).unwrap();
        assert_eq!(c.sigma1_sq, 0.0);
        assert_eq!(c.sigma2_sq, 0.0);
        assert_eq!(c.theta, 0.0);
        assert!(estimate_components(&s(&[1.0, 2.0, 3.0]), &VarianceKernel).is_err());
    }

    #[test]
    fn components_identity_holds_without_clipping() {
        let x = draw(LawSpec::normal(), 300, Seed(5));
        let c = estimate_components(&x, &VarianceKernel).unwrap();
        if c.sigma_sq - 2.0 * c.sigma1_sq > 0.0 {
            assert!(c.clipping_slack().abs() <= 1e-9 * c.sigma_sq);
        }
        assert!(c.clipping_slack() >= -1e-12);
    }

    #[test]
    fn gaussian_components_capped() {
        // Analytic values for N(0,1) with the variance kernel:
        // h1(x) = (x^2 - 1)/2 -> sigma1^2 = 1/2; h2(x, y) = -xy -> sigma2^2 = 1.
        let x = draw(LawSpec::normal(), 1_000_000, Seed(17));
        let c = estimate_components_capped(&x, &VarianceKernel, 10_000, Seed(18)).unwrap();
        assert!((c.theta - 1.0).abs() < 0.05, "{c:?}");
        assert!((c.sigma1_sq - 0.5).abs() < 0.05 * 0.5 * 2.0, "{c:?}");
        assert!((c.sigma_sq - 2.0).abs() < 0.1 * 2.0, "{c:?}");
    }

    #[test]
    fn split_pairs_more_variable_than_complete() {
        let reps = 10_000;
        let root = Seed(31);
        let (mut u, mut m) = (Vec::with_capacity(reps), Vec::with_capacity(reps));
        for r in 0..reps {
            let x = draw(LawSpec::normal(), 100, root.derive(r as u64));
            u.push(complete_ustat(&x, &VarianceKernel).unwrap());
            m.push(split_pairs_estimate(&x, &VarianceKernel).unwrap());
        }
        let var = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64
        };
        // 0.0202 vs 0.04 analytically.
        assert!(var(&m) > var(&u));
    }

    #[test]
    fn exhaustive_incomplete_equals_complete() {
        let x = draw(LawSpec::student3(), 37, Seed(2));
        let all = PairSubsample::exhaustive(37);
        assert_eq!(
            incomplete_ustat(&x, &VarianceKernel, &all).unwrap(),
            complete_ustat(&x, &VarianceKernel).unwrap()
        );
        let p = sample_pairs(37, 10, PairScheme::WithReplacement, Seed(3)).unwrap();
        assert!(incomplete_ustat(&x, &VarianceKernel, &p).unwrap().is_finite());
    }

    proptest! {
        #[test]
        fn kernels_are_symmetric(x in prop::collection::vec(-50.0f64..50.0, 3), y in prop::collection::vec(-50.0f64..50.0, 3)) {
            prop_assert_eq!(VarianceKernel.eval(&x, &y), VarianceKernel.eval(&y, &x));
            let ck = clustering_kernel(
                |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum(),
                |a: &[f64]| usize::from(a[0] > 0.0),
            );
            prop_assert_eq!(ck.eval(&x, &y), ck.eval(&y, &x));
            let rk = ranking_kernel(
                |a: &[f64], b: &[f64]| (a[0] + a[1] - b[0] - b[1]).signum(),
                |t: f64| (1.0 + t).max(0.0),
            );
            prop_assert_eq!(rk.eval(&x, &y), rk.eval(&y, &x));
        }

        #[test]
        fn complete_ustat_permutation_invariant(v in prop::collection::vec(-5i32..5, 2..9), seed in any::<u64>()) {
            let vals: Vec<f64> = v.iter().map(|&a| f64::from(a)).collect();
            let mut perm = vals.clone();
            crate::sampling::shuffle(&mut perm, &mut Seed(seed).rng());
            let a = complete_ustat(&s(&vals), &VarianceKernel).unwrap();
            let b = complete_ustat(&s(&perm), &VarianceKernel).unwrap();
            // Integer-valued inputs: all partial sums are exact.
            prop_assert_eq!(a, b);
            let oracle = brute_force(&vals, |p, q| (p - q) * (p - q) / 2.0);
            prop_assert!((a - oracle).abs() <= 1e-12);
        }
    }
}
