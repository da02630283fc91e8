//! Median estimators of pairwise means `theta(h) = E h(X, X')`.
//!
//! - [`mou`]: complete U-statistics on the blocks of a random partition.
//! - [`moru`]: complete U-statistics on independent SWoR blocks.
//! - [`mom_on_split_pairs`]: MoM over the `n/2` i.i.d. values
//!   `h(X_i, X_{i+n/2})`.
//! - [`moiu`]: incomplete U-statistics on independent pair subsamples.
//! - [`mogu`] / [`morgu`]: generalized multi-sample U-statistics of any
//!   degrees on partition or SWoR blocks.
//!
//! Per-block values of MoU and MoRU are the complete U-statistic of the
//! block, i.e. the average of `h` over its `B(B-1)/2` unordered pairs.

use crate::bounds::{EstimatorKind, EstimatorPlan};
use crate::error::{Error, Result};
use crate::kernels::{block_ustat, incomplete_ustat, split_pair_values, CompensatedSum, Kernel};
use crate::mean_estimators::{median, mom};
use crate::rng::Seed;
use crate::sample::Sample;
use crate::sampling::{partition_blocks, sample_pairs, swor_blocks, BlockAssignment, PairScheme};

/// A median-of-block-U-statistics estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseEstimate {
    pub value: f64,
    pub block_values: Vec<f64>,
    /// `B(B-1)/2` for block estimators, `M` for MoIU.
    pub pairs_per_block: usize,
    pub plan: Option<EstimatorPlan>,
}

impl PairwiseEstimate {
    fn from_blocks(block_values: Vec<f64>, pairs_per_block: usize) -> Result<Self> {
        Ok(PairwiseEstimate {
            value: median(&block_values)?,
            block_values,
            pairs_per_block,
            plan: None,
        })
    }

    pub fn with_plan(mut self, plan: EstimatorPlan) -> Self {
        self.plan = Some(plan);
        self
    }
}

/// Median of the complete U-statistics of the given blocks.
pub fn median_of_block_ustats<K: Kernel + ?Sized>(
    sample: &Sample,
    h: &K,
    blocks: &BlockAssignment,
) -> Result<PairwiseEstimate> {
    if blocks.n != sample.len() {
        return Err(Error::invalid(format!(
            "blocks were built for n={}, sample has n={}",
            blocks.n,
            sample.len()
        )));
    }
    let values = blocks
        .iter()
        .map(|b| block_ustat(sample, b, h))
        .collect::<Result<Vec<_>>>()?;
    let b = blocks.block_size();
    PairwiseEstimate::from_blocks(values, b * (b - 1) / 2)
}

/// MoU: median of U-statistics over `k` partition blocks of size `n/k`.
pub fn mou<K: Kernel + ?Sized>(sample: &Sample, h: &K, k: usize, seed: Seed) -> Result<PairwiseEstimate> {
    let n = sample.len();
    if k >= 1 && n / k < 2 {
        return Err(Error::insufficient(format!(
            "MoU blocks of size floor(n/K) = {} (n={n}, K={k}) cannot hold a pair",
            n / k
        )));
    }
    let blocks = partition_blocks(n, k, seed)?;
    median_of_block_ustats(sample, h, &blocks)
}

/// MoRU: median of U-statistics over `k` independent SWoR blocks of size `b`.
pub fn moru<K: Kernel + ?Sized>(
    sample: &Sample,
    h: &K,
    k: usize,
    b: usize,
    seed: Seed,
) -> Result<PairwiseEstimate> {
    if b < 2 {
        return Err(Error::insufficient(format!(
            "MoRU block size B={b} cannot hold a pair"
        )));
    }
    let blocks = swor_blocks(sample.len(), k, b, seed)?;
    median_of_block_ustats(sample, h, &blocks)
}

/// MoM with `k` blocks over the `n/2` split-pair values.
pub fn mom_on_split_pairs<K: Kernel + ?Sized>(
    sample: &Sample,
    h: &K,
    k: usize,
    seed: Seed,
) -> Result<PairwiseEstimate> {
    let values = split_pair_values(sample, h)?;
    let m = values.len();
    let est = mom(&Sample::scalar(values), k, seed)?;
    PairwiseEstimate::from_blocks(est.block_values, m / k)
}

/// MoIU: median of `k` incomplete U-statistics, each over `m` pairs drawn
/// under `scheme`. Subsample `j` is drawn from `seed.derive(j)`.
pub fn moiu<K: Kernel + ?Sized>(
    sample: &Sample,
    h: &K,
    k: usize,
    m: usize,
    scheme: PairScheme,
    seed: Seed,
) -> Result<PairwiseEstimate> {
    if k == 0 {
        return Err(Error::invalid("number of subsamples K must be at least 1"));
    }
    let n = sample.len();
    let values = (0..k)
        .map(|j| {
            let pairs = sample_pairs(n, m, scheme, seed.derive(j as u64))?;
            incomplete_ustat(sample, h, &pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    PairwiseEstimate::from_blocks(values, m)
}

/// Run a pairwise plan (`Mou`, `Moru`, `MomSplitPairs` or `Moiu`).
pub fn apply_pairwise_plan<K: Kernel + ?Sized>(
    plan: &EstimatorPlan,
    sample: &Sample,
    h: &K,
    seed: Seed,
) -> Result<PairwiseEstimate> {
    let est = match plan.estimator {
        EstimatorKind::Mou => mou(sample, h, plan.k, seed)?,
        EstimatorKind::Moru => moru(sample, h, plan.k, plan.b, seed)?,
        EstimatorKind::MomSplitPairs => mom_on_split_pairs(sample, h, plan.k, seed)?,
        EstimatorKind::Moiu => moiu(
            sample,
            h,
            plan.k,
            plan.m.unwrap_or(sample.len()),
            plan.pair_scheme.unwrap_or(PairScheme::WithReplacement),
            seed,
        )?,
        other => {
            return Err(Error::invalid(format!(
                "{other} is not a single-sample pairwise estimator"
            )))
        }
    };
    Ok(est.with_plan(plan.clone()))
}

/// Default limit on the number of kernel evaluations of [`mogu`]/[`morgu`].
pub const DEFAULT_TUPLE_CAP: u128 = 10_000_000;

/// `T` independent samples and a kernel `H` of `d_1 + ... + d_T` arguments,
/// symmetric within each sample's group of arguments.
///
/// The kernel receives its arguments sample by sample: the `d_1` points of
/// sample 1, then the `d_2` points of sample 2, and so on.
pub struct MultiSampleSpec<H> {
    pub samples: Vec<Sample>,
    pub degrees: Vec<usize>,
    pub kernel: H,
    pub tuple_cap: u128,
}

impl<H: Fn(&[&[f64]]) -> f64> MultiSampleSpec<H> {
    pub fn new(samples: Vec<Sample>, degrees: Vec<usize>, kernel: H) -> Result<Self> {
        if samples.is_empty() || samples.len() != degrees.len() {
            return Err(Error::invalid(format!(
                "need one degree per sample, got {} samples and {} degrees",
                samples.len(),
                degrees.len()
            )));
        }
        for (t, (s, &d)) in samples.iter().zip(&degrees).enumerate() {
            if d == 0 {
                return Err(Error::invalid(format!("degree of sample {t} must be >= 1")));
            }
            if s.len() < d {
                return Err(Error::insufficient(format!(
                    "sample {t} has {} observations, fewer than its degree {d}",
                    s.len()
                )));
            }
        }
        Ok(MultiSampleSpec {
            samples,
            degrees,
            kernel,
            tuple_cap: DEFAULT_TUPLE_CAP,
        })
    }

    pub fn with_tuple_cap(mut self, cap: u128) -> Self {
        self.tuple_cap = cap;
        self
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// All `d`-subsets of `0..b` in lexicographic order.
fn combinations(b: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..d).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..d).rev().find(|&i| cur[i] < b - d + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..d {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Complete generalized U-statistic over one block per sample.
fn generalized_block_ustat<H: Fn(&[&[f64]]) -> f64>(spec: &MultiSampleSpec<H>, blocks: &[&[usize]]) -> f64 {
    let combos: Vec<Vec<Vec<usize>>> = blocks
        .iter()
        .zip(&spec.degrees)
        .map(|(b, &d)| combinations(b.len(), d))
        .collect();
    let total_args: usize = spec.degrees.iter().sum();
    let mut args: Vec<&[f64]> = Vec::with_capacity(total_args);
    let mut odometer = vec![0usize; blocks.len()];
    let mut acc = CompensatedSum::default();
    let mut count: u128 = 0;
    'tuples: loop {
        args.clear();
        for (t, &c) in odometer.iter().enumerate() {
            for &pos in &combos[t][c] {
                args.push(spec.samples[t].point(blocks[t][pos]));
            }
        }
        acc.add((spec.kernel)(&args));
        count += 1;
        for t in (0..odometer.len()).rev() {
            odometer[t] += 1;
            if odometer[t] < combos[t].len() {
                continue 'tuples;
            }
            odometer[t] = 0;
        }
        break;
    }
    acc.value() / count as f64
}

/// Median of generalized U-statistics over explicit blocks: `blocks[t]`
/// holds the `K` blocks of sample `t`.
pub fn mogu_with_blocks<H: Fn(&[&[f64]]) -> f64>(
    spec: &MultiSampleSpec<H>,
    blocks: &[BlockAssignment],
) -> Result<PairwiseEstimate> {
    if blocks.len() != spec.samples.len() {
        return Err(Error::invalid(format!(
            "need one block assignment per sample, got {} for {} samples",
            blocks.len(),
            spec.samples.len()
        )));
    }
    let k = blocks[0].num_blocks();
    let mut per_block: u128 = 1;
    for (t, (a, &d)) in blocks.iter().zip(&spec.degrees).enumerate() {
        if a.n != spec.samples[t].len() || a.num_blocks() != k {
            return Err(Error::invalid(format!(
                "block assignment {t} does not match its sample or the block count K={k}"
            )));
        }
        let b = a.block_size();
        if b < d {
            return Err(Error::insufficient(format!(
                "blocks of sample {t} have size {b}, smaller than its degree {d}"
            )));
        }
        per_block = per_block.saturating_mul(binomial(b, d));
    }
    let total = per_block.saturating_mul(k as u128);
    if total > spec.tuple_cap {
        return Err(Error::invalid(format!(
            "{total} kernel evaluations exceed the cap of {}",
            spec.tuple_cap
        )));
    }
    let values: Vec<f64> = (0..k)
        .map(|j| {
            let bl: Vec<&[usize]> = blocks.iter().map(|a| a.blocks[j].as_slice()).collect();
            generalized_block_ustat(spec, &bl)
        })
        .collect();
    let pairs = usize::try_from(per_block).unwrap_or(usize::MAX);
    PairwiseEstimate::from_blocks(values, pairs)
}

/// MoGU: each sample is partitioned into `k` blocks of size `n_t / k`
/// (sample `t` shuffled with `seed.derive(t)`).
pub fn mogu<H: Fn(&[&[f64]]) -> f64>(
    spec: &MultiSampleSpec<H>,
    k: usize,
    seed: Seed,
) -> Result<PairwiseEstimate> {
    let blocks = spec
        .samples
        .iter()
        .zip(&spec.degrees)
        .enumerate()
        .map(|(t, (s, &d))| {
            if k >= 1 && s.len() / k < d {
                return Err(Error::insufficient(format!(
                    "sample {t}: blocks of size {} cannot hold {d} points",
                    s.len() / k
                )));
            }
            partition_blocks(s.len(), k, seed.derive(t as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    mogu_with_blocks(spec, &blocks)
}

/// MoRGU: for each sample, `k` independent SWoR blocks of size
/// `block_sizes[t]` (drawn from `seed.derive(t)`).
pub fn morgu<H: Fn(&[&[f64]]) -> f64>(
    spec: &MultiSampleSpec<H>,
    k: usize,
    block_sizes: &[usize],
    seed: Seed,
) -> Result<PairwiseEstimate> {
    if block_sizes.len() != spec.samples.len() {
        return Err(Error::invalid("need one block size per sample"));
    }
    let blocks = spec
        .samples
        .iter()
        .zip(spec.degrees.iter().zip(block_sizes))
        .enumerate()
        .map(|(t, (s, (&d, &b)))| {
            if b < d {
                return Err(Error::insufficient(format!(
                    "sample {t}: block size {b} is smaller than the degree {d}"
                )));
            }
            swor_blocks(s.len(), k, b, seed.derive(t as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    mogu_with_blocks(spec, &blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{draw, LawSpec};
    use crate::kernels::{complete_ustat, VarianceKernel};
    use crate::sampling::contiguous_blocks;

    fn s(v: &[f64]) -> Sample {
        Sample::scalar(v.to_vec())
    }

    fn pair_kernel(args: &[&[f64]]) -> f64 {
        VarianceKernel.eval(args[0], args[1])
    }

    #[test]
    fn mou_examples() {
        let h = VarianceKernel;
        let x = draw(LawSpec::normal(), 11, Seed(1));
        assert_eq!(
            mou(&x, &h, 1, Seed(4)).unwrap().value,
            complete_ustat(&x, &h).unwrap()
        );

        let y = s(&[1.0, 2.0, 3.0, 4.0]);
        let e = median_of_block_ustats(&y, &h, &contiguous_blocks(4, 2).unwrap()).unwrap();
        assert_eq!(e.block_values, vec![0.5, 0.5]);
        assert_eq!((e.value, e.pairs_per_block), (0.5, 1));

        assert!(matches!(mou(&y, &h, 3, Seed(0)), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn moru_examples() {
        let h = VarianceKernel;
        let x = draw(LawSpec::lognormal(), 9, Seed(2));
        let e = moru(&x, &h, 1, 9, Seed(3)).unwrap();
        // The single block is a permutation of 0..9; compare to the oracle loosely
        // and to the same-order U-statistic exactly.
        let blocks = swor_blocks(9, 1, 9, Seed(3)).unwrap();
        assert_eq!(e.value, block_ustat(&x, &blocks.blocks[0], &h).unwrap());
        assert!((e.value - complete_ustat(&x, &h).unwrap()).abs() <= 1e-12);

        let c = s(&[3.0; 12]);
        let k = crate::kernels::FnKernel::new("c", |a: &[f64], b: &[f64]| a[0] * b[0]);
        assert_eq!(moru(&c, &k, 25, 4, Seed(5)).unwrap().value, 9.0);
        assert_eq!(moru(&c, &k, 25, 4, Seed(5)).unwrap().pairs_per_block, 6);
        assert!(matches!(
            moru(&c, &k, 2, 1, Seed(5)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn split_pairs_examples() {
        let h = VarianceKernel;
        let e = mom_on_split_pairs(&s(&[1.0, 2.0, 3.0, 4.0]), &h, 1, Seed(0)).unwrap();
        assert_eq!(e.value, 2.0);
        let c = mom_on_split_pairs(&s(&[7.0; 30]), &h, 5, Seed(0)).unwrap();
        assert_eq!((c.value, c.pairs_per_block), (0.0, 3));
        assert!(mom_on_split_pairs(&s(&[1.0, 2.0, 3.0, 4.0]), &h, 3, Seed(0)).is_err());
    }

    #[test]
    fn moiu_examples() {
        let h = VarianceKernel;
        let x = s(&[1.0, 4.0]);
        for scheme in [PairScheme::WithReplacement, PairScheme::WithoutReplacement] {
            assert_eq!(moiu(&x, &h, 5, 1, scheme, Seed(1)).unwrap().value, 4.5);
        }
        let y = s(&[1.0, 2.0, 4.0]);
        let e = moiu(&y, &h, 1, 3, PairScheme::WithoutReplacement, Seed(2)).unwrap();
        assert!((e.value - complete_ustat(&y, &h).unwrap()).abs() <= 1e-15);
        assert!(moiu(&y, &h, 1, 4, PairScheme::WithoutReplacement, Seed(2)).is_err());
    }

    #[test]
    fn mogu_examples() {
        let spec = MultiSampleSpec::new(
            vec![s(&[1.0, 2.0]), s(&[3.0, 4.0])],
            vec![1, 1],
            |a: &[&[f64]]| a[0][0] * a[1][0],
        )
        .unwrap();
        assert_eq!(mogu(&spec, 1, Seed(0)).unwrap().value, 5.25);

        let spec = MultiSampleSpec::new(vec![s(&[1.0, 2.0, 3.0])], vec![3], |a: &[&[f64]]| {
            a.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max)
        })
        .unwrap();
        assert_eq!(mogu(&spec, 1, Seed(0)).unwrap().value, 3.0);

        assert!(matches!(
            MultiSampleSpec::new(vec![s(&[1.0])], vec![2], pair_kernel),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn mogu_reduces_to_mou_and_moru() {
        let x = draw(LawSpec::student3(), 40, Seed(8));
        let spec = MultiSampleSpec::new(vec![x.clone()], vec![2], pair_kernel).unwrap();
        let part = partition_blocks(40, 5, Seed(9)).unwrap();
        assert_eq!(
            mogu_with_blocks(&spec, std::slice::from_ref(&part)).unwrap(),
            median_of_block_ustats(&x, &VarianceKernel, &part).unwrap()
        );
        let sw = swor_blocks(40, 7, 6, Seed(10)).unwrap();
        assert_eq!(
            mogu_with_blocks(&spec, std::slice::from_ref(&sw)).unwrap().value,
            moru(&x, &VarianceKernel, 7, 6, Seed(10)).unwrap().value
        );
        let r = morgu(&spec, 7, &[6], Seed(11)).unwrap();
        assert_eq!(r.block_values.len(), 7);
        assert_eq!(r.pairs_per_block, 15);
    }

    #[test]
    fn mogu_tuple_cap() {
        let x = draw(LawSpec::normal(), 200, Seed(1));
        let spec = MultiSampleSpec::new(vec![x], vec![3], |a: &[&[f64]]| a[0][0])
            .unwrap()
            .with_tuple_cap(1000);
        let err = mogu(&spec, 1, Seed(0)).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(ref m) if m.contains("cap")));
        assert!(matches!(
            mogu(&spec, 100, Seed(0)),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 2),
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert_eq!(binomial(10, 3), 120);
    }

    #[test]
    fn identity_plumbing_is_order_invariant() {
        // With injected identity blocks, relabelling observations and blocks
        // together leaves every estimator unchanged.
        let x = draw(LawSpec::normal(), 12, Seed(4));
        let perm: Vec<usize> = (0..12).rev().collect();
        let y = x.select(&perm);
        let blocks = contiguous_blocks(12, 3).unwrap();
        let moved = BlockAssignment {
            n: 12,
            scheme: blocks.scheme,
            blocks: blocks
                .blocks
                .iter()
                .map(|b| b.iter().map(|&i| 11 - i).collect())
                .collect(),
        };
        let a = median_of_block_ustats(&x, &VarianceKernel, &blocks)
            .unwrap()
            .value;
        let b = median_of_block_ustats(&y, &VarianceKernel, &moved).unwrap().value;
        assert!((a - b).abs() <= 1e-15);
    }
}
