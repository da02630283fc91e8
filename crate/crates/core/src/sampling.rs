//! Block construction: partitions, independent draws without replacement
//! (SWoR), independent draws with replacement (Monte-Carlo), and subsampling
//! of the pair set `{(i, j) : i < j}`.
//!
//! Block `k` of a randomized scheme is drawn from stream `k` of the supplied
//! seed, so assignments do not depend on construction order.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{Seed, StreamRng};

/// How a [`BlockAssignment`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BlockScheme {
    /// Disjoint blocks of size `n / K` over a permutation of the indices.
    Partition,
    /// Each block is a uniform subset of size `B`, blocks drawn independently.
    Swor,
    /// Each block entry is drawn uniformly with replacement.
    Mc,
}

/// Randomized block schemes accepted by the randomized-means estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resampling {
    Swor,
    Mc,
}

impl Resampling {
    pub fn as_str(self) -> &'static str {
        match self {
            Resampling::Swor => "swor",
            Resampling::Mc => "mc",
        }
    }
}

impl fmt::Display for Resampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Resampling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "swor" => Ok(Resampling::Swor),
            "mc" | "with-replacement" => Ok(Resampling::Mc),
            other => Err(Error::invalid(format!(
                "unknown block scheme '{other}' (expected swor or mc)"
            ))),
        }
    }
}

/// Pair-subsampling scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairScheme {
    WithReplacement,
    WithoutReplacement,
}

impl PairScheme {
    pub fn as_str(self) -> &'static str {
        match self {
            PairScheme::WithReplacement => "mc",
            PairScheme::WithoutReplacement => "swor",
        }
    }
}

impl fmt::Display for PairScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mc" | "with-replacement" => Ok(PairScheme::WithReplacement),
            "swor" | "without-replacement" => Ok(PairScheme::WithoutReplacement),
            other => Err(Error::invalid(format!(
                "unknown pair scheme '{other}' (expected mc or swor)"
            ))),
        }
    }
}

/// `K` index blocks of a common size `B` over `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAssignment {
    pub n: usize,
    pub scheme: BlockScheme,
    pub blocks: Vec<Vec<usize>>,
}

impl BlockAssignment {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, Vec::len)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.blocks.iter().map(Vec::as_slice)
    }
}

/// `M` pairs `(i, j)`, `i < j < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSubsample {
    pub n: usize,
    pub scheme: PairScheme,
    pub pairs: Vec<(usize, usize)>,
}

impl PairSubsample {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every pair of `0..n`, in lexicographic order.
    pub fn exhaustive(n: usize) -> Self {
        let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((i, j));
            }
        }
        PairSubsample {
            n,
            scheme: PairScheme::WithoutReplacement,
            pairs,
        }
    }
}

fn check_partition_args(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!(
            "number of blocks K={k} must satisfy 1 <= K <= n={n}"
        )));
    }
    Ok(())
}

fn segment(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let b = order.len() / k;
    order.chunks_exact(b).take(k).map(<[usize]>::to_vec).collect()
}

/// Partition a uniformly random permutation of `0..n` into `k` blocks of size
/// `n / k`; the trailing `n mod k` indices of the permutation are unused.
///
/// With `k = 1` the single block is `0..n` in natural order, so that
/// one-block estimators reduce exactly to their full-sample statistic.
pub fn partition_blocks(n: usize, k: usize, seed: Seed) -> Result<BlockAssignment> {
    check_partition_args(n, k)?;
    if k == 1 {
        return contiguous_blocks(n, 1);
    }
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, &mut seed.rng());
    Ok(BlockAssignment {
        n,
        scheme: BlockScheme::Partition,
        blocks: segment(&order, k),
    })
}

/// Contiguous partition of `0..n` without shuffling.
pub fn contiguous_blocks(n: usize, k: usize) -> Result<BlockAssignment> {
    check_partition_args(n, k)?;
    let order: Vec<usize> = (0..n).collect();
    Ok(BlockAssignment {
        n,
        scheme: BlockScheme::Partition,
        blocks: segment(&order, k),
    })
}

/// `k` independent uniform subsets of size `b` of `0..n`.
pub fn swor_blocks(n: usize, k: usize, b: usize, seed: Seed) -> Result<BlockAssignment> {
    if b == 0 || b > n {
        return Err(Error::invalid(format!(
            "block size B={b} must satisfy 1 <= B <= n={n}"
        )));
    }
    if k == 0 {
        return Err(Error::invalid("number of blocks K must be at least 1"));
    }
    let mut sampler = SubsetSampler::new(n, b);
    let blocks = (0..k)
        .map(|kk| sampler.draw(&mut seed.stream(kk as u64)))
        .collect();
    Ok(BlockAssignment {
        n,
        scheme: BlockScheme::Swor,
        blocks,
    })
}

/// `k` blocks of `b` indices, each drawn uniformly from `0..n` with replacement.
pub fn mc_blocks(n: usize, k: usize, b: usize, seed: Seed) -> Result<BlockAssignment> {
    if n == 0 {
        return Err(Error::invalid("cannot draw blocks from an empty sample"));
    }
    if k == 0 || b == 0 {
        return Err(Error::invalid("K and B must be at least 1"));
    }
    let blocks = (0..k)
        .map(|kk| {
            let mut rng = seed.stream(kk as u64);
            (0..b).map(|_| rng.random_range(0..n)).collect()
        })
        .collect();
    Ok(BlockAssignment {
        n,
        scheme: BlockScheme::Mc,
        blocks,
    })
}

/// Number of pairs `i < j` over `0..n`.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// The `t`-th pair of `0..n` in lexicographic order.
pub(crate) fn unrank_pair(n: usize, t: usize) -> (usize, usize) {
    // Row i holds pairs (i, i+1..n) and starts at offset i*n - i*(i+1)/2.
    let start = |i: usize| i * n - i * (i + 1) / 2;
    let nf = n as f64;
    let tf = t as f64;
    let disc = (2.0 * nf - 1.0) * (2.0 * nf - 1.0) - 8.0 * tf;
    let mut i = (((2.0 * nf - 1.0) - disc.max(0.0).sqrt()) / 2.0).floor() as usize;
    i = i.min(n - 2);
    while start(i) > t {
        i -= 1;
    }
    while i + 1 < n - 1 && start(i + 1) <= t {
        i += 1;
    }
    (i, i + 1 + (t - start(i)))
}

/// Draw `m` pairs from `{(i, j) : 0 <= i < j < n}`.
pub fn sample_pairs(n: usize, m: usize, scheme: PairScheme, seed: Seed) -> Result<PairSubsample> {
    if n < 2 {
        return Err(Error::invalid(format!("need n >= 2 to form pairs, got {n}")));
    }
    if m == 0 {
        return Err(Error::invalid("pair subsample size M must be at least 1"));
    }
    let total = pair_count(n);
    let mut rng = seed.rng();
    let ranks: Vec<usize> = match scheme {
        PairScheme::WithReplacement => (0..m).map(|_| rng.random_range(0..total)).collect(),
        PairScheme::WithoutReplacement => {
            if m > total {
                return Err(Error::invalid(format!(
                    "cannot draw M={m} distinct pairs from {total} available"
                )));
            }
            SubsetSampler::new(total, m).draw(&mut rng)
        }
    };
    Ok(PairSubsample {
        n,
        scheme,
        pairs: ranks.into_iter().map(|t| unrank_pair(n, t)).collect(),
    })
}

/// Fisher–Yates shuffle.
pub fn shuffle<T>(items: &mut [T], rng: &mut StreamRng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Partial Fisher–Yates over a virtual array `0..n`, touching only the
/// positions that get swapped.
struct SubsetSampler {
    n: usize,
    b: usize,
    dense: Option<Vec<usize>>,
    small: Vec<(usize, usize)>,
    large: HashMap<usize, usize>,
}

const SMALL_SWAP_TABLE: usize = 64;

impl SubsetSampler {
    fn new(n: usize, b: usize) -> Self {
        let dense = (b.saturating_mul(8) >= n).then(|| (0..n).collect());
        SubsetSampler {
            n,
            b,
            dense,
            small: Vec::with_capacity(2 * b.min(SMALL_SWAP_TABLE)),
            large: HashMap::new(),
        }
    }

    fn draw(&mut self, rng: &mut StreamRng) -> Vec<usize> {
        let (n, b) = (self.n, self.b);
        if let Some(perm) = self.dense.as_mut() {
            // Reset so that block k depends on stream k only. O(n) <= O(8B) here.
            for (i, p) in perm.iter_mut().enumerate() {
                *p = i;
            }
            for i in 0..b {
                let j = rng.random_range(i..n);
                perm.swap(i, j);
            }
            return perm[..b].to_vec();
        }
        let mut out = Vec::with_capacity(b);
        if b <= SMALL_SWAP_TABLE {
            let table = &mut self.small;
            table.clear();
            let get = |t: &Vec<(usize, usize)>, x: usize| {
                t.iter().rev().find(|(k, _)| *k == x).map_or(x, |&(_, v)| v)
            };
            for i in 0..b {
                let j = rng.random_range(i..n);
                let vi = get(table, i);
                let vj = get(table, j);
                table.push((j, vi));
                table.push((i, vj));
                out.push(vj);
            }
        } else {
            let table = &mut self.large;
            table.clear();
            for i in 0..b {
                let j = rng.random_range(i..n);
                let vi = *table.get(&i).unwrap_or(&i);
                let vj = *table.get(&j).unwrap_or(&j);
                table.insert(j, vi);
                table.insert(i, vj);
                out.push(vj);
            }
        }
        out
    }
}
