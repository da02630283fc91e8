//! Median-of-Means (MoM) and Median-of-Randomized-Means (MoRM).
//!
//! # Median convention
//!
//! Every median in this crate is the *lower* median: for a list sorted in
//! ascending order `a_(1) <= ... <= a_(n)` it is `a_((n+1)/2)` when `n` is odd
//! and `a_(n/2)` when `n` is even. It is always an element of the list, never
//! an average of two elements. [`median`] is the single implementation.

use crate::bounds::{EstimatorKind, EstimatorPlan};
use crate::error::{Error, Result};
use crate::rng::Seed;
use crate::sample::Sample;
use crate::sampling::{mc_blocks, partition_blocks, swor_blocks, BlockAssignment, Resampling};

/// Lower median of `values`; see the module docs.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("median of an empty list"));
    }
    let mut v = values.to_vec();
    let mid = (v.len() - 1) / 2;
    let (_, m, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    Ok(*m)
}

/// A median-of-block-means estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanEstimate {
    pub value: f64,
    pub block_values: Vec<f64>,
    pub plan: Option<EstimatorPlan>,
}

impl MeanEstimate {
    fn from_blocks(block_values: Vec<f64>) -> Result<Self> {
        Ok(MeanEstimate {
            value: median(&block_values)?,
            block_values,
            plan: None,
        })
    }

    pub fn with_plan(mut self, plan: EstimatorPlan) -> Self {
        self.plan = Some(plan);
        self
    }
}

fn pairwise_sum(values: &[f64], idx: &[usize]) -> f64 {
    if idx.len() <= 8 {
        return idx.iter().map(|&i| values[i]).sum();
    }
    let (a, b) = idx.split_at(idx.len() / 2);
    pairwise_sum(values, a) + pairwise_sum(values, b)
}

/// Arithmetic mean of `values[idx]`, summed pairwise.
pub fn block_mean(values: &[f64], idx: &[usize]) -> f64 {
    pairwise_sum(values, idx) / idx.len() as f64
}

/// Median of the block means of `sample` over any block assignment.
pub fn median_of_block_means(sample: &Sample, blocks: &BlockAssignment) -> Result<MeanEstimate> {
    let x = sample.scalars()?;
    if blocks.n != x.len() {
        return Err(Error::invalid(format!(
            "blocks were built for n={}, sample has n={}",
            blocks.n,
            x.len()
        )));
    }
    if blocks.block_size() == 0 {
        return Err(Error::invalid("empty blocks"));
    }
    MeanEstimate::from_blocks(blocks.iter().map(|b| block_mean(x, b)).collect())
}

/// MoM: median of the means of `k` disjoint blocks of a random partition.
pub fn mom(sample: &Sample, k: usize, seed: Seed) -> Result<MeanEstimate> {
    let blocks = partition_blocks(sample.len(), k, seed)?;
    median_of_block_means(sample, &blocks)
}

/// MoRM: median of the means of `k` blocks of size `b` drawn independently
/// without replacement (`Swor`) or with replacement (`Mc`).
pub fn morm(sample: &Sample, k: usize, b: usize, scheme: Resampling, seed: Seed) -> Result<MeanEstimate> {
    let n = sample.len();
    let blocks = match scheme {
        Resampling::Swor => swor_blocks(n, k, b, seed)?,
        Resampling::Mc => mc_blocks(n, k, b, seed)?,
    };
    median_of_block_means(sample, &blocks)
}

/// Run a mean-estimator plan (`Mom` or `Morm`) on `sample`.
pub fn apply_mean_plan(plan: &EstimatorPlan, sample: &Sample, seed: Seed) -> Result<MeanEstimate> {
    let est = match plan.estimator {
        EstimatorKind::Mom => mom(sample, plan.k, seed)?,
        EstimatorKind::Morm => morm(
            sample,
            plan.k,
            plan.b,
            plan.scheme.unwrap_or(Resampling::Swor),
            seed,
        )?,
        other => return Err(Error::invalid(format!("{other} is not a mean estimator"))),
    };
    Ok(est.with_plan(plan.clone()))
}
