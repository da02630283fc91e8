//! Planners for `(K, B)` and the deviation radius certified by the
//! sub-Gaussian bounds of the median estimators.
//!
//! All logarithms are natural. Each planner checks the admissible confidence
//! range of its bound (a closed lower endpoint) and fails with
//! [`Error::OutOfRange`] outside of it.
//!
//! | estimator | `K` | `B` | radius |
//! |---|---|---|---|
//! | MoM | `ceil(ln(1/d))` | `floor(n/K)` | `2 sqrt(2) e sigma sqrt((1 + ln(1/d))/n)` |
//! | MoRM | `ceil(ln(2/d) / (2 (1/2 - tau)^2))` | `floor(8 tau^2 n / (9 ln(2/d)))` | `3 sqrt(3) sigma / (2 tau^1.5) sqrt(ln(2/d)/n)` |
//! | MoU | `ceil(4.5 ln(1/d))` | `floor(n/K)` | `sqrt(C1 L/n + C2 L^2/(n (2n - 9L)))`, `L = ln(1/d)` |
//! | MoRU | as MoRM | as MoRM | `sqrt(C1(tau) L/n + C2(tau) L^2/(n (8n - 9L)))`, `L = ln(2/d)` |
//!
//! with `C1 = 108 s1`, `C2 = 486 s2`, `C1(tau) = 27 s1 / (2 tau^3)` and
//! `C2(tau) = 243 s2 / (4 tau^3)` for the Hoeffding variances `s1`, `s2` of
//! the kernel. MoGU and MoRGU use the same constants with the smallest sample
//! size. MoIU carries no bound: its plan reuses the MoRU block count and has
//! no radius.
//!
//! Variance inputs are taken as given. Plug-in values (for instance from
//! [`crate::kernels::estimate_components`]) are outside the assumptions of
//! the bounds.
//!
//! The `(1-k) d / k d` split refinement of the randomized bounds is not
//! implemented.

use std::fmt;

use rayon::prelude::*;

use crate::distributions::{draw, LawSpec};
use crate::error::{Error, Result};
use crate::kernels::VarianceKernel;
use crate::mean_estimators::apply_mean_plan;
use crate::rng::Seed;
use crate::sampling::{PairScheme, Resampling};
use crate::ustat_estimators::apply_pairwise_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorKind {
    Mom,
    Morm,
    Mou,
    Moru,
    MomSplitPairs,
    Moiu,
    Mogu,
    Morgu,
}

impl EstimatorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorKind::Mom => "MoM",
            EstimatorKind::Morm => "MoRM",
            EstimatorKind::Mou => "MoU",
            EstimatorKind::Moru => "MoRU",
            EstimatorKind::MomSplitPairs => "MoM-split-pairs",
            EstimatorKind::Moiu => "MoIU",
            EstimatorKind::Mogu => "MoGU",
            EstimatorKind::Morgu => "MoRGU",
        }
    }

    /// Whether the estimator targets a pairwise mean `E h(X, X')`.
    pub fn is_pairwise(self) -> bool {
        !matches!(self, EstimatorKind::Mom | EstimatorKind::Morm)
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Variance quantities a bound depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VarianceInputs {
    None,
    /// Standard deviation of the observations (or of the split-pair values).
    Sigma(f64),
    /// Hoeffding variances `sigma1^2` and `sigma2^2` of the kernel.
    Components {
        sigma1_sq: f64,
        sigma2_sq: f64,
    },
}

/// Block parameters and certified radius for one estimator at one `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorPlan {
    pub estimator: EstimatorKind,
    pub n: usize,
    pub delta: f64,
    pub tau: Option<f64>,
    pub k: usize,
    /// Block size. For MoGU/MoRGU the smallest of `block_sizes`; 0 for MoIU.
    pub b: usize,
    /// Per-sample block sizes of MoGU/MoRGU.
    pub block_sizes: Vec<usize>,
    /// Pairs per subsample (MoIU).
    pub m: Option<usize>,
    pub scheme: Option<Resampling>,
    pub pair_scheme: Option<PairScheme>,
    /// Deviation radius holding with probability at least `1 - delta`;
    /// `None` when no bound applies.
    pub radius: Option<f64>,
    pub variance: VarianceInputs,
}

impl EstimatorPlan {
    fn new(estimator: EstimatorKind, n: usize, delta: f64, k: usize, b: usize) -> Self {
        EstimatorPlan {
            estimator,
            n,
            delta,
            tau: None,
            k,
            b,
            block_sizes: Vec::new(),
            m: None,
            scheme: None,
            pair_scheme: None,
            radius: None,
            variance: VarianceInputs::None,
        }
    }

    pub fn with_scheme(mut self, scheme: Resampling) -> Self {
        self.scheme = Some(scheme);
        self
    }

    /// Pairs drawn per block; `B(B-1)/2` for block estimators, `M` for MoIU.
    pub fn pairs_per_block(&self) -> usize {
        self.m.unwrap_or(self.b * self.b.saturating_sub(1) / 2)
    }
}

const SNAP: f64 = 1e-9;

/// `ceil`, treating values within a relative `1e-9` of an integer as that
/// integer (so `ln(1/d)` for `d = e^-7` plans `K = 7`, not 8).
pub(crate) fn ceil_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.ceil()
    }
}

pub(crate) fn floor_snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP * r.abs().max(1.0) {
        r
    } else {
        x.floor()
    }
}

fn to_count(x: f64) -> usize {
    if x >= usize::MAX as f64 {
        usize::MAX
    } else {
        x as usize
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::out_of_range(format!(
            "confidence level delta={delta} must lie in (0, 1)"
        )));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::out_of_range(format!("tau={tau} must lie in (0, 1/2)")));
    }
    Ok(())
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0 && v.is_finite()) {
        return Err(Error::invalid(format!("{name}={v} must be finite and >= 0")));
    }
    Ok(())
}

/// `K = ceil(ln(2/d) / (2 (1/2 - tau)^2))`.
pub fn randomized_block_count(delta: f64, tau: f64) -> usize {
    let l = (2.0 / delta).ln();
    to_count(ceil_snap(l / (2.0 * (0.5 - tau) * (0.5 - tau))).max(1.0))
}

/// `B = floor(8 tau^2 n / (9 ln(2/d)))`.
pub fn randomized_block_size(n: usize, delta: f64, tau: f64) -> usize {
    let l = (2.0 / delta).ln();
    to_count(floor_snap(8.0 * tau * tau * n as f64 / (9.0 * l)).max(0.0))
}

/// MoM plan: `K = ceil(ln(1/d))`, admissible for `d` in `[e^(1-n/2), 1)`.
pub fn plan_mom(n: usize, delta: f64, sigma: f64) -> Result<EstimatorPlan> {
    check_delta(delta)?;
    check_nonneg("sigma", sigma)?;
    let floor = (1.0 - n as f64 / 2.0).exp();
    if delta < floor {
        return Err(Error::out_of_range(format!(
            "MoM requires delta >= e^(1-n/2) = {floor:e} for n={n}, got {delta:e}"
        )));
    }
    let l = (1.0 / delta).ln();
    let k = to_count(ceil_snap(l).max(1.0));
    let mut plan = EstimatorPlan::new(EstimatorKind::Mom, n, delta, k, n / k);
    plan.radius =
        Some(2.0 * std::f64::consts::SQRT_2 * std::f64::consts::E * sigma * ((1.0 + l) / n as f64).sqrt());
    plan.variance = VarianceInputs::Sigma(sigma);
    Ok(plan)
}

fn check_randomized_floor(name: &str, n_over_d: f64, delta: f64, tau: f64) -> Result<()> {
    let floor = 2.0 * (-8.0 * tau * tau * n_over_d / 9.0).exp();
    if delta < floor {
        return Err(Error::out_of_range(format!(
            "{name} requires delta >= 2 e^(-8 tau^2 n / 9) = {floor:e} (tau={tau}), got {delta:e}"
        )));
    }
    Ok(())
}

/// MoRM plan with SWoR blocks, admissible for `d` in `[2 e^(-8 tau^2 n/9), 1)`.
///
/// The lower endpoint is exactly the condition `B >= 1`.
pub fn plan_morm(n: usize, delta: f64, tau: f64, sigma: f64) -> Result<EstimatorPlan> {
    check_delta(delta)?;
    check_tau(tau)?;
    check_nonneg("sigma", sigma)?;
    check_randomized_floor("MoRM", n as f64, delta, tau)?;
    let b = randomized_block_size(n, delta, tau);
    if b == 0 {
        return Err(Error::out_of_range(format!(
            "MoRM block size floor(8 tau^2 n / (9 ln(2/delta))) is 0 for n={n}, tau={tau}, delta={delta:e}"
        )));
    }
    let l = (2.0 / delta).ln();
    let mut plan = EstimatorPlan::new(
        EstimatorKind::Morm,
        n,
        delta,
        randomized_block_count(delta, tau),
        b,
    )
    .with_scheme(Resampling::Swor);
    plan.tau = Some(tau);
    plan.radius = Some(3.0 * 3f64.sqrt() * sigma / (2.0 * tau.powf(1.5)) * (l / n as f64).sqrt());
    plan.variance = VarianceInputs::Sigma(sigma);
    Ok(plan)
}

/// `(C1, C2) = (108 s1, 486 s2)`.
pub fn mou_constants(sigma1_sq: f64, sigma2_sq: f64) -> (f64, f64) {
    (108.0 * sigma1_sq, 486.0 * sigma2_sq)
}

/// `(C1(tau), C2(tau)) = (27 s1 / (2 tau^3), 243 s2 / (4 tau^3))`.
pub fn moru_constants(tau: f64, sigma1_sq: f64, sigma2_sq: f64) -> (f64, f64) {
    let t3 = tau * tau * tau;
    (27.0 * sigma1_sq / (2.0 * t3), 243.0 * sigma2_sq / (4.0 * t3))
}

/// `sqrt(C1 L / n + C2 L^2 / (n (a n - 9 L)))`.
fn two_term_radius(c1: f64, c2: f64, l: f64, n: f64, a: f64) -> f64 {
    let second = if c2 == 0.0 {
        0.0
    } else {
        c2 * l * l / (n * (a * n - 9.0 * l))
    };
    (c1 * l / n + second).sqrt()
}

/// MoU radius for a given log-term `L` (`ln(1/d)` in the bound).
pub fn mou_radius(n: usize, l: f64, sigma1_sq: f64, sigma2_sq: f64) -> f64 {
    let (c1, c2) = mou_constants(sigma1_sq, sigma2_sq);
    two_term_radius(c1, c2, l, n as f64, 2.0)
}

/// MoRU radius for a given log-term `L` (`ln(2/d)` in the bound).
pub fn moru_radius(n: usize, l: f64, tau: f64, sigma1_sq: f64, sigma2_sq: f64) -> f64 {
    let (c1, c2) = moru_constants(tau, sigma1_sq, sigma2_sq);
    two_term_radius(c1, c2, l, n as f64, 8.0)
}

/// MoU plan: `K = ceil(4.5 ln(1/d))`, admissible for `d` in `[e^(1-2n/9), 1)`.
pub fn plan_mou(n: usize, delta: f64, sigma1_sq: f64, sigma2_sq: f64) -> Result<EstimatorPlan> {
    check_delta(delta)?;
    check_nonneg("sigma1_sq", sigma1_sq)?;
    check_nonneg("sigma2_sq", sigma2_sq)?;
    let nf = n as f64;
    let floor = (1.0 - 2.0 * nf / 9.0).exp();
    let l = (1.0 / delta).ln();
    if delta < floor || 2.0 * nf <= 9.0 * l {
        return Err(Error::out_of_range(format!(
            "MoU requires delta >= e^(1-2n/9) = {floor:e} for n={n}, got {delta:e}"
        )));
    }
    let k = to_count(ceil_snap(4.5 * l).max(1.0));
    let b = n / k;
    if b < 2 {
        return Err(Error::out_of_range(format!(
            "MoU blocks of size floor(n/K) = {b} (n={n}, K={k}) cannot hold a pair"
        )));
    }
    let mut plan = EstimatorPlan::new(EstimatorKind::Mou, n, delta, k, b);
    plan.radius = Some(mou_radius(n, l, sigma1_sq, sigma2_sq));
    plan.variance = VarianceInputs::Components { sigma1_sq, sigma2_sq };
    Ok(plan)
}

/// MoRU plan: `K` and `B` as for MoRM, admissible for `d` in
/// `[2 e^(-8 tau^2 n/9), 1)` and additionally `B >= 2`.
pub fn plan_moru(n: usize, delta: f64, tau: f64, sigma1_sq: f64, sigma2_sq: f64) -> Result<EstimatorPlan> {
    check_delta(delta)?;
    check_tau(tau)?;
    check_nonneg("sigma1_sq", sigma1_sq)?;
    check_nonneg("sigma2_sq", sigma2_sq)?;
    check_randomized_floor("MoRU", n as f64, delta, tau)?;
    let b = randomized_block_size(n, delta, tau);
    if b < 2 {
        return Err(Error::out_of_range(format!(
            "MoRU block size floor(8 tau^2 n / (9 ln(2/delta))) = {b} < 2 for n={n}, tau={tau}, delta={delta:e}"
        )));
    }
    let l = (2.0 / delta).ln();
    let mut plan = EstimatorPlan::new(
        EstimatorKind::Moru,
        n,
        delta,
        randomized_block_count(delta, tau),
        b,
    )
    .with_scheme(Resampling::Swor);
    plan.tau = Some(tau);
    plan.radius = Some(moru_radius(n, l, tau, sigma1_sq, sigma2_sq));
    plan.variance = VarianceInputs::Components { sigma1_sq, sigma2_sq };
    Ok(plan)
}

/// MoM over the `n/2` split-pair values `h(X_i, X_{i+n/2})`, whose standard
/// deviation is `sigma = sqrt(sigma^2(h))`.
pub fn plan_split_pairs(n: usize, delta: f64, sigma_sq: f64) -> Result<EstimatorPlan> {
    check_nonneg("sigma_sq", sigma_sq)?;
    let mut plan = plan_mom(n / 2, delta, sigma_sq.sqrt())?;
    plan.estimator = EstimatorKind::MomSplitPairs;
    plan.n = n;
    Ok(plan)
}

/// MoIU plan: the MoRU block count at `tau` and `m` pairs per subsample.
/// No deviation bound is available, so the plan has no radius.
pub fn plan_moiu(n: usize, delta: f64, tau: f64, m: usize, scheme: PairScheme) -> Result<EstimatorPlan> {
    check_delta(delta)?;
    check_tau(tau)?;
    if n < 2 || m == 0 {
        return Err(Error::invalid(format!(
            "MoIU needs n >= 2 and M >= 1, got n={n}, M={m}"
        )));
    }
    if scheme == PairScheme::WithoutReplacement && m > crate::sampling::pair_count(n) {
        return Err(Error::invalid(format!(
            "cannot draw M={m} distinct pairs among n={n} observations"
        )));
    }
    let mut plan = EstimatorPlan::new(
        EstimatorKind::Moiu,
        n,
        delta,
        randomized_block_count(delta, tau),
        0,
    );
    plan.tau = Some(tau);
    plan.m = Some(m);
    plan.pair_scheme = Some(scheme);
    Ok(plan)
}

fn check_sizes(sizes: &[usize], degrees: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes.len() != degrees.len() {
        return Err(Error::invalid(format!(
            "need one degree per sample, got {} samples and {} degrees",
            sizes.len(),
            degrees.len()
        )));
    }
    if let Some(t) = degrees.iter().position(|&d| d == 0) {
        return Err(Error::invalid(format!("degree of sample {t} must be >= 1")));
    }
    Ok(())
}

/// `(min_t n_t, min_t n_t / d_t)`.
fn size_ratios(sizes: &[usize], degrees: &[usize]) -> (usize, f64) {
    let n_min = *sizes.iter().min().expect("checked non-empty");
    let ratio = sizes
        .iter()
        .zip(degrees)
        .map(|(&n, &d)| n as f64 / d as f64)
        .fold(f64::INFINITY, f64::min);
    (n_min, ratio)
}

/// Generalized MoU plan for samples of sizes `n_t` and degrees `d_t`.
///
/// `K = ceil(4.5 ln(1/d))`, admissible for `d >= e^(1 - 2 r / 9)` with
/// `r = min_t n_t/d_t`; the radius uses `n_min = min_t n_t`. The bound
/// further assumes `K <= min_t n_t/(d_t + 1)`, which is enforced here.
pub fn plan_mogu(
    sizes: &[usize],
    degrees: &[usize],
    delta: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
) -> Result<EstimatorPlan> {
    check_delta(delta)?;
    check_sizes(sizes, degrees)?;
    check_nonneg("sigma1_sq", sigma1_sq)?;
    check_nonneg("sigma2_sq", sigma2_sq)?;
    let (n_min, ratio) = size_ratios(sizes, degrees);
    let floor = (1.0 - 2.0 * ratio / 9.0).exp();
    let l = (1.0 / delta).ln();
    if delta < floor || 2.0 * n_min as f64 <= 9.0 * l {
        return Err(Error::out_of_range(format!(
            "MoGU requires delta >= e^(1 - 2 min(n_t/d_t) / 9) = {floor:e}, got {delta:e}"
        )));
    }
    let k = to_count(ceil_snap(4.5 * l).max(1.0));
    for (t, (&n, &d)) in sizes.iter().zip(degrees).enumerate() {
        if (k * (d + 1)) as f64 > n as f64 {
            return Err(Error::out_of_range(format!(
                "MoGU requires K <= n_t/(d_t+1); K={k} exceeds {n}/{} for sample {t}",
                d + 1
            )));
        }
    }
    let block_sizes: Vec<usize> = sizes.iter().map(|&n| n / k).collect();
    let mut plan = EstimatorPlan::new(
        EstimatorKind::Mogu,
        n_min,
        delta,
        k,
        *block_sizes.iter().min().expect("non-empty"),
    );
    plan.block_sizes = block_sizes;
    plan.radius = Some(mou_radius(n_min, l, sigma1_sq, sigma2_sq));
    plan.variance = VarianceInputs::Components { sigma1_sq, sigma2_sq };
    Ok(plan)
}

/// Generalized MoRU plan: `K` as for MoRU, `B_t = floor(8 tau^2 n_t / (9 ln(2/d)))`.
///
/// The admissible range `d >= 2 e^(-8 tau^2 r / 9)`, `r = min_t n_t/d_t`, is
/// the same condition as `B_t >= d_t` for every `t`; a violation is reported
/// as [`Error::OutOfRange`].
pub fn plan_morgu(
    sizes: &[usize],
    degrees: &[usize],
    delta: f64,
    tau: f64,
    sigma1_sq: f64,
    sigma2_sq: f64,
) -> Result<EstimatorPlan> {
    check_delta(delta)?;
    check_tau(tau)?;
    check_sizes(sizes, degrees)?;
    check_nonneg("sigma1_sq", sigma1_sq)?;
    check_nonneg("sigma2_sq", sigma2_sq)?;
    let (n_min, ratio) = size_ratios(sizes, degrees);
    check_randomized_floor("MoRGU", ratio, delta, tau)?;
    let block_sizes: Vec<usize> = sizes
        .iter()
        .map(|&n| randomized_block_size(n, delta, tau))
        .collect();
    for (t, (&b, &d)) in block_sizes.iter().zip(degrees).enumerate() {
        if b < d {
            return Err(Error::insufficient(format!(
                "MoRGU block size B_{t}={b} is smaller than the degree d_{t}={d}"
            )));
        }
    }
    let l = (2.0 / delta).ln();
    let mut plan = EstimatorPlan::new(
        EstimatorKind::Morgu,
        n_min,
        delta,
        randomized_block_count(delta, tau),
        *block_sizes.iter().min().expect("non-empty"),
    )
    .with_scheme(Resampling::Swor);
    plan.tau = Some(tau);
    plan.block_sizes = block_sizes;
    plan.radius = Some(moru_radius(n_min, l, tau, sigma1_sq, sigma2_sq));
    plan.variance = VarianceInputs::Components { sigma1_sq, sigma2_sq };
    Ok(plan)
}

/// Outcome of a coverage simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coverage {
    /// Fraction of replications with `|estimate - theta| > radius`.
    pub exceedance: f64,
    pub exceedances: usize,
    pub replications: usize,
    pub radius: f64,
}

/// Simulate `plan` on fresh samples of `law` and count how often the error
/// exceeds the certified radius. The bound promises `exceedance <= delta`;
/// this function reports the frequency and asserts nothing.
///
/// Mean estimators target the mean of `law`; pairwise estimators use the
/// variance kernel and target its variance. Replication `r` draws its data
/// and its blocks from seeds derived from `(seed, r)`.
pub fn coverage_check(
    plan: &EstimatorPlan,
    law: LawSpec,
    replications: usize,
    seed: Seed,
) -> Result<Coverage> {
    if replications < 100 {
        return Err(Error::invalid(format!(
            "coverage needs at least 100 replications, got {replications}"
        )));
    }
    let radius = plan
        .radius
        .ok_or_else(|| Error::invalid(format!("{} plans certify no radius", plan.estimator)))?;
    let pairwise = plan.estimator.is_pairwise();
    if matches!(plan.estimator, EstimatorKind::Mogu | EstimatorKind::Morgu) {
        return Err(Error::invalid("coverage of multi-sample plans is not supported"));
    }
    let theta = if pairwise {
        law.true_variance()
    } else {
        law.true_mean()
    };
    let hits = (0..replications)
        .into_par_iter()
        .map(|r| {
            let rep = seed.derive(r as u64);
            let x = draw(law, plan.n, rep.derive_str("data"));
            let est_seed = rep.derive_str("estimator");
            let value = if pairwise {
                apply_pairwise_plan(plan, &x, &VarianceKernel, est_seed)?.value
            } else {
                apply_mean_plan(plan, &x, est_seed)?.value
            };
            Ok((value - theta).abs() > radius)
        })
        .collect::<Result<Vec<bool>>>()?;
    let exceedances = hits.iter().filter(|&&h| h).count();
    Ok(Coverage {
        exceedance: exceedances as f64 / replications as f64,
        exceedances,
        replications,
        radius,
    })
}
