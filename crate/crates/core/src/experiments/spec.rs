use std::fmt;
use std::str::FromStr;

use crate::bounds::{plan_moiu, plan_mom, plan_morm, plan_moru, plan_mou, plan_split_pairs, EstimatorPlan};
use crate::distributions::LawSpec;
use crate::error::{Error, Result};
use crate::kernels::{HoeffdingComponents, VarianceKernel};
use crate::mean_estimators::apply_mean_plan;
use crate::rng::Seed;
use crate::sample::Sample;
use crate::sampling::{PairScheme, Resampling};
use crate::ustat_estimators::apply_pairwise_plan;

/// An estimator template, re-planned at every `delta`.
///
/// Written as `name[:key=value]...`:
///
/// - `mom` or `mom:k=35` (fixed `K`, no certified radius);
/// - `morm:tau=0.45:scheme=swor` (`scheme` is `swor` or `mc`);
/// - `mou`, `mou-split` (MoM on split pairs), `moru:tau=0.45`;
/// - `moiu:tau=1/6:scheme=mc:m=1000` (`m` defaults to `n`).
///
/// `tau` accepts decimals or fractions such as `1/6`. Mean estimators target
/// the law's mean; pairwise ones target its variance through the variance
/// kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorSpec {
    Mom {
        k: Option<usize>,
    },
    Morm {
        tau: f64,
        scheme: Resampling,
    },
    Mou,
    MouSplit,
    Moru {
        tau: f64,
    },
    Moiu {
        tau: f64,
        scheme: PairScheme,
        m: Option<usize>,
    },
}

fn parse_fraction(s: &str) -> Option<f64> {
    match s.split_once('/') {
        Some((a, b)) => Some(a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?),
        None => s.trim().parse().ok(),
    }
}

/// Shortest decimal that round-trips, used in labels.
fn fmt_tau(tau: f64) -> String {
    for (num, den) in [(1.0, 6.0), (1.0, 3.0)] {
        if tau == num / den {
            return format!("{num}/{den}");
        }
    }
    format!("{tau}")
}

impl EstimatorSpec {
    pub fn is_pairwise(&self) -> bool {
        !matches!(self, EstimatorSpec::Mom { .. } | EstimatorSpec::Morm { .. })
    }

    pub fn tau(&self) -> Option<f64> {
        match *self {
            EstimatorSpec::Morm { tau, .. }
            | EstimatorSpec::Moru { tau }
            | EstimatorSpec::Moiu { tau, .. } => Some(tau),
            _ => None,
        }
    }

    /// The estimand under `law`.
    pub fn target(&self, law: &LawSpec) -> f64 {
        if self.is_pairwise() {
            law.true_variance()
        } else {
            law.true_mean()
        }
    }

    /// Plan at `(n, delta)`, using the law's true variance quantities for the
    /// radius when they are finite; otherwise the plan has no radius.
    pub fn plan(&self, n: usize, delta: f64, law: &LawSpec) -> Result<EstimatorPlan> {
        self.plan_with(
            n,
            delta,
            law.true_variance().sqrt(),
            law.variance_kernel_components(),
        )
    }

    /// Plan at `(n, delta)` from a standard deviation (mean estimators) or
    /// Hoeffding components (pairwise estimators). Pairwise plans have no
    /// radius when `comps` is `None`.
    pub fn plan_with(
        &self,
        n: usize,
        delta: f64,
        sigma: f64,
        comps: Option<HoeffdingComponents>,
    ) -> Result<EstimatorPlan> {
        let (s1, s2) = comps.map_or((0.0, 0.0), |c| (c.sigma1_sq, c.sigma2_sq));
        let mut plan = match *self {
            EstimatorSpec::Mom { k: None } => plan_mom(n, delta, sigma)?,
            EstimatorSpec::Mom { k: Some(k) } => {
                let mut p = plan_mom(n, delta, sigma)?;
                if k == 0 || k > n {
                    return Err(Error::out_of_range(format!("K={k} must lie in 1..={n}")));
                }
                p.k = k;
                p.b = n / k;
                p.radius = None;
                p
            }
            EstimatorSpec::Morm { tau, scheme } => plan_morm(n, delta, tau, sigma)?.with_scheme(scheme),
            EstimatorSpec::Mou => plan_mou(n, delta, s1, s2)?,
            EstimatorSpec::MouSplit => plan_split_pairs(n, delta, comps.map_or(0.0, |c| c.sigma_sq))?,
            EstimatorSpec::Moru { tau } => plan_moru(n, delta, tau, s1, s2)?,
            EstimatorSpec::Moiu { tau, scheme, m } => plan_moiu(n, delta, tau, m.unwrap_or(n), scheme)?,
        };
        if self.is_pairwise() && comps.is_none() {
            plan.radius = None;
        }
        Ok(plan)
    }

    /// Run the planned estimator on `x`.
    pub fn estimate(&self, plan: &EstimatorPlan, x: &Sample, seed: Seed) -> Result<f64> {
        Ok(if self.is_pairwise() {
            apply_pairwise_plan(plan, x, &VarianceKernel, seed)?.value
        } else {
            apply_mean_plan(plan, x, seed)?.value
        })
    }
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EstimatorSpec::Mom { k: None } => write!(f, "mom"),
            EstimatorSpec::Mom { k: Some(k) } => write!(f, "mom:k={k}"),
            EstimatorSpec::Morm { tau, scheme } => {
                write!(f, "morm:tau={}:scheme={scheme}", fmt_tau(tau))
            }
            EstimatorSpec::Mou => write!(f, "mou"),
            EstimatorSpec::MouSplit => write!(f, "mou-split"),
            EstimatorSpec::Moru { tau } => write!(f, "moru:tau={}", fmt_tau(tau)),
            EstimatorSpec::Moiu { tau, scheme, m } => {
                write!(f, "moiu:tau={}:scheme={scheme}", fmt_tau(tau))?;
                if let Some(m) = m {
                    write!(f, ":m={m}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut tau = None;
        let mut k = None;
        let mut m = None;
        let mut scheme = None;
        for kv in parts {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value in '{s}', got '{kv}'")))?;
            let bad = || Error::invalid(format!("bad value for '{key}' in '{s}'"));
            match key.trim() {
                "tau" => tau = Some(parse_fraction(value).ok_or_else(bad)?),
                "k" => k = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
                "m" => m = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
                "scheme" => scheme = Some(value.trim().to_string()),
                other => return Err(Error::invalid(format!("unknown key '{other}' in '{s}'"))),
            }
        }
        let need_tau = || tau.ok_or_else(|| Error::invalid(format!("estimator '{s}' needs tau=<value>")));
        let spec = match name.as_str() {
            "mom" => EstimatorSpec::Mom { k },
            "morm" => EstimatorSpec::Morm {
                tau: need_tau()?,
                scheme: scheme.as_deref().unwrap_or("swor").parse()?,
            },
            "mou" => EstimatorSpec::Mou,
            "mou-split" | "split-pairs" => EstimatorSpec::MouSplit,
            "moru" => EstimatorSpec::Moru { tau: need_tau()? },
            "moiu" => EstimatorSpec::Moiu {
                tau: need_tau()?,
                scheme: scheme.as_deref().unwrap_or("mc").parse()?,
                m,
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown estimator '{other}' (expected mom, morm, mou, mou-split, moru or moiu)"
                )))
            }
        };
        if let Some(t) = spec.tau() {
            if !(t > 0.0 && t < 0.5) {
                return Err(Error::invalid(format!("tau={t} must lie in (0, 1/2)")));
            }
        }
        Ok(spec)
    }
}
