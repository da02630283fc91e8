//! Seeded samplers for the test laws and a contamination wrapper.
//!
//! | law | mean | variance |
//! |---|---|---|
//! | `normal` N(0, 1) | 0 | 1 |
//! | `student3` Student t, 3 d.o.f. | 0 | 3 |
//! | `lognormal` exp N(0, 1) | `e^(1/2)` | `(e - 1) e` |
//! | `pareto3` Pareto, shape 3, scale 1, support `[1, inf)` | 3/2 | 3/4 |
//! | `constant:c` | c | 0 |

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bounds::floor_snap;
use crate::error::{Error, Result};
use crate::kernels::HoeffdingComponents;
use crate::rng::{Seed, StreamRng};
use crate::sample::Sample;
use crate::sampling::swor_blocks;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Normal,
    Student3,
    LogNormal,
    Pareto3,
    Constant(f64),
}

/// A test law with known moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawSpec {
    pub family: Family,
}

impl LawSpec {
    pub fn normal() -> Self {
        LawSpec {
            family: Family::Normal,
        }
    }
    pub fn student3() -> Self {
        LawSpec {
            family: Family::Student3,
        }
    }
    pub fn lognormal() -> Self {
        LawSpec {
            family: Family::LogNormal,
        }
    }
    pub fn pareto3() -> Self {
        LawSpec {
            family: Family::Pareto3,
        }
    }
    pub fn constant(c: f64) -> Self {
        LawSpec {
            family: Family::Constant(c),
        }
    }

    /// The four heavy- and light-tailed laws of the risk tables.
    pub fn standard_laws() -> [LawSpec; 4] {
        [
            LawSpec::normal(),
            LawSpec::student3(),
            LawSpec::lognormal(),
            LawSpec::pareto3(),
        ]
    }

    pub fn name(&self) -> String {
        match self.family {
            Family::Normal => "normal".into(),
            Family::Student3 => "student3".into(),
            Family::LogNormal => "lognormal".into(),
            Family::Pareto3 => "pareto3".into(),
            Family::Constant(c) => format!("constant:{c}"),
        }
    }

    pub fn true_mean(&self) -> f64 {
        match self.family {
            Family::Normal | Family::Student3 => 0.0,
            Family::LogNormal => 0.5f64.exp(),
            Family::Pareto3 => 1.5,
            Family::Constant(c) => c,
        }
    }

    pub fn true_variance(&self) -> f64 {
        let e = std::f64::consts::E;
        match self.family {
            Family::Normal => 1.0,
            Family::Student3 => 3.0,
            Family::LogNormal => (e - 1.0) * e,
            Family::Pareto3 => 0.75,
            Family::Constant(_) => 0.0,
        }
    }

    /// Hoeffding components of the variance kernel `(x - y)^2 / 2` under this
    /// law: `theta = s^2`, `sigma1^2 = (mu4 - s^4) / 4`, `sigma2^2 = s^4`.
    /// `None` when the fourth moment is infinite.
    pub fn variance_kernel_components(&self) -> Option<HoeffdingComponents> {
        let var = self.true_variance();
        let mu4 = match self.family {
            Family::Normal => 3.0,
            Family::Student3 | Family::Pareto3 => return None,
            Family::LogNormal => {
                let m = |k: f64| (k * k / 2.0).exp();
                m(4.0) - 4.0 * m(3.0) * m(1.0) + 6.0 * m(2.0) * m(1.0).powi(2) - 3.0 * m(1.0).powi(4)
            }
            Family::Constant(_) => 0.0,
        };
        Some(HoeffdingComponents::new(var, (mu4 - var * var) / 4.0, var * var))
    }
}

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for LawSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        if let Some(c) = lower.strip_prefix("constant:") {
            let c: f64 = c
                .parse()
                .map_err(|_| Error::invalid(format!("bad constant in law '{s}'")))?;
            return Ok(LawSpec::constant(c));
        }
        match lower.as_str() {
            "normal" | "gaussian" => Ok(LawSpec::normal()),
            "student3" | "student" | "t3" => Ok(LawSpec::student3()),
            "lognormal" | "log-normal" => Ok(LawSpec::lognormal()),
            "pareto3" | "pareto" => Ok(LawSpec::pareto3()),
            _ => Err(Error::invalid(format!(
                "unknown law '{s}' (expected normal, student3, lognormal, pareto3 or constant:<c>)"
            ))),
        }
    }
}

fn draw_one(family: Family, rng: &mut StreamRng) -> f64 {
    match family {
        Family::Normal => rng.sample(StandardNormal),
        Family::Student3 => {
            let z: f64 = rng.sample(StandardNormal);
            let chi2: f64 = (0..3)
                .map(|_| {
                    let g: f64 = rng.sample(StandardNormal);
                    g * g
                })
                .sum();
            z / (chi2 / 3.0).sqrt()
        }
        Family::LogNormal => rng.sample::<f64, _>(StandardNormal).exp(),
        Family::Pareto3 => {
            // 1 - U lies in (0, 1].
            let u = 1.0 - rng.random::<f64>();
            u.powf(-1.0 / 3.0)
        }
        Family::Constant(c) => c,
    }
}

/// `n` i.i.d. draws of `law`.
pub fn draw(law: LawSpec, n: usize, seed: Seed) -> Sample {
    let mut rng = seed.rng();
    Sample::scalar((0..n).map(|_| draw_one(law.family, &mut rng)).collect())
}

/// What replaced observations are set to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outlier {
    /// Every coordinate set to this value.
    Value(f64),
    /// Every coordinate drawn independently from this law.
    Law(LawSpec),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contamination {
    pub fraction: f64,
    pub outlier: Outlier,
}

/// A contaminated sample and the (sorted) positions that were replaced.
#[derive(Debug, Clone, PartialEq)]
pub struct Contaminated {
    pub sample: Sample,
    pub replaced_indices: Vec<usize>,
}

/// Replace `floor(fraction * n)` uniformly chosen observations by outliers.
pub fn contaminate(sample: &Sample, c: &Contamination, seed: Seed) -> Result<Contaminated> {
    if !(0.0..0.5).contains(&c.fraction) {
        return Err(Error::invalid(format!(
            "contamination fraction {} must lie in [0, 1/2)",
            c.fraction
        )));
    }
    let n = sample.len();
    let m = floor_snap(c.fraction * n as f64) as usize;
    if m == 0 {
        return Ok(Contaminated {
            sample: sample.clone(),
            replaced_indices: Vec::new(),
        });
    }
    let mut idx = swor_blocks(n, 1, m, seed.derive(0))?.blocks.swap_remove(0);
    idx.sort_unstable();
    let dim = sample.dim();
    let mut data = sample.as_flat().to_vec();
    let mut rng = seed.derive(1).rng();
    for &i in &idx {
        for v in &mut data[i * dim..(i + 1) * dim] {
            *v = match c.outlier {
                Outlier::Value(x) => x,
                Outlier::Law(law) => draw_one(law.family, &mut rng),
            };
        }
    }
    Ok(Contaminated {
        sample: Sample::from_flat(dim, data)?,
        replaced_indices: idx,
    })
}
