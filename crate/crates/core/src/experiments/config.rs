use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::spec::EstimatorSpec;
use crate::distributions::LawSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Quadratic risk at a single `delta`.
    Risk,
    /// Deviation quantiles over the `delta` grid.
    Quantiles,
    /// Exceedance frequency of the certified radius over the `delta` grid.
    Coverage,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Risk => "risk",
            ExperimentKind::Quantiles => "quantiles",
            ExperimentKind::Coverage => "coverage",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "risk" => Ok(ExperimentKind::Risk),
            "quantiles" => Ok(ExperimentKind::Quantiles),
            "coverage" => Ok(ExperimentKind::Coverage),
            other => Err(Error::invalid(format!(
                "unknown experiment kind '{other}' (expected risk, quantiles or coverage)"
            ))),
        }
    }
}

/// One experiment section of a config file.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: ExperimentKind,
    pub n: usize,
    pub replications: usize,
    /// Confidence level of `Risk` experiments.
    pub delta: f64,
    /// Strictly decreasing levels in `(0, 1)` for `Quantiles` and `Coverage`.
    pub delta_grid: Vec<f64>,
    pub laws: Vec<LawSpec>,
    pub estimators: Vec<EstimatorSpec>,
    pub seed: Option<u64>,
}

/// `points` geometrically spaced levels from `max` down to `min`.
pub fn geometric_grid(max: f64, min: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![max];
    }
    let ratio = (min / max).ln() / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i == points - 1 {
                min
            } else {
                max * (ratio * i as f64).exp()
            }
        })
        .collect()
}

/// 20 geometric levels from 0.5 down to 0.001.
pub fn default_delta_grid() -> Vec<f64> {
    geometric_grid(0.5, 1e-3, 20)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSection {
    kind: String,
    n: usize,
    replications: usize,
    delta: Option<f64>,
    delta_grid: Option<Vec<f64>>,
    grid_points: Option<usize>,
    grid_max: Option<f64>,
    grid_min: Option<f64>,
    laws: Vec<String>,
    estimators: Vec<String>,
    seed: Option<u64>,
}

impl ExperimentConfig {
    fn from_raw(name: &str, raw: RawSection) -> Result<Self> {
        let ctx = |msg: String| Error::parse(format!("section [{name}]"), msg);
        let delta_grid = match raw.delta_grid {
            Some(g) => {
                if raw.grid_points.is_some() || raw.grid_max.is_some() || raw.grid_min.is_some() {
                    return Err(ctx(
                        "give either delta_grid or grid_points/grid_max/grid_min".into()
                    ));
                }
                g
            }
            None => geometric_grid(
                raw.grid_max.unwrap_or(0.5),
                raw.grid_min.unwrap_or(1e-3),
                raw.grid_points.unwrap_or(20),
            ),
        };
        let cfg = ExperimentConfig {
            name: name.to_string(),
            kind: raw.kind.parse().map_err(|e: Error| ctx(e.to_string()))?,
            n: raw.n,
            replications: raw.replications,
            delta: raw.delta.unwrap_or(1e-3),
            delta_grid,
            laws: raw
                .laws
                .iter()
                .map(|l| l.parse())
                .collect::<Result<_>>()
                .map_err(|e| ctx(e.to_string()))?,
            estimators: raw
                .estimators
                .iter()
                .map(|e| e.parse())
                .collect::<Result<_>>()
                .map_err(|e| ctx(e.to_string()))?,
            seed: raw.seed,
        };
        cfg.validate().map_err(|e| ctx(e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("replications must be at least 1"));
        }
        if self.n < 2 {
            return Err(Error::invalid("n must be at least 2"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!("delta={} must lie in (0, 1)", self.delta)));
        }
        if self.delta_grid.is_empty() || self.delta_grid.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
            return Err(Error::invalid("delta_grid must be non-empty and inside (0, 1)"));
        }
        if self.delta_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("delta_grid must be strictly decreasing"));
        }
        if self.laws.is_empty() || self.estimators.is_empty() {
            return Err(Error::invalid("laws and estimators must be non-empty"));
        }
        Ok(())
    }

    /// The fully expanded section, with `seed` filled in.
    pub fn resolved_toml(&self, seed: u64) -> String {
        let list = |items: Vec<String>| {
            items
                .iter()
                .map(|s| format!("\"{s}\""))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut out = String::new();
        let _ = writeln!(out, "[{}]", self.name);
        let _ = writeln!(out, "kind = \"{}\"", self.kind.as_str());
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "replications = {}", self.replications);
        let _ = writeln!(out, "delta = {:?}", self.delta);
        let grid: Vec<String> = self.delta_grid.iter().map(|d| format!("{d:?}")).collect();
        let _ = writeln!(out, "delta_grid = [{}]", grid.join(", "));
        let _ = writeln!(
            out,
            "laws = [{}]",
            list(self.laws.iter().map(LawSpec::name).collect())
        );
        let _ = writeln!(
            out,
            "estimators = [{}]",
            list(self.estimators.iter().map(ToString::to_string).collect())
        );
        let _ = writeln!(out, "seed = {seed}");
        out
    }

    /// SHA-256 of [`Self::resolved_toml`], hex encoded.
    pub fn config_hash(&self, seed: u64) -> String {
        hex::encode(Sha256::digest(self.resolved_toml(seed).as_bytes()))
    }
}

/// Parse every `[section]` of a TOML config, in file order.
pub fn parse_config(text: &str) -> Result<Vec<ExperimentConfig>> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::parse("config", e.to_string()))?;
    if doc.is_empty() {
        return Err(Error::parse("config", "no experiment sections"));
    }
    let mut out = Vec::with_capacity(doc.len());
    for (name, value) in doc {
        let raw: RawSection = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::parse(format!("section [{name}]"), e.to_string()))?;
        out.push(ExperimentConfig::from_raw(&name, raw)?);
    }
    Ok(out)
}

pub fn load_config(path: &Path) -> Result<Vec<ExperimentConfig>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}
