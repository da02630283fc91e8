//! Monte-Carlo harness: quadratic risks, deviation quantiles over a grid of
//! confidence levels, and empirical coverage of the certified radii.
//!
//! Replications use common random numbers: replication `r` of law `L` draws
//! its data from `root.derive_str(L).derive(r)` for every estimator, and each
//! estimator derives its block seed from that data seed and its own label.
//! Replications run in parallel and are collected in index order, so reports
//! do not depend on scheduling.
//!
//! Every estimator is re-planned at every confidence level. A planner error
//! marks the cell `infeasible` instead of aborting the run.

mod config;
mod report;
mod spec;

pub use config::{
    default_delta_grid, geometric_grid, load_config, parse_config, ExperimentConfig, ExperimentKind,
};
pub use report::{
    fmt_float, to_csv, to_json, write_report, ExperimentReport, ReportFormat, ReportRow, CSV_HEADER,
};
pub use spec::EstimatorSpec;

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bounds::{ceil_snap, EstimatorKind, EstimatorPlan};
use crate::distributions::{draw, LawSpec};
use crate::error::Result;
use crate::rng::Seed;

/// Summary statistics of an ensemble of estimates around a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSummary {
    pub quadratic_risk: f64,
    /// Standard deviation of the squared errors.
    pub quadratic_risk_sd: f64,
    pub bias: f64,
    /// Population variance of the estimates.
    pub variance: f64,
}

impl RiskSummary {
    pub fn new(estimates: &[f64], target: f64) -> Self {
        let r = estimates.len() as f64;
        let sq: Vec<f64> = estimates.iter().map(|e| (e - target) * (e - target)).collect();
        let qr = sq.iter().sum::<f64>() / r;
        let sd = if estimates.len() > 1 {
            (sq.iter().map(|s| (s - qr) * (s - qr)).sum::<f64>() / (r - 1.0)).sqrt()
        } else {
            0.0
        };
        let mean = estimates.iter().sum::<f64>() / r;
        let variance = estimates.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / r;
        RiskSummary {
            quadratic_risk: qr,
            quadratic_risk_sd: sd,
            bias: mean - target,
            variance,
        }
    }
}

/// Empirical `(1 - delta)`-quantile: the order statistic of rank
/// `ceil((1 - delta) R)` (1-based, clamped to `1..=R`).
pub fn upper_quantile(values: &[f64], delta: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let r = v.len();
    let rank = (ceil_snap((1.0 - delta) * r as f64) as usize).clamp(1, r);
    v[rank - 1]
}

struct Cell {
    spec: EstimatorSpec,
    delta: f64,
    delta_index: u64,
    plan: std::result::Result<EstimatorPlan, String>,
}

fn base_row(law: &LawSpec, cell: &Cell, seed: Seed) -> ReportRow {
    let plan = cell.plan.as_ref().ok();
    let b = plan.map(|p| {
        if p.estimator == EstimatorKind::Moiu {
            p.pairs_per_block()
        } else {
            p.b
        }
    });
    ReportRow {
        law: law.name(),
        estimator: cell.spec.to_string(),
        delta: cell.delta,
        tau: cell.spec.tau(),
        k: plan.map(|p| p.k),
        b,
        metric_name: String::new(),
        value: f64::NAN,
        stderr: f64::NAN,
        seed: seed.value(),
    }
}

fn metric(base: &ReportRow, name: &str, value: f64, stderr: f64) -> ReportRow {
    ReportRow {
        metric_name: name.to_string(),
        value,
        stderr,
        ..base.clone()
    }
}

/// Estimates of every feasible cell for every replication: `[cell][rep]`.
fn simulate(config: &ExperimentConfig, law: &LawSpec, cells: &[Cell], root: Seed) -> Result<Vec<Vec<f64>>> {
    let law_seed = root.derive_str(&law.name());
    let per_rep: Vec<Vec<f64>> = (0..config.replications)
        .into_par_iter()
        .map(|r| {
            let data_seed = law_seed.derive(r as u64);
            let x = draw(*law, config.n, data_seed);
            cells
                .iter()
                .map(|c| match &c.plan {
                    Ok(plan) => {
                        let s = data_seed.derive_str(&c.spec.to_string()).derive(c.delta_index);
                        c.spec.estimate(plan, &x, s)
                    }
                    Err(_) => Ok(f64::NAN),
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..cells.len())
        .map(|c| per_rep.iter().map(|rep| rep[c]).collect())
        .collect())
}

fn cells_for(config: &ExperimentConfig, law: &LawSpec, deltas: &[f64]) -> Vec<Cell> {
    let mut cells = Vec::new();
    for spec in &config.estimators {
        for (i, &delta) in deltas.iter().enumerate() {
            cells.push(Cell {
                spec: *spec,
                delta,
                delta_index: i as u64,
                plan: spec.plan(config.n, delta, law).map_err(|e| e.to_string()),
            });
        }
    }
    cells
}

fn new_report(config: &ExperimentConfig, seed: Seed) -> ExperimentReport {
    ExperimentReport {
        experiment: config.name.clone(),
        kind: config.kind.as_str().to_string(),
        n: config.n,
        replications: config.replications,
        seed: seed.value(),
        config_hash: config.config_hash(seed.value()),
        rows: Vec::new(),
        notes: Vec::new(),
    }
}

fn push_infeasible(report: &mut ExperimentReport, law: &LawSpec, cell: &Cell, seed: Seed, why: &str) {
    report.rows.push(metric(
        &base_row(law, cell, seed),
        "infeasible",
        f64::NAN,
        f64::NAN,
    ));
    report.notes.push(format!(
        "{} / {} / delta={}: {why}",
        law.name(),
        cell.spec,
        cell.delta
    ));
}

/// Quadratic risk of every `(law, estimator)` at `config.delta`.
///
/// Metrics: `quadratic_risk` (stderr = sd / sqrt(R)), `quadratic_risk_sd`,
/// `bias` and `variance`.
pub fn run_quadratic_risk(config: &ExperimentConfig, seed: Seed) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = new_report(config, seed);
    let sqrt_r = (config.replications as f64).sqrt();
    for law in &config.laws {
        let cells = cells_for(config, law, &[config.delta]);
        let estimates = simulate(config, law, &cells, seed)?;
        for (cell, est) in cells.iter().zip(&estimates) {
            if let Err(why) = &cell.plan {
                push_infeasible(&mut report, law, cell, seed, why);
                continue;
            }
            let s = RiskSummary::new(est, cell.spec.target(law));
            let base = base_row(law, cell, seed);
            report.rows.push(metric(
                &base,
                "quadratic_risk",
                s.quadratic_risk,
                s.quadratic_risk_sd / sqrt_r,
            ));
            report
                .rows
                .push(metric(&base, "quadratic_risk_sd", s.quadratic_risk_sd, f64::NAN));
            report
                .rows
                .push(metric(&base, "bias", s.bias, s.variance.sqrt() / sqrt_r));
            report.rows.push(metric(&base, "variance", s.variance, f64::NAN));
        }
    }
    Ok(report)
}

/// `(1 - delta)`-quantile of `|estimate - theta|` for each `delta` of the
/// grid (metric `deviation_quantile`), re-planning at every level.
pub fn run_quantile_curves(config: &ExperimentConfig, seed: Seed) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = new_report(config, seed);
    for law in &config.laws {
        let cells = cells_for(config, law, &config.delta_grid);
        let estimates = simulate(config, law, &cells, seed)?;
        for (cell, est) in cells.iter().zip(&estimates) {
            if let Err(why) = &cell.plan {
                push_infeasible(&mut report, law, cell, seed, why);
                continue;
            }
            let theta = cell.spec.target(law);
            let dev: Vec<f64> = est.iter().map(|e| (e - theta).abs()).collect();
            let q = upper_quantile(&dev, cell.delta);
            report.rows.push(metric(
                &base_row(law, cell, seed),
                "deviation_quantile",
                q,
                f64::NAN,
            ));
        }
    }
    Ok(report)
}

/// Frequency of `|estimate - theta| > radius` for each `delta` of the grid
/// (metric `exceedance`, with its binomial stderr) next to the radius
/// (metric `radius`). Cells whose plan has no radius are marked `no_bound`.
pub fn run_coverage(config: &ExperimentConfig, seed: Seed) -> Result<ExperimentReport> {
    config.validate()?;
    let mut report = new_report(config, seed);
    let r = config.replications as f64;
    for law in &config.laws {
        let cells = cells_for(config, law, &config.delta_grid);
        let estimates = simulate(config, law, &cells, seed)?;
        for (cell, est) in cells.iter().zip(&estimates) {
            let plan = match &cell.plan {
                Ok(p) => p,
                Err(why) => {
                    push_infeasible(&mut report, law, cell, seed, why);
                    continue;
                }
            };
            let base = base_row(law, cell, seed);
            let Some(radius) = plan.radius else {
                report.rows.push(metric(&base, "no_bound", f64::NAN, f64::NAN));
                continue;
            };
            let theta = cell.spec.target(law);
            let p = est.iter().filter(|e| (*e - theta).abs() > radius).count() as f64 / r;
            report
                .rows
                .push(metric(&base, "exceedance", p, (p * (1.0 - p) / r).sqrt()));
            report.rows.push(metric(&base, "radius", radius, f64::NAN));
        }
    }
    Ok(report)
}

/// Dispatch on `config.kind`.
pub fn run_experiment(config: &ExperimentConfig, seed: Seed) -> Result<ExperimentReport> {
    match config.kind {
        ExperimentKind::Risk => run_quadratic_risk(config, seed),
        ExperimentKind::Quantiles => run_quantile_curves(config, seed),
        ExperimentKind::Coverage => run_coverage(config, seed),
    }
}

/// Plain-text table of the headline metric of each row.
pub fn summary_table(report: &ExperimentReport) -> String {
    let headline = [
        "quadratic_risk",
        "deviation_quantile",
        "exceedance",
        "infeasible",
        "no_bound",
    ];
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# {} ({}) n={} replications={} seed={}",
        report.experiment, report.kind, report.n, report.replications, report.seed
    );
    let _ = writeln!(
        out,
        "{:<12} {:<32} {:>10} {:>6} {:>6} {:<20} {:>14} {:>12}",
        "law", "estimator", "delta", "K", "B", "metric", "value", "stderr"
    );
    for r in report
        .rows
        .iter()
        .filter(|r| headline.contains(&r.metric_name.as_str()))
    {
        let _ = writeln!(
            out,
            "{:<12} {:<32} {:>10.3e} {:>6} {:>6} {:<20} {:>14.6e} {:>12.3e}",
            r.law,
            r.estimator,
            r.delta,
            r.k.map_or("-".into(), |k| k.to_string()),
            r.b.map_or("-".into(), |b| b.to_string()),
            r.metric_name,
            r.value,
            r.stderr
        );
    }
    for note in &report.notes {
        let _ = writeln!(out, "note: {note}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: ExperimentKind, laws: Vec<LawSpec>, estimators: &[&str], reps: usize) -> ExperimentConfig {
        ExperimentConfig {
            name: "t".into(),
            kind,
            n: 200,
            replications: reps,
            delta: 0.01,
            delta_grid: geometric_grid(0.5, 0.01, 4),
            laws,
            estimators: estimators.iter().map(|s| s.parse().unwrap()).collect(),
            seed: None,
        }
    }

    #[test]
    fn quantile_rule() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(upper_quantile(&v, 0.5), 50.0);
        assert_eq!(upper_quantile(&v, 0.01), 99.0);
        assert_eq!(upper_quantile(&v, 0.001), 100.0);
        assert_eq!(upper_quantile(&[3.0], 0.9), 3.0);
    }

    #[test]
    fn zero_variance_law_has_zero_risk_and_quantiles() {
        let c = cfg(
            ExperimentKind::Risk,
            vec![LawSpec::constant(2.0)],
            &[
                "mom",
                "morm:tau=0.3:scheme=mc",
                "mou",
                "moru:tau=0.45",
                "mou-split",
                "moiu:tau=1/6:scheme=mc",
            ],
            20,
        );
        let rep = run_quadratic_risk(&c, Seed(1)).unwrap();
        for r in rep.rows.iter().filter(|r| r.metric_name == "quadratic_risk") {
            assert_eq!(r.value, 0.0, "{r:?}");
        }
        let q = run_quantile_curves(
            &ExperimentConfig {
                kind: ExperimentKind::Quantiles,
                ..c
            },
            Seed(1),
        )
        .unwrap();
        assert!(q
            .rows
            .iter()
            .filter(|r| r.metric_name == "deviation_quantile")
            .all(|r| r.value == 0.0));
    }

    #[test]
    fn risk_decomposes_into_bias_and_variance() {
        let c = cfg(
            ExperimentKind::Risk,
            vec![LawSpec::lognormal()],
            &["mom", "mou"],
            300,
        );
        let rep = run_quadratic_risk(&c, Seed(2)).unwrap();
        for est in ["mom", "mou"] {
            let qr = rep.value("lognormal", est, "quadratic_risk").unwrap();
            let b = rep.value("lognormal", est, "bias").unwrap();
            let v = rep.value("lognormal", est, "variance").unwrap();
            assert!((qr - (b * b + v)).abs() <= 1e-12 * qr.max(1.0));
        }
    }

    #[test]
    fn infeasible_cells_are_marked() {
        let mut c = cfg(
            ExperimentKind::Risk,
            vec![LawSpec::normal()],
            &["mom", "moru:tau=0.05"],
            5,
        );
        c.delta = 1e-3;
        let rep = run_quadratic_risk(&c, Seed(3)).unwrap();
        assert!(rep
            .value("normal", "moru:tau=0.05", "infeasible")
            .unwrap()
            .is_nan());
        assert!(rep.value("normal", "mom", "quadratic_risk").is_some());
        assert_eq!(rep.notes.len(), 1);
    }

    #[test]
    fn reports_are_deterministic_and_replication_order_free() {
        let c = cfg(
            ExperimentKind::Quantiles,
            vec![LawSpec::student3()],
            &["mom", "morm:tau=0.45:scheme=swor"],
            50,
        );
        let a = run_quantile_curves(&c, Seed(9)).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| run_quantile_curves(&c, Seed(9))).unwrap();
        assert_eq!(to_csv(&a).unwrap(), to_csv(&b).unwrap());
        assert_eq!(to_json(&a).unwrap(), to_json(&b).unwrap());
    }

    #[test]
    fn coverage_rows() {
        let c = cfg(
            ExperimentKind::Coverage,
            vec![LawSpec::normal(), LawSpec::student3()],
            &["mom", "mou", "moiu:tau=0.3:scheme=mc"],
            100,
        );
        let rep = run_coverage(&c, Seed(4)).unwrap();
        assert!(rep.find("normal", "mom", "exceedance").count() == 4);
        assert!(rep.find("student3", "mou", "no_bound").count() == 4);
        assert!(rep.find("normal", "moiu:tau=0.3:scheme=mc", "no_bound").count() == 4);
        let s = summary_table(&rep);
        assert!(s.contains("exceedance"));
    }
}
