//! Command-line interface.
//!
//! Exit codes: `0` success, `1` bad input or configuration, `2` infeasible
//! plan (the requested confidence level is outside the estimator's
//! admissible range, or the sample is too small for its blocks).
//!
//! Every randomized command takes `--seed`; when it is omitted a seed is
//! generated and printed. The resolved configuration (all defaults
//! expanded, seed included) is written next to the outputs, or to standard
//! error for commands that only print.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{
    load_config, run_experiment, summary_table, write_report, EstimatorSpec, ExperimentKind, ReportFormat,
};
use crate::kernels::{estimate_components_capped, HoeffdingComponents};
use crate::learning::synthetic::{contaminate_clusters, regression_points, two_clusters};
use crate::learning::{
    count_spikes, moru_minibatch_gd_monitored, pairwise_regression_candidate, read_points_csv,
    run_tournament, Candidate, MahalanobisModel, PairLabelDataset,
};
use crate::rng::Seed;
use crate::sample::Sample;

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

/// Default subsample cap for plug-in Hoeffding components.
pub const COMPONENT_CAP: usize = 10_000;

#[derive(Debug, Parser)]
#[command(
    name = "mopm",
    version,
    about = "Median-of-means estimators, planners and experiments"
)]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate from a sample file and print the plan and radius.
    Estimate(EstimateArgs),
    /// Print the plan and radius for given variance inputs.
    Plan(PlanArgs),
    /// Quadratic-risk tables from a config file.
    RiskTable(ExperimentArgs),
    /// Deviation-quantile curves from a config file.
    QuantileCurves(ExperimentArgs),
    /// Empirical coverage of the certified radius from a config file.
    Coverage(ExperimentArgs),
    /// Mahalanobis metric learning by median-block gradient descent.
    MetricLearn(MetricLearnArgs),
    /// Tournament over pairwise-regression slopes.
    Tournament(TournamentArgs),
}

#[derive(Debug, Args)]
struct EstimatorArgs {
    /// mom, morm, mou, mou-split, moru or moiu.
    #[arg(long)]
    estimator: String,
    /// Sampling rate parameter of morm, moru and moiu (decimal or fraction).
    #[arg(long)]
    tau: Option<String>,
    /// swor or mc for morm; swor or mc for the pairs of moiu.
    #[arg(long)]
    scheme: Option<String>,
    /// Fixed number of blocks for mom.
    #[arg(long)]
    k: Option<usize>,
    /// Pairs per subsample for moiu (defaults to n).
    #[arg(long)]
    m: Option<usize>,
}

impl EstimatorArgs {
    fn spec(&self) -> Result<EstimatorSpec> {
        let mut s = self.estimator.clone();
        if let Some(t) = &self.tau {
            s.push_str(&format!(":tau={t}"));
        }
        if let Some(v) = &self.scheme {
            s.push_str(&format!(":scheme={v}"));
        }
        if let Some(k) = self.k {
            s.push_str(&format!(":k={k}"));
        }
        if let Some(m) = self.m {
            s.push_str(&format!(":m={m}"));
        }
        s.parse()
    }
}

#[derive(Debug, Args)]
struct EstimateArgs {
    #[command(flatten)]
    estimator: EstimatorArgs,
    /// One observation per line, or CSV rows without a header.
    #[arg(long)]
    input: PathBuf,
    /// mean (for mom, morm) or variance (for the pairwise estimators).
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, default_value_t = 0.001)]
    delta: f64,
    #[arg(long)]
    seed: Option<u64>,
    /// Subsample cap for the plug-in Hoeffding components.
    #[arg(long, default_value_t = COMPONENT_CAP)]
    component_cap: usize,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[command(flatten)]
    estimator: EstimatorArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.001)]
    delta: f64,
    /// Standard deviation, for mean estimators.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Hoeffding components, for pairwise estimators.
    #[arg(long)]
    sigma1_sq: Option<f64>,
    #[arg(long)]
    sigma2_sq: Option<f64>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed of every section.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Run only this section.
    #[arg(long)]
    section: Option<String>,
}

#[derive(Debug, Args)]
struct MetricLearnArgs {
    /// TOML file with a `[metric_learn]` table; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Points CSV; requires --pairs. Without it a synthetic set is used.
    #[arg(long, requires = "pairs")]
    points: Option<PathBuf>,
    /// Pair-label CSV of `i,j,label` rows.
    #[arg(long, requires = "points")]
    pairs: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    contamination: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    step_size: Option<f64>,
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TournamentArgs {
    /// TOML file with a `[tournament]` table; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// CSV of `z,y` rows. Without it a synthetic set is used.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    /// Candidate slopes, comma separated.
    #[arg(long, value_delimiter = ',')]
    slopes: Option<Vec<f64>>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Blocks of the second half; must be odd.
    #[arg(long)]
    k_prime: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Settings of `metric-learn`, as read from and written to TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricLearnSettings {
    pub points: Option<PathBuf>,
    pub pairs: Option<PathBuf>,
    pub n: usize,
    pub contamination: f64,
    pub k: usize,
    pub b: usize,
    pub steps: usize,
    pub step_size: f64,
    pub margin: f64,
    pub seed: Option<u64>,
}

impl Default for MetricLearnSettings {
    fn default() -> Self {
        MetricLearnSettings {
            points: None,
            pairs: None,
            n: 200,
            contamination: 0.0,
            k: 11,
            b: 3,
            steps: 500,
            step_size: 0.01,
            margin: 1.0,
            seed: None,
        }
    }
}

/// Settings of `tournament`, as read from and written to TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TournamentSettings {
    pub input: Option<PathBuf>,
    pub n: usize,
    pub slopes: Vec<f64>,
    pub beta: f64,
    pub r: f64,
    pub k: usize,
    pub k_prime: usize,
    pub seed: Option<u64>,
}

impl Default for TournamentSettings {
    fn default() -> Self {
        TournamentSettings {
            input: None,
            n: 400,
            slopes: vec![1.0, 1.5, 2.5],
            beta: 1.5,
            r: 0.01,
            k: 11,
            k_prime: 11,
            seed: None,
        }
    }
}

#[derive(Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct DemoFile {
    metric_learn: Option<MetricLearnSettings>,
    tournament: Option<TournamentSettings>,
}

fn read_demo_file(path: &Path) -> Result<DemoFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OutOfRange(_) | Error::InsufficientData(_) => EXIT_INFEASIBLE,
        _ => EXIT_BAD_INPUT,
    }
}

/// Run the CLI on `args` (program name first), writing to `out` and `err`.
/// Returns the exit code.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                EXIT_OK
            } else {
                let _ = write!(err, "{e}");
                EXIT_BAD_INPUT
            };
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::invalid("--threads must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::invalid(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(cli.command, out, err))),
        None => dispatch(cli.command, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let code = exit_code(&e);
            if code == EXIT_INFEASIBLE {
                let _ = writeln!(err, "infeasible: {e}");
            } else {
                let _ = writeln!(err, "error: {e}");
            }
            code
        }
    }
}

fn dispatch(command: Command, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    match command {
        Command::Estimate(a) => estimate(a, out, err),
        Command::Plan(a) => plan(a, out, err),
        Command::RiskTable(a) => experiments(ExperimentKind::Risk, a, out, err),
        Command::QuantileCurves(a) => experiments(ExperimentKind::Quantiles, a, out, err),
        Command::Coverage(a) => experiments(ExperimentKind::Coverage, a, out, err),
        Command::MetricLearn(a) => metric_learn(a, out, err),
        Command::Tournament(a) => tournament(a, out, err),
    }
}

/// Seeds are kept below 2^63 so that they fit a TOML integer.
fn resolve_seed(seed: Option<u64>, err: &mut (dyn Write + Send)) -> Result<u64> {
    match seed {
        Some(s) if s > i64::MAX as u64 => Err(Error::invalid(format!("seed {s} must be below 2^63"))),
        Some(s) => Ok(s),
        None => {
            let s = rand::random::<u64>() >> 1;
            let _ = writeln!(err, "seed={s} (generated)");
            Ok(s)
        }
    }
}

fn out_write(out: &mut (dyn Write + Send), text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io(Path::new("<stdout>"), e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn plan_line(spec: &EstimatorSpec, plan: &crate::bounds::EstimatorPlan) -> String {
    let mut s = format!(
        "estimator={spec} n={} delta={:e} K={}",
        plan.n, plan.delta, plan.k
    );
    match plan.m {
        Some(m) => s.push_str(&format!(" M={m}")),
        None => s.push_str(&format!(" B={}", plan.b)),
    }
    match plan.radius {
        Some(r) => s.push_str(&format!(" radius={r:.16e}")),
        None => s.push_str(" radius=none"),
    }
    s
}

fn sample_sd(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
}

fn estimate(a: EstimateArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    let spec = a.estimator.spec()?;
    let kernel = a
        .kernel
        .clone()
        .unwrap_or_else(|| if spec.is_pairwise() { "variance" } else { "mean" }.into());
    match (kernel.as_str(), spec.is_pairwise()) {
        ("mean", false) | ("variance", true) => {}
        ("mean", true) | ("variance", false) => {
            return Err(Error::invalid(format!(
                "kernel '{kernel}' does not fit estimator '{spec}' (mean estimators use 'mean', pairwise ones 'variance')"
            )))
        }
        _ => return Err(Error::invalid(format!("unknown kernel '{kernel}' (mean or variance)"))),
    }
    let seed = resolve_seed(a.seed, err)?;
    let _ = writeln!(
        err,
        "# resolved: estimator=\"{spec}\" input=\"{}\" kernel=\"{kernel}\" delta={:?} seed={seed} component_cap={}",
        a.input.display(),
        a.delta,
        a.component_cap
    );
    let x = read_points_csv(&a.input)?;
    let n = x.len();
    let root = Seed(seed);
    let (sigma, comps): (f64, Option<HoeffdingComponents>) = if spec.is_pairwise() {
        let c = estimate_components_capped(
            &x,
            &crate::kernels::VarianceKernel,
            a.component_cap,
            root.derive_str("components"),
        )?;
        (c.sigma_sq.sqrt(), Some(c))
    } else {
        (sample_sd(x.scalars()?), None)
    };
    let plan = spec.plan_with(n, a.delta, sigma, comps)?;
    let value = spec.estimate(&plan, &x, root.derive_str("estimate"))?;
    out_write(
        out,
        &format!("{} value={value:.16e} seed={seed}\n", plan_line(&spec, &plan)),
    )?;
    let mut human = format!("{spec} estimate of the {kernel} on n={n}: {value:.6}\n");
    human.push_str(&format!("  K={} blocks", plan.k));
    match plan.m {
        Some(m) => human.push_str(&format!(" of {m} sampled pairs\n")),
        None => human.push_str(&format!(" of size B={}\n", plan.b)),
    }
    match plan.radius {
        Some(r) => human.push_str(&format!(
            "  |estimate - truth| <= {r:.6} with probability >= {} (plug-in variance)\n",
            1.0 - a.delta
        )),
        None => human.push_str("  no certified radius for this estimator\n"),
    }
    out_write(out, &human)
}

fn plan(a: PlanArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    let spec = a.estimator.spec()?;
    let comps = match (a.sigma1_sq, a.sigma2_sq) {
        (Some(s1), Some(s2)) => Some(HoeffdingComponents::new(f64::NAN, s1, s2)),
        (None, None) => None,
        _ => {
            return Err(Error::invalid(
                "give both --sigma1-sq and --sigma2-sq, or neither",
            ))
        }
    };
    let _ = writeln!(
        err,
        "# resolved: estimator=\"{spec}\" n={} delta={:?} sigma={:?} sigma1_sq={:?} sigma2_sq={:?}",
        a.n, a.delta, a.sigma, a.sigma1_sq, a.sigma2_sq
    );
    let plan = spec.plan_with(a.n, a.delta, a.sigma, comps)?;
    out_write(out, &format!("{}\n", plan_line(&spec, &plan)))
}

fn experiments(
    kind: ExperimentKind,
    a: ExperimentArgs,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> Result<()> {
    let format: ReportFormat = a.format.parse()?;
    let configs = load_config(&a.config)?;
    let selected: Vec<_> = configs
        .into_iter()
        .filter(|c| c.kind == kind && a.section.as_ref().is_none_or(|s| *s == c.name))
        .collect();
    if selected.is_empty() {
        return Err(Error::invalid(format!(
            "{} has no {} sections{}",
            a.config.display(),
            kind.as_str(),
            a.section
                .as_ref()
                .map(|s| format!(" named '{s}'"))
                .unwrap_or_default()
        )));
    }
    create_dir(&a.out)?;
    let mut generated = None;
    for cfg in selected {
        let seed = match (a.seed.or(cfg.seed), generated) {
            (Some(s), _) => resolve_seed(Some(s), err)?,
            (None, Some(g)) => g,
            (None, None) => *generated.insert(resolve_seed(None, err)?),
        };
        write_file(
            &a.out.join(format!("{}.resolved.toml", cfg.name)),
            cfg.resolved_toml(seed).as_bytes(),
        )?;
        let report = run_experiment(&cfg, Seed(seed))?;
        let ext = match format {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        };
        write_report(&report, &a.out.join(format!("{}.{ext}", cfg.name)), format)?;
        out_write(out, &summary_table(&report))?;
    }
    Ok(())
}

fn metric_learn(
    a: MetricLearnArgs,
    out: &mut (dyn Write + Send),
    err: &mut (dyn Write + Send),
) -> Result<()> {
    let mut s = match &a.config {
        Some(p) => read_demo_file(p)?.metric_learn.unwrap_or_default(),
        None => MetricLearnSettings::default(),
    };
    if a.points.is_some() {
        s.points = a.points;
        s.pairs = a.pairs;
    }
    s.n = a.n.unwrap_or(s.n);
    s.contamination = a.contamination.unwrap_or(s.contamination);
    s.k = a.k.unwrap_or(s.k);
    s.b = a.b.unwrap_or(s.b);
    s.steps = a.steps.unwrap_or(s.steps);
    s.step_size = a.step_size.unwrap_or(s.step_size);
    s.margin = a.margin.unwrap_or(s.margin);
    let seed = resolve_seed(a.seed.or(s.seed), err)?;
    s.seed = Some(seed);
    if !(0.0..0.5).contains(&s.contamination) {
        return Err(Error::invalid(format!(
            "contamination={} must lie in [0, 0.5)",
            s.contamination
        )));
    }
    let root = Seed(seed);
    let (train, monitor) = match (&s.points, &s.pairs) {
        (Some(p), Some(q)) => {
            let d = PairLabelDataset::from_csv(p, q)?;
            (d.clone(), d)
        }
        (None, None) => {
            let clean = two_clusters(s.n, root.derive_str("data"));
            let dirty = contaminate_clusters(&clean, s.contamination, root.derive_str("contamination"))?;
            (dirty, clean)
        }
        _ => return Err(Error::invalid("points and pairs must be given together")),
    };
    let model = MahalanobisModel::identity(train.points.dim(), s.margin, s.step_size)?;
    create_dir(&a.out)?;
    let resolved = toml::to_string(&DemoFile {
        metric_learn: Some(s.clone()),
        tournament: None,
    })
    .map_err(|e| Error::parse("metric_learn settings", e.to_string()))?;
    write_file(&a.out.join("metric_learn.resolved.toml"), resolved.as_bytes())?;
    let run = moru_minibatch_gd_monitored(&train, &monitor, model, s.k, s.b, s.steps, root.derive_str("gd"))?;
    write_file(&a.out.join("trace.csv"), run.trace_csv().as_bytes())?;
    let mut matrix = String::new();
    for row in run.model.m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        matrix.push_str(&cells.join(","));
        matrix.push('\n');
    }
    write_file(&a.out.join("metric.csv"), matrix.as_bytes())?;
    out_write(
        out,
        &format!(
            "K={} B={} steps={} initial_risk={:.6e} final_risk={:.6e} spikes={}\n",
            s.k,
            s.b,
            s.steps,
            run.initial_risk,
            run.final_risk(),
            count_spikes(&run.full_risks(), 20, 3.0)
        ),
    )
}

fn tournament(a: TournamentArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    let mut s = match &a.config {
        Some(p) => read_demo_file(p)?.tournament.unwrap_or_default(),
        None => TournamentSettings::default(),
    };
    if a.input.is_some() {
        s.input = a.input;
    }
    s.n = a.n.unwrap_or(s.n);
    if let Some(v) = a.slopes {
        s.slopes = v;
    }
    s.beta = a.beta.unwrap_or(s.beta);
    s.r = a.r.unwrap_or(s.r);
    s.k = a.k.unwrap_or(s.k);
    s.k_prime = a.k_prime.unwrap_or(s.k_prime);
    let seed = resolve_seed(a.seed.or(s.seed), err)?;
    s.seed = Some(seed);
    let root = Seed(seed);
    let data: Sample = match &s.input {
        Some(p) => {
            let d = read_points_csv(p)?;
            if d.dim() != 2 {
                return Err(Error::invalid(format!(
                    "{} must have two columns z,y",
                    p.display()
                )));
            }
            d
        }
        None => regression_points(s.n, root.derive_str("data")),
    };
    let candidates: Vec<Candidate> = s
        .slopes
        .iter()
        .map(|&v| pairwise_regression_candidate(v))
        .collect();
    create_dir(&a.out)?;
    let resolved = toml::to_string(&DemoFile {
        metric_learn: None,
        tournament: Some(s.clone()),
    })
    .map_err(|e| Error::parse("tournament settings", e.to_string()))?;
    write_file(&a.out.join("tournament.resolved.toml"), resolved.as_bytes())?;
    let state = run_tournament(
        &data,
        &candidates,
        s.beta,
        s.r,
        s.k,
        s.k_prime,
        root.derive_str("split"),
    )?;
    let mut csv = String::from("f,g,phi,psi,allowed\n");
    for &(f, g, phi) in &state.distances {
        let m = state.matches.iter().find(|m| m.f == f && m.g == g);
        csv.push_str(&format!(
            "{},{},{phi:.16e},{},{}\n",
            candidates[f].name,
            candidates[g].name,
            m.map_or(String::new(), |m| format!("{:.16e}", m.psi)),
            m.is_some()
        ));
    }
    write_file(&a.out.join("matches.csv"), csv.as_bytes())?;
    out_write(out, &format!("champions={}\n", state.champion_names().join(";")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("mopm").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn plan_prints_block_parameters() {
        let (code, out, _) = run_args(&["plan", "--estimator", "moru", "--tau", "0.45", "--n", "1000"]);
        assert_eq!(code, 0);
        assert!(out.contains("K=1521 B=23"), "{out}");
        let (code, out, _) = run_args(&["plan", "--estimator", "mom", "--n", "1000"]);
        assert_eq!(code, 0);
        assert!(out.contains("K=7 B=142"), "{out}");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(
            run_args(&["plan", "--estimator", "mou", "--n", "50", "--delta", "1e-9"]).0,
            2
        );
        assert_eq!(run_args(&["plan", "--estimator", "nope", "--n", "50"]).0, 1);
        assert_eq!(run_args(&["plan", "--n", "50"]).0, 1);
        assert_eq!(run_args(&["frobnicate"]).0, 1);
        assert_eq!(run_args(&["--help"]).0, 0);
        assert_eq!(
            run_args(&["--threads", "0", "plan", "--estimator", "mom", "--n", "50"]).0,
            1
        );
    }

    #[test]
    fn demo_settings_round_trip() {
        let file = DemoFile {
            metric_learn: Some(MetricLearnSettings {
                seed: Some(3),
                ..Default::default()
            }),
            tournament: Some(TournamentSettings::default()),
        };
        let text = toml::to_string(&file).unwrap();
        let back: DemoFile = toml::from_str(&text).unwrap();
        assert_eq!(back.metric_learn, file.metric_learn);
        assert_eq!(back.tournament, file.tournament);
    }
}
