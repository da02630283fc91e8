use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mean_estimators::median;
use crate::rng::Seed;
use crate::sample::Sample;
use crate::sampling::swor_blocks;

/// `d_M(x, y) = sqrt((x - y)^T M (x - y))` with `M` symmetric PSD, trained
/// with a contrastive hinge loss of the given margin.
#[derive(Debug, Clone, PartialEq)]
pub struct MahalanobisModel {
    pub m: DMatrix<f64>,
    pub margin: f64,
    pub step_size: f64,
}

impl MahalanobisModel {
    /// Identity metric in dimension `dim`.
    pub fn identity(dim: usize, margin: f64, step_size: f64) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim), margin, step_size)
    }

    pub fn new(m: DMatrix<f64>, margin: f64, step_size: f64) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::invalid("metric matrix must be square and non-empty"));
        }
        if (&m - m.transpose()).amax() > 1e-12 {
            return Err(Error::invalid("metric matrix must be symmetric"));
        }
        if !(margin > 0.0 && step_size > 0.0) {
            return Err(Error::invalid(format!(
                "margin={margin} and step_size={step_size} must be > 0"
            )));
        }
        Ok(MahalanobisModel { m, margin, step_size })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn dist_sq(&self, x: &[f64], y: &[f64]) -> f64 {
        let v = DVector::from_iterator(x.len(), x.iter().zip(y).map(|(a, b)| a - b));
        (v.transpose() * &self.m * &v)[(0, 0)]
    }

    /// Project onto the PSD cone by clipping negative eigenvalues at 0.
    /// Returns the smallest eigenvalue before clipping.
    pub fn project_psd(&mut self) -> f64 {
        let eig = SymmetricEigen::new(self.m.clone());
        let min = eig.eigenvalues.min();
        let clipped = eig.eigenvalues.map(|l| l.max(0.0));
        let q = &eig.eigenvectors;
        let m = q * DMatrix::from_diagonal(&clipped) * q.transpose();
        self.m = (&m + m.transpose()) * 0.5;
        min
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.m.clone()).eigenvalues.min()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairLabel {
    Similar,
    Dissimilar,
}

/// Similar pairs: `d^2`; dissimilar pairs: `max(0, margin - d^2)`.
pub fn pairwise_loss(model: &MahalanobisModel, x: &[f64], y: &[f64], label: PairLabel) -> f64 {
    let d2 = model.dist_sq(x, y);
    match label {
        PairLabel::Similar => d2,
        PairLabel::Dissimilar => (model.margin - d2).max(0.0),
    }
}

/// Gradient of [`pairwise_loss`] in `M`: `(x-y)(x-y)^T` for similar pairs,
/// its negative for dissimilar pairs inside the margin, and zero otherwise
/// (including exactly at the hinge).
pub fn pairwise_loss_gradient(
    model: &MahalanobisModel,
    x: &[f64],
    y: &[f64],
    label: PairLabel,
) -> DMatrix<f64> {
    let v = DVector::from_iterator(x.len(), x.iter().zip(y).map(|(a, b)| a - b));
    let outer = &v * v.transpose();
    match label {
        PairLabel::Similar => outer,
        PairLabel::Dissimilar if model.margin - model.dist_sq(x, y) > 0.0 => -outer,
        PairLabel::Dissimilar => DMatrix::zeros(x.len(), x.len()),
    }
}

/// How pairs are labeled.
#[derive(Debug, Clone, PartialEq)]
pub enum PairLabels {
    /// Pairs from the same class are similar, others dissimilar.
    Classes(Vec<usize>),
    /// Listed pairs only; unlisted pairs carry no loss.
    Explicit(HashMap<(usize, usize), PairLabel>),
}

/// Points plus symmetric similarity labels on pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PairLabelDataset {
    pub points: Sample,
    pub labels: PairLabels,
}

impl PairLabelDataset {
    pub fn from_classes(points: Sample, classes: Vec<usize>) -> Result<Self> {
        if classes.len() != points.len() {
            return Err(Error::invalid(format!(
                "{} class labels for {} points",
                classes.len(),
                points.len()
            )));
        }
        Ok(PairLabelDataset {
            points,
            labels: PairLabels::Classes(classes),
        })
    }

    /// Explicit `(i, j, label)` triples; `(i, j)` and `(j, i)` denote the same
    /// pair and must not disagree.
    pub fn from_pairs(points: Sample, pairs: &[(usize, usize, PairLabel)]) -> Result<Self> {
        let n = points.len();
        let mut map = HashMap::with_capacity(pairs.len());
        for &(i, j, l) in pairs {
            if i >= n || j >= n || i == j {
                return Err(Error::invalid(format!("bad pair ({i}, {j}) for n={n}")));
            }
            let key = (i.min(j), i.max(j));
            if let Some(prev) = map.insert(key, l) {
                if prev != l {
                    return Err(Error::invalid(format!("conflicting labels for pair ({i}, {j})")));
                }
            }
        }
        Ok(PairLabelDataset {
            points,
            labels: PairLabels::Explicit(map),
        })
    }

    /// Points from a headerless CSV (one row per point) and labeled pairs
    /// from a CSV of `i,j,label` rows with `label` 1 (similar) or 0.
    pub fn from_csv(points_path: &Path, pairs_path: &Path) -> Result<Self> {
        let points = read_points_csv(points_path)?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(std::fs::File::open(pairs_path).map_err(|e| Error::io(pairs_path, e))?);
        let mut pairs = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::parse(pairs_path.display().to_string(), e.to_string()))?;
            let bad = || {
                Error::parse(
                    format!("{}:{}", pairs_path.display(), line + 1),
                    "expected i,j,label",
                )
            };
            if rec.len() != 3 {
                return Err(bad());
            }
            let i: usize = rec[0].parse().map_err(|_| bad())?;
            let j: usize = rec[1].parse().map_err(|_| bad())?;
            let l = match &rec[2] {
                "1" => PairLabel::Similar,
                "0" => PairLabel::Dissimilar,
                _ => return Err(bad()),
            };
            pairs.push((i, j, l));
        }
        Self::from_pairs(points, &pairs)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn label(&self, i: usize, j: usize) -> Option<PairLabel> {
        if i == j {
            return None;
        }
        match &self.labels {
            PairLabels::Classes(c) => Some(if c[i] == c[j] {
                PairLabel::Similar
            } else {
                PairLabel::Dissimilar
            }),
            PairLabels::Explicit(map) => map.get(&(i.min(j), i.max(j))).copied(),
        }
    }

    /// Average loss over the pairs of `idx` (a U-statistic of the loss).
    pub fn block_risk(&self, model: &MahalanobisModel, idx: &[usize]) -> f64 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                if let Some(l) = self.label(i, j) {
                    sum += pairwise_loss(model, self.points.point(i), self.points.point(j), l);
                }
                count += 1;
            }
        }
        sum / count.max(1) as f64
    }

    /// Average gradient over the pairs of `idx`.
    pub fn block_gradient(&self, model: &MahalanobisModel, idx: &[usize]) -> DMatrix<f64> {
        let d = model.dim();
        let mut g = DMatrix::zeros(d, d);
        let mut count = 0usize;
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                if let Some(l) = self.label(i, j) {
                    g += pairwise_loss_gradient(model, self.points.point(i), self.points.point(j), l);
                }
                count += 1;
            }
        }
        g / count.max(1) as f64
    }

    /// Average loss over all pairs.
    pub fn full_risk(&self, model: &MahalanobisModel) -> f64 {
        let all: Vec<usize> = (0..self.len()).collect();
        self.block_risk(model, &all)
    }
}

/// Points from a CSV file with one row per point, no header and `#`
/// comment lines.
pub fn read_points_csv(path: &Path) -> Result<Sample> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(std::fs::File::open(path).map_err(|e| Error::io(path, e))?);
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(format!("{}:{}", path.display(), line + 1), e.to_string()))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse(path.display().to_string(), "no points"));
    }
    Sample::from_rows(&rows)
}

/// One gradient step of the trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    /// Risk of the selected (median) block before the step.
    pub block_risk: f64,
    /// Risk of the monitored data after the step.
    pub full_risk: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdRun {
    pub model: MahalanobisModel,
    pub initial_risk: f64,
    pub trace: Vec<TraceRow>,
    /// Smallest eigenvalue of `M` before each projection.
    pub min_eigenvalues: Vec<f64>,
}

impl GdRun {
    pub fn final_risk(&self) -> f64 {
        self.trace.last().map_or(self.initial_risk, |r| r.full_risk)
    }

    pub fn full_risks(&self) -> Vec<f64> {
        self.trace.iter().map(|r| r.full_risk).collect()
    }

    /// Trace as CSV with columns `step,block_risk,full_risk`; step 0 is the
    /// initial model.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,block_risk,full_risk\n");
        out.push_str(&format!("0,,{:.16e}\n", self.initial_risk));
        for r in &self.trace {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                r.step, r.block_risk, r.full_risk
            ));
        }
        out
    }
}

/// Median-block mini-batch gradient descent.
///
/// At each step, `k` SWoR blocks of size `b` are drawn afresh (from
/// `seed.derive(step)`), the block whose pairwise risk is the median is
/// selected, `M` takes one gradient step on that block's risk and is
/// projected back onto the PSD cone. The trace records the full risk of
/// `data` after every step.
pub fn moru_minibatch_gd(
    data: &PairLabelDataset,
    model: MahalanobisModel,
    k: usize,
    b: usize,
    steps: usize,
    seed: Seed,
) -> Result<GdRun> {
    moru_minibatch_gd_monitored(data, data, model, k, b, steps, seed)
}

/// As [`moru_minibatch_gd`], but the trace records the risk of `monitor`
/// (for instance the clean version of a contaminated training set).
pub fn moru_minibatch_gd_monitored(
    data: &PairLabelDataset,
    monitor: &PairLabelDataset,
    mut model: MahalanobisModel,
    k: usize,
    b: usize,
    steps: usize,
    seed: Seed,
) -> Result<GdRun> {
    if b < 2 {
        return Err(Error::insufficient(format!(
            "block size B={b} cannot hold a pair"
        )));
    }
    if steps == 0 || k == 0 {
        return Err(Error::invalid("steps and K must be at least 1"));
    }
    if data.len() < b {
        return Err(Error::insufficient(format!(
            "{} points cannot fill blocks of size {b}",
            data.len()
        )));
    }
    if data.points.dim() != model.dim() || monitor.points.dim() != model.dim() {
        return Err(Error::invalid("data dimension does not match the metric"));
    }
    let initial_risk = monitor.full_risk(&model);
    let mut trace = Vec::with_capacity(steps);
    let mut min_eigenvalues = Vec::with_capacity(steps);
    for step in 1..=steps {
        let blocks = swor_blocks(data.len(), k, b, seed.derive(step as u64))?;
        let risks: Vec<f64> = blocks
            .blocks
            .par_iter()
            .map(|blk| data.block_risk(&model, blk))
            .collect();
        let med = median(&risks)?;
        let chosen = risks
            .iter()
            .position(|&r| r == med)
            .expect("median is an element");
        let grad = data.block_gradient(&model, &blocks.blocks[chosen]);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { step });
        }
        model.m -= grad * model.step_size;
        if model.m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient { step });
        }
        min_eigenvalues.push(model.project_psd());
        trace.push(TraceRow {
            step,
            block_risk: med,
            full_risk: monitor.full_risk(&model),
        });
    }
    Ok(GdRun {
        model,
        initial_risk,
        trace,
        min_eigenvalues,
    })
}

/// Number of steps `t` whose value exceeds `factor` times the lower median
/// of the `window` values before it (steps with a shorter history are
/// skipped).
pub fn count_spikes(values: &[f64], window: usize, factor: f64) -> usize {
    (window..values.len())
        .filter(|&t| {
            let m = median(&values[t - window..t]).expect("window is non-empty");
            values[t] > factor * m
        })
        .count()
}
