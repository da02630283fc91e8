//! Seeded synthetic datasets for the learning procedures.

use rand_distr::{Distribution, Normal};

use super::metric::{PairLabelDataset, PairLabels};
use crate::distributions::{draw, LawSpec};
use crate::error::Result;
use crate::rng::Seed;
use crate::sample::Sample;
use crate::sampling::swor_blocks;

/// Half-distance between the two cluster centers along the first axis.
pub const CLUSTER_OFFSET: f64 = 1.5;
/// Standard deviation along the uninformative second axis.
pub const ACROSS_SD: f64 = 1.0;
/// Position of contaminated points along the first axis (signed by class).
pub const OUTLIER_OFFSET: f64 = 30.0;

/// Two classes of `n` points in the plane (alternating labels): the first
/// coordinate is `-1.5` or `+1.5` plus `N(0, 0.3^2)` noise, the second is
/// pure `N(0, 1)` noise. Pairs from the same class are similar.
pub fn two_clusters(n: usize, seed: Seed) -> PairLabelDataset {
    let mut rng = seed.rng();
    let along = Normal::new(0.0, 0.3).expect("valid normal");
    let across = Normal::new(0.0, ACROSS_SD).expect("valid normal");
    let mut rows = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for i in 0..n {
        let c = i % 2;
        let center = if c == 0 { -CLUSTER_OFFSET } else { CLUSTER_OFFSET };
        rows.push(vec![center + along.sample(&mut rng), across.sample(&mut rng)]);
        classes.push(c);
    }
    let points = Sample::from_rows(&rows).expect("rows share a dimension");
    PairLabelDataset::from_classes(points, classes).expect("one label per point")
}

/// Move `floor(fraction * n)` points of a [`two_clusters`] dataset to
/// `-30` (class 0) or `+30` (class 1) along the first axis; labels are kept.
pub fn contaminate_clusters(data: &PairLabelDataset, fraction: f64, seed: Seed) -> Result<PairLabelDataset> {
    let n = data.len();
    let m = (fraction * n as f64).floor() as usize;
    let mut out = data.clone();
    if m == 0 {
        return Ok(out);
    }
    let picked = swor_blocks(n, 1, m, seed)?;
    let mut flat = out.points.clone().into_flat();
    let dim = out.points.dim();
    for &i in &picked.blocks[0] {
        let negative = match &data.labels {
            PairLabels::Classes(c) => c[i] == 0,
            PairLabels::Explicit(_) => data.points.point(i)[0] < 0.0,
        };
        flat[i * dim] = if negative { -OUTLIER_OFFSET } else { OUTLIER_OFFSET };
    }
    out.points = Sample::from_flat(dim, flat)?;
    Ok(out)
}

/// `n` points `(z, y)` with `z ~ N(0, 1)` and `y = z + 0.5 e`, `e` Student
/// with 3 degrees of freedom. The pairwise regression risk of slope `s` is
/// `2 (1 - s)^2 + 1.5`, minimized at `s = 1`.
pub fn regression_points(n: usize, seed: Seed) -> Sample {
    let z = draw(LawSpec::normal(), n, seed.derive(0));
    let e = draw(LawSpec::student3(), n, seed.derive(1));
    let z = z.scalars().expect("scalar draw");
    let e = e.scalars().expect("scalar draw");
    let rows: Vec<Vec<f64>> = z.iter().zip(e).map(|(&z, &e)| vec![z, z + 0.5 * e]).collect();
    Sample::from_rows(&rows).expect("rows share a dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clusters_are_balanced_and_seeded() {
        let d = two_clusters(200, Seed(1));
        assert_eq!(d.len(), 200);
        assert_eq!(d, two_clusters(200, Seed(1)));
        let left = d.points.points().filter(|p| p[0] < 0.0).count();
        assert_eq!(left, 100);
    }

    #[test]
    fn contamination_moves_five_percent() {
        let d = two_clusters(200, Seed(1));
        let c = contaminate_clusters(&d, 0.05, Seed(2)).unwrap();
        let moved = c.points.points().filter(|p| p[0].abs() == OUTLIER_OFFSET).count();
        assert_eq!(moved, 10);
        assert_eq!(c.labels, d.labels);
    }
}
