use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{block_ustat, FnKernel};
use crate::mean_estimators::median;
use crate::rng::Seed;
use crate::sample::Sample;
use crate::sampling::{contiguous_blocks, shuffle};

type LossFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

/// A decision function, represented by its pairwise loss
/// `l(f, (x, x'))`, symmetric and non-negative. Its kernel is `H_f = sqrt(l)`.
#[derive(Clone)]
pub struct Candidate {
    pub name: String,
    loss: Arc<LossFn>,
}

impl Candidate {
    pub fn new(
        name: impl Into<String>,
        loss: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Candidate {
            name: name.into(),
            loss: Arc::new(loss),
        }
    }

    pub fn loss(&self, x: &[f64], y: &[f64]) -> f64 {
        (self.loss)(x, y)
    }

    pub fn h(&self, x: &[f64], y: &[f64]) -> f64 {
        self.loss(x, y).sqrt()
    }
}

impl fmt::Debug for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Candidate").field("name", &self.name).finish()
    }
}

/// Pairwise regression candidate `z -> slope * z` on points `(z, y)`, with
/// loss `((y - y') - slope (z - z'))^2`.
pub fn pairwise_regression_candidate(slope: f64) -> Candidate {
    Candidate::new(format!("slope={slope}"), move |a: &[f64], b: &[f64]| {
        let r = (a[1] - b[1]) - slope * (a[0] - b[0]);
        r * r
    })
}

fn median_of_partition_ustats(s: &Sample, k: usize, h: impl Fn(&[f64], &[f64]) -> f64) -> Result<f64> {
    if k == 0 || s.len() / k < 2 {
        return Err(Error::insufficient(format!(
            "{} points cannot form {k} blocks of at least 2",
            s.len()
        )));
    }
    let kernel = FnKernel::new("tournament", h);
    let blocks = contiguous_blocks(s.len(), k)?;
    let values = blocks
        .iter()
        .map(|b| block_ustat(s, b, &kernel))
        .collect::<Result<Vec<f64>>>()?;
    median(&values)
}

/// `Phi_S(f, g)`: median over `k` contiguous blocks of `s` of the complete
/// U-statistic of `|H_f - H_g|`.
pub fn phi_distance_oracle(s: &Sample, f: &Candidate, g: &Candidate, k: usize) -> Result<f64> {
    median_of_partition_ustats(s, k, |x, y| (f.h(x, y) - g.h(x, y)).abs())
}

/// `Psi_S'(f, g)`: median over `k` contiguous blocks of `s` of the
/// U-statistic of `H_f^2 - H_g^2 = l(f, .) - l(g, .)`.
pub fn psi_value(s: &Sample, f: &Candidate, g: &Candidate, k: usize) -> Result<f64> {
    median_of_partition_ustats(s, k, |x, y| f.loss(x, y) - g.loss(x, y))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Winner {
    F,
    G,
}

/// `f` wins iff `Psi_S'(f, g) <= 0`.
pub fn psi_match(s: &Sample, f: &Candidate, g: &Candidate, k: usize) -> Result<Winner> {
    Ok(if psi_value(s, f, g, k)? <= 0.0 {
        Winner::F
    } else {
        Winner::G
    })
}

/// One allowed match between candidates `f < g` (indices into the list).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub f: usize,
    pub g: usize,
    pub phi: f64,
    pub psi: f64,
}

impl MatchResult {
    /// Candidates that lost this match: `f` when `psi > 0`, `g` when
    /// `psi < 0` (as `Psi(g, f) = -Psi(f, g)`), nobody on a tie.
    pub fn losers(&self) -> impl Iterator<Item = usize> {
        let f = (self.psi > 0.0).then_some(self.f);
        let g = (self.psi < 0.0).then_some(self.g);
        f.into_iter().chain(g)
    }
}

#[derive(Debug, Clone)]
pub struct TournamentState {
    pub candidates: Vec<Candidate>,
    /// Points of `S` and `S'` after the shuffle.
    pub split: (Sample, Sample),
    pub beta: f64,
    pub r: f64,
    /// `Phi_S` for every unordered pair `(f, g)`, `f < g`.
    pub distances: Vec<(usize, usize, f64)>,
    /// Pairs with `Phi_S >= beta * r`, with their outcome.
    pub matches: Vec<MatchResult>,
}

impl TournamentState {
    /// Indices of the candidates that lost no allowed match.
    pub fn champions(&self) -> Vec<usize> {
        let mut lost = vec![false; self.candidates.len()];
        for m in &self.matches {
            for l in m.losers() {
                lost[l] = true;
            }
        }
        (0..self.candidates.len()).filter(|&i| !lost[i]).collect()
    }

    pub fn champion_names(&self) -> Vec<&str> {
        self.champions()
            .into_iter()
            .map(|i| self.candidates[i].name.as_str())
            .collect()
    }
}

/// Run the tournament.
///
/// `data` is shuffled once with `seed` and split into halves `S` (first
/// half) and `S'`. Pairs with `Phi_S >= beta * r` (on `k` blocks of `S`) play
/// a match decided by `Psi_S'` on `k_prime` blocks of `S'`. `k_prime` must be
/// odd so that outcomes do not depend on which candidate is listed first.
pub fn run_tournament(
    data: &Sample,
    candidates: &[Candidate],
    beta: f64,
    r: f64,
    k: usize,
    k_prime: usize,
    seed: Seed,
) -> Result<TournamentState> {
    if candidates.is_empty() {
        return Err(Error::invalid("the candidate list is empty"));
    }
    if beta.is_nan() || beta <= 1.0 || r.is_nan() || r <= 0.0 {
        return Err(Error::invalid(format!(
            "need beta > 1 and r > 0, got beta={beta}, r={r}"
        )));
    }
    if k_prime.is_multiple_of(2) {
        return Err(Error::invalid(format!("K'={k_prime} must be odd")));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    shuffle(&mut order, &mut seed.rng());
    let half = data.len() / 2;
    let s = data.select(&order[..half]);
    let s_prime = data.select(&order[half..]);

    let n = candidates.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|f| (f + 1..n).map(move |g| (f, g))).collect();
    let outcomes = pairs
        .par_iter()
        .map(|&(f, g)| {
            let phi = phi_distance_oracle(&s, &candidates[f], &candidates[g], k)?;
            let psi = if phi >= beta * r {
                Some(psi_value(&s_prime, &candidates[f], &candidates[g], k_prime)?)
            } else {
                None
            };
            Ok((f, g, phi, psi))
        })
        .collect::<Result<Vec<_>>>()?;

    let distances = outcomes.iter().map(|&(f, g, phi, _)| (f, g, phi)).collect();
    let matches = outcomes
        .iter()
        .filter_map(|&(f, g, phi, psi)| psi.map(|psi| MatchResult { f, g, phi, psi }))
        .collect();
    Ok(TournamentState {
        candidates: candidates.to_vec(),
        split: (s, s_prime),
        beta,
        r,
        distances,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::synthetic::regression_points;

    fn constant(name: &str, c: f64) -> Candidate {
        Candidate::new(name, move |_: &[f64], _: &[f64]| c * c)
    }

    fn line(n: usize) -> Sample {
        Sample::scalar((0..n).map(|i| i as f64).collect())
    }

    #[test]
    fn phi_examples() {
        let s = line(12);
        let a = constant("a", 0.0);
        let b = constant("b", 2.5);
        assert_eq!(phi_distance_oracle(&s, &a, &a, 3).unwrap(), 0.0);
        assert_eq!(phi_distance_oracle(&s, &a, &b, 3).unwrap(), 2.5);
        let f = Candidate::new("f", |x: &[f64], y: &[f64]| (x[0] - y[0]).powi(2));
        let g = Candidate::new("g", |x: &[f64], y: &[f64]| 4.0 * (x[0] - y[0]).powi(2));
        // |H_f - H_g| = |x - y|; complete U-statistic on 0..4 is 10/6.
        let v = phi_distance_oracle(&line(4), &f, &g, 1).unwrap();
        assert!((v - 10.0 / 6.0).abs() < 1e-15);
        assert!(phi_distance_oracle(&line(5), &f, &g, 3).is_err());
    }

    #[test]
    fn psi_examples() {
        let s = line(9);
        let zero = constant("zero", 0.0);
        let one = constant("one", 1.0);
        assert_eq!(psi_match(&s, &zero, &zero, 3).unwrap(), Winner::F);
        assert_eq!(psi_match(&s, &zero, &one, 3).unwrap(), Winner::F);
        assert_eq!(psi_value(&s, &zero, &one, 3).unwrap(), -1.0);
        assert_eq!(psi_match(&s, &one, &zero, 3).unwrap(), Winner::G);
    }

    #[test]
    fn tournament_examples() {
        let data = line(40);
        let a = constant("a", 0.0);
        let b = constant("b", 1.0);
        let c = constant("c", 2.0);
        let single = run_tournament(&data, std::slice::from_ref(&b), 2.0, 1.0, 3, 3, Seed(1)).unwrap();
        assert_eq!(single.champions(), vec![0]);
        let all = [a.clone(), b.clone(), c.clone()];
        let none = run_tournament(&data, &all, 2.0, 10.0, 3, 3, Seed(1)).unwrap();
        assert!(none.matches.is_empty());
        assert_eq!(none.champions(), vec![0, 1, 2]);
        let full = run_tournament(&data, &all, 2.0, 0.1, 3, 3, Seed(1)).unwrap();
        assert_eq!(full.champion_names(), vec!["a"]);
        assert!(run_tournament(&data, &[], 2.0, 1.0, 3, 3, Seed(1)).is_err());
        assert!(run_tournament(&data, &all, 1.0, 1.0, 3, 3, Seed(1)).is_err());
        assert!(run_tournament(&data, &all, 2.0, 1.0, 3, 4, Seed(1)).is_err());
    }

    #[test]
    fn phi_is_symmetric_and_psi_antisymmetric() {
        let data = regression_points(200, Seed(3));
        let cands: Vec<Candidate> = [1.0, 1.3, 2.0].map(pairwise_regression_candidate).to_vec();
        for f in &cands {
            for g in &cands {
                let fg = phi_distance_oracle(&data, f, g, 5).unwrap();
                assert_eq!(fg, phi_distance_oracle(&data, g, f, 5).unwrap());
                let p = psi_value(&data, f, g, 5).unwrap();
                assert_eq!(p, -psi_value(&data, g, f, 5).unwrap());
                if p < 0.0 {
                    assert_eq!(psi_match(&data, g, f, 5).unwrap(), Winner::G);
                }
            }
        }
    }

    #[test]
    fn champions_do_not_depend_on_order() {
        let data = regression_points(300, Seed(9));
        let cands: Vec<Candidate> = [1.0, 1.2, 1.6, 2.5].map(pairwise_regression_candidate).to_vec();
        let names = |st: &TournamentState| {
            let mut v: Vec<String> = st.champion_names().into_iter().map(String::from).collect();
            v.sort();
            v
        };
        let base = names(&run_tournament(&data, &cands, 1.5, 0.01, 5, 5, Seed(4)).unwrap());
        let mut rev = cands.clone();
        rev.reverse();
        assert_eq!(
            names(&run_tournament(&data, &rev, 1.5, 0.01, 5, 5, Seed(4)).unwrap()),
            base
        );
        rev.swap(0, 2);
        assert_eq!(
            names(&run_tournament(&data, &rev, 1.5, 0.01, 5, 5, Seed(4)).unwrap()),
            base
        );
    }
}
