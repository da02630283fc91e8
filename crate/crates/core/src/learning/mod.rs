//! Robust pairwise learning.
//!
//! - [`metric`]: Mahalanobis metric learning by median-block mini-batch
//!   gradient descent on a contrastive hinge loss.
//! - [`tournament`]: selection among finitely many candidates through
//!   median-of-U-statistics distances and matches.
//! - [`synthetic`]: seeded datasets for both.

pub mod metric;
pub mod synthetic;
pub mod tournament;

pub use metric::{
    count_spikes, moru_minibatch_gd, moru_minibatch_gd_monitored, pairwise_loss, pairwise_loss_gradient,
    read_points_csv, GdRun, MahalanobisModel, PairLabel, PairLabelDataset, PairLabels, TraceRow,
};
pub use tournament::{
    pairwise_regression_candidate, phi_distance_oracle, psi_match, psi_value, run_tournament, Candidate,
    MatchResult, TournamentState, Winner,
};
