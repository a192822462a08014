//! Benchmark fixtures: seeded HetNet instances shared by the criterion
//! benches.

use hetassoc::matching::{log_gain_matrix, AssignmentProblem};
use hetassoc::scenario::generate_hetnet;
use hetassoc::{Network, ScenarioConfig, UserDist};

pub fn hetnet(n_macro: usize, picos_per_macro: usize, n_users: usize, snr_db: f64, seed: u64) -> Network {
    let mut cfg = ScenarioConfig::new(n_macro, picos_per_macro, n_users, snr_db, UserDist::UniInCell);
    cfg.seed = seed;
    generate_hetnet(&cfg).expect("valid scenario").network
}

/// Log-gain assignment problem of a square HetNet with `n_macro * 2` BSs.
pub fn assignment(n_macro: usize, seed: u64) -> AssignmentProblem {
    let net = hetnet(n_macro, 1, n_macro * 2, 15.0, seed);
    log_gain_matrix(&net).expect("square network")
}
