//! Seeded random instances that do not need a geometric scenario.
//!
//! SINR values are drawn directly in dB, rates from the standard rate vector,
//! and every limit is independently either slack or binding. Used by the
//! cross-solver tests where many small instances are needed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Limits, Matrix, ProblemInstance};

/// Per-SC rate choices, Mbps.
pub const RATE_CHOICES_MBPS: [f64; 5] = [30.0, 60.0, 90.0, 120.0, 150.0];

/// −5 dB as a linear ratio.
pub fn default_sinr_min() -> f64 {
    10f64.powf(-0.5)
}

/// Random instance with `r_ij = r_i` and SINR uniform in [−8, 25] dB.
pub fn random_instance(seed: u64, n_sc: usize, n_d: usize) -> ProblemInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rates: Vec<f64> = (0..n_sc)
        .map(|_| RATE_CHOICES_MBPS[rng.random_range(0..RATE_CHOICES_MBPS.len())] * 1e6)
        .collect();
    let sinr = Matrix::from_fn(n_sc, n_d, |_, _| 10f64.powf(rng.random_range(-8.0..25.0) / 10.0));
    let rate_matrix = Matrix::from_fn(n_sc, n_d, |i, _| rates[i]);
    let total_rate: f64 = rates.iter().sum();

    let backhaul_rate = if rng.random_bool(0.3) {
        2.0 * total_rate
    } else {
        (rng.random_range(0.2..1.1) * total_rate).round()
    };
    let probe = ProblemInstance::from_sinr(rate_matrix.clone(), sinr.clone(), Limits::uniform(n_d, 0.0, 0.0, 0, 0.0))
        .expect("positive SINR");
    let nfp_bandwidth = (0..n_d)
        .map(|j| {
            let column: f64 = (0..n_sc).map(|i| probe.bandwidth(i, j)).sum();
            if rng.random_bool(0.3) {
                column
            } else {
                (rng.random_range(0.1..0.7) * column).round()
            }
        })
        .collect();
    let nfp_links = (0..n_d)
        .map(|_| {
            if rng.random_bool(0.3) {
                n_sc
            } else {
                rng.random_range(1..=n_sc.max(1))
            }
        })
        .collect();
    let limits = Limits {
        backhaul_rate,
        nfp_bandwidth,
        nfp_links,
        sinr_min: default_sinr_min(),
    };
    ProblemInstance::from_sinr(rate_matrix, sinr, limits).expect("valid synthetic instance")
}
