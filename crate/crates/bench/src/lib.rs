//! Fixtures shared by the benchmarks.

use srlknn_core::ingest::{generate_synthetic, SynthConfig};
use srlknn_core::rng::seeded_rng;
use srlknn_core::{query_fingerprint, Fingerprint, FingerprintDatabase, Point, Trajectory};

use rand::Rng;

pub struct Fixture {
    pub database: FingerprintDatabase,
    pub trajectories: Vec<Trajectory>,
    /// Single-scan query fingerprints with the position they were taken at.
    pub queries: Vec<(Fingerprint, Point)>,
}

/// Synthetic site of `width` x `height` meters on a 1 m grid with `aps`
/// randomly placed access points.
pub fn fixture(width: f64, height: f64, aps: usize, seed: u64) -> Fixture {
    let mut rng = seeded_rng(seed);
    let cfg = SynthConfig {
        width,
        height,
        ap_positions: (0..aps)
            .map(|_| Point::new(rng.random_range(0.0..width), rng.random_range(0.0..height)))
            .collect(),
        scans_per_rp: 20,
        trajectory_count: 2,
        steps_per_trajectory: 50,
        seed,
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&cfg).expect("valid benchmark config");
    let policy = data.database.missing_policy();
    let queries = data
        .trajectories
        .iter()
        .flat_map(|t| &t.steps)
        .map(|s| (query_fingerprint(&s.scans, policy).expect("query"), s.truth))
        .collect();
    Fixture {
        database: data.database,
        trajectories: data.trajectories,
        queries,
    }
}
