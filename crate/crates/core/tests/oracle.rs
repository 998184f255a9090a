mod common;

use common::*;
use rand::Rng;
use srlknn_core::rng::seeded_rng;
use srlknn_core::{locate, Point};

#[test]
fn every_localizer_matches_brute_force_selection() {
    let mut rng = seeded_rng(11);
    for db_no in 0..100u64 {
        let m = rng.random_range(12..=200);
        let p = rng.random_range(2..=8);
        let db = random_db(1000 + db_no, m, p);
        let k = rng.random_range(1..=5);
        let n = rng.random_range(k + 1..=k + 6);
        let sigma = rng.random_range(1.0..20.0);
        for _ in 0..3 {
            let q = random_query(&mut rng, p);
            let prev = Point::new(rng.random_range(0.0..30.0), rng.random_range(0.0..30.0));
            for cfg in all_configs(k, n, sigma) {
                let est = locate(&db, &q, Some(prev), &cfg).unwrap();
                assert_eq!(
                    est.neighbor_indices(),
                    oracle_neighbors(&db, &q, prev, &cfg),
                    "db {db_no}, {:?}/{:?}",
                    cfg.algorithm,
                    cfg.feature
                );
            }
        }
    }
}

#[test]
fn derived_features_match_reference_definitions() {
    let mut rng = seeded_rng(5);
    for _ in 0..200 {
        let p = rng.random_range(1..=10);
        let q = random_query(&mut rng, p);
        let ranks: Vec<f64> = q.ranks().iter().map(|&r| f64::from(r)).collect();
        assert_eq!(ranks, oracle_ranks(q.mean()));
        assert_eq!(q.pair_diffs(), oracle_pair_diffs(q.mean()).as_slice());
    }
}
