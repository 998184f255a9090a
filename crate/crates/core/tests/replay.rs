use srlknn_core::evaluation::{replay_all, PerturbationSpec};
use srlknn_core::fingerprint::numbered_aps;
use srlknn_core::ingest::{generate_synthetic, SynthConfig};
use srlknn_core::{
    replay_trajectory, Algorithm, FingerprintDatabase, LocalizerConfig, Point, PriorMode,
    ReplayOptions, RssiScan, Trajectory, TrajectoryStep,
};

const APS: [Point; 2] = [Point::new(-5.0, 3.0), Point::new(26.0, -4.0)];

fn model(p: Point) -> Vec<f64> {
    APS.iter()
        .map(|a| -40.0 - 30.0 * p.distance(a).log10())
        .collect()
}

/// RPs every meter along `y = 0`; the RP at x = 3 carries the fingerprint
/// of x = 15, so it is a twin 12 m from its source.
fn twin_line() -> FingerprintDatabase {
    FingerprintDatabase::from_scans(
        numbered_aps(2),
        (0..=20).map(|i| {
            let loc = Point::new(i as f64, 0.0);
            let radio = if i == 3 { Point::new(15.0, 0.0) } else { loc };
            (loc, vec![RssiScan::full(model(radio))])
        }),
        Some(1.0),
        Default::default(),
    )
    .unwrap()
}

fn walk() -> Trajectory {
    Trajectory::new(
        (0..50)
            .map(|t| {
                let truth = Point::new(5.0 + 0.3 * t as f64, 0.0);
                TrajectoryStep {
                    truth,
                    scans: vec![RssiScan::full(model(truth))],
                }
            })
            .collect(),
        1.0,
    )
}

#[test]
fn twin_fools_classic_but_not_the_soft_range_limit() {
    let db = twin_line();
    let traj = walk();
    let k1 = |algorithm| LocalizerConfig {
        k: 1,
        ..LocalizerConfig::with_algorithm(algorithm)
    };
    let classic =
        replay_trajectory(&db, &traj, &k1(Algorithm::ClassicKnn), PriorMode::Estimated).unwrap();
    let srl = replay_trajectory(&db, &traj, &k1(Algorithm::SrlKnn), PriorMode::Estimated).unwrap();
    assert!(classic.summary.max >= 12.0, "{}", classic.summary.max);
    assert!(classic.steps.iter().any(|s| s.neighbors == vec![3]));
    assert!(srl.summary.max <= 0.5, "{}", srl.summary.max);
    assert!(srl.steps.iter().all(|s| s.neighbors != vec![3]));
}

#[test]
fn replay_is_deterministic_and_zero_noise_matches_truth() {
    let data = generate_synthetic(&SynthConfig {
        scans_per_rp: 20,
        ..SynthConfig::with_planted_twin(2)
    })
    .unwrap();
    let cfg = LocalizerConfig::default();
    let spec = PerturbationSpec::isotropic(1.0, 9).unwrap();
    let opts = ReplayOptions::new(PriorMode::PerturbedTruth(spec));
    let a = replay_all(&data.database, &data.trajectories, &cfg, &opts).unwrap();
    let b = replay_all(&data.database, &data.trajectories, &cfg, &opts).unwrap();
    assert_eq!(a, b);

    let zero = ReplayOptions::new(PriorMode::PerturbedTruth(
        PerturbationSpec::isotropic(0.0, 9).unwrap(),
    ));
    let truth = ReplayOptions::new(PriorMode::Truth);
    assert_eq!(
        replay_all(&data.database, &data.trajectories, &cfg, &zero).unwrap(),
        replay_all(&data.database, &data.trajectories, &cfg, &truth).unwrap()
    );
}

#[test]
fn p80_agrees_with_the_cdf() {
    let data = generate_synthetic(&SynthConfig {
        scans_per_rp: 20,
        ..SynthConfig::default()
    })
    .unwrap();
    for algorithm in [
        Algorithm::ClassicKnn,
        Algorithm::SrlKnn,
        Algorithm::SrlKnnHistogram,
    ] {
        let r = replay_trajectory(
            &data.database,
            &data.trajectories[0],
            &LocalizerConfig::with_algorithm(algorithm),
            PriorMode::Estimated,
        )
        .unwrap();
        let cdf = r.cdf();
        assert!((cdf.quantile(0.8) - r.summary.p80).abs() < 1e-12);
        let pts = cdf.points();
        assert!(pts.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
        assert_eq!(pts.last().unwrap().1, 1.0);
    }
}
