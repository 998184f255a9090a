use srlknn_core::evaluation::ambiguity_analysis;
use srlknn_core::evaluation::ThresholdMode;
use srlknn_core::ingest::{database_to_json, generate_synthetic, SynthConfig};
use srlknn_core::Point;

#[test]
fn survey_means_converge_to_the_model() {
    let cfg = SynthConfig {
        trajectory_count: 0,
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&cfg).unwrap();
    let bound = 3.0 * cfg.shadowing_std / (cfg.scans_per_rp as f64).sqrt();
    let mut within = 0;
    let mut total = 0;
    let mut bias = 0.0;
    for rp in data.database.points() {
        for (j, m) in rp.fingerprint.mean().iter().enumerate() {
            let dev = m - cfg.mean_rssi(&rp.location, j);
            assert!(dev.abs() < 2.0 * bound, "{dev} at {:?}", rp.location);
            bias += dev;
            within += usize::from(dev.abs() <= bound);
            total += 1;
        }
    }
    // a 3-sigma band holds 99.7% of the means
    assert!(within as f64 >= 0.99 * total as f64, "{within}/{total}");
    assert!((bias / total as f64).abs() < 0.05);
}

#[test]
fn noiseless_readings_fall_off_with_distance() {
    let cfg = SynthConfig {
        ap_positions: vec![Point::new(0.0, 0.0)],
        shadowing_std: 0.0,
        scans_per_rp: 1,
        trajectory_count: 0,
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&cfg).unwrap();
    let mut by_distance: Vec<(f64, f64)> = data
        .database
        .points()
        .iter()
        .map(|rp| {
            (
                rp.location.distance(&Point::new(0.0, 0.0)),
                cfg.mean_rssi(&rp.location, 0),
            )
        })
        .collect();
    by_distance.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in by_distance.windows(2) {
        if w[1].0 > w[0].0 {
            assert!(w[1].1 < w[0].1);
        }
    }
}

#[test]
fn planted_twins_show_up_as_ambiguous_points() {
    let cfg = SynthConfig {
        scans_per_rp: 30,
        trajectory_count: 0,
        ..SynthConfig::with_planted_twin(4)
    };
    let twin = cfg.twins[0];
    let data = generate_synthetic(&cfg).unwrap();
    let report = ambiguity_analysis(&data.database, ThresholdMode::Auto).unwrap();
    for center in [twin.source, twin.target] {
        let idx = data
            .database
            .points()
            .iter()
            .position(|rp| rp.location == center)
            .unwrap();
        let rp = &report.points[idx];
        assert!(rp.max_distance.unwrap() >= twin.separation());
    }
}

#[test]
fn fixed_seed_gives_identical_bytes() {
    let cfg = SynthConfig {
        scans_per_rp: 20,
        ..SynthConfig::with_planted_twin(7)
    };
    let a = generate_synthetic(&cfg).unwrap();
    let b = generate_synthetic(&cfg).unwrap();
    assert_eq!(database_to_json(&a.database), database_to_json(&b.database));
    assert_eq!(a.trajectories, b.trajectories);
}
