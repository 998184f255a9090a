//! Random fixtures and a brute-force reference implementation of every
//! localizer's neighbor selection, written independently of the library.

#![allow(dead_code)]

use rand::Rng;
use srlknn_core::rng::{seeded_rng, SeededRng};
use srlknn_core::{
    Algorithm, FeatureKind, Fingerprint, FingerprintDatabase, LocalizerConfig, MissingValuePolicy,
    Point, RssiScan,
};

/// Integer-valued readings, as real scanners report them, with ties
/// between fingerprints likely.
pub fn random_scan(rng: &mut SeededRng, p: usize, missing_rate: f64) -> RssiScan {
    RssiScan::new(
        (0..p)
            .map(|_| {
                (!rng.random_bool(missing_rate)).then(|| f64::from(rng.random_range(-95i32..=-30)))
            })
            .collect(),
    )
}

/// Continuous readings: distance ties have probability zero.
pub fn continuous_scan(rng: &mut SeededRng, p: usize) -> RssiScan {
    RssiScan::full((0..p).map(|_| rng.random_range(-95.0..-30.0)))
}

pub fn continuous_db(seed: u64, m: usize, p: usize) -> FingerprintDatabase {
    let mut rng = seeded_rng(seed);
    let surveys: Vec<(Point, Vec<RssiScan>)> = (0..m)
        .map(|_| {
            let loc = Point::new(rng.random_range(0.0..30.0), rng.random_range(0.0..30.0));
            (loc, (0..3).map(|_| continuous_scan(&mut rng, p)).collect())
        })
        .collect();
    FingerprintDatabase::from_scans(
        srlknn_core::fingerprint::numbered_aps(p),
        surveys,
        Some(1.0),
        MissingValuePolicy::default(),
    )
    .unwrap()
}

pub fn continuous_query(rng: &mut SeededRng, p: usize) -> Fingerprint {
    srlknn_core::query_fingerprint(&[continuous_scan(rng, p)], MissingValuePolicy::default())
        .unwrap()
}

/// Random database with `m` points on a 30 m square, each surveyed with
/// 1 to 6 integer-valued scans.
pub fn random_db(seed: u64, m: usize, p: usize) -> FingerprintDatabase {
    let mut rng = seeded_rng(seed);
    let surveys: Vec<(Point, Vec<RssiScan>)> = (0..m)
        .map(|_| {
            let loc = Point::new(rng.random_range(0.0..30.0), rng.random_range(0.0..30.0));
            let s = rng.random_range(1..=6);
            (loc, (0..s).map(|_| random_scan(&mut rng, p, 0.1)).collect())
        })
        .collect();
    FingerprintDatabase::from_scans(
        srlknn_core::fingerprint::numbered_aps(p),
        surveys,
        Some(1.0),
        MissingValuePolicy::default(),
    )
    .unwrap()
}

pub fn random_query(rng: &mut SeededRng, p: usize) -> Fingerprint {
    let s = rng.random_range(1..=2);
    let scans: Vec<RssiScan> = (0..s).map(|_| random_scan(rng, p, 0.05)).collect();
    srlknn_core::query_fingerprint(&scans, MissingValuePolicy::default()).unwrap()
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt()
}

/// Ranks by descending value, ties to the lower index.
pub fn oracle_ranks(v: &[f64]) -> Vec<f64> {
    (0..v.len())
        .map(|j| {
            let above = (0..v.len())
                .filter(|&k| v[k] > v[j] || (v[k] == v[j] && k < j))
                .count();
            (above + 1) as f64
        })
        .collect()
}

pub fn oracle_pair_diffs(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 0..v.len() {
        for k in j + 1..v.len() {
            out.push(v[j] - v[k]);
        }
    }
    out
}

fn oracle_features(mean: &[f64], kind: FeatureKind) -> Vec<f64> {
    match kind {
        FeatureKind::Mean => mean.to_vec(),
        FeatureKind::Rank => oracle_ranks(mean),
        FeatureKind::PairDiff => oracle_pair_diffs(mean),
    }
}

pub fn oracle_feature_distances(
    db: &FingerprintDatabase,
    q: &Fingerprint,
    kind: FeatureKind,
) -> Vec<f64> {
    let qf = oracle_features(q.mean(), kind);
    db.points()
        .iter()
        .map(|rp| euclid(&qf, &oracle_features(rp.fingerprint.mean(), kind)))
        .collect()
}

pub fn oracle_histogram_distances(db: &FingerprintDatabase, q: &Fingerprint) -> Vec<f64> {
    db.points()
        .iter()
        .map(|rp| {
            let mut acc = 0.0;
            for (j, h) in rp.fingerprint.histogram().iter().enumerate() {
                let f = q.mean()[j];
                let total: u32 = h.counts().values().sum();
                if total == 0 {
                    acc += (f - rp.fingerprint.mean()[j]).powi(2);
                    continue;
                }
                for (&r, &c) in h.counts() {
                    acc += f64::from(c) / f64::from(total) * (f - f64::from(r)).powi(2);
                }
            }
            acc.sqrt()
        })
        .collect()
}

/// `W_i·D_i / ΣW` with `W = exp(min(d²/4σ², 700))`.
pub fn oracle_scaled(db: &FingerprintDatabase, raw: &[f64], prev: Point, sigma: f64) -> Vec<f64> {
    let w: Vec<f64> = db
        .points()
        .iter()
        .map(|rp| {
            let dx = rp.location.x - prev.x;
            let dy = rp.location.y - prev.y;
            ((dx * dx + dy * dy) / (4.0 * sigma * sigma))
                .min(700.0)
                .exp()
        })
        .collect();
    let sum: f64 = w.iter().sum();
    raw.iter().zip(&w).map(|(d, w)| w * d / sum).collect()
}

/// Full sort of candidate indices by `(distance, index)`, first `k` kept.
pub fn oracle_top_k(candidates: &[usize], dist: &[f64], k: usize) -> Vec<usize> {
    let mut idx = candidates.to_vec();
    idx.sort_by(|&a, &b| dist[a].partial_cmp(&dist[b]).unwrap().then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

/// Neighbor indices, nearest first, that `cfg` should select.
pub fn oracle_neighbors(
    db: &FingerprintDatabase,
    q: &Fingerprint,
    prev: Point,
    cfg: &LocalizerConfig,
) -> Vec<usize> {
    let all: Vec<usize> = (0..db.len()).collect();
    match cfg.algorithm {
        Algorithm::ClassicKnn | Algorithm::Wknn => {
            oracle_top_k(&all, &oracle_feature_distances(db, q, cfg.feature), cfg.k)
        }
        Algorithm::SrlKnn => {
            let raw = oracle_feature_distances(db, q, cfg.feature);
            oracle_top_k(&all, &oracle_scaled(db, &raw, prev, cfg.sigma), cfg.k)
        }
        Algorithm::SrlKnnHistogram => {
            let raw = oracle_histogram_distances(db, q);
            oracle_top_k(&all, &oracle_scaled(db, &raw, prev, cfg.sigma), cfg.k)
        }
        Algorithm::SrlKnnCombined => {
            let raw1 = oracle_feature_distances(db, q, cfg.feature);
            let d1 = if cfg.stage_one_penalty {
                oracle_scaled(db, &raw1, prev, cfg.sigma)
            } else {
                raw1
            };
            let first = oracle_top_k(&all, &d1, cfg.n);
            let raw2 = oracle_feature_distances(db, q, cfg.refine_feature);
            oracle_top_k(&first, &oracle_scaled(db, &raw2, prev, cfg.sigma), cfg.k)
        }
    }
}

/// Every localizer configuration the oracle covers.
pub fn all_configs(k: usize, n: usize, sigma: f64) -> Vec<LocalizerConfig> {
    let base = LocalizerConfig {
        k,
        n,
        sigma,
        ..LocalizerConfig::default()
    };
    let mut out = Vec::new();
    for feature in [FeatureKind::Mean, FeatureKind::Rank, FeatureKind::PairDiff] {
        for algorithm in [Algorithm::ClassicKnn, Algorithm::Wknn, Algorithm::SrlKnn] {
            out.push(LocalizerConfig {
                algorithm,
                feature,
                ..base
            });
        }
    }
    out.push(LocalizerConfig {
        algorithm: Algorithm::SrlKnnHistogram,
        ..base
    });
    for feature in [FeatureKind::Rank, FeatureKind::PairDiff] {
        for stage_one_penalty in [true, false] {
            out.push(LocalizerConfig {
                algorithm: Algorithm::SrlKnnCombined,
                feature,
                stage_one_penalty,
                ..base
            });
        }
    }
    out
}
