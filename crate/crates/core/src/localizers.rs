//! Position estimators.
//!
//! Every localizer ranks the reference points by some fingerprint distance,
//! keeps the `k` closest (ties broken by ascending reference point index) and
//! turns their locations into one estimate:
//!
//! | algorithm          | distance                          | location           |
//! |--------------------|-----------------------------------|--------------------|
//! | `ClassicKnn`       | Euclidean over the chosen feature | unweighted mean    |
//! | `Wknn`             | Euclidean over the chosen feature | inverse distance   |
//! | `SrlKnn`           | penalty-scaled Euclidean          | inverse distance   |
//! | `SrlKnnHistogram`  | penalty-scaled histogram distance | inverse distance   |
//! | `SrlKnnCombined`   | two stages, see below             | inverse distance   |
//!
//! The combined localizer keeps `n` candidates by penalty-scaled distance over
//! the rank or pair-difference feature, then re-ranks those by penalty-scaled
//! distance over the mean feature and keeps `k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::{FeatureKind, Fingerprint, FingerprintDatabase, MissingValuePolicy};
use crate::geometry::{centroid, Point};
use crate::metrics::{
    euclidean_distance, histogram_distance, scale_distances, unscaled_records, DistanceRecord,
    PenaltyParams,
};

/// Distances below this are treated as this value in inverse weighting.
pub const MIN_WEIGHT_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    ClassicKnn,
    Wknn,
    SrlKnn,
    SrlKnnHistogram,
    SrlKnnCombined,
}

impl Algorithm {
    pub fn uses_prior(&self) -> bool {
        matches!(
            self,
            Algorithm::SrlKnn | Algorithm::SrlKnnHistogram | Algorithm::SrlKnnCombined
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ClassicKnn => "classic_knn",
            Algorithm::Wknn => "wknn",
            Algorithm::SrlKnn => "srl_knn",
            Algorithm::SrlKnnHistogram => "srl_knn_histogram",
            Algorithm::SrlKnnCombined => "srl_knn_combined",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "classic_knn" => Algorithm::ClassicKnn,
            "wknn" => Algorithm::Wknn,
            "srl_knn" => Algorithm::SrlKnn,
            "srl_knn_histogram" => Algorithm::SrlKnnHistogram,
            "srl_knn_combined" => Algorithm::SrlKnnCombined,
            other => return Err(format!("unknown algorithm {other:?}")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizerConfig {
    pub algorithm: Algorithm,
    /// Number of neighbors averaged into the estimate.
    pub k: usize,
    /// First-stage candidate count of the combined localizer.
    pub n: usize,
    /// Soft range scale in meters.
    pub sigma: f64,
    /// Distance feature; for the combined localizer, the first-stage feature.
    pub feature: FeatureKind,
    /// Second-stage feature of the combined localizer.
    pub refine_feature: FeatureKind,
    /// Whether the first combined stage ranks by penalty-scaled distances
    /// (`true`) or raw ones.
    pub stage_one_penalty: bool,
    /// Applied when turning query scans into a fingerprint.
    pub missing_policy: MissingValuePolicy,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::SrlKnn,
            k: 3,
            n: 7,
            sigma: 2.0,
            feature: FeatureKind::Mean,
            refine_feature: FeatureKind::Mean,
            stage_one_penalty: true,
            missing_policy: MissingValuePolicy::default(),
        }
    }
}

impl LocalizerConfig {
    pub fn with_algorithm(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub rp_index: usize,
    /// Distance the neighbor was selected and weighted by.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub location: Point,
    pub neighbors: Vec<Neighbor>,
    pub algorithm: Algorithm,
}

impl Estimate {
    pub fn neighbor_indices(&self) -> Vec<usize> {
        self.neighbors.iter().map(|n| n.rp_index).collect()
    }
}

fn validate(db: &FingerprintDatabase, query: &Fingerprint, k: usize) -> Result<()> {
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    if query.ap_count() != db.ap_count() {
        return Err(Error::DimensionMismatch {
            left: query.ap_count(),
            right: db.ap_count(),
        });
    }
    if k == 0 || k > db.len() {
        return Err(Error::InvalidK { k, m: db.len() });
    }
    Ok(())
}

/// Raw feature distance from the query to every reference point.
pub fn feature_distances(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    feature: FeatureKind,
) -> Result<Vec<f64>> {
    let q = query.features(feature);
    db.points()
        .iter()
        .map(|rp| euclidean_distance(&q, &rp.fingerprint.features(feature)))
        .collect()
}

/// Histogram distance from the query means to every reference point.
pub fn histogram_distances(db: &FingerprintDatabase, query: &Fingerprint) -> Result<Vec<f64>> {
    db.points()
        .iter()
        .map(|rp| histogram_distance(query.mean(), &rp.fingerprint))
        .collect()
}

/// Penalty-scaled records for a set of raw distances over the whole database.
pub fn penalized_records(
    db: &FingerprintDatabase,
    raw: &[f64],
    params: &PenaltyParams,
) -> Result<Vec<DistanceRecord>> {
    let locations: Vec<Point> = db.points().iter().map(|rp| rp.location).collect();
    scale_distances(raw, &locations, params)
}

/// The `k` records with the smallest scaled distance, ascending; equal
/// distances keep the lower reference point index first.
pub fn select_nearest(mut records: Vec<DistanceRecord>, k: usize) -> Vec<DistanceRecord> {
    let by_distance = |a: &DistanceRecord, b: &DistanceRecord| {
        a.scaled_distance
            .total_cmp(&b.scaled_distance)
            .then(a.rp_index.cmp(&b.rp_index))
    };
    if k < records.len() {
        records.select_nth_unstable_by(k, by_distance);
        records.truncate(k);
    }
    records.sort_by(by_distance);
    records
}

fn neighbors_of(records: &[DistanceRecord]) -> Vec<Neighbor> {
    records
        .iter()
        .map(|r| Neighbor {
            rp_index: r.rp_index,
            distance: r.scaled_distance,
        })
        .collect()
}

/// Inverse-distance weighted mean of the neighbor locations.
///
/// If any neighbor sits at distance zero, the estimate is the plain mean of
/// all zero-distance neighbors.
pub fn inverse_distance_location(db: &FingerprintDatabase, neighbors: &[Neighbor]) -> Point {
    let exact: Vec<&Point> = neighbors
        .iter()
        .filter(|n| n.distance == 0.0)
        .map(|n| &db.points()[n.rp_index].location)
        .collect();
    if let Some(c) = centroid(exact) {
        return c;
    }
    let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
    for n in neighbors {
        let w = 1.0 / n.distance.max(MIN_WEIGHT_DISTANCE);
        let l = db.points()[n.rp_index].location;
        sx += w * l.x;
        sy += w * l.y;
        sw += w;
    }
    Point::new(sx / sw, sy / sw)
}

fn mean_location(db: &FingerprintDatabase, neighbors: &[Neighbor]) -> Point {
    centroid(neighbors.iter().map(|n| &db.points()[n.rp_index].location))
        .expect("at least one neighbor")
}

fn penalty(cfg: &LocalizerConfig, prev: Point) -> Result<PenaltyParams> {
    PenaltyParams::new(prev, cfg.sigma)
}

/// Unweighted mean of the `k` nearest reference points by feature distance.
pub fn locate_classic_knn(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    cfg: &LocalizerConfig,
) -> Result<Estimate> {
    validate(db, query, cfg.k)?;
    let raw = feature_distances(db, query, cfg.feature)?;
    let neighbors = neighbors_of(&select_nearest(unscaled_records(&raw), cfg.k));
    Ok(Estimate {
        location: mean_location(db, &neighbors),
        neighbors,
        algorithm: Algorithm::ClassicKnn,
    })
}

/// Inverse-distance weighted mean of the `k` nearest by feature distance.
pub fn locate_wknn(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    cfg: &LocalizerConfig,
) -> Result<Estimate> {
    validate(db, query, cfg.k)?;
    let raw = feature_distances(db, query, cfg.feature)?;
    let neighbors = neighbors_of(&select_nearest(unscaled_records(&raw), cfg.k));
    Ok(Estimate {
        location: inverse_distance_location(db, &neighbors),
        neighbors,
        algorithm: Algorithm::Wknn,
    })
}

/// Soft range limited KNN over the configured feature.
pub fn locate_srl_knn(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    prev: Point,
    cfg: &LocalizerConfig,
) -> Result<Estimate> {
    validate(db, query, cfg.k)?;
    let params = penalty(cfg, prev)?;
    let raw = feature_distances(db, query, cfg.feature)?;
    let records = penalized_records(db, &raw, &params)?;
    let neighbors = neighbors_of(&select_nearest(records, cfg.k));
    Ok(Estimate {
        location: inverse_distance_location(db, &neighbors),
        neighbors,
        algorithm: Algorithm::SrlKnn,
    })
}

/// Soft range limited KNN over the histogram distance. The query features
/// are the means of its scans.
pub fn locate_srl_histogram(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    prev: Point,
    cfg: &LocalizerConfig,
) -> Result<Estimate> {
    validate(db, query, cfg.k)?;
    let params = penalty(cfg, prev)?;
    let raw = histogram_distances(db, query)?;
    let records = penalized_records(db, &raw, &params)?;
    let neighbors = neighbors_of(&select_nearest(records, cfg.k));
    Ok(Estimate {
        location: inverse_distance_location(db, &neighbors),
        neighbors,
        algorithm: Algorithm::SrlKnnHistogram,
    })
}

/// Two-stage soft range limited KNN: `n` candidates by the configured
/// (rank or pair-difference) feature, refined to `k` by the mean feature.
pub fn locate_srl_combined(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    prev: Point,
    cfg: &LocalizerConfig,
) -> Result<Estimate> {
    validate(db, query, cfg.k)?;
    if !(cfg.k < cfg.n && cfg.n <= db.len()) {
        return Err(Error::InvalidStageSizes {
            k: cfg.k,
            n: cfg.n,
            m: db.len(),
        });
    }
    if cfg.feature == FeatureKind::Mean {
        return Err(Error::InvalidFeature {
            feature: cfg.feature.name(),
            context: "the first combined stage",
        });
    }
    let params = penalty(cfg, prev)?;

    let raw_first = feature_distances(db, query, cfg.feature)?;
    let first = if cfg.stage_one_penalty {
        penalized_records(db, &raw_first, &params)?
    } else {
        unscaled_records(&raw_first)
    };
    let candidates = select_nearest(first, cfg.n);

    let raw_refine = feature_distances(db, query, cfg.refine_feature)?;
    let refine = penalized_records(db, &raw_refine, &params)?;
    let refined: Vec<DistanceRecord> = candidates.iter().map(|c| refine[c.rp_index]).collect();
    let neighbors = neighbors_of(&select_nearest(refined, cfg.k));
    Ok(Estimate {
        location: inverse_distance_location(db, &neighbors),
        neighbors,
        algorithm: Algorithm::SrlKnnCombined,
    })
}

/// Runs the configured localizer. Soft range limited algorithms need a
/// previous position.
pub fn locate(
    db: &FingerprintDatabase,
    query: &Fingerprint,
    prev: Option<Point>,
    cfg: &LocalizerConfig,
) -> Result<Estimate> {
    let need_prior = || prev.ok_or(Error::MissingPrior(cfg.algorithm.name()));
    match cfg.algorithm {
        Algorithm::ClassicKnn => locate_classic_knn(db, query, cfg),
        Algorithm::Wknn => locate_wknn(db, query, cfg),
        Algorithm::SrlKnn => locate_srl_knn(db, query, need_prior()?, cfg),
        Algorithm::SrlKnnHistogram => locate_srl_histogram(db, query, need_prior()?, cfg),
        Algorithm::SrlKnnCombined => locate_srl_combined(db, query, need_prior()?, cfg),
    }
}
