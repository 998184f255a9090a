//! Fingerprint distances and the soft range limiting penalty.
//!
//! The penalty for a reference point at physical distance `d` from the
//! previous position is `W = exp(d² / 4σ²)`. A scaled distance is
//! `W·D / ΣW`, where the sum runs over every reference point of the
//! database for the current query.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::Fingerprint;
use crate::geometry::Point;

/// Largest penalty exponent evaluated; larger exponents are clamped.
pub const MAX_PENALTY_EXPONENT: f64 = 700.0;

/// Previous position and range scale of the soft range limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub prev_location: Point,
    /// Largest plausible displacement between two samples, `v_max·Δt`.
    pub sigma: f64,
}

impl PenaltyParams {
    pub fn new(prev_location: Point, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidSigma(sigma));
        }
        if !prev_location.is_finite() {
            return Err(Error::ConfigMismatch(format!(
                "previous location ({}, {}) is not finite",
                prev_location.x, prev_location.y
            )));
        }
        Ok(Self {
            prev_location,
            sigma,
        })
    }

    fn exponent(&self, rp_location: &Point) -> f64 {
        let d2 = rp_location.distance_squared(&self.prev_location);
        (d2 / (4.0 * self.sigma * self.sigma)).min(MAX_PENALTY_EXPONENT)
    }
}

/// Distances of one reference point for one query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRecord {
    pub rp_index: usize,
    pub raw_distance: f64,
    pub penalty_weight: f64,
    pub scaled_distance: f64,
}

fn check_dims(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { left, right });
    }
    Ok(())
}

/// Euclidean distance between two feature vectors.
pub fn euclidean_distance(query: &[f64], rp: &[f64]) -> Result<f64> {
    check_dims(query.len(), rp.len())?;
    Ok(query
        .iter()
        .zip(rp)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Soft range penalty `exp(d² / 4σ²)` of a reference point.
pub fn penalty_weight(rp_location: &Point, params: &PenaltyParams) -> f64 {
    params.exponent(rp_location).exp()
}

/// Sum of penalty weights over a set of reference point locations.
pub fn penalty_weight_sum<'a>(
    locations: impl IntoIterator<Item = &'a Point>,
    params: &PenaltyParams,
) -> f64 {
    locations
        .into_iter()
        .map(|l| penalty_weight(l, params))
        .sum()
}

/// Penalty-scaled distance `W·D / ΣW`.
pub fn srl_distance(raw: f64, rp_location: &Point, params: &PenaltyParams, weight_sum: f64) -> f64 {
    penalty_weight(rp_location, params) * raw / weight_sum
}

/// Penalty-scaled histogram distance; same scaling as [`srl_distance`].
pub fn srl_histogram_distance(
    hist_dist: f64,
    rp_location: &Point,
    params: &PenaltyParams,
    weight_sum: f64,
) -> f64 {
    srl_distance(hist_dist, rp_location, params, weight_sum)
}

/// Applies the soft range penalty to a whole database worth of raw
/// distances at once. `raw[i]` belongs to `locations[i]`.
///
/// The normalizer is shared by every record. If the plain weight sum
/// overflows, weights are rescaled by the largest one first, which leaves
/// every scaled distance unchanged.
pub fn scale_distances(
    raw: &[f64],
    locations: &[Point],
    params: &PenaltyParams,
) -> Result<Vec<DistanceRecord>> {
    check_dims(raw.len(), locations.len())?;
    let exponents: Vec<f64> = locations.iter().map(|l| params.exponent(l)).collect();
    let weights: Vec<f64> = exponents.iter().map(|e| e.exp()).collect();
    let sum: f64 = weights.iter().sum();

    let scaled: Vec<f64> = if sum.is_finite() {
        raw.iter().zip(&weights).map(|(d, w)| w * d / sum).collect()
    } else {
        let top = exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let rel: Vec<f64> = exponents.iter().map(|e| (e - top).exp()).collect();
        let rel_sum: f64 = rel.iter().sum();
        raw.iter().zip(&rel).map(|(d, r)| r * d / rel_sum).collect()
    };

    Ok(raw
        .iter()
        .zip(weights.iter().zip(scaled))
        .enumerate()
        .map(|(i, (&d, (&w, s)))| DistanceRecord {
            rp_index: i,
            raw_distance: d,
            penalty_weight: w,
            scaled_distance: s,
        })
        .collect())
}

/// Records with the raw distance reused as the scaled one (no penalty).
pub fn unscaled_records(raw: &[f64]) -> Vec<DistanceRecord> {
    raw.iter()
        .enumerate()
        .map(|(i, &d)| DistanceRecord {
            rp_index: i,
            raw_distance: d,
            penalty_weight: 1.0,
            scaled_distance: d,
        })
        .collect()
}

/// Histogram-weighted distance between query means and a reference point:
/// `sqrt(Σ_j Σ_R p_R (F_j - R)²)`.
///
/// An AP with no histogram mass at the reference point (never heard there)
/// contributes `(F_j - mean_j)²`, the same term the mean distance uses.
pub fn histogram_distance(query_means: &[f64], rp: &Fingerprint) -> Result<f64> {
    check_dims(query_means.len(), rp.ap_count())?;
    let mut acc = 0.0;
    for ((f, h), m) in query_means.iter().zip(rp.histogram().iter()).zip(rp.mean()) {
        if h.is_empty() {
            acc += (f - m) * (f - m);
        } else {
            acc += h
                .probabilities()
                .map(|(r, p)| {
                    let diff = f - f64::from(r);
                    p * diff * diff
                })
                .sum::<f64>();
        }
    }
    Ok(acc.sqrt())
}

fn is_rank_permutation(ranks: &[u32]) -> bool {
    let mut seen = vec![false; ranks.len()];
    ranks.iter().all(|&r| {
        let i = r as usize;
        if i == 0 || i > seen.len() || seen[i - 1] {
            return false;
        }
        seen[i - 1] = true;
        true
    })
}

/// Spearman distance: Euclidean distance between two rank vectors.
pub fn spearman_rank_distance(query_ranks: &[u32], rp_ranks: &[u32]) -> Result<f64> {
    check_dims(query_ranks.len(), rp_ranks.len())?;
    for ranks in [query_ranks, rp_ranks] {
        if !is_rank_permutation(ranks) {
            return Err(Error::NotAPermutation { len: ranks.len() });
        }
    }
    Ok(query_ranks
        .iter()
        .zip(rp_ranks)
        .map(|(&a, &b)| {
            let d = f64::from(a) - f64::from(b);
            d * d
        })
        .sum::<f64>()
        .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::{build_fingerprint, RssiScan};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::E;

    fn params(x: f64, y: f64, sigma: f64) -> PenaltyParams {
        PenaltyParams::new(Point::new(x, y), sigma).unwrap()
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(
            euclidean_distance(&[-50.0, -60.0], &[-50.0, -60.0]).unwrap(),
            0.0
        );
        assert_eq!(
            euclidean_distance(&[-50.0, -60.0], &[-53.0, -56.0]).unwrap(),
            5.0
        );
        assert_eq!(euclidean_distance(&[-40.0], &[-47.0]).unwrap(), 7.0);
        assert!(matches!(
            euclidean_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn penalty_examples() {
        let p = params(3.0, 4.0, 2.0);
        assert_eq!(penalty_weight(&Point::new(3.0, 4.0), &p), 1.0);
        assert_abs_diff_eq!(
            penalty_weight(&Point::new(7.0, 4.0), &p),
            E,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            penalty_weight(&Point::new(3.0, 6.0), &p),
            0.25f64.exp(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            penalty_weight(&Point::new(3.0, 6.0), &p),
            1.2840,
            epsilon = 1e-4
        );
    }

    #[test]
    fn penalty_is_clamped() {
        let p = params(0.0, 0.0, 1e-3);
        let w = penalty_weight(&Point::new(1e6, 0.0), &p);
        assert!(w.is_finite());
        assert_eq!(w, MAX_PENALTY_EXPONENT.exp());
    }

    #[test]
    fn invalid_sigma() {
        assert!(PenaltyParams::new(Point::default(), 0.0).is_err());
        assert!(PenaltyParams::new(Point::default(), f64::NAN).is_err());
        assert!(PenaltyParams::new(Point::new(f64::INFINITY, 0.0), 1.0).is_err());
    }

    #[test]
    fn srl_distance_examples() {
        let p = params(0.0, 0.0, 2.0);
        assert_eq!(srl_distance(0.0, &Point::new(5.0, 5.0), &p, 3.0), 0.0);

        let loc = Point::new(1.0, 2.0);
        let w = penalty_weight(&loc, &p);
        assert_abs_diff_eq!(srl_distance(3.5, &loc, &p, w), 3.5, epsilon = 1e-12);

        let near = Point::new(0.0, 0.0);
        let far = Point::new(4.0, 0.0);
        let sum = penalty_weight_sum([&near, &far], &p);
        let a = srl_distance(2.0, &near, &p, sum);
        let b = srl_distance(2.0, &far, &p, sum);
        assert_abs_diff_eq!(b / a, E, epsilon = 1e-12);
    }

    #[test]
    fn srl_histogram_distance_example() {
        let p = params(0.0, 0.0, 2.0);
        let v = srl_histogram_distance(1.5, &Point::new(0.0, 4.0), &p, 10.0);
        assert_abs_diff_eq!(v, E * 1.5 / 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v, 0.4077, epsilon = 1e-4);
        assert_eq!(
            srl_histogram_distance(0.0, &Point::new(0.0, 4.0), &p, 10.0),
            0.0
        );
    }

    #[test]
    fn histogram_distance_examples() {
        let scans: Vec<_> = [-60.0, -62.0]
            .iter()
            .map(|&v| RssiScan::full([v]))
            .collect();
        let rp = build_fingerprint(&scans, Default::default()).unwrap();
        assert_abs_diff_eq!(
            histogram_distance(&[-60.0], &rp).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );

        let rp = build_fingerprint(&[RssiScan::full([-60.0, -70.0])], Default::default()).unwrap();
        assert_eq!(histogram_distance(&[-60.0, -70.0], &rp).unwrap(), 0.0);
        assert_eq!(
            histogram_distance(&[-55.0, -72.0], &rp).unwrap(),
            euclidean_distance(&[-55.0, -72.0], rp.mean()).unwrap()
        );
        assert!(histogram_distance(&[-60.0], &rp).is_err());
    }

    #[test]
    fn histogram_distance_unheard_ap_uses_mean() {
        let rp = build_fingerprint(
            &[RssiScan::new(vec![Some(-60.0), None])],
            Default::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(
            histogram_distance(&[-60.0, -97.0], &rp).unwrap(),
            3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn spearman_examples() {
        assert_eq!(spearman_rank_distance(&[1, 2, 3], &[1, 2, 3]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            spearman_rank_distance(&[1, 2], &[2, 1]).unwrap(),
            2f64.sqrt(),
            epsilon = 1e-12
        );
        assert!(matches!(
            spearman_rank_distance(&[1, 1], &[1, 2]),
            Err(Error::NotAPermutation { len: 2 })
        ));
        assert!(spearman_rank_distance(&[0, 1], &[1, 2]).is_err());
        assert!(spearman_rank_distance(&[1, 3], &[1, 2]).is_err());
    }

    #[test]
    fn scale_distances_survives_weight_overflow() {
        let p = params(0.0, 0.0, 0.01);
        let locations: Vec<Point> = (0..40).map(|i| Point::new(100.0 + i as f64, 0.0)).collect();
        let raw: Vec<f64> = (0..40).map(|i| 1.0 + i as f64).collect();
        let recs = scale_distances(&raw, &locations, &p).unwrap();
        assert!(recs
            .iter()
            .all(|r| r.scaled_distance.is_finite() && r.scaled_distance > 0.0));
        // all weights clamp to the same value, so D̄ = D / 40
        assert_abs_diff_eq!(recs[3].scaled_distance, 4.0 / 40.0, epsilon = 1e-12);
    }

    fn perm(len: usize) -> impl Strategy<Value = Vec<u32>> {
        Just((1..=len as u32).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn penalty_monotone(sigma in 0.1f64..50.0, d1 in 0.0f64..30.0, step in 0.01f64..10.0) {
            let p = params(0.0, 0.0, sigma);
            let a = penalty_weight(&Point::new(d1, 0.0), &p);
            let b = penalty_weight(&Point::new(0.0, d1 + step), &p);
            prop_assert!(a >= 1.0);
            prop_assert!(b > a || b == MAX_PENALTY_EXPONENT.exp());
        }

        #[test]
        fn normalization_preserves_order(
            raw in prop::collection::vec(0.0f64..50.0, 2..40),
            seed_xy in prop::collection::vec((-20.0f64..20.0, -20.0f64..20.0), 40),
            sigma in 0.5f64..10.0,
        ) {
            let locations: Vec<Point> = seed_xy[..raw.len()].iter().map(|&xy| xy.into()).collect();
            let p = params(0.0, 0.0, sigma);
            let recs = scale_distances(&raw, &locations, &p).unwrap();
            let products: Vec<f64> = raw.iter().zip(&locations).map(|(d, l)| penalty_weight(l, &p) * d).collect();
            let argmin = |v: &[f64]| (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b]).then(a.cmp(&b))).unwrap();
            let scaled: Vec<f64> = recs.iter().map(|r| r.scaled_distance).collect();
            prop_assert_eq!(argmin(&scaled), argmin(&products));
            for r in &recs {
                prop_assert!(r.raw_distance >= 0.0 && r.penalty_weight >= 1.0 && r.scaled_distance >= 0.0);
            }
        }

        #[test]
        fn euclidean_symmetric(a in prop::collection::vec(-100.0f64..0.0, 1..12), shift in -5.0f64..5.0) {
            let b: Vec<f64> = a.iter().map(|v| v + shift).collect();
            let d1 = euclidean_distance(&a, &b).unwrap();
            prop_assert_eq!(d1, euclidean_distance(&b, &a).unwrap());
            prop_assert!(d1 >= 0.0);
        }

        #[test]
        fn spearman_symmetric((a, b) in (1usize..10).prop_flat_map(|n| (perm(n), perm(n)))) {
            let d = spearman_rank_distance(&a, &b).unwrap();
            prop_assert_eq!(d, spearman_rank_distance(&b, &a).unwrap());
            prop_assert_eq!(d == 0.0, a == b);
        }
    }
}
