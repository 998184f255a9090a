//! Pearson correlation between fingerprints and the spatial ambiguity
//! analysis built on it.
//!
//! A reference point `j` is an ambiguous point of `i` when the two are
//! farther apart than the grid size yet their mean fingerprints correlate
//! above a threshold. The ambiguous distance is their physical separation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::FingerprintDatabase;
use crate::geometry::Point;

/// Relative slack when comparing physical distances with the grid size.
const GRID_TOLERANCE: f64 = 1e-9;

/// Pearson correlation with sample standard deviations:
/// `1/(N-1) Σ ((a-μa)/δa)((b-μb)/δb)`, clamped to `[-1, 1]`.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let za = standardize(a)?;
    let zb = standardize(b)?;
    Ok(dot(&za, &zb).clamp(-1.0, 1.0))
}

/// `(v - μ) / (δ·sqrt(N-1))`, so that the dot product of two such vectors
/// is their Pearson correlation.
fn standardize(v: &[f64]) -> Result<Vec<f64>> {
    if v.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            found: v.len(),
        });
    }
    if v.iter().all(|&x| x == v[0]) {
        return Err(Error::ZeroVariance);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    let sd = (ss / (n - 1.0)).sqrt();
    let scale = sd * (n - 1.0).sqrt();
    Ok(v.iter().map(|x| (x - mean) / scale).collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum ThresholdMode {
    /// Per reference point: mean correlation with its physical neighbors.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguousPoint {
    pub rp_index: usize,
    pub correlation: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpAmbiguity {
    pub rp_index: usize,
    pub location: Point,
    pub threshold: f64,
    pub ambiguous: Vec<AmbiguousPoint>,
    pub max_distance: Option<f64>,
    pub mean_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityReport {
    pub mode: ThresholdMode,
    pub grid_size: f64,
    /// Mean of the per-point thresholds.
    pub mean_threshold: f64,
    pub points: Vec<RpAmbiguity>,
    /// Reference points with at least one ambiguous point.
    pub ambiguous_rp_count: usize,
    /// Mean over those points of their largest ambiguous distance.
    pub mean_max_distance: Option<f64>,
    /// Mean over those points of their average ambiguous distance.
    pub mean_mean_distance: Option<f64>,
    pub overall_max_distance: Option<f64>,
}

/// Finds the ambiguous points of every reference point by the correlation
/// of their mean fingerprints.
///
/// Pairs where either fingerprint is constant have no correlation and are
/// skipped. Under [`ThresholdMode::Auto`] a point without physical
/// neighbors uses the mean threshold of the points that have some.
pub fn ambiguity_analysis(
    db: &FingerprintDatabase,
    mode: ThresholdMode,
) -> Result<AmbiguityReport> {
    let grid = db.grid_size().ok_or(Error::MissingGridSize)?;
    if db.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            found: db.len(),
        });
    }
    let reach = grid * (1.0 + GRID_TOLERANCE);
    let standardized: Vec<Option<Vec<f64>>> = db
        .points()
        .iter()
        .map(|rp| standardize(rp.fingerprint.mean()).ok())
        .collect();
    let locations: Vec<Point> = db.points().iter().map(|rp| rp.location).collect();

    // Correlations with every other point, split into physical neighbors and
    // candidates for ambiguity.
    let rows: Vec<(Vec<f64>, Vec<AmbiguousPoint>)> = (0..db.len())
        .into_par_iter()
        .map(|i| {
            let mut near = Vec::new();
            let mut far = Vec::new();
            let Some(zi) = &standardized[i] else {
                return (near, far);
            };
            for (j, zj) in standardized.iter().enumerate() {
                let Some(zj) = zj else { continue };
                if i == j {
                    continue;
                }
                let rho = dot(zi, zj).clamp(-1.0, 1.0);
                let distance = locations[i].distance(&locations[j]);
                if distance <= reach {
                    near.push(rho);
                } else {
                    far.push(AmbiguousPoint {
                        rp_index: j,
                        correlation: rho,
                        distance,
                    });
                }
            }
            (near, far)
        })
        .collect();

    let thresholds: Vec<f64> = match mode {
        ThresholdMode::Fixed(t) => vec![t; db.len()],
        ThresholdMode::Auto => {
            let own: Vec<Option<f64>> = rows
                .iter()
                .map(|(near, _)| {
                    (!near.is_empty()).then(|| near.iter().sum::<f64>() / near.len() as f64)
                })
                .collect();
            let known: Vec<f64> = own.iter().flatten().copied().collect();
            let fallback = if known.is_empty() {
                1.0
            } else {
                known.iter().sum::<f64>() / known.len() as f64
            };
            own.into_iter().map(|t| t.unwrap_or(fallback)).collect()
        }
    };

    let points: Vec<RpAmbiguity> = rows
        .into_iter()
        .enumerate()
        .map(|(i, (_, far))| {
            let threshold = thresholds[i];
            let ambiguous: Vec<AmbiguousPoint> = far
                .into_iter()
                .filter(|a| a.correlation > threshold)
                .collect();
            let max_distance = ambiguous.iter().map(|a| a.distance).reduce(f64::max);
            let mean_distance = (!ambiguous.is_empty()).then(|| {
                ambiguous.iter().map(|a| a.distance).sum::<f64>() / ambiguous.len() as f64
            });
            RpAmbiguity {
                rp_index: i,
                location: locations[i],
                threshold,
                ambiguous,
                max_distance,
                mean_distance,
            }
        })
        .collect();

    let maxes: Vec<f64> = points.iter().filter_map(|p| p.max_distance).collect();
    let means: Vec<f64> = points.iter().filter_map(|p| p.mean_distance).collect();
    let avg = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    Ok(AmbiguityReport {
        mode,
        grid_size: grid,
        mean_threshold: thresholds.iter().sum::<f64>() / thresholds.len() as f64,
        ambiguous_rp_count: maxes.len(),
        mean_max_distance: avg(&maxes),
        mean_mean_distance: avg(&means),
        overall_max_distance: maxes.iter().copied().reduce(f64::max),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::{numbered_aps, RssiScan};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn pearson_identities() {
        let f = [-40.0, -60.0, -80.0];
        assert_abs_diff_eq!(pearson_correlation(&f, &f).unwrap(), 1.0, epsilon = 1e-9);
        let rev = [-80.0, -60.0, -40.0];
        assert_abs_diff_eq!(pearson_correlation(&f, &rev).unwrap(), -1.0, epsilon = 1e-9);
        let affine: Vec<f64> = f.iter().map(|v| 2.5 * v + 7.0).collect();
        assert_abs_diff_eq!(
            pearson_correlation(&f, &affine).unwrap(),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson_correlation(&[-50.0, -50.0], &[-40.0, -60.0]),
            Err(Error::ZeroVariance)
        ));
        assert!(matches!(
            pearson_correlation(&[-50.0], &[-40.0]),
            Err(Error::TooShort { .. })
        ));
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    fn db(entries: &[((f64, f64), Vec<f64>)], grid: Option<f64>) -> FingerprintDatabase {
        FingerprintDatabase::from_scans(
            numbered_aps(entries[0].1.len()),
            entries
                .iter()
                .map(|(xy, m)| (Point::from(*xy), vec![RssiScan::full(m.iter().copied())])),
            grid,
            Default::default(),
        )
        .unwrap()
    }

    #[test]
    fn planted_twins_are_ambiguous() {
        let d = db(
            &[
                ((0.0, 0.0), vec![-40.0, -60.0, -70.0, -55.0]),
                ((10.0, 0.0), vec![-40.0, -60.0, -70.0, -55.0]),
                ((5.0, 5.0), vec![-90.0, -30.0, -45.0, -80.0]),
            ],
            Some(1.0),
        );
        let report = ambiguity_analysis(&d, ThresholdMode::Fixed(0.9)).unwrap();
        assert_eq!(report.points[0].ambiguous.len(), 1);
        assert_eq!(report.points[0].ambiguous[0].rp_index, 1);
        assert_abs_diff_eq!(report.points[0].max_distance.unwrap(), 10.0);
        assert_abs_diff_eq!(report.points[1].mean_distance.unwrap(), 10.0);
        assert_eq!(report.points[1].ambiguous[0].rp_index, 0);
        assert!(report.points[2].ambiguous.is_empty());
        assert_eq!(report.ambiguous_rp_count, 2);
    }

    #[test]
    fn uncorrelated_database_has_no_ambiguity() {
        let d = db(
            &[
                ((0.0, 0.0), vec![-40.0, -60.0, -80.0, -60.0]),
                ((5.0, 0.0), vec![-60.0, -40.0, -60.0, -80.0]),
                ((0.0, 5.0), vec![-80.0, -60.0, -40.0, -60.0]),
                ((5.0, 5.0), vec![-60.0, -80.0, -60.0, -40.0]),
            ],
            Some(1.0),
        );
        let report = ambiguity_analysis(&d, ThresholdMode::Fixed(0.5)).unwrap();
        assert!(report.points.iter().all(|p| p.ambiguous.is_empty()));
        assert_eq!(report.mean_max_distance, None);
    }

    #[test]
    fn auto_threshold_is_neighbor_mean() {
        let d = db(
            &[
                ((0.0, 0.0), vec![-40.0, -60.0, -80.0]),
                ((1.0, 0.0), vec![-42.0, -61.0, -75.0]),
                ((2.0, 0.0), vec![-50.0, -49.0, -70.0]),
            ],
            Some(1.0),
        );
        let f: Vec<Vec<f64>> = d
            .points()
            .iter()
            .map(|p| p.fingerprint.mean().to_vec())
            .collect();
        let r01 = pearson_correlation(&f[0], &f[1]).unwrap();
        let r12 = pearson_correlation(&f[1], &f[2]).unwrap();
        let report = ambiguity_analysis(&d, ThresholdMode::Auto).unwrap();
        assert_abs_diff_eq!(report.points[0].threshold, r01, epsilon = 1e-12);
        assert_abs_diff_eq!(
            report.points[1].threshold,
            (r01 + r12) / 2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(report.points[2].threshold, r12, epsilon = 1e-12);
        for p in &report.points {
            for a in &p.ambiguous {
                assert!(a.distance > 1.0 && a.correlation > p.threshold);
            }
        }
    }

    #[test]
    fn missing_grid() {
        let d = db(
            &[
                ((0.0, 0.0), vec![-40.0, -50.0]),
                ((3.0, 0.0), vec![-50.0, -40.0]),
            ],
            None,
        );
        assert!(matches!(
            ambiguity_analysis(&d, ThresholdMode::Auto),
            Err(Error::MissingGridSize)
        ));
    }

    proptest! {
        #[test]
        fn pearson_properties(
            a in prop::collection::vec(-100.0f64..0.0, 2..20),
            noise in prop::collection::vec(-10.0f64..10.0, 20),
            scale in 0.01f64..50.0,
            shift in -100.0f64..100.0,
        ) {
            prop_assume!(a.iter().any(|&x| x != a[0]));
            let b: Vec<f64> = a.iter().zip(&noise).map(|(x, n)| x + n).collect();
            prop_assume!(b.iter().any(|&x| x != b[0]));
            let r = pearson_correlation(&a, &b).unwrap();
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((r - pearson_correlation(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert!((pearson_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-9);
            let affine: Vec<f64> = a.iter().map(|x| scale * x + shift).collect();
            prop_assert!((pearson_correlation(&a, &affine).unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
