//! Fingerprint data model.
//!
//! A [`Fingerprint`] bundles every feature the localizers can match on: the
//! per-AP mean and spread of RSSI, the per-AP RSSI histogram with 1 dBm
//! integer-centered bins, the AP rank order and the pairwise mean
//! differences. All of them are derived from a set of raw [`RssiScan`]s.

use std::borrow::Cow;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Default substitute for an AP that was not heard, in dBm.
pub const DEFAULT_MISSING_FLOOR: f64 = -100.0;

/// One AP channel of the database.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApId {
    pub index: usize,
    pub label: String,
}

impl ApId {
    pub fn new(index: usize, label: impl Into<String>) -> Self {
        Self {
            index,
            label: label.into(),
        }
    }
}

/// Builds a dense AP registry `AP0..AP{count-1}`.
pub fn numbered_aps(count: usize) -> Vec<ApId> {
    (0..count).map(|i| ApId::new(i, format!("AP{i}"))).collect()
}

/// One instantaneous set of readings, one entry per AP channel.
/// `None` marks an AP that was not heard.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssiScan {
    pub readings: Vec<Option<f64>>,
}

impl RssiScan {
    pub fn new(readings: Vec<Option<f64>>) -> Self {
        Self { readings }
    }

    /// A scan where every AP was heard.
    pub fn full(readings: impl IntoIterator<Item = f64>) -> Self {
        Self {
            readings: readings.into_iter().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}

/// How readings of unheard APs enter the mean/std features.
///
/// Unheard readings never contribute histogram mass under either policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MissingValuePolicy {
    /// Every unheard reading counts as `floor` dBm.
    Substitute { floor: f64 },
    /// Unheard readings are dropped; an AP never heard at all gets `floor`.
    Exclude { floor: f64 },
}

impl MissingValuePolicy {
    pub fn floor(&self) -> f64 {
        match *self {
            MissingValuePolicy::Substitute { floor } | MissingValuePolicy::Exclude { floor } => {
                floor
            }
        }
    }
}

impl Default for MissingValuePolicy {
    fn default() -> Self {
        MissingValuePolicy::Substitute {
            floor: DEFAULT_MISSING_FLOOR,
        }
    }
}

/// Counts of integer-rounded readings for one AP.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ApHistogram {
    counts: BTreeMap<i32, u32>,
}

impl ApHistogram {
    pub fn from_counts(counts: BTreeMap<i32, u32>) -> Self {
        let counts = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        Self { counts }
    }

    /// A histogram holding `count` readings all in the bin at `rssi`.
    pub fn single_bin(rssi: i32, count: u32) -> Self {
        Self::from_counts(BTreeMap::from([(rssi, count)]))
    }

    pub fn record(&mut self, reading: f64) {
        *self.counts.entry(reading.round() as i32).or_insert(0) += 1;
    }

    pub fn counts(&self) -> &BTreeMap<i32, u32> {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Lowest and highest populated bins.
    pub fn range(&self) -> Option<(i32, i32)> {
        let lo = *self.counts.keys().next()?;
        let hi = *self.counts.keys().next_back()?;
        Some((lo, hi))
    }

    /// Fraction of readings that fell in `[r - 0.5, r + 0.5)` dBm.
    pub fn probability(&self, r: i32) -> f64 {
        match self.counts.get(&r) {
            Some(&c) => f64::from(c) / f64::from(self.total()),
            None => 0.0,
        }
    }

    /// `(bin, probability)` for every populated bin, ascending.
    pub fn probabilities(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        let total = f64::from(self.total());
        self.counts
            .iter()
            .map(move |(&r, &c)| (r, f64::from(c) / total))
    }

    /// Probability-weighted mean bin value.
    pub fn mean(&self) -> Option<f64> {
        if self.is_empty() {
            return None;
        }
        Some(self.probabilities().map(|(r, p)| p * f64::from(r)).sum())
    }
}

/// Per-AP RSSI histograms of one location.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RssiHistogram {
    aps: Vec<ApHistogram>,
}

impl RssiHistogram {
    pub fn new(aps: Vec<ApHistogram>) -> Self {
        Self { aps }
    }

    pub fn ap_count(&self) -> usize {
        self.aps.len()
    }

    pub fn ap(&self, index: usize) -> Option<&ApHistogram> {
        self.aps.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ApHistogram> {
        self.aps.iter()
    }
}

/// Probability that the reading of AP `ap` fell into the bin centered at `r`.
pub fn histogram_bin_probability(hist: &RssiHistogram, ap: usize, r: i32) -> Result<f64> {
    hist.ap(ap)
        .map(|h| h.probability(r))
        .ok_or(Error::InvalidAp {
            index: ap,
            count: hist.ap_count(),
        })
}

/// Which feature vector of a fingerprint a distance is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Mean,
    Rank,
    PairDiff,
}

impl FeatureKind {
    pub fn name(&self) -> &'static str {
        match self {
            FeatureKind::Mean => "mean",
            FeatureKind::Rank => "rank",
            FeatureKind::PairDiff => "pair_diff",
        }
    }
}

/// Feature bundle of one location.
#[derive(Debug, Clone, PartialEq)]
pub struct Fingerprint {
    mean: Vec<f64>,
    std: Vec<f64>,
    histogram: RssiHistogram,
    ranks: Vec<u32>,
    pair_diffs: Vec<f64>,
}

impl Fingerprint {
    /// Assembles a fingerprint from its stored parts; ranks and pair
    /// differences are derived from `mean`.
    pub fn from_parts(mean: Vec<f64>, std: Vec<f64>, histogram: RssiHistogram) -> Result<Self> {
        if std.len() != mean.len() {
            return Err(Error::DimensionMismatch {
                left: mean.len(),
                right: std.len(),
            });
        }
        if histogram.ap_count() != mean.len() {
            return Err(Error::DimensionMismatch {
                left: mean.len(),
                right: histogram.ap_count(),
            });
        }
        let ranks = rank_descending(&mean);
        let pair_diffs = pair_differences(&mean);
        Ok(Self {
            mean,
            std,
            histogram,
            ranks,
            pair_diffs,
        })
    }

    pub fn ap_count(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn std(&self) -> &[f64] {
        &self.std
    }

    pub fn histogram(&self) -> &RssiHistogram {
        &self.histogram
    }

    /// Rank of each AP by mean RSSI, 1 = strongest.
    pub fn ranks(&self) -> &[u32] {
        &self.ranks
    }

    /// `mean[j] - mean[k]` for every `j < k`, row-major.
    pub fn pair_diffs(&self) -> &[f64] {
        &self.pair_diffs
    }

    pub fn features(&self, kind: FeatureKind) -> Cow<'_, [f64]> {
        match kind {
            FeatureKind::Mean => Cow::Borrowed(&self.mean),
            FeatureKind::PairDiff => Cow::Borrowed(&self.pair_diffs),
            FeatureKind::Rank => Cow::Owned(self.ranks.iter().map(|&r| f64::from(r)).collect()),
        }
    }
}

/// Position in `pair_diffs` of the AP pair `(j, k)`, `j < k < p`.
pub fn pair_index(j: usize, k: usize, p: usize) -> usize {
    debug_assert!(j < k && k < p);
    j * (2 * p - j - 1) / 2 + (k - j - 1)
}

fn rank_descending(mean: &[f64]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..mean.len()).collect();
    // stable sort keeps the lower AP index first on ties
    order.sort_by(|&a, &b| mean[b].total_cmp(&mean[a]));
    let mut ranks = vec![0u32; mean.len()];
    for (pos, &ap) in order.iter().enumerate() {
        ranks[ap] = pos as u32 + 1;
    }
    ranks
}

fn pair_differences(mean: &[f64]) -> Vec<f64> {
    let p = mean.len();
    let mut out = Vec::with_capacity(p * p.saturating_sub(1) / 2);
    for j in 0..p {
        for k in j + 1..p {
            out.push(mean[j] - mean[k]);
        }
    }
    out
}

/// Builds a fingerprint from the scans recorded at one location.
pub fn build_fingerprint(scans: &[RssiScan], policy: MissingValuePolicy) -> Result<Fingerprint> {
    let first = scans.first().ok_or(Error::EmptyScanSet)?;
    let p = first.len();
    if let Some(bad) = scans.iter().find(|s| s.len() != p) {
        return Err(Error::LengthMismatch {
            expected: p,
            found: bad.len(),
        });
    }

    let mut mean = Vec::with_capacity(p);
    let mut std = Vec::with_capacity(p);
    let mut hists = Vec::with_capacity(p);
    let mut values = Vec::with_capacity(scans.len());
    for j in 0..p {
        values.clear();
        let mut hist = ApHistogram::default();
        for scan in scans {
            match scan.readings[j] {
                Some(r) => {
                    hist.record(r);
                    values.push(r);
                }
                None => {
                    if let MissingValuePolicy::Substitute { floor } = policy {
                        values.push(floor);
                    }
                }
            }
        }
        if values.is_empty() {
            values.push(policy.floor());
        }
        let (m, s) = mean_and_population_std(&values);
        mean.push(m);
        std.push(s);
        hists.push(hist);
    }
    Fingerprint::from_parts(mean, std, RssiHistogram::new(hists))
}

/// Fingerprint of the few scans taken at a test point; same construction as
/// [`build_fingerprint`].
pub fn query_fingerprint(scans: &[RssiScan], policy: MissingValuePolicy) -> Result<Fingerprint> {
    build_fingerprint(scans, policy)
}

fn mean_and_population_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// A surveyed location and its fingerprint.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub location: Point,
    pub fingerprint: Fingerprint,
    pub scan_count: usize,
}

/// Reference points sharing one AP registry.
#[derive(Debug, Clone, PartialEq)]
pub struct FingerprintDatabase {
    aps: Vec<ApId>,
    points: Vec<ReferencePoint>,
    grid_size: Option<f64>,
    missing_policy: MissingValuePolicy,
}

impl FingerprintDatabase {
    pub fn new(
        aps: Vec<ApId>,
        points: Vec<ReferencePoint>,
        grid_size: Option<f64>,
        missing_policy: MissingValuePolicy,
    ) -> Result<Self> {
        if aps.is_empty() {
            return Err(Error::TooShort {
                needed: 1,
                found: 0,
            });
        }
        if let Some(pos) = aps.iter().enumerate().position(|(i, ap)| ap.index != i) {
            return Err(Error::InvalidAp {
                index: aps[pos].index,
                count: aps.len(),
            });
        }
        let p = aps.len();
        for rp in &points {
            if rp.fingerprint.ap_count() != p {
                return Err(Error::DimensionMismatch {
                    left: p,
                    right: rp.fingerprint.ap_count(),
                });
            }
            if !rp.location.is_finite() || rp.scan_count == 0 {
                return Err(Error::ConfigMismatch(format!(
                    "reference point at ({}, {}) with {} scans",
                    rp.location.x, rp.location.y, rp.scan_count
                )));
            }
        }
        if let Some(g) = grid_size {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::ConfigMismatch(format!("grid size {g}")));
            }
        }
        Ok(Self {
            aps,
            points,
            grid_size,
            missing_policy,
        })
    }

    /// Builds one reference point per `(location, scans)` entry.
    pub fn from_scans(
        aps: Vec<ApId>,
        surveys: impl IntoIterator<Item = (Point, Vec<RssiScan>)>,
        grid_size: Option<f64>,
        missing_policy: MissingValuePolicy,
    ) -> Result<Self> {
        let points = surveys
            .into_iter()
            .map(|(location, scans)| {
                let fingerprint = build_fingerprint(&scans, missing_policy)?;
                if fingerprint.ap_count() != aps.len() {
                    return Err(Error::LengthMismatch {
                        expected: aps.len(),
                        found: fingerprint.ap_count(),
                    });
                }
                Ok(ReferencePoint {
                    location,
                    fingerprint,
                    scan_count: scans.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(aps, points, grid_size, missing_policy)
    }

    pub fn aps(&self) -> &[ApId] {
        &self.aps
    }

    pub fn ap_count(&self) -> usize {
        self.aps.len()
    }

    pub fn points(&self) -> &[ReferencePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn grid_size(&self) -> Option<f64> {
        self.grid_size
    }

    pub fn missing_policy(&self) -> MissingValuePolicy {
        self.missing_policy
    }

    /// Copy of this database with a different grid size.
    pub fn with_grid_size(&self, grid_size: Option<f64>) -> Result<Self> {
        Self::new(
            self.aps.clone(),
            self.points.clone(),
            grid_size,
            self.missing_policy,
        )
    }
}
