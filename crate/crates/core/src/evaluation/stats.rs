//! Error summaries and empirical CDFs.
//!
//! Percentiles interpolate linearly between order statistics: the `p`
//! quantile of `n` sorted samples sits at fractional rank `(n - 1)·p`.

use serde::{Deserialize, Serialize};

/// Linearly interpolated quantile of already sorted samples, `p` in `[0, 1]`.
fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// The `p` quantile (`p` in `[0, 1]`) of `values`; `None` when empty.
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Some(interpolated_quantile(&sorted, p))
}

/// Empirical CDF of a set of localization errors.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCdf {
    sorted: Vec<f64>,
}

impl ErrorCdf {
    pub fn new(errors: &[f64]) -> Option<Self> {
        if errors.is_empty() {
            return None;
        }
        let mut sorted = errors.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// `(error level, fraction of errors <= level)` at every distinct level.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &e) in self.sorted.iter().enumerate() {
            let frac = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == e => last.1 = frac,
                _ => out.push((e, frac)),
            }
        }
        out
    }

    /// Fraction of errors at or below `level`.
    pub fn fraction_at_or_below(&self, level: f64) -> f64 {
        let count = self.sorted.partition_point(|&e| e <= level);
        count as f64 / self.sorted.len() as f64
    }

    pub fn quantile(&self, p: f64) -> f64 {
        interpolated_quantile(&self.sorted, p)
    }
}

/// Empirical CDF points of `errors`; empty input gives no points.
pub fn error_cdf(errors: &[f64]) -> Vec<(f64, f64)> {
    ErrorCdf::new(errors)
        .map(|c| c.points())
        .unwrap_or_default()
}

/// Mean, population standard deviation, 80th percentile and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub p80: f64,
    pub max: f64,
}

impl ErrorSummary {
    pub fn from_errors(errors: &[f64]) -> Option<Self> {
        let cdf = ErrorCdf::new(errors)?;
        let n = errors.len() as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
        Some(Self {
            count: errors.len(),
            mean,
            std: var.sqrt(),
            p80: cdf.quantile(0.8),
            max: *cdf.sorted.last().expect("non-empty"),
        })
    }
}
