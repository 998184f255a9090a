//! Trajectory replay, error statistics and the history/ambiguity studies.
//!
//! Replay is sequential: the prior position handed to the soft range
//! limited localizers at step `t` comes from step `t - 1` (the previous
//! estimate, the previous ground truth, or a perturbed ground truth).

mod ambiguity;
mod perturbation;
mod stats;

pub use ambiguity::{
    ambiguity_analysis, pearson_correlation, AmbiguityReport, AmbiguousPoint, RpAmbiguity,
    ThresholdMode,
};
pub use perturbation::{perturb_prior, PerturbationSpec};
pub use stats::{error_cdf, percentile, ErrorCdf, ErrorSummary};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::{query_fingerprint, FeatureKind, FingerprintDatabase, RssiScan};
use crate::geometry::Point;
use crate::localizers::{locate, Algorithm, LocalizerConfig};
use crate::metrics::euclidean_distance;
use crate::rng::{derive_seed, seeded_rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    pub truth: Point,
    pub scans: Vec<RssiScan>,
}

/// Ground-truth walk with the test scans taken at every step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    /// Seconds between consecutive steps.
    pub dt: f64,
}

impl Trajectory {
    pub fn new(steps: Vec<TrajectoryStep>, dt: f64) -> Self {
        Self { steps, dt }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Where the prior position of each step comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PriorMode {
    /// The previous estimate (closed loop).
    Estimated,
    /// The previous ground-truth position.
    Truth,
    /// The previous ground-truth position plus Gaussian noise.
    PerturbedTruth(PerturbationSpec),
}

/// Prior of the first step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPrior {
    /// The starting position is known: the first ground-truth point.
    Known,
    /// No starting position: the first step falls back to WKNN.
    WknnFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplayOptions {
    pub prior_mode: PriorMode,
    pub start: StartPrior,
    /// When set, a step whose query means lie within this many dB of the
    /// previous step's is treated as stationary and located by WKNN
    /// without a prior.
    pub stationary_threshold_db: Option<f64>,
}

impl ReplayOptions {
    pub fn new(prior_mode: PriorMode) -> Self {
        Self {
            prior_mode,
            start: StartPrior::Known,
            stationary_threshold_db: None,
        }
    }
}

impl Default for ReplayOptions {
    fn default() -> Self {
        Self::new(PriorMode::Estimated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub step: usize,
    pub truth: Point,
    pub estimate: Point,
    pub error: f64,
    pub prior: Option<Point>,
    pub neighbors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryResult {
    pub algorithm: Algorithm,
    pub steps: Vec<StepResult>,
    pub summary: ErrorSummary,
}

impl TrajectoryResult {
    pub fn errors(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.error).collect()
    }

    pub fn cdf(&self) -> ErrorCdf {
        ErrorCdf::new(&self.errors()).expect("replayed trajectories are non-empty")
    }
}

/// Summary of all steps of several replayed trajectories taken together.
pub fn pooled_summary(results: &[TrajectoryResult]) -> Option<ErrorSummary> {
    let errors: Vec<f64> = results.iter().flat_map(|r| r.errors()).collect();
    ErrorSummary::from_errors(&errors)
}

fn fallback_config(cfg: &LocalizerConfig) -> LocalizerConfig {
    let feature = match cfg.algorithm {
        Algorithm::SrlKnn => cfg.feature,
        _ => FeatureKind::Mean,
    };
    LocalizerConfig {
        algorithm: Algorithm::Wknn,
        feature,
        ..*cfg
    }
}

/// Replays a trajectory step by step with the default options for
/// `prior_mode` (known start, no stationary alignment).
pub fn replay_trajectory(
    db: &FingerprintDatabase,
    traj: &Trajectory,
    cfg: &LocalizerConfig,
    prior_mode: PriorMode,
) -> Result<TrajectoryResult> {
    replay_with(db, traj, cfg, &ReplayOptions::new(prior_mode))
}

pub fn replay_with(
    db: &FingerprintDatabase,
    traj: &Trajectory,
    cfg: &LocalizerConfig,
    opts: &ReplayOptions,
) -> Result<TrajectoryResult> {
    if traj.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut perturb = match opts.prior_mode {
        PriorMode::PerturbedTruth(spec) => {
            spec.validate()?;
            Some((spec, seeded_rng(spec.seed)))
        }
        _ => None,
    };
    let fallback = fallback_config(cfg);

    let mut steps = Vec::with_capacity(traj.len());
    let mut prev_query_mean: Option<Vec<f64>> = None;
    for (t, step) in traj.steps.iter().enumerate() {
        if step.scans.is_empty() {
            return Err(Error::EmptyStep { step: t });
        }
        let query = query_fingerprint(&step.scans, cfg.missing_policy)?;
        if query.ap_count() != db.ap_count() {
            return Err(Error::ConfigMismatch(format!(
                "step {t} has {} readings per scan, database has {} APs",
                query.ap_count(),
                db.ap_count()
            )));
        }

        let base_prior = if t == 0 {
            match opts.start {
                StartPrior::Known => Some(step.truth),
                StartPrior::WknnFallback => None,
            }
        } else {
            match opts.prior_mode {
                PriorMode::Estimated => steps.last().map(|s: &StepResult| s.estimate),
                PriorMode::Truth | PriorMode::PerturbedTruth(_) => Some(traj.steps[t - 1].truth),
            }
        };
        let prior = match (&mut perturb, base_prior) {
            (Some((spec, rng)), Some(p)) => Some(perturb_prior(p, spec, rng)),
            (_, p) => p,
        };

        let stationary = match (opts.stationary_threshold_db, &prev_query_mean) {
            (Some(th), Some(prev)) => euclidean_distance(query.mean(), prev)? <= th,
            _ => false,
        };

        let estimate = if cfg.algorithm.uses_prior() && (prior.is_none() || stationary) {
            locate(db, &query, None, &fallback)?
        } else {
            locate(db, &query, prior, cfg)?
        };
        steps.push(StepResult {
            step: t,
            truth: step.truth,
            estimate: estimate.location,
            error: estimate.location.distance(&step.truth),
            prior: if cfg.algorithm.uses_prior() {
                prior
            } else {
                None
            },
            neighbors: estimate.neighbor_indices(),
        });
        prev_query_mean = Some(query.mean().to_vec());
    }

    let errors: Vec<f64> = steps.iter().map(|s| s.error).collect();
    Ok(TrajectoryResult {
        algorithm: cfg.algorithm,
        summary: ErrorSummary::from_errors(&errors).expect("non-empty"),
        steps,
    })
}

/// Replays every trajectory. With a perturbed prior, trajectory `i` draws
/// its noise from a stream derived from the perturbation seed and `i`.
pub fn replay_all(
    db: &FingerprintDatabase,
    trajectories: &[Trajectory],
    cfg: &LocalizerConfig,
    opts: &ReplayOptions,
) -> Result<Vec<TrajectoryResult>> {
    trajectories
        .par_iter()
        .enumerate()
        .map(|(i, traj)| {
            let mut o = *opts;
            if let PriorMode::PerturbedTruth(spec) = &mut o.prior_mode {
                spec.seed = derive_seed(spec.seed, i as u64);
            }
            replay_with(db, traj, cfg, &o)
        })
        .collect()
}

/// Outcome of one seed at one perturbation magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub seed: u64,
    pub summary: ErrorSummary,
}

/// Seed-averaged results at one perturbation magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRow {
    pub magnitude: f64,
    pub per_seed: Vec<SeedOutcome>,
    /// Mean over seeds of the per-seed mean error.
    pub mean_error: f64,
    /// Sample variance over seeds of the per-seed mean error.
    pub mean_error_variance: f64,
    pub mean_p80: f64,
    pub mean_max: f64,
    /// Errors of every step of every seed, for CDF plots.
    pub errors: Vec<f64>,
}

/// Replays all trajectories with a perturbed ground-truth prior, for every
/// magnitude and every seed. Each magnitude reuses the same seeds.
pub fn perturbation_study(
    db: &FingerprintDatabase,
    trajectories: &[Trajectory],
    cfg: &LocalizerConfig,
    magnitudes: &[f64],
    seeds: &[u64],
) -> Result<Vec<PerturbationRow>> {
    if seeds.is_empty() {
        return Err(Error::InvalidPerturbation("no seeds".into()));
    }
    magnitudes
        .iter()
        .map(|&magnitude| {
            let mut per_seed = Vec::with_capacity(seeds.len());
            let mut errors = Vec::new();
            for &seed in seeds {
                let spec = PerturbationSpec::isotropic(magnitude, seed)?;
                let results = replay_all(
                    db,
                    trajectories,
                    cfg,
                    &ReplayOptions::new(PriorMode::PerturbedTruth(spec)),
                )?;
                let summary = pooled_summary(&results).ok_or(Error::EmptyTrajectory)?;
                errors.extend(results.iter().flat_map(|r| r.errors()));
                per_seed.push(SeedOutcome { seed, summary });
            }
            let n = per_seed.len() as f64;
            let mean_error = per_seed.iter().map(|s| s.summary.mean).sum::<f64>() / n;
            let mean_error_variance = if per_seed.len() > 1 {
                per_seed
                    .iter()
                    .map(|s| (s.summary.mean - mean_error).powi(2))
                    .sum::<f64>()
                    / (n - 1.0)
            } else {
                0.0
            };
            Ok(PerturbationRow {
                magnitude,
                mean_error,
                mean_error_variance,
                mean_p80: per_seed.iter().map(|s| s.summary.p80).sum::<f64>() / n,
                mean_max: per_seed.iter().map(|s| s.summary.max).sum::<f64>() / n,
                per_seed,
                errors,
            })
        })
        .collect()
}
