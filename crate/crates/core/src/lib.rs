//! Soft range limited K-nearest-neighbour WiFi fingerprint localization.
//!
//! A [`FingerprintDatabase`] holds the surveyed reference points. The
//! localizers in [`localizers`] turn a query fingerprint into a position;
//! the soft range limited variants scale each fingerprint distance by a
//! Gaussian-shaped penalty on the physical distance from the previous
//! position, so far-away look-alike reference points stop winning.
//!
//! ```
//! use srlknn_core::{locate, query_fingerprint, LocalizerConfig, Point};
//! use srlknn_core::ingest::{generate_synthetic, SynthConfig};
//!
//! let data = generate_synthetic(&SynthConfig { scans_per_rp: 10, ..SynthConfig::default() })?;
//! let step = &data.trajectories[0].steps[1];
//! let query = query_fingerprint(&step.scans, data.database.missing_policy())?;
//! let prior = data.trajectories[0].steps[0].truth;
//! let est = locate(&data.database, &query, Some(prior), &LocalizerConfig::default())?;
//! assert_eq!(est.neighbors.len(), 3);
//! # Ok::<(), srlknn_core::Error>(())
//! ```

pub mod error;
pub mod evaluation;
pub mod fingerprint;
pub mod geometry;
pub mod ingest;
pub mod localizers;
pub mod metrics;
pub mod rng;

pub use error::{Error, Result};
pub use evaluation::{
    replay_trajectory, replay_with, PriorMode, ReplayOptions, StartPrior, Trajectory,
    TrajectoryResult, TrajectoryStep,
};
pub use fingerprint::{
    build_fingerprint, query_fingerprint, ApHistogram, ApId, FeatureKind, Fingerprint,
    FingerprintDatabase, MissingValuePolicy, ReferencePoint, RssiHistogram, RssiScan,
};
pub use geometry::Point;
pub use localizers::{locate, Algorithm, Estimate, LocalizerConfig, Neighbor};
pub use metrics::{DistanceRecord, PenaltyParams};
