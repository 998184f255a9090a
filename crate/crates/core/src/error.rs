use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the localization library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty scan set")]
    EmptyScanSet,
    #[error("scan length mismatch: expected {expected} readings, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid AP index {index} (database has {count} APs)")]
    InvalidAp { index: usize, count: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("rank vector is not a permutation of 1..={len}")]
    NotAPermutation { len: usize },
    #[error("database has no reference points")]
    EmptyDatabase,
    #[error("invalid neighbor count k = {k} for a database of {m} reference points")]
    InvalidK { k: usize, m: usize },
    #[error("invalid stage sizes: need k < n <= M, got k = {k}, n = {n}, M = {m}")]
    InvalidStageSizes { k: usize, n: usize, m: usize },
    #[error("sigma must be finite and > 0, got {0}")]
    InvalidSigma(f64),
    #[error("{0} requires a previous position")]
    MissingPrior(&'static str),
    #[error("feature {feature} is not valid for {context}")]
    InvalidFeature {
        feature: &'static str,
        context: &'static str,
    },
    #[error("trajectory has no steps")]
    EmptyTrajectory,
    #[error("trajectory step {step} has no scans")]
    EmptyStep { step: usize },
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("vector has zero variance")]
    ZeroVariance,
    #[error("need at least {needed} values, found {found}")]
    TooShort { needed: usize, found: usize },
    #[error("database has no grid size")]
    MissingGridSize,
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("invalid synthetic config: {0}")]
    InvalidConfig(String),
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        column: String,
        message: String,
    },
    #[error("no records left after filtering: {0}")]
    EmptyAfterFilter(String),
    #[error("unsupported database schema: {0}")]
    SchemaVersionMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
