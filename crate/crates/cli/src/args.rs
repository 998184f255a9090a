use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srlknn_core::{Algorithm, FeatureKind, LocalizerConfig, Point};

#[derive(Debug, Parser)]
#[command(
    name = "srlknn",
    version,
    about = "Soft range limited KNN WiFi fingerprint localization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a fingerprint database and its test trajectories.
    Build(BuildArgs),
    /// Locate one set of scans.
    Locate(LocateArgs),
    /// Replay trajectories with one or more localizers and compare them.
    Evaluate(EvaluateArgs),
    /// Replay with a noisy ground-truth prior at several noise levels.
    Perturb(PerturbArgs),
    /// Find reference points whose fingerprints look alike but lie far apart.
    Ambiguity(AmbiguityArgs),
    /// Run the command recorded in a manifest again.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(subcommand)]
    pub source: BuildSource,
}

#[derive(Debug, Subcommand)]
pub enum BuildSource {
    /// From the UJIIndoorLoc training and validation CSV files.
    Uji(UjiArgs),
    /// From the log-distance path-loss simulator.
    Synthetic(SyntheticArgs),
    /// From a survey CSV (`x,y,<AP>...`, one row per scan).
    RawScans(RawScansArgs),
}

#[derive(Debug, Args)]
pub struct UjiArgs {
    #[arg(long)]
    pub training: PathBuf,
    #[arg(long)]
    pub validation: PathBuf,
    #[arg(long)]
    pub building: Option<u32>,
    #[arg(long)]
    pub floor: Option<i32>,
    /// Phones whose validation rows become trajectories.
    #[arg(long, value_delimiter = ',')]
    pub phones: Vec<u32>,
    /// RSSI assigned to unheard WAPs.
    #[arg(long, default_value_t = srlknn_core::ingest::UJI_MIN_RSSI, allow_hyphen_values = true)]
    pub missing_floor: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Leave out the planted twin patch.
    #[arg(long)]
    pub no_twin: bool,
    #[arg(long, default_value_t = 4)]
    pub trajectories: usize,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 100)]
    pub scans_per_rp: usize,
    #[arg(long, default_value_t = 1)]
    pub scans_per_step: usize,
    /// Shadowing standard deviation, dB.
    #[arg(long, default_value_t = 4.0)]
    pub shadow: f64,
    #[arg(long, default_value_t = 1.0)]
    pub grid: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RawScansArgs {
    #[arg(long)]
    pub scans: PathBuf,
    #[arg(long)]
    pub grid_size: Option<f64>,
    #[arg(long, default_value_t = srlknn_core::fingerprint::DEFAULT_MISSING_FLOOR, allow_hyphen_values = true)]
    pub missing_floor: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoName {
    Classic,
    Wknn,
    SrlMean,
    SrlRank,
    SrlHist,
    SrlCombined,
    SrlCombinedDiff,
}

impl AlgoName {
    pub fn label(self) -> &'static str {
        match self {
            AlgoName::Classic => "classic",
            AlgoName::Wknn => "wknn",
            AlgoName::SrlMean => "srl-mean",
            AlgoName::SrlRank => "srl-rank",
            AlgoName::SrlHist => "srl-hist",
            AlgoName::SrlCombined => "srl-combined",
            AlgoName::SrlCombinedDiff => "srl-combined-diff",
        }
    }

    pub fn config(self, flags: &LocalizerFlags) -> LocalizerConfig {
        let (algorithm, feature) = match self {
            AlgoName::Classic => (Algorithm::ClassicKnn, FeatureKind::Mean),
            AlgoName::Wknn => (Algorithm::Wknn, FeatureKind::Mean),
            AlgoName::SrlMean => (Algorithm::SrlKnn, FeatureKind::Mean),
            AlgoName::SrlRank => (Algorithm::SrlKnn, FeatureKind::Rank),
            AlgoName::SrlHist => (Algorithm::SrlKnnHistogram, FeatureKind::Mean),
            AlgoName::SrlCombined => (Algorithm::SrlKnnCombined, FeatureKind::Rank),
            AlgoName::SrlCombinedDiff => (Algorithm::SrlKnnCombined, FeatureKind::PairDiff),
        };
        LocalizerConfig {
            algorithm,
            k: flags.k,
            n: flags.n,
            sigma: flags.sigma,
            feature,
            refine_feature: FeatureKind::Mean,
            ..LocalizerConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct LocalizerFlags {
    /// Neighbors averaged into each estimate.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// First-stage candidates of the combined localizers.
    #[arg(long, default_value_t = 7)]
    pub n: usize,
    /// Soft range scale, meters.
    #[arg(long, default_value_t = 2.0)]
    pub sigma: f64,
    /// RSSI assigned to unheard APs in queries; defaults to the database's.
    #[arg(long, allow_hyphen_values = true)]
    pub missing_floor: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrajectoryFlags {
    #[arg(long)]
    pub db: PathBuf,
    /// Trajectory CSV files, or directories of them.
    #[arg(long, required = true)]
    pub traj: Vec<PathBuf>,
    /// Seconds between trajectory steps.
    #[arg(long, default_value_t = 1.0)]
    pub dt: f64,
}

#[derive(Debug, Args)]
pub struct LocateArgs {
    #[arg(long)]
    pub db: PathBuf,
    /// Comma-separated readings in database AP order; empty means unheard.
    /// Repeat for several scans.
    #[arg(long, required = true, allow_hyphen_values = true)]
    pub scan: Vec<String>,
    /// Previous position as `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub prev: Option<Point>,
    #[arg(long, value_enum, default_value = "srl-mean")]
    pub algo: AlgoName,
    #[command(flatten)]
    pub localizer: LocalizerFlags,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorArg {
    Estimated,
    Truth,
    Perturbed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StartArg {
    /// The first ground-truth position is the first prior.
    Known,
    /// The first step is located by WKNN.
    Wknn,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: TrajectoryFlags,
    #[arg(long, value_enum, default_values = ["classic", "wknn", "srl-mean", "srl-hist"])]
    pub algo: Vec<AlgoName>,
    #[command(flatten)]
    pub localizer: LocalizerFlags,
    /// estimated | truth | perturbed:E (E in meters)
    #[arg(long, default_value = "estimated", value_parser = parse_prior)]
    pub prior: PriorArg,
    #[arg(long, value_enum, default_value = "known")]
    pub start: StartArg,
    /// Treat steps whose mean readings moved less than this (dB) as
    /// stationary and locate them by WKNN.
    #[arg(long)]
    pub stationary_db: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    pub input: TrajectoryFlags,
    #[arg(long, value_enum, default_value = "srl-hist")]
    pub algo: AlgoName,
    #[command(flatten)]
    pub localizer: LocalizerFlags,
    /// Prior error magnitudes as multiples of sigma.
    #[arg(long, value_delimiter = ',', default_value = "0,0.5,1,1.5,2")]
    pub e_mult: Vec<f64>,
    /// Number of noise seeds per magnitude.
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// First noise seed; the others follow consecutively.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdArg {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Args)]
pub struct AmbiguityArgs {
    #[arg(long)]
    pub db: PathBuf,
    /// auto | a correlation threshold
    #[arg(long, default_value = "auto", value_parser = parse_threshold, allow_hyphen_values = true)]
    pub threshold: ThresholdArg,
    /// Grid size to use when the database has none, or to override it.
    #[arg(long)]
    pub grid_size: Option<f64>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected x,y, got {s:?}"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Point::new(num(x)?, num(y)?))
}

fn parse_prior(s: &str) -> Result<PriorArg, String> {
    match s {
        "estimated" => Ok(PriorArg::Estimated),
        "truth" => Ok(PriorArg::Truth),
        _ => {
            let e = s
                .strip_prefix("perturbed:")
                .ok_or_else(|| format!("expected estimated, truth or perturbed:E, got {s:?}"))?;
            let e: f64 = e.parse().map_err(|err| format!("{e:?}: {err}"))?;
            if !(e.is_finite() && e >= 0.0) {
                return Err(format!("perturbation must be finite and >= 0, got {e}"));
            }
            Ok(PriorArg::Perturbed(e))
        }
    }
}

fn parse_threshold(s: &str) -> Result<ThresholdArg, String> {
    if s == "auto" {
        return Ok(ThresholdArg::Auto);
    }
    let t: f64 = s
        .parse()
        .map_err(|e| format!("expected auto or a number, got {s:?}: {e}"))?;
    if !(-1.0..=1.0).contains(&t) {
        return Err(format!("threshold must lie in [-1, 1], got {t}"));
    }
    Ok(ThresholdArg::Fixed(t))
}
