use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use srlknn_core::evaluation::{
    perturbation_study, pooled_summary, replay_all, ErrorCdf, ErrorSummary, PerturbationSpec,
};
use srlknn_core::ingest::{database_from_json, read_trajectory_csv};
use srlknn_core::{
    locate, query_fingerprint, FingerprintDatabase, LocalizerConfig, MissingValuePolicy, PriorMode,
    ReplayOptions, RssiScan, StartPrior, Trajectory, TrajectoryResult,
};

use crate::args::{
    AlgoName, EvaluateArgs, LocalizerFlags, LocateArgs, PerturbArgs, PriorArg, StartArg,
    TrajectoryFlags,
};
use crate::error::{CliError, CliResult, Context};
use crate::manifest::{read_input, FileDigest, Outputs, MANIFEST_FILE};

pub fn load_db(path: &Path) -> CliResult<(FingerprintDatabase, FileDigest)> {
    let (bytes, digest) = read_input("database", path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Usage(format!("{}: database is not UTF-8", path.display())))?;
    let db = database_from_json(&text).context(|| format!("loading {}", path.display()))?;
    Ok((db, digest))
}

/// Trajectory files named on the command line; directories contribute
/// their `.csv` files in name order.
fn trajectory_files(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|e| {
                CliError::core(
                    "listing trajectories",
                    srlknn_core::Error::Io {
                        path: p.clone(),
                        source: e,
                    },
                )
            })?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "csv"))
                .collect();
            found.sort();
            if found.is_empty() {
                return Err(CliError::Usage(format!(
                    "{}: no .csv trajectories",
                    p.display()
                )));
            }
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    Ok(files)
}

pub struct Loaded {
    pub db: FingerprintDatabase,
    pub names: Vec<String>,
    pub trajectories: Vec<Trajectory>,
    pub inputs: Vec<FileDigest>,
}

pub fn load_inputs(flags: &TrajectoryFlags) -> CliResult<Loaded> {
    if !(flags.dt.is_finite() && flags.dt > 0.0) {
        return Err(CliError::Usage(format!(
            "--dt must be > 0, got {}",
            flags.dt
        )));
    }
    let (db, db_digest) = load_db(&flags.db)?;
    let mut inputs = vec![db_digest];
    let mut names = Vec::new();
    let mut trajectories = Vec::new();
    for file in trajectory_files(&flags.traj)? {
        let (_, digest) = read_input("trajectory", &file)?;
        let traj = read_trajectory_csv(&file, flags.dt)
            .context(|| format!("reading {}", file.display()))?;
        if let Some(bad) = traj
            .steps
            .iter()
            .flat_map(|s| &s.scans)
            .find(|s| s.len() != db.ap_count())
        {
            return Err(CliError::Usage(format!(
                "{}: scans have {} AP columns, database {} has {}",
                file.display(),
                bad.len(),
                flags.db.display(),
                db.ap_count()
            )));
        }
        names.push(file.file_stem().map_or_else(
            || file.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        ));
        trajectories.push(traj);
        inputs.push(digest);
    }
    Ok(Loaded {
        db,
        names,
        trajectories,
        inputs,
    })
}

fn localizer_config(
    algo: AlgoName,
    flags: &LocalizerFlags,
    db: &FingerprintDatabase,
) -> CliResult<LocalizerConfig> {
    if !(flags.sigma.is_finite() && flags.sigma > 0.0) {
        return Err(CliError::Usage(format!(
            "--sigma must be > 0, got {}",
            flags.sigma
        )));
    }
    if flags.k == 0 || flags.k > db.len() {
        return Err(CliError::Usage(format!(
            "--k must lie in 1..={} for this database, got {}",
            db.len(),
            flags.k
        )));
    }
    let mut cfg = algo.config(flags);
    cfg.missing_policy = match flags.missing_floor {
        Some(floor) => MissingValuePolicy::Substitute { floor },
        None => db.missing_policy(),
    };
    Ok(cfg)
}

#[derive(Serialize)]
struct NamedSummary<'a> {
    trajectory: &'a str,
    summary: ErrorSummary,
}

#[derive(Serialize)]
struct AlgorithmReport<'a> {
    manifest: &'static str,
    algorithm: &'static str,
    config: LocalizerConfig,
    summary: ErrorSummary,
    trajectories: Vec<NamedSummary<'a>>,
    /// `(error_m, cumulative_fraction)` over all steps.
    cdf: Vec<(f64, f64)>,
}

fn steps_csv(names: &[String], results: &[TrajectoryResult]) -> String {
    let mut s = String::from("trajectory,step,truth_x,truth_y,est_x,est_y,error\n");
    for (name, r) in names.iter().zip(results) {
        for st in &r.steps {
            writeln!(
                s,
                "{},{},{},{},{},{},{}",
                name, st.step, st.truth.x, st.truth.y, st.estimate.x, st.estimate.y, st.error
            )
            .unwrap();
        }
    }
    s
}

pub fn comparison_tables(rows: &[(&str, ErrorSummary)], header: &str) -> (String, String) {
    let mut txt = format!("{header}\n");
    writeln!(
        txt,
        "{:<18} {:>8} {:>8} {:>8} {:>8} {:>7}",
        "algorithm", "mean", "std", "p80", "max", "steps"
    )
    .unwrap();
    let mut csv = String::from("algorithm,count,mean,std,p80,max\n");
    for (label, s) in rows {
        writeln!(
            txt,
            "{:<18} {:>8.3} {:>8.3} {:>8.3} {:>8.3} {:>7}",
            label, s.mean, s.std, s.p80, s.max, s.count
        )
        .unwrap();
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            label, s.count, s.mean, s.std, s.p80, s.max
        )
        .unwrap();
    }
    (txt, csv)
}

fn prior_mode(prior: PriorArg, seed: u64) -> CliResult<PriorMode> {
    Ok(match prior {
        PriorArg::Estimated => PriorMode::Estimated,
        PriorArg::Truth => PriorMode::Truth,
        PriorArg::Perturbed(e) => PriorMode::PerturbedTruth(
            PerturbationSpec::isotropic(e, seed).context(|| "--prior".to_string())?,
        ),
    })
}

pub fn evaluate(a: &EvaluateArgs, command: Vec<String>) -> CliResult<()> {
    let input = load_inputs(&a.input)?;
    let mut algos = a.algo.clone();
    algos.dedup();
    let opts = ReplayOptions {
        prior_mode: prior_mode(a.prior, a.seed)?,
        start: match a.start {
            StartArg::Known => StartPrior::Known,
            StartArg::Wknn => StartPrior::WknnFallback,
        },
        stationary_threshold_db: a.stationary_db,
    };

    let mut out = Outputs::new(&a.out_dir);
    let mut rows = Vec::new();
    let mut configs = Vec::new();
    for algo in &algos {
        let cfg = localizer_config(*algo, &a.localizer, &input.db)?;
        let results = replay_all(&input.db, &input.trajectories, &cfg, &opts)
            .context(|| format!("replaying with {}", algo.label()))?;
        let summary = pooled_summary(&results)
            .ok_or_else(|| CliError::core("replaying", srlknn_core::Error::EmptyTrajectory))?;
        let errors: Vec<f64> = results.iter().flat_map(|r| r.errors()).collect();
        let report = AlgorithmReport {
            manifest: MANIFEST_FILE,
            algorithm: algo.label(),
            config: cfg,
            summary,
            trajectories: input
                .names
                .iter()
                .zip(&results)
                .map(|(n, r)| NamedSummary {
                    trajectory: n,
                    summary: r.summary,
                })
                .collect(),
            cdf: ErrorCdf::new(&errors)
                .map(|c| c.points())
                .unwrap_or_default(),
        };
        out.add(
            format!("{}_steps.csv", algo.label()),
            steps_csv(&input.names, &results),
        );
        out.add_json(format!("{}_summary.json", algo.label()), &report);
        log::info!("{}: mean error {:.3} m", algo.label(), summary.mean);
        rows.push((algo.label(), summary));
        configs.push(serde_json::json!({ "algorithm": algo.label(), "config": cfg }));
    }

    let (txt, csv) = comparison_tables(
        &rows,
        &format!(
            "# {} trajectories, results described by {MANIFEST_FILE}",
            input.trajectories.len()
        ),
    );
    out.add("comparison.txt", txt.clone());
    out.add("comparison.csv", csv);
    let config = serde_json::json!({
        "localizers": configs,
        "replay": opts,
        "dt": a.input.dt,
    });
    out.commit(command, config, vec![a.seed], input.inputs)?;
    print!("{txt}");
    Ok(())
}

pub fn perturb(a: &PerturbArgs, command: Vec<String>) -> CliResult<()> {
    let input = load_inputs(&a.input)?;
    if a.seeds == 0 {
        return Err(CliError::Usage("--seeds must be >= 1".into()));
    }
    if let Some(bad) = a.e_mult.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
        return Err(CliError::Usage(format!(
            "--e-mult values must be >= 0, got {bad}"
        )));
    }
    let cfg = localizer_config(a.algo, &a.localizer, &input.db)?;
    let seeds: Vec<u64> = (0..a.seeds).map(|i| a.seed.wrapping_add(i)).collect();
    let magnitudes: Vec<f64> = a.e_mult.iter().map(|m| m * cfg.sigma).collect();

    let truth = replay_all(
        &input.db,
        &input.trajectories,
        &cfg,
        &ReplayOptions::new(PriorMode::Truth),
    )
    .context(|| "replaying with the true prior".to_string())?;
    let truth_summary = pooled_summary(&truth)
        .ok_or_else(|| CliError::core("replaying", srlknn_core::Error::EmptyTrajectory))?;
    let rows = perturbation_study(&input.db, &input.trajectories, &cfg, &magnitudes, &seeds)
        .context(|| "perturbation study".to_string())?;

    let mut csv = String::from("prior,e_mult,e_m,mean_error,mean_error_variance,mean_p80,mean_max");
    for s in &seeds {
        write!(csv, ",seed_{s}_mean").unwrap();
    }
    csv.push('\n');
    write!(
        csv,
        "truth,,,{},0,{},{}",
        truth_summary.mean, truth_summary.p80, truth_summary.max
    )
    .unwrap();
    for _ in &seeds {
        write!(csv, ",{}", truth_summary.mean).unwrap();
    }
    csv.push('\n');
    let mut cdf = String::from("e_mult,error,fraction\n");
    let mut table = format!(
        "# {} with a perturbed prior, sigma = {} m, {} seeds\n{:<8} {:>8} {:>10} {:>12} {:>8} {:>8}\n",
        a.algo.label(),
        cfg.sigma,
        seeds.len(),
        "E/sigma",
        "E (m)",
        "mean",
        "seed var",
        "p80",
        "max"
    );
    writeln!(
        table,
        "{:<8} {:>8} {:>10.3} {:>12} {:>8.3} {:>8.3}",
        "truth", "-", truth_summary.mean, "-", truth_summary.p80, truth_summary.max
    )
    .unwrap();
    for (mult, row) in a.e_mult.iter().zip(&rows) {
        write!(
            csv,
            "perturbed,{},{},{},{},{},{}",
            mult,
            row.magnitude,
            row.mean_error,
            row.mean_error_variance,
            row.mean_p80,
            row.mean_max
        )
        .unwrap();
        for s in &row.per_seed {
            write!(csv, ",{}", s.summary.mean).unwrap();
        }
        csv.push('\n');
        if let Some(c) = ErrorCdf::new(&row.errors) {
            for (e, f) in c.points() {
                writeln!(cdf, "{mult},{e},{f}").unwrap();
            }
        }
        writeln!(
            table,
            "{:<8} {:>8.3} {:>10.3} {:>12.5} {:>8.3} {:>8.3}",
            mult,
            row.magnitude,
            row.mean_error,
            row.mean_error_variance,
            row.mean_p80,
            row.mean_max
        )
        .unwrap();
    }

    let mut out = Outputs::new(&a.out_dir);
    out.add("perturb.csv", csv);
    out.add("perturb_cdf.csv", cdf);
    out.add("perturb.txt", table.clone());
    let config = serde_json::json!({
        "algorithm": a.algo.label(),
        "localizer": cfg,
        "e_mult": a.e_mult,
        "dt": a.input.dt,
    });
    out.commit(command, config, seeds, input.inputs)?;
    print!("{table}");
    Ok(())
}

fn parse_scan(text: &str, p: usize) -> CliResult<RssiScan> {
    let readings = text
        .split(',')
        .map(|cell| {
            let cell = cell.trim();
            if cell.is_empty() {
                Ok(None)
            } else {
                cell.parse::<f64>()
                    .map(Some)
                    .map_err(|e| CliError::Usage(format!("--scan {text:?}: {cell:?}: {e}")))
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    if readings.len() != p {
        return Err(CliError::Usage(format!(
            "--scan has {} readings, the database has {p} APs",
            readings.len()
        )));
    }
    Ok(RssiScan::new(readings))
}

pub fn locate_once(a: &LocateArgs) -> CliResult<()> {
    let (db, _) = load_db(&a.db)?;
    let cfg = localizer_config(a.algo, &a.localizer, &db)?;
    let scans = a
        .scan
        .iter()
        .map(|s| parse_scan(s, db.ap_count()))
        .collect::<CliResult<Vec<_>>>()?;
    let query = query_fingerprint(&scans, cfg.missing_policy).context(|| "--scan".to_string())?;
    let est = locate(&db, &query, a.prev, &cfg).context(|| a.algo.label().to_string())?;
    let neighbors: Vec<serde_json::Value> = est
        .neighbors
        .iter()
        .map(|n| {
            let l = db.points()[n.rp_index].location;
            serde_json::json!({ "rp_index": n.rp_index, "distance": n.distance, "x": l.x, "y": l.y })
        })
        .collect();
    let report = serde_json::json!({
        "algorithm": a.algo.label(),
        "x": est.location.x,
        "y": est.location.y,
        "neighbors": neighbors,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("serializes")
    );
    Ok(())
}
