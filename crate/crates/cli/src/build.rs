use srlknn_core::fingerprint::MissingValuePolicy;
use srlknn_core::ingest::{
    database_to_json, generate_synthetic, load_ujiindoorloc, read_survey_csv, trajectory_to_csv,
    SynthConfig, UjiFilter,
};
use srlknn_core::{FingerprintDatabase, Trajectory};

use crate::args::{BuildSource, RawScansArgs, SyntheticArgs, UjiArgs};
use crate::error::{CliResult, Context};
use crate::manifest::{read_input, FileDigest, Outputs};

pub const DB_FILE: &str = "db.json";
pub const TRAJECTORY_DIR: &str = "trajectories";

pub fn run(source: &BuildSource, command: Vec<String>) -> CliResult<()> {
    match source {
        BuildSource::Uji(a) => uji(a, command),
        BuildSource::Synthetic(a) => synthetic(a, command),
        BuildSource::RawScans(a) => raw_scans(a, command),
    }
}

fn summarize(db: &FingerprintDatabase, trajectories: usize) {
    let grid = db
        .grid_size()
        .map_or_else(|| "none".to_string(), |g| g.to_string());
    println!(
        "M={} P={} grid_size={} trajectories={}",
        db.len(),
        db.ap_count(),
        grid,
        trajectories
    );
}

fn stage(
    out: &mut Outputs,
    db: &FingerprintDatabase,
    trajectories: &[(String, &Trajectory)],
) -> CliResult<()> {
    out.add(DB_FILE, database_to_json(db));
    for (name, traj) in trajectories {
        let text = trajectory_to_csv(traj, db.aps()).context(|| format!("trajectory {name}"))?;
        out.add(format!("{TRAJECTORY_DIR}/{name}.csv"), text);
    }
    Ok(())
}

fn uji(a: &UjiArgs, command: Vec<String>) -> CliResult<()> {
    let filter = UjiFilter {
        building: a.building,
        floor: a.floor,
        phone_ids: (!a.phones.is_empty()).then(|| a.phones.clone()),
    };
    let policy = MissingValuePolicy::Substitute {
        floor: a.missing_floor,
    };
    let (_, train_digest) = read_input("training", &a.training)?;
    let (_, valid_digest) = read_input("validation", &a.validation)?;
    let data = load_ujiindoorloc(&a.training, &a.validation, &filter, policy)
        .context(|| "loading UJIIndoorLoc".to_string())?;
    log::info!(
        "{} trajectories from the validation file",
        data.trajectories.len()
    );

    let named: Vec<(String, &Trajectory)> = data
        .trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| {
            (
                format!("phone{}_b{}_f{}_{:04}", t.phone_id, t.building, t.floor, i),
                &t.trajectory,
            )
        })
        .collect();
    let mut out = Outputs::new(&a.out_dir);
    stage(&mut out, &data.database, &named)?;
    let config = serde_json::json!({
        "source": "uji",
        "filter": filter,
        "missing_policy": policy,
        "grid_size": data.database.grid_size(),
    });
    out.commit(command, config, vec![], vec![train_digest, valid_digest])?;
    summarize(&data.database, named.len());
    Ok(())
}

fn synthetic(a: &SyntheticArgs, command: Vec<String>) -> CliResult<()> {
    let base = if a.no_twin {
        SynthConfig {
            seed: a.seed,
            ..SynthConfig::default()
        }
    } else {
        SynthConfig::with_planted_twin(a.seed)
    };
    let cfg = SynthConfig {
        trajectory_count: a.trajectories,
        steps_per_trajectory: a.steps,
        scans_per_rp: a.scans_per_rp,
        scans_per_step: a.scans_per_step,
        shadowing_std: a.shadow,
        grid_spacing: a.grid,
        ..base
    };
    let data = generate_synthetic(&cfg).context(|| "generating synthetic data".to_string())?;
    let named: Vec<(String, &Trajectory)> = data
        .trajectories
        .iter()
        .enumerate()
        .map(|(i, t)| (format!("synthetic_{i:03}"), t))
        .collect();
    let mut out = Outputs::new(&a.out_dir);
    stage(&mut out, &data.database, &named)?;
    let config = serde_json::json!({ "source": "synthetic", "synthetic": cfg });
    out.commit(command, config, vec![a.seed], vec![])?;
    summarize(&data.database, named.len());
    Ok(())
}

fn raw_scans(a: &RawScansArgs, command: Vec<String>) -> CliResult<()> {
    let (_, digest): (Vec<u8>, FileDigest) = read_input("scans", &a.scans)?;
    let survey = read_survey_csv(&a.scans).context(|| "reading the survey".to_string())?;
    let policy = MissingValuePolicy::Substitute {
        floor: a.missing_floor,
    };
    let db = FingerprintDatabase::from_scans(survey.aps, survey.points, a.grid_size, policy)
        .context(|| format!("building a database from {}", a.scans.display()))?;
    let mut out = Outputs::new(&a.out_dir);
    stage(&mut out, &db, &[])?;
    let config = serde_json::json!({
        "source": "raw-scans",
        "grid_size": a.grid_size,
        "missing_policy": policy,
    });
    out.commit(command, config, vec![], vec![digest])?;
    summarize(&db, 0);
    Ok(())
}
