use std::fmt::Write as _;

use srlknn_core::evaluation::{ambiguity_analysis, ThresholdMode};

use crate::args::{AmbiguityArgs, ThresholdArg};
use crate::error::{CliError, CliResult, Context};
use crate::evaluate::load_db;
use crate::manifest::Outputs;

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn run(a: &AmbiguityArgs, command: Vec<String>) -> CliResult<()> {
    let (db, digest) = load_db(&a.db)?;
    let db = match a.grid_size {
        Some(g) => db
            .with_grid_size(Some(g))
            .context(|| "--grid-size".to_string())?,
        None if db.grid_size().is_none() => {
            return Err(CliError::Usage(format!(
                "{} has no grid size; pass --grid-size",
                a.db.display()
            )))
        }
        None => db,
    };
    let mode = match a.threshold {
        ThresholdArg::Auto => ThresholdMode::Auto,
        ThresholdArg::Fixed(t) => ThresholdMode::Fixed(t),
    };
    let report = ambiguity_analysis(&db, mode).context(|| "ambiguity analysis".to_string())?;

    let mode_name = match mode {
        ThresholdMode::Auto => "auto".to_string(),
        ThresholdMode::Fixed(t) => t.to_string(),
    };
    let header = format!(
        "# threshold={} mean_threshold={} grid_size={} reference_points={} ambiguous_points={} mean_max_distance={} mean_mean_distance={} max_distance={}\n",
        mode_name,
        report.mean_threshold,
        report.grid_size,
        report.points.len(),
        report.ambiguous_rp_count,
        opt(report.mean_max_distance),
        opt(report.mean_mean_distance),
        opt(report.overall_max_distance),
    );
    let mut per_rp = header.clone();
    per_rp.push_str("rp,x,y,threshold,ambiguous_count,max_distance,mean_distance\n");
    let mut pairs = String::from("rp,other,correlation,distance\n");
    for p in &report.points {
        writeln!(
            per_rp,
            "{},{},{},{},{},{},{}",
            p.rp_index,
            p.location.x,
            p.location.y,
            p.threshold,
            p.ambiguous.len(),
            opt(p.max_distance),
            opt(p.mean_distance)
        )
        .unwrap();
        for q in &p.ambiguous {
            writeln!(
                pairs,
                "{},{},{},{}",
                p.rp_index, q.rp_index, q.correlation, q.distance
            )
            .unwrap();
        }
    }

    let mut out = Outputs::new(&a.out_dir);
    out.add("ambiguity.csv", per_rp);
    out.add("ambiguous_pairs.csv", pairs);
    let config = serde_json::json!({ "threshold": mode, "grid_size": report.grid_size });
    out.commit(command, config, vec![], vec![digest])?;
    print!("{header}");
    Ok(())
}
