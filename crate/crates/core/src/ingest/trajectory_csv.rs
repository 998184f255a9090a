//! Trajectory CSV: header `step,x,y,<AP label>...`, one row per scan.
//! Consecutive rows with the same `step` are the scans of one step. An
//! unheard AP is an empty cell.

use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::{Trajectory, TrajectoryStep};
use crate::fingerprint::{ApId, RssiScan};
use crate::geometry::Point;

/// Renders a trajectory as CSV text.
pub fn trajectory_to_csv(traj: &Trajectory, aps: &[ApId]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_string(), "x".to_string(), "y".to_string()];
    header.extend(aps.iter().map(|a| a.label.clone()));
    w.write_record(&header).map_err(csv_io)?;
    for (i, step) in traj.steps.iter().enumerate() {
        for scan in &step.scans {
            if scan.len() != aps.len() {
                return Err(Error::LengthMismatch {
                    expected: aps.len(),
                    found: scan.len(),
                });
            }
            let mut row = vec![
                i.to_string(),
                step.truth.x.to_string(),
                step.truth.y.to_string(),
            ];
            row.extend(
                scan.readings
                    .iter()
                    .map(|r| r.map(|v| v.to_string()).unwrap_or_default()),
            );
            w.write_record(&row).map_err(csv_io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| csv_io(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_io(e: csv::Error) -> Error {
    Error::io("<memory>", std::io::Error::other(e))
}

pub fn write_trajectory_csv(traj: &Trajectory, aps: &[ApId], path: &Path) -> Result<()> {
    super::persist::write_atomic(path, trajectory_to_csv(traj, aps)?.as_bytes())
}

/// Reads a trajectory CSV. `dt` is not stored in the file and is supplied
/// by the caller.
pub fn read_trajectory_csv(path: &Path, dt: f64) -> Result<Trajectory> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => parse_err(path, 0, "", format!("{other:?}")),
    })?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, "", e.to_string()))?
        .clone();
    if headers.len() < 4 || &headers[0] != "step" || &headers[1] != "x" || &headers[2] != "y" {
        return Err(parse_err(
            path,
            1,
            "",
            "expected header step,x,y followed by at least one AP column".into(),
        ));
    }
    let p = headers.len() - 3;

    let mut steps: Vec<TrajectoryStep> = Vec::new();
    let mut last_step: Option<u64> = None;
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, "", e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(path, line, &headers[i], e.to_string()))
        };
        let step_no: u64 = record[0]
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| parse_err(path, line, "step", e.to_string()))?;
        let truth = Point::new(field(1)?, field(2)?);
        let mut readings = Vec::with_capacity(p);
        for i in 3..headers.len() {
            let cell = record[i].trim();
            readings.push(if cell.is_empty() {
                None
            } else {
                Some(field(i)?)
            });
        }
        let scan = RssiScan::new(readings);
        if last_step == Some(step_no) {
            let current = steps.last_mut().expect("a step exists");
            if current.truth != truth {
                return Err(parse_err(
                    path,
                    line,
                    "x",
                    format!("scans of step {step_no} disagree on the position"),
                ));
            }
            current.scans.push(scan);
        } else {
            steps.push(TrajectoryStep {
                truth,
                scans: vec![scan],
            });
            last_step = Some(step_no);
        }
    }
    if steps.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    Ok(Trajectory::new(steps, dt))
}

fn parse_err(path: &Path, line: u64, column: &str, message: String) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message,
    }
}
