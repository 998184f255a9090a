//! Survey CSV: header `x,y,<AP label>...`, one row per scan. Rows with the
//! same coordinates are the scans of one reference point, in order of
//! first appearance. An unheard AP is an empty cell.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fingerprint::{ApId, RssiScan};
use crate::geometry::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct Survey {
    pub aps: Vec<ApId>,
    pub points: Vec<(Point, Vec<RssiScan>)>,
}

pub fn read_survey_csv(path: &Path) -> Result<Survey> {
    let parse_err = |line: u64, column: &str, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => parse_err(0, "", format!("{other:?}")),
    })?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(1, "", e.to_string()))?
        .clone();
    if headers.len() < 3 || &headers[0] != "x" || &headers[1] != "y" {
        return Err(parse_err(
            1,
            "",
            "expected header x,y followed by at least one AP column".into(),
        ));
    }
    let aps: Vec<ApId> = headers
        .iter()
        .skip(2)
        .enumerate()
        .map(|(i, label)| ApId::new(i, label))
        .collect();

    let mut slots: HashMap<(u64, u64), usize> = HashMap::new();
    let mut points: Vec<(Point, Vec<RssiScan>)> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, "", e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|e| parse_err(line, &headers[i], e.to_string()))
        };
        let loc = Point::new(field(0)?, field(1)?);
        let mut readings = Vec::with_capacity(aps.len());
        for i in 2..headers.len() {
            let cell = record[i].trim();
            readings.push(if cell.is_empty() {
                None
            } else {
                Some(field(i)?)
            });
        }
        let key = (loc.x.to_bits(), loc.y.to_bits());
        let slot = *slots.entry(key).or_insert_with(|| {
            points.push((loc, Vec::new()));
            points.len() - 1
        });
        points[slot].1.push(RssiScan::new(readings));
    }
    if points.is_empty() {
        return Err(Error::EmptyAfterFilter(format!(
            "{} has no scans",
            path.display()
        )));
    }
    Ok(Survey { aps, points })
}
