//! Loader for the published UJIIndoorLoc CSV files.
//!
//! Each file has a header row and 529 columns: `WAP001`..`WAP520`, then
//! `LONGITUDE`, `LATITUDE`, `FLOOR`, `BUILDINGID`, `SPACEID`,
//! `RELATIVEPOSITION`, `USERID`, `PHONEID`, `TIMESTAMP`. An RSSI of `100`
//! means the WAP was not detected; detected values lie in `[-104, 0]`.
//!
//! Training rows sharing `(LONGITUDE, LATITUDE, FLOOR, BUILDINGID)` form one
//! reference point. Validation rows of each selected phone, ordered by
//! timestamp, are cut into one trajectory per contiguous run on one
//! `(BUILDINGID, FLOOR)`; every row is one single-scan step.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{Trajectory, TrajectoryStep};
use crate::fingerprint::{ApId, FingerprintDatabase, MissingValuePolicy, RssiScan};
use crate::geometry::Point;

pub const UJI_WAP_COUNT: usize = 520;
/// Reading that marks an undetected WAP.
pub const UJI_NOT_DETECTED: f64 = 100.0;
/// Weakest RSSI the dataset reports, used as the default unheard floor.
pub const UJI_MIN_RSSI: f64 = -104.0;

const META_COLUMNS: [&str; 9] = [
    "LONGITUDE",
    "LATITUDE",
    "FLOOR",
    "BUILDINGID",
    "SPACEID",
    "RELATIVEPOSITION",
    "USERID",
    "PHONEID",
    "TIMESTAMP",
];

/// One row of a UJIIndoorLoc file.
#[derive(Debug, Clone, PartialEq)]
pub struct UjiRecord {
    pub rssi: Vec<Option<f64>>,
    pub longitude: f64,
    pub latitude: f64,
    pub floor: i32,
    pub building: u32,
    pub space_id: u32,
    pub relative_position: u32,
    pub user_id: u32,
    pub phone_id: u32,
    pub timestamp: u64,
    /// 1-based line number in the source file.
    pub line: u64,
}

impl UjiRecord {
    pub fn location(&self) -> Point {
        Point::new(self.longitude, self.latitude)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UjiFilter {
    pub building: Option<u32>,
    pub floor: Option<i32>,
    /// Phones whose validation rows become trajectories; `None` keeps all.
    pub phone_ids: Option<Vec<u32>>,
}

impl UjiFilter {
    fn keeps_place(&self, r: &UjiRecord) -> bool {
        self.building.is_none_or(|b| b == r.building) && self.floor.is_none_or(|f| f == r.floor)
    }

    fn keeps_phone(&self, r: &UjiRecord) -> bool {
        self.phone_ids
            .as_ref()
            .is_none_or(|ids| ids.contains(&r.phone_id))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UjiTrajectory {
    pub phone_id: u32,
    pub building: u32,
    pub floor: i32,
    pub trajectory: Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UjiDataset {
    pub database: FingerprintDatabase,
    pub trajectories: Vec<UjiTrajectory>,
}

fn parse_err(path: &Path, line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Reads every row of a UJIIndoorLoc CSV file.
pub fn read_uji_csv(path: &Path) -> Result<Vec<UjiRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_err(path, 0, "", format!("{other:?}")),
        })?;
    let headers = rdr
        .headers()
        .map_err(|e| parse_err(path, 1, "", e.to_string()))?
        .clone();
    if headers.len() != UJI_WAP_COUNT + META_COLUMNS.len() {
        return Err(parse_err(
            path,
            1,
            "",
            format!(
                "expected {} columns, found {}",
                UJI_WAP_COUNT + META_COLUMNS.len(),
                headers.len()
            ),
        ));
    }
    for (i, h) in headers.iter().enumerate() {
        let expected = if i < UJI_WAP_COUNT {
            format!("WAP{:03}", i + 1)
        } else {
            META_COLUMNS[i - UJI_WAP_COUNT].to_string()
        };
        if h != expected {
            return Err(parse_err(path, 1, h, format!("expected column {expected}")));
        }
    }

    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, "", e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let col = |i: usize| &headers[i];
        let float = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| parse_err(path, line, col(i), e.to_string()))
        };
        let int = |i: usize| -> Result<i64> {
            record[i]
                .parse::<i64>()
                .map_err(|e| parse_err(path, line, col(i), e.to_string()))
        };
        let unsigned = |i: usize| -> Result<u32> {
            u32::try_from(int(i)?).map_err(|e| parse_err(path, line, col(i), e.to_string()))
        };

        let mut rssi = Vec::with_capacity(UJI_WAP_COUNT);
        for i in 0..UJI_WAP_COUNT {
            let v = float(i)?;
            if v == UJI_NOT_DETECTED {
                rssi.push(None);
            } else if (UJI_MIN_RSSI..=0.0).contains(&v) {
                rssi.push(Some(v));
            } else {
                return Err(parse_err(
                    path,
                    line,
                    col(i),
                    format!("RSSI {v} out of range"),
                ));
            }
        }
        let m = UJI_WAP_COUNT;
        let floor = i32::try_from(int(m + 2)?)
            .map_err(|e| parse_err(path, line, col(m + 2), e.to_string()))?;
        let timestamp = u64::try_from(int(m + 8)?)
            .map_err(|e| parse_err(path, line, col(m + 8), e.to_string()))?;
        let rec = UjiRecord {
            rssi,
            longitude: float(m)?,
            latitude: float(m + 1)?,
            floor,
            building: unsigned(m + 3)?,
            space_id: unsigned(m + 4)?,
            relative_position: unsigned(m + 5)?,
            user_id: unsigned(m + 6)?,
            phone_id: unsigned(m + 7)?,
            timestamp,
            line,
        };
        if !rec.location().is_finite() {
            return Err(parse_err(path, line, "LONGITUDE", "non-finite coordinate"));
        }
        out.push(rec);
    }
    Ok(out)
}

fn uji_aps() -> Vec<ApId> {
    (0..UJI_WAP_COUNT)
        .map(|i| ApId::new(i, format!("WAP{:03}", i + 1)))
        .collect()
}

/// Groups training rows into reference points, in order of first
/// appearance.
pub fn group_reference_points(records: &[UjiRecord]) -> Vec<(Point, u32, i32, Vec<RssiScan>)> {
    let mut index: BTreeMap<(u64, u64, i32, u32), usize> = BTreeMap::new();
    let mut groups: Vec<(Point, u32, i32, Vec<RssiScan>)> = Vec::new();
    for r in records {
        let key = (
            r.longitude.to_bits(),
            r.latitude.to_bits(),
            r.floor,
            r.building,
        );
        let slot = *index.entry(key).or_insert_with(|| {
            groups.push((r.location(), r.building, r.floor, Vec::new()));
            groups.len() - 1
        });
        groups[slot].3.push(RssiScan::new(r.rssi.clone()));
    }
    groups
}

/// Median distance from each reference point to its nearest neighbor on
/// the same building and floor.
fn median_spacing(groups: &[(Point, u32, i32, Vec<RssiScan>)]) -> Option<f64> {
    let mut nearest: Vec<f64> = groups
        .iter()
        .enumerate()
        .filter_map(|(i, (p, b, f, _))| {
            groups
                .iter()
                .enumerate()
                .filter(|(j, (_, bj, fj, _))| *j != i && bj == b && fj == f)
                .map(|(_, (q, ..))| p.distance(q))
                .filter(|&d| d > 0.0)
                .reduce(f64::min)
        })
        .collect();
    if nearest.is_empty() {
        return None;
    }
    nearest.sort_by(f64::total_cmp);
    Some(nearest[nearest.len() / 2])
}

/// Cuts validation rows into per-phone, per-floor trajectories.
pub fn validation_trajectories(records: &[UjiRecord], filter: &UjiFilter) -> Vec<UjiTrajectory> {
    let mut by_phone: BTreeMap<u32, Vec<&UjiRecord>> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| filter.keeps_place(r) && filter.keeps_phone(r))
    {
        by_phone.entry(r.phone_id).or_default().push(r);
    }
    let mut out = Vec::new();
    for (phone_id, mut rows) in by_phone {
        rows.sort_by_key(|r| r.timestamp);
        let mut start = 0;
        while start < rows.len() {
            let (b, f) = (rows[start].building, rows[start].floor);
            let mut end = start;
            while end < rows.len() && rows[end].building == b && rows[end].floor == f {
                end += 1;
            }
            let steps = rows[start..end]
                .iter()
                .map(|r| TrajectoryStep {
                    truth: r.location(),
                    scans: vec![RssiScan::new(r.rssi.clone())],
                })
                .collect();
            out.push(UjiTrajectory {
                phone_id,
                building: b,
                floor: f,
                trajectory: Trajectory::new(steps, 1.0),
            });
            start = end;
        }
    }
    out
}

/// Loads the training file as a database and the validation file as
/// trajectories. The database grid size is the median nearest-neighbor
/// spacing of its reference points.
pub fn load_ujiindoorloc(
    training_path: &Path,
    validation_path: &Path,
    filter: &UjiFilter,
    policy: MissingValuePolicy,
) -> Result<UjiDataset> {
    let training: Vec<UjiRecord> = read_uji_csv(training_path)?
        .into_iter()
        .filter(|r| filter.keeps_place(r))
        .collect();
    if training.is_empty() {
        return Err(Error::EmptyAfterFilter(format!(
            "no training rows in {} match {filter:?}",
            training_path.display()
        )));
    }
    let validation = read_uji_csv(validation_path)?;
    let trajectories = validation_trajectories(&validation, filter);
    if trajectories.is_empty() {
        return Err(Error::EmptyAfterFilter(format!(
            "no validation rows in {} match {filter:?}",
            validation_path.display()
        )));
    }
    let groups = group_reference_points(&training);
    let grid = median_spacing(&groups);
    let database = FingerprintDatabase::from_scans(
        uji_aps(),
        groups.into_iter().map(|(p, _, _, scans)| (p, scans)),
        grid,
        policy,
    )?;
    Ok(UjiDataset {
        database,
        trajectories,
    })
}

/// Default missing-value handling for UJIIndoorLoc.
pub fn uji_default_policy() -> MissingValuePolicy {
    MissingValuePolicy::Substitute {
        floor: UJI_MIN_RSSI,
    }
}
