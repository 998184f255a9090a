//! Native database file: a versioned JSON document.
//!
//! ```json
//! {
//!   "format": "srlknn-fingerprint-db",
//!   "version": 1,
//!   "grid_size": 1.0,
//!   "missing_policy": { "mode": "substitute", "floor": -100.0 },
//!   "aps": [ { "index": 0, "label": "AP0" } ],
//!   "points": [
//!     { "x": 0.0, "y": 0.0, "scan_count": 100,
//!       "mean": [-52.31], "std": [3.9],
//!       "histogram": [ { "-58": 3, "-57": 5 } ] }
//!   ]
//! }
//! ```
//!
//! Histograms hold raw counts keyed by integer dBm bin, so the scan count
//! and every bin probability are recovered exactly. Ranks and pair
//! differences are derived from `mean` on load. `grid_size` may be `null`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fingerprint::{
    ApHistogram, ApId, Fingerprint, FingerprintDatabase, MissingValuePolicy, ReferencePoint,
    RssiHistogram,
};
use crate::geometry::Point;

pub const DB_FORMAT: &str = "srlknn-fingerprint-db";
pub const DB_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DbDocument {
    format: String,
    version: u32,
    grid_size: Option<f64>,
    missing_policy: MissingValuePolicy,
    aps: Vec<ApId>,
    points: Vec<PointDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDocument {
    x: f64,
    y: f64,
    scan_count: usize,
    mean: Vec<f64>,
    std: Vec<f64>,
    histogram: Vec<BTreeMap<i32, u32>>,
}

/// Serializes a database to the native JSON document.
pub fn database_to_json(db: &FingerprintDatabase) -> String {
    let doc = DbDocument {
        format: DB_FORMAT.to_string(),
        version: DB_VERSION,
        grid_size: db.grid_size(),
        missing_policy: db.missing_policy(),
        aps: db.aps().to_vec(),
        points: db
            .points()
            .iter()
            .map(|rp| PointDocument {
                x: rp.location.x,
                y: rp.location.y,
                scan_count: rp.scan_count,
                mean: rp.fingerprint.mean().to_vec(),
                std: rp.fingerprint.std().to_vec(),
                histogram: rp
                    .fingerprint
                    .histogram()
                    .iter()
                    .map(|h| h.counts().clone())
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("database documents always serialize")
}

/// Parses the native JSON document. Anything that is not a well-formed
/// document of the supported version is a [`Error::SchemaVersionMismatch`].
pub fn database_from_json(text: &str) -> Result<FingerprintDatabase> {
    let schema = |msg: String| Error::SchemaVersionMismatch(msg);
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| schema(format!("not a JSON document: {e}")))?;
    let format = value.get("format").and_then(|v| v.as_str());
    let version = value.get("version").and_then(|v| v.as_u64());
    if format != Some(DB_FORMAT) || version != Some(u64::from(DB_VERSION)) {
        return Err(schema(format!(
            "expected format {DB_FORMAT:?} version {DB_VERSION}, found {:?} version {:?}",
            format, version
        )));
    }
    let doc: DbDocument =
        serde_json::from_value(value).map_err(|e| schema(format!("malformed document: {e}")))?;
    let points = doc
        .points
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            let histogram = RssiHistogram::new(
                p.histogram
                    .into_iter()
                    .map(ApHistogram::from_counts)
                    .collect(),
            );
            let fingerprint = Fingerprint::from_parts(p.mean, p.std, histogram)
                .map_err(|e| schema(format!("point {i}: {e}")))?;
            Ok(ReferencePoint {
                location: Point::new(p.x, p.y),
                fingerprint,
                scan_count: p.scan_count,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FingerprintDatabase::new(doc.aps, points, doc.grid_size, doc.missing_policy)
        .map_err(|e| schema(format!("invalid database: {e}")))
}

/// Writes the database to `path`, replacing it atomically.
pub fn save_database(db: &FingerprintDatabase, path: &Path) -> Result<()> {
    write_atomic(path, database_to_json(db).as_bytes())
}

pub fn load_database(path: &Path) -> Result<FingerprintDatabase> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    database_from_json(&text)
}

/// Writes to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::io(path, std::io::ErrorKind::InvalidInput.into()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
