//! Output artifacts: CSV data files and the JSON run manifest.
//!
//! Exported numbers go through one formatting path (shortest-roundtrip
//! scientific notation, fixed summation orders upstream), so identical
//! configurations produce byte-identical CSV files. The manifest also
//! carries the wall clock, which is the one field exempt from that
//! guarantee.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use nv_core::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub op: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn le(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_string(),
            op: "<=".to_string(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn gt(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_string(),
            op: ">".to_string(),
            value,
            threshold,
            pass: value > threshold,
        }
    }
}

#[derive(Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub experiment: String,
    /// "pass", "fail" (a check came out false), or "error" (the run never
    /// produced its checks).
    pub status: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub summaries: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
    pub error_category: Option<String>,
    pub wall_clock_seconds: f64,
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join("manifest.json");
    let body = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::InvalidInput(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, body + "\n")
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))
}

/// Writes `<dir>/<name>` with the header line and the prepared rows,
/// returning the file name for the artifact list.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[String],
) -> Result<String> {
    let path = dir.join(name);
    let mut buf = Vec::with_capacity(rows.len() * 32 + header.len() + 1);
    writeln!(buf, "{header}").expect("vec write");
    for row in rows {
        writeln!(buf, "{row}").expect("vec write");
    }
    std::fs::write(&path, buf)
        .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    Ok(name.to_string())
}
