//! JSON-lines dataset files: one header object, then one record per frame.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::frame::{GraspFrame, ObjectGroup, FRAME_DIM};
use super::{Dataset, Provenance};
use crate::error::{Error, Result};

pub const DATASET_SCHEMA: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema: u32,
    labels: Vec<String>,
    groups: Vec<ObjectGroup>,
    feature_names: Vec<String>,
    seed: u64,
    config_hash: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    label: String,
    group: ObjectGroup,
    x: Vec<f64>,
}

pub fn write_dataset<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    let header = Header {
        schema: DATASET_SCHEMA,
        labels: ds.labels.clone(),
        groups: ds.label_groups.clone(),
        feature_names: ds.feature_names.clone(),
        seed: ds.provenance.seed,
        config_hash: ds.provenance.config_hash.clone(),
    };
    let io_err = |e| Error::io("<dataset stream>", e);
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n").map_err(io_err)?;
    for frame in &ds.frames {
        let rec = Record {
            label: frame.label.clone(),
            group: frame.group,
            x: frame.flatten().to_vec(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(ds, BufWriter::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses a dataset stream; `origin` names the source in error messages.
pub fn read_dataset<R: BufRead>(input: R, origin: &Path) -> Result<Dataset> {
    let load_err = |line: usize, message: String| Error::Load {
        path: origin.to_path_buf(),
        line,
        message,
    };
    let mut lines = input.lines();
    let first = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(origin, e))?,
        None => return Err(load_err(1, "missing header line".into())),
    };
    let raw: serde_json::Value =
        serde_json::from_str(&first).map_err(|e| load_err(1, format!("bad header: {e}")))?;
    let found = raw.get("schema").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if found != DATASET_SCHEMA {
        return Err(Error::Schema {
            expected: DATASET_SCHEMA,
            found,
        });
    }
    let header: Header =
        serde_json::from_value(raw).map_err(|e| load_err(1, format!("bad header: {e}")))?;
    if header.feature_names.len() != FRAME_DIM {
        return Err(load_err(
            1,
            format!(
                "expected {FRAME_DIM} feature names, found {}",
                header.feature_names.len()
            ),
        ));
    }
    let mut ds = Dataset::new(
        header.labels,
        header.groups,
        Provenance {
            seed: header.seed,
            config_hash: header.config_hash,
        },
    )
    .map_err(|e| load_err(1, e.to_string()))?;
    ds.feature_names = header.feature_names;

    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let rec: Record = serde_json::from_str(&line)
            .map_err(|e| load_err(lineno, format!("bad record: {e}")))?;
        if rec.x.len() != FRAME_DIM {
            return Err(load_err(
                lineno,
                format!("expected {FRAME_DIM} features, found {}", rec.x.len()),
            ));
        }
        let frame = GraspFrame::unflatten(&rec.x, rec.label, rec.group)
            .map_err(|e| load_err(lineno, e.to_string()))?;
        ds.push(frame)
            .map_err(|e| load_err(lineno, e.to_string()))?;
    }
    Ok(ds)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), path)
}
