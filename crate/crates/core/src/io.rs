//! Persistence of fields and traces: CSV for small data, raw little-endian
//! f64 with a JSON sidecar for large fields.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::kernels::{KernelField, KernelKind};
use crate::params::ModelParams;

pub const SIDECAR_FORMAT: &str = "f64le";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Metadata line of a field CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub kind: KernelKind,
    pub t: f64,
    pub alpha: f64,
    pub beta: f64,
    pub d: usize,
    pub extent: f64,
    pub points: usize,
}

impl FieldHeader {
    pub fn of(field: &KernelField) -> Self {
        Self {
            kind: field.kind,
            t: field.t,
            alpha: field.params.alpha,
            beta: field.params.beta,
            d: field.grid.dimension,
            extent: field.grid.extent,
            points: field.grid.points,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.d, self.extent, self.points)
    }
}

const HEADER_KEYS: &str = "# kind,t,alpha,beta,d,L,N";

/// Field as CSV: two comment lines of metadata, a column header, then one
/// row per node (coordinates followed by the value).
pub fn field_csv(field: &KernelField) -> String {
    let h = FieldHeader::of(field);
    let d = h.d;
    let mut out = String::with_capacity(field.values.len() * 24 * (d + 1));
    let _ = writeln!(out, "{HEADER_KEYS}");
    let _ = writeln!(out, "# {},{},{},{},{},{},{}", h.kind, h.t, h.alpha, h.beta, h.d, h.extent, h.points);
    let cols = ["x", "y", "z"];
    let _ = writeln!(out, "{},value", cols[..d].join(","));
    for (i, v) in field.values.iter().enumerate() {
        let x = field.grid.node(i);
        for c in &x[..d] {
            let _ = write!(out, "{c},");
        }
        let _ = writeln!(out, "{v}");
    }
    out
}

/// Parsed field CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldCsv {
    pub header: FieldHeader,
    pub values: Vec<f64>,
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what} {s:?}")))
}

/// Inverse of [`field_csv`]. Node coordinates must match the header grid.
pub fn parse_field_csv(text: &str) -> Result<FieldCsv> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER_KEYS) {
        return Err(Error::Parse("missing field header".into()));
    }
    let meta = lines.next().and_then(|l| l.strip_prefix("# ")).ok_or_else(|| Error::Parse("missing metadata".into()))?;
    let f: Vec<&str> = meta.split(',').collect();
    if f.len() != 7 {
        return Err(Error::Parse(format!("metadata has {} fields, expected 7", f.len())));
    }
    let header = FieldHeader {
        kind: f[0].trim().parse().map_err(|_| Error::Parse(format!("bad kernel kind {:?}", f[0])))?,
        t: parse_num(f[1], "time")?,
        alpha: parse_num(f[2], "alpha")?,
        beta: parse_num(f[3], "beta")?,
        d: parse_num(f[4], "dimension")?,
        extent: parse_num(f[5], "extent")?,
        points: parse_num(f[6], "point count")?,
    };
    let grid = header.grid().map_err(|e| Error::Parse(e.to_string()))?;
    let d = header.d;
    lines.next().ok_or_else(|| Error::Parse("missing column header".into()))?;
    // The header alone must not dictate a large allocation.
    let mut values = Vec::with_capacity(grid.len().min(text.len() / 2));
    let tol = 1e-9 * grid.extent;
    for (i, line) in lines.enumerate() {
        if i >= grid.len() {
            return Err(Error::Parse("more rows than grid nodes".into()));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != d + 1 {
            return Err(Error::Parse(format!("row {i} has {} cells, expected {}", cells.len(), d + 1)));
        }
        let node = grid.node(i);
        for a in 0..d {
            let c: f64 = parse_num(cells[a], "coordinate")?;
            if !((c - node[a]).abs() <= tol) {
                return Err(Error::Parse(format!("row {i} is not at node {:?}", &node[..d])));
            }
        }
        values.push(parse_num(cells[d], "value")?);
    }
    if values.len() != grid.len() {
        return Err(Error::Parse(format!("{} rows for {} nodes", values.len(), grid.len())));
    }
    Ok(FieldCsv { header, values })
}

/// Columns of numbers under a named header row.
pub fn trace_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = columns.join(",");
    out.push('\n');
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// JSON sidecar of a raw binary field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSidecar {
    pub format: String,
    pub kind: KernelKind,
    pub t: f64,
    pub params: ModelParams,
    pub grid: Grid,
    pub len: usize,
    pub sha256: String,
}

pub fn encode_field(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn sidecar_for(field: &KernelField, bytes: &[u8]) -> FieldSidecar {
    FieldSidecar {
        format: SIDECAR_FORMAT.into(),
        kind: field.kind,
        t: field.t,
        params: field.params,
        grid: field.grid,
        len: field.values.len(),
        sha256: sha256_hex(bytes),
    }
}

pub fn parse_sidecar(json: &str) -> Result<FieldSidecar> {
    let s: FieldSidecar = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    if s.format != SIDECAR_FORMAT {
        return Err(Error::Parse(format!("unsupported format {:?}", s.format)));
    }
    s.grid.validate().map_err(|e| Error::Parse(e.to_string()))?;
    if s.len != s.grid.len() {
        return Err(Error::Parse(format!("sidecar length {} does not match the grid ({})", s.len, s.grid.len())));
    }
    Ok(s)
}

/// Decodes raw bytes described by `sidecar`, verifying length and checksum.
pub fn decode_field(bytes: &[u8], sidecar: &FieldSidecar) -> Result<Vec<f64>> {
    if bytes.len() != sidecar.len * 8 {
        return Err(Error::Parse(format!("{} bytes for {} values", bytes.len(), sidecar.len)));
    }
    if sha256_hex(bytes) != sidecar.sha256.to_ascii_lowercase() {
        return Err(Error::Parse("checksum mismatch".into()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect())
}

/// Writes `<stem>.bin` and `<stem>.json` into `dir`.
pub fn write_field_binary(dir: &Path, stem: &str, field: &KernelField) -> Result<FieldSidecar> {
    let bytes = encode_field(&field.values);
    let sidecar = sidecar_for(field, &bytes);
    fs::create_dir_all(dir)?;
    fs::File::create(dir.join(format!("{stem}.bin")))?.write_all(&bytes)?;
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(dir.join(format!("{stem}.json")), json)?;
    Ok(sidecar)
}

pub fn read_field_binary(dir: &Path, stem: &str) -> Result<(FieldSidecar, Vec<f64>)> {
    let sidecar = parse_sidecar(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let values = decode_field(&fs::read(dir.join(format!("{stem}.bin")))?, &sidecar)?;
    Ok((sidecar, values))
}
