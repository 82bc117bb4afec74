//! File formats shared by the tools: CSV fields and profiles, JSON
//! sidecars, flat key=value configs.
//!
//! Output is deterministic: floats print in shortest round-trip form (the
//! standard `Display` for `f64`), JSON keys are struct- or BTree-ordered,
//! and nothing records a timestamp. All writes go through a temp file in
//! the target directory followed by a rename, so readers never observe a
//! partial file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Profile1d;
use crate::field::{ScalarField, Variable};
use crate::gas::GasModel;
use crate::grid::GridSpec;

pub const FIELD_HEADER: &str = "xi1,xi2,value";
pub const PROFILE_HEADER: &str = "xi,chi,dchi";

/// Sidecar record written next to every output. `extra` carries the
/// command-specific payload (solver report, sweep table, ...) and the echo
/// of the effective options under the key "config".
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub variable: Option<Variable>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gas: Option<GasModel>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            tool: "sspf".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            grid: None,
            variable: None,
            gas: None,
            extra: BTreeMap::new(),
        }
    }

    #[must_use]
    pub fn with_field(mut self, field: &ScalarField) -> Self {
        self.grid = Some(*field.grid());
        self.variable = Some(field.var());
        self
    }

    #[must_use]
    pub fn with_gas(mut self, gas: &GasModel) -> Self {
        self.gas = Some(*gas);
        self
    }

    pub fn insert(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.extra.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }
}

/// Path of the JSON sidecar belonging to a CSV output.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes `bytes` to `path` atomically: temp file in the same directory,
/// then rename.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(".tmp");
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => PathBuf::from(&tmp_name),
    };
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::Io(e)
    })
}

/// Serializes `value` as pretty JSON with a trailing newline, atomically.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    atomic_write(path, &bytes)
}

/// Writes a field as `xi1,xi2,value` rows in node order (second axis
/// fastest).
pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<()> {
    let g = field.grid();
    let mut out = String::with_capacity(24 * g.len() + 16);
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for i1 in 0..g.dims[0] {
        for i2 in 0..g.dims[1] {
            let xi = g.xi(i1, i2);
            let _ = writeln!(out, "{},{},{}", xi[0], xi[1], field.value(i1, i2));
        }
    }
    atomic_write(path, out.as_bytes())
}

/// Writes a 1D or radial profile as `xi,chi,dchi` rows.
pub fn write_profile_csv(path: &Path, profile: &Profile1d) -> Result<()> {
    let mut out = String::with_capacity(24 * profile.len() + 16);
    out.push_str(PROFILE_HEADER);
    out.push('\n');
    for k in 0..profile.len() {
        let _ = writeln!(
            out,
            "{},{},{}",
            profile.coord[k], profile.chi[k], profile.dchi[k]
        );
    }
    atomic_write(path, out.as_bytes())
}

/// Writes the CSV and its sidecar manifest in one step.
pub fn write_field_with_manifest(
    path: &Path,
    field: &ScalarField,
    manifest: &Manifest,
) -> Result<()> {
    write_field_csv(path, field)?;
    write_json(&sidecar_path(path), manifest)
}

fn parse_f64(s: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("line {line}: bad {what} {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Format(format!(
            "line {line}: non-finite {what} {s:?}"
        )));
    }
    Ok(v)
}

fn read_csv_rows(path: &Path, header: &str) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let ncols = header.split(',').count();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim() == header => {}
        Some((_, first)) => {
            return Err(Error::Format(format!(
                "{}: expected header {header:?}, got {:?}",
                path.display(),
                first.trim()
            )))
        }
        None => return Err(Error::Format(format!("{}: empty file", path.display()))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(Error::Format(format!(
                "line {}: expected {ncols} columns, got {}",
                k + 1,
                fields.len()
            )));
        }
        let mut row = Vec::with_capacity(ncols);
        for (c, f) in fields.iter().enumerate() {
            row.push(parse_f64(f, k + 1, header.split(',').nth(c).unwrap())?);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Format(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    Ok(rows)
}

/// Recovers the grid from node coordinates written in node order.
fn infer_grid(rows: &[Vec<f64>]) -> Result<GridSpec> {
    let n = rows.len();
    let n2 = rows
        .iter()
        .position(|r| r[0] != rows[0][0])
        .unwrap_or(n);
    if n % n2 != 0 {
        return Err(Error::Format(format!(
            "row count {n} is not a multiple of the inner run length {n2}"
        )));
    }
    let n1 = n / n2;
    if n1 < 3 || n2 < 3 {
        return Err(Error::Format(format!(
            "grid inferred as {n1}x{n2}; need at least 3 nodes per axis"
        )));
    }
    let origin = [rows[0][0], rows[0][1]];
    let spacing = [rows[n2][0] - origin[0], rows[1][1] - origin[1]];
    let grid = GridSpec::new(origin, spacing, [n1, n2])
        .map_err(|e| Error::Format(format!("inferred grid is invalid: {e}")))?;
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            let xi = grid.xi(i1, i2);
            let row = &rows[i1 * n2 + i2];
            for a in 0..2 {
                let tol = 1e-9 * (1.0 + xi[a].abs() + spacing[a]);
                if (row[a] - xi[a]).abs() > tol {
                    return Err(Error::Format(format!(
                        "node ({i1}, {i2}): coordinate {} off the uniform grid (expected {})",
                        row[a], xi[a]
                    )));
                }
            }
        }
    }
    Ok(grid)
}

/// Reads a field CSV plus its sidecar, if one exists. The sidecar supplies
/// the authoritative grid (including walls), the variable, and optionally
/// the gas; without it the grid is inferred from the coordinates and the
/// values are taken as chi.
pub fn read_field(path: &Path) -> Result<(ScalarField, Option<GasModel>)> {
    let rows = read_csv_rows(path, FIELD_HEADER)?;
    let side = sidecar_path(path);
    let manifest: Option<Manifest> = if side.is_file() {
        let text = std::fs::read_to_string(&side)?;
        Some(serde_json::from_str(&text).map_err(|e| {
            Error::Format(format!("{}: bad sidecar: {e}", side.display()))
        })?)
    } else {
        None
    };
    let (grid, var, gas) = match &manifest {
        Some(m) => {
            let grid = match m.grid {
                Some(g) => {
                    if g.len() != rows.len() {
                        return Err(Error::Format(format!(
                            "{}: sidecar grid has {} nodes, CSV has {} rows",
                            side.display(),
                            g.len(),
                            rows.len()
                        )));
                    }
                    g
                }
                None => infer_grid(&rows)?,
            };
            (grid, m.variable.unwrap_or(Variable::Chi), m.gas)
        }
        None => (infer_grid(&rows)?, Variable::Chi, None),
    };
    let values = rows.iter().map(|r| r[2]).collect();
    let field = ScalarField::from_values(grid, var, values)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    Ok((field, gas))
}

/// Parses a flat `key=value` config file. Blank lines and `#` comments are
/// skipped; later assignments win.
pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Format(format!("line {}: expected key=value, got {line:?}", k + 1))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Format(format!("line {}: empty key", k + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}
