//! File writers. CSV is the data of record; graymaps are derived views.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Version of every artifact layout written by this crate.
pub const SCHEMA_VERSION: u32 = 1;

/// Gray level of a degenerate heatmap.
pub const MID_GRAY: u8 = 128;

const LEVELS: f64 = 255.0;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArtifactKind {
    CsvTable,
    HeatmapImage,
    Metadata,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputArtifact {
    pub kind: ArtifactKind,
    /// File name relative to the output directory.
    pub path: String,
    pub schema_version: u32,
}

impl OutputArtifact {
    fn new(kind: ArtifactKind, path: &Path) -> Self {
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        Self { kind, path: name, schema_version: SCHEMA_VERSION }
    }
}

/// One CSV field.
#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

/// 17 significant digits in scientific notation; parses back to the same
/// `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn write_cell(out: &mut String, cell: &Cell) -> CliResult<()> {
    match cell {
        Cell::Float(x) => out.push_str(&format_float(*x)),
        Cell::Int(i) => write!(out, "{i}").expect("writing to a String"),
        Cell::Text(s) => {
            if s.contains([',', '"', '\n', '\r']) {
                return Err(CliError::runtime("csv", format!("text cell {s:?} needs quoting")));
            }
            out.push_str(s);
        }
        Cell::Empty => {}
    }
    Ok(())
}

/// Renders a table: header first, comma separated, LF line ends.
pub fn render_table(columns: &[&str], rows: &[Vec<Cell>]) -> CliResult<String> {
    let mut out = columns.join(",");
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != columns.len() {
            return Err(CliError::runtime(
                "csv",
                format!("row {i} has {} cells for {} columns", row.len(), columns.len()),
            ));
        }
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            write_cell(&mut out, cell)?;
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_table(rows: &[Vec<Cell>], columns: &[&str], path: &Path) -> CliResult<OutputArtifact> {
    let text = render_table(columns, rows)?;
    fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    Ok(OutputArtifact::new(ArtifactKind::CsvTable, path))
}

/// Result of [`write_heatmap`].
#[derive(Clone, Debug, PartialEq)]
pub struct Heatmap {
    pub image: OutputArtifact,
    pub sidecar: OutputArtifact,
    pub warning: Option<String>,
}

/// 8-bit gray levels, row-major. `gray = round((v - lo)/(hi - lo)·255)`
/// with `v` clamped to `[lo, hi]`; a degenerate range maps to
/// [`MID_GRAY`].
pub fn gray_levels(matrix: &[Vec<f64>], range: (f64, f64)) -> Vec<u8> {
    let (lo, hi) = range;
    let span = hi - lo;
    matrix
        .iter()
        .flatten()
        .map(|&v| {
            if span > 0.0 {
                ((v.clamp(lo, hi) - lo) / span * LEVELS).round() as u8
            } else {
                MID_GRAY
            }
        })
        .collect()
}

/// Min and max over every entry.
pub fn value_range(matrix: &[Vec<f64>]) -> (f64, f64) {
    matrix.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// Writes `matrix` as a binary P5 graymap at `path` and its raw values as
/// `<stem>.csv` in long form `(row, col, value)`. `range` defaults to the
/// matrix extremes. Image row 0 is matrix row 0.
pub fn write_heatmap(matrix: &[Vec<f64>], range: Option<(f64, f64)>, path: &Path) -> CliResult<Heatmap> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(CliError::runtime("heatmap", "matrix is empty"));
    }
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(CliError::runtime("heatmap", "matrix rows differ in length"));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::runtime("heatmap", "matrix has non-finite entries"));
    }
    let (lo, hi) = range.unwrap_or_else(|| value_range(matrix));
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::runtime("heatmap", format!("invalid value range [{lo}, {hi}]")));
    }
    let warning = (lo == hi).then(|| {
        format!("{}: degenerate value range [{lo}, {hi}], rendered as uniform gray {MID_GRAY}", file_name(path))
    });

    let mut bytes = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    bytes.extend(gray_levels(matrix, (lo, hi)));
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;

    let sidecar_path = path.with_extension("csv");
    let cells: Vec<Vec<Cell>> = matrix
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &v)| vec![r.into(), c.into(), v.into()]))
        .collect();
    let sidecar = write_table(&cells, &["row", "col", "value"], &sidecar_path)?;
    Ok(Heatmap { image: OutputArtifact::new(ArtifactKind::HeatmapImage, path), sidecar, warning })
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// Writes pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::runtime("json", e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub(crate) fn metadata_artifact(path: &Path) -> OutputArtifact {
    OutputArtifact::new(ArtifactKind::Metadata, path)
}
