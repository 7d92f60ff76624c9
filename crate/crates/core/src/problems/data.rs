//! Plain-text data files.
//!
//! * `composition_XX.txt` (XX = problem id 11..20): whitespace-delimited
//!   rows of `d` reals. The first rows are the component shift vectors, one
//!   per component; they are followed by the component rotation matrices,
//!   `d` rows per component, in component order. Files for CF1/CF2 problems
//!   may omit the matrices (identity is used).
//! * `optima_XX.txt`: one row per global optimum, `d` coordinates followed by
//!   the optimum fitness.
//!
//! Blank lines and lines starting with `#` are ignored in both formats.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::composition::{CompositionFunction, CompositionKind};
use super::GlobalOptimum;
use crate::error::{Error, Result};

pub fn composition_file_name(problem_id: usize) -> String {
    format!("composition_{problem_id:02}.txt")
}

pub fn optima_file_name(problem_id: usize) -> String {
    format!("optima_{problem_id:02}.txt")
}

fn read_required(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingData(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedData {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Parses whitespace-delimited numeric rows.
fn parse_rows(path: &Path, text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| malformed(path, format!("line {}: bad number {tok:?}", lineno + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_composition(path: &Path, kind: CompositionKind, dim: usize) -> Result<CompositionFunction> {
    let text = read_required(path)?;
    let rows = parse_rows(path, &text)?;
    if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
        return Err(malformed(
            path,
            format!("row {} has {} values, expected {dim}", bad + 1, rows[bad].len()),
        ));
    }
    let n = kind.n_components();
    if rows.len() < n {
        return Err(malformed(path, format!("expected {n} shift rows, found {}", rows.len())));
    }
    let shifts = rows[..n].to_vec();
    let rest = &rows[n..];
    let rotations = if rest.is_empty() && !kind.is_rotated() {
        None
    } else if rest.len() == n * dim {
        Some(rest.chunks(dim).map(|m| m.concat()).collect())
    } else {
        return Err(malformed(
            path,
            format!("expected {} rotation rows after the shifts, found {}", n * dim, rest.len()),
        ));
    };
    CompositionFunction::new(kind, shifts, rotations).map_err(|e| malformed(path, e))
}

/// Writes a composition data file. `rotations` are row-major `d x d`
/// matrices; pass `None` to omit them.
pub fn write_composition(path: &Path, shifts: &[Vec<f64>], rotations: Option<&[Vec<f64>]>) -> Result<()> {
    let mut out = String::new();
    for s in shifts {
        push_row(&mut out, s);
    }
    if let Some(rotations) = rotations {
        let d = shifts.first().map_or(0, Vec::len);
        for m in rotations {
            for row in m.chunks(d) {
                push_row(&mut out, row);
            }
        }
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_optima(path: &Path, dim: usize) -> Result<Vec<GlobalOptimum>> {
    let text = read_required(path)?;
    parse_rows(path, &text)?
        .into_iter()
        .enumerate()
        .map(|(i, mut row)| {
            if row.len() != dim + 1 {
                return Err(malformed(
                    path,
                    format!("row {} has {} values, expected {}", i + 1, row.len(), dim + 1),
                ));
            }
            let f = row.pop().unwrap();
            Ok(GlobalOptimum { x: row, f })
        })
        .collect()
}

pub fn write_optima(path: &Path, optima: &[GlobalOptimum]) -> Result<()> {
    let mut out = String::new();
    for o in optima {
        let mut row = o.x.clone();
        row.push(o.f);
        push_row(&mut out, &row);
    }
    fs::write(path, out)?;
    Ok(())
}

fn push_row(out: &mut String, row: &[f64]) {
    for (i, v) in row.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        // `{:e}` is the shortest representation that round-trips.
        write!(out, "{v:e}").unwrap();
    }
    out.push('\n');
}

/// Converts the original CEC2013 niching data layout (`optima.dat` plus
/// `CF3_M_D<d>.dat` / `CF4_M_D<d>.dat`) into one composition file per problem
/// in `out_dir`. Returns the written paths.
pub fn import_cec2013(src_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let optima_path = src_dir.join("optima.dat");
    let optima_rows = parse_rows(&optima_path, &read_required(&optima_path)?)?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for entry in super::TABLE.iter().filter(|e| e.id >= 11) {
        let kind = match entry.objective {
            super::TableObjective::Composition(kind) => kind,
            _ => unreachable!("ids 11..=20 are compositions"),
        };
        let n = kind.n_components();
        let d = entry.dim;
        if optima_rows.len() < n || optima_rows[..n].iter().any(|r| r.len() < d) {
            return Err(malformed(&optima_path, format!("needs {n} rows of at least {d} values")));
        }
        let shifts: Vec<Vec<f64>> = optima_rows[..n].iter().map(|r| r[..d].to_vec()).collect();
        let rotations = if kind.is_rotated() {
            let name = match kind {
                CompositionKind::Cf3 => format!("CF3_M_D{d}.dat"),
                _ => format!("CF4_M_D{d}.dat"),
            };
            let path = src_dir.join(name);
            let rows = parse_rows(&path, &read_required(&path)?)?;
            if rows.len() < n * d || rows[..n * d].iter().any(|r| r.len() < d) {
                return Err(malformed(&path, format!("needs {} rows of {d} values", n * d)));
            }
            Some(
                rows[..n * d]
                    .chunks(d)
                    .map(|m| m.iter().flat_map(|r| r[..d].iter().copied()).collect())
                    .collect::<Vec<Vec<f64>>>(),
            )
        } else {
            None
        };
        let path = out_dir.join(composition_file_name(entry.id));
        write_composition(&path, &shifts, rotations.as_deref())?;
        written.push(path);
    }
    Ok(written)
}
