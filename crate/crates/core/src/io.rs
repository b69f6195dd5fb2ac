//! File formats: JSON for grids, families and bump lists, CSV for bulk
//! numeric data.
//!
//! A vector field `f.csv` has a header row and one row per cell: `N` integer
//! index columns followed by `M` value columns. Its sidecar `f.json` holds
//! `{"norm_tag", "dim_m", "grid"}`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CurveFamily, Grid, Polyline};
use crate::report::Series;
use crate::sobolev::TestFunction;
use crate::vectorvalues::{NormTag, VectorField};

fn parse_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, e))
}

fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut file = fs::File::create(path)?;
    crate::report::write_json(&mut file, value)?;
    writeln!(file)?;
    Ok(())
}

pub fn read_grid(path: &Path) -> Result<Grid> {
    read_json(path)
}

pub fn write_grid(path: &Path, grid: &Grid) -> Result<()> {
    write_json_file(path, grid)
}

fn csv_reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(fs::File::open(path)?))
}

fn parse_row(path: &Path, line: usize, rec: &csv::StringRecord) -> Result<Vec<f64>> {
    rec.iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| parse_err(path, format!("line {line}: not a number: {s:?}")))
        })
        .collect()
}

/// One vertex per line, coordinates separated by commas.
pub fn read_polyline(path: &Path) -> Result<Polyline> {
    let mut verts = Vec::new();
    for (k, rec) in csv_reader(path)?.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, e))?;
        verts.push(parse_row(path, k + 1, &rec)?);
    }
    Polyline::new(verts).map_err(|e| parse_err(path, e))
}

pub fn write_polyline(path: &Path, c: &Polyline) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| parse_err(path, e))?;
    for v in c.vertices() {
        w.write_record(v.iter().map(|x| format!("{x:.16e}")))
            .map_err(|e| parse_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct FamilyFile {
    label: String,
    curves: Vec<Vec<Vec<f64>>>,
}

/// `{"label": ..., "curves": [[[x, y], ...], ...]}`.
pub fn read_family(path: &Path) -> Result<CurveFamily> {
    let file: FamilyFile = read_json(path)?;
    let curves = file
        .curves
        .into_iter()
        .map(Polyline::new)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| parse_err(path, e))?;
    CurveFamily::new(file.label, curves).map_err(|e| parse_err(path, e))
}

pub fn write_family(path: &Path, fam: &CurveFamily) -> Result<()> {
    let file = FamilyFile {
        label: fam.label.clone(),
        curves: fam
            .curves()
            .iter()
            .map(|c| c.vertices().map(|v| v.to_vec()).collect())
            .collect(),
    };
    write_json_file(path, &file)
}

pub fn read_bumps(path: &Path) -> Result<Vec<TestFunction>> {
    let raw: Vec<TestFunction> = read_json(path)?;
    raw.into_iter()
        .map(|b| TestFunction::new(b.center, b.radius).map_err(|e| parse_err(path, e)))
        .collect()
}

pub fn write_bumps(path: &Path, bumps: &[TestFunction]) -> Result<()> {
    write_json_file(path, &bumps)
}

#[derive(Serialize, Deserialize)]
struct FieldMeta {
    norm_tag: NormTag,
    dim_m: usize,
    grid: Grid,
}

/// The metadata file next to a field CSV.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

pub fn read_vector_field(path: &Path) -> Result<VectorField> {
    let meta_path = sidecar_path(path);
    let meta: FieldMeta = read_json(&meta_path)?;
    let grid = meta.grid;
    let (n, m) = (grid.dim(), meta.dim_m);
    let mut values = vec![0.0; grid.n_cells() * m];
    let mut seen = vec![false; grid.n_cells()];
    let mut rdr = csv_reader(path)?;
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, e))?;
        if k == 0 && rec.iter().any(|s| s.parse::<f64>().is_err()) {
            continue;
        }
        let row = parse_row(path, k + 1, &rec)?;
        if row.len() != n + m {
            return Err(parse_err(
                path,
                format!(
                    "line {}: expected {} columns, got {}",
                    k + 1,
                    n + m,
                    row.len()
                ),
            ));
        }
        let mut multi = Vec::with_capacity(n);
        for (axis, &x) in row[..n].iter().enumerate() {
            if x < 0.0 || x.fract() != 0.0 || x as usize >= grid.resolution()[axis] {
                return Err(parse_err(
                    path,
                    format!("line {}: bad cell index {x} on axis {axis}", k + 1),
                ));
            }
            multi.push(x as usize);
        }
        let cell = grid.linear_index(&multi);
        if std::mem::replace(&mut seen[cell], true) {
            return Err(parse_err(
                path,
                format!("line {}: cell {multi:?} listed twice", k + 1),
            ));
        }
        values[cell * m..(cell + 1) * m].copy_from_slice(&row[n..]);
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(parse_err(
            path,
            format!("cell {:?} missing", grid.multi_index(missing)),
        ));
    }
    VectorField::new(grid, m, values, meta.norm_tag).map_err(|e| parse_err(path, e))
}

pub fn write_vector_field(path: &Path, f: &VectorField) -> Result<()> {
    let grid = f.grid();
    let mut w = csv::Writer::from_path(path).map_err(|e| parse_err(path, e))?;
    let header: Vec<String> = (0..grid.dim())
        .map(|i| format!("i{i}"))
        .chain((0..f.dim_m()).map(|k| format!("v{k}")))
        .collect();
    w.write_record(&header).map_err(|e| parse_err(path, e))?;
    for cell in 0..grid.n_cells() {
        let rec: Vec<String> = grid
            .multi_index(cell)
            .iter()
            .map(|i| i.to_string())
            .chain(f.value(cell).iter().map(|x| format!("{x:.16e}")))
            .collect();
        w.write_record(&rec).map_err(|e| parse_err(path, e))?;
    }
    w.flush()?;
    let meta = FieldMeta {
        norm_tag: f.norm(),
        dim_m: f.dim_m(),
        grid: grid.clone(),
    };
    write_json_file(&sidecar_path(path), &meta)
}

/// Headered CSV of a series with rows sorted by the first column.
pub fn write_series_csv(path: &Path, s: &Series) -> Result<()> {
    let mut rows = s.rows.clone();
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let mut w = csv::Writer::from_path(path).map_err(|e| parse_err(path, e))?;
    w.write_record(&s.columns).map_err(|e| parse_err(path, e))?;
    for r in rows {
        w.write_record(r.iter().map(|x| format!("{x:.16e}")))
            .map_err(|e| parse_err(path, e))?;
    }
    w.flush()?;
    Ok(())
}
