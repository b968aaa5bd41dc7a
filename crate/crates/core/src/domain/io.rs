//! Text formats: the `GRIDDUMP v1` node-field dump and the boundary CSV.

use super::{BoundaryMesh, DomainError, Grid};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// A grid header plus one value per node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDump {
    pub grid: Grid,
    pub values: Vec<f64>,
}

/// Serializes a node field. Values use the shortest round-trip decimal
/// form, so a read-back is bit-exact.
pub fn format_grid_dump(grid: &Grid, values: &[f64]) -> String {
    let [x0, y0] = grid.origin();
    let mut s = format!("GRIDDUMP v1 {} {} {} {} {}\n", grid.nx(), grid.ny(), grid.h(), x0, y0);
    for row in values.chunks(grid.nx()) {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{v}");
        }
        s.push('\n');
    }
    s
}

pub fn write_grid_dump(path: &Path, grid: &Grid, values: &[f64]) -> Result<(), DomainError> {
    fs::write(path, format_grid_dump(grid, values))?;
    Ok(())
}

pub fn parse_grid_dump(text: &str) -> Result<GridDump, DomainError> {
    let bad = |m: &str| DomainError::Dump(m.to_string());
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header"))?.split_whitespace().collect();
    if header.len() != 7 || header[0] != "GRIDDUMP" || header[1] != "v1" {
        return Err(bad("header must read `GRIDDUMP v1 nx ny h x0 y0`"));
    }
    let nx: usize = header[2].parse().map_err(|_| bad("bad nx"))?;
    let ny: usize = header[3].parse().map_err(|_| bad("bad ny"))?;
    let h: f64 = header[4].parse().map_err(|_| bad("bad h"))?;
    let x0: f64 = header[5].parse().map_err(|_| bad("bad x0"))?;
    let y0: f64 = header[6].parse().map_err(|_| bad("bad y0"))?;
    let grid = Grid::new(nx, ny, h, [x0, y0])?;
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let before = values.len();
        for tok in line.split_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| DomainError::Dump(format!("bad value `{tok}` on row {row}")))?);
        }
        if values.len() - before != nx {
            return Err(DomainError::Dump(format!("row {row} has {} values, expected {nx}", values.len() - before)));
        }
    }
    if values.len() != grid.len() {
        return Err(DomainError::Dump(format!("expected {ny} rows, got {}", values.len() / nx)));
    }
    Ok(GridDump { grid, values })
}

pub fn read_grid_dump(path: &Path) -> Result<GridDump, DomainError> {
    parse_grid_dump(&fs::read_to_string(path)?)
}

pub fn format_boundary_csv(bm: &BoundaryMesh) -> String {
    let mut s = String::from("x,y,nux,nuy,w\n");
    for ((p, n), w) in bm.points.iter().zip(&bm.normals).zip(&bm.weights) {
        let _ = writeln!(s, "{},{},{},{},{}", p[0], p[1], n[0], n[1], w);
    }
    s
}

pub fn write_boundary_csv(path: &Path, bm: &BoundaryMesh) -> Result<(), DomainError> {
    fs::write(path, format_boundary_csv(bm))?;
    Ok(())
}
