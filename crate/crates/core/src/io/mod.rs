//! Field and table output: legacy ASCII VTK and comma-separated tables.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::scalar::Real;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// Formats with 9 significant digits.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Renders a legacy VTK unstructured grid with per-dof fields expanded to
/// every mesh node.
pub fn vtk_string<T: Real>(mesh: &Mesh<T>, title: &str, fields: &[(&str, &[T])]) -> Result<String> {
    for (name, f) in fields {
        if f.len() != mesh.num_dofs() {
            return Err(Error::DimensionMismatch { expected: mesh.num_dofs(), got: f.len() });
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::InvalidParameter(format!("bad VTK field name {name:?}")));
        }
    }
    let mut s = String::new();
    let title = title.lines().next().unwrap_or("");
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.num_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{} {} {}", sig9(p[0].to_f64_lossy()), sig9(p[1].to_f64_lossy()), sig9(0.0));
    }
    let ne = mesh.num_elements();
    let _ = writeln!(s, "CELLS {ne} {}", 4 * ne);
    for t in mesh.elements() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        s.push_str("5\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {}", mesh.num_nodes());
        for (name, f) in fields {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in mesh.to_nodal(f) {
                s.push_str(&sig9(v.to_f64_lossy()));
                s.push('\n');
            }
        }
    }
    Ok(s)
}

pub fn write_vtk<T: Real>(path: &Path, mesh: &Mesh<T>, title: &str, fields: &[(&str, &[T])]) -> Result<()> {
    fs::write(path, vtk_string(mesh, title, fields)?)?;
    Ok(())
}

/// Reads point field `name` from a legacy ASCII VTK file written for `mesh`
/// and returns it per dof.
pub fn read_vtk_field<T: Real>(path: &Path, mesh: &Mesh<T>, name: &str) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let nodal = parse_vtk_field(&text, name)?;
    if nodal.len() != mesh.num_nodes() {
        return Err(Error::Io(format!(
            "{}: field {name} has {} points, mesh has {}",
            path.display(),
            nodal.len(),
            mesh.num_nodes()
        )));
    }
    let mut out = vec![T::zero(); mesh.num_dofs()];
    for (node, v) in nodal.into_iter().enumerate() {
        out[mesh.dof(node)] = T::lit(v);
    }
    Ok(out)
}

fn parse_vtk_field(text: &str, name: &str) -> Result<Vec<f64>> {
    let mut tokens = text.split_whitespace();
    let mut npoints = None;
    while let Some(tok) = tokens.next() {
        match tok {
            "POINT_DATA" => {
                npoints = tokens.next().and_then(|t| t.parse::<usize>().ok());
            }
            "SCALARS" if tokens.next() == Some(name) => {
                let n = npoints.ok_or_else(|| Error::Io("SCALARS before POINT_DATA".into()))?;
                let _ty = tokens.next();
                let mut next = tokens.next();
                if next.map(|t| t.parse::<usize>().is_ok()) == Some(true) {
                    next = tokens.next();
                }
                if next != Some("LOOKUP_TABLE") {
                    return Err(Error::Io(format!("field {name}: expected LOOKUP_TABLE")));
                }
                let _table = tokens.next();
                return (0..n)
                    .map(|i| {
                        tokens
                            .next()
                            .and_then(|t| t.parse::<f64>().ok())
                            .ok_or_else(|| Error::Io(format!("field {name}: bad or missing value {i}")))
                    })
                    .collect();
            }
            _ => {}
        }
    }
    Err(Error::Io(format!("field {name} not found")))
}

/// Writes a comma-separated table with one header line.
pub fn write_csv<S: AsRef<str>>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.as_ref())).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a headerless grid of numbers; the first row is the top (`y = 1`)
/// and the first column the left (`x = 0`) edge of the bounding box.
pub fn read_grid_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let row = rec
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| Error::Io(format!("{}: row {i}: not a number: {c:?}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Io(format!("{}: empty grid", path.display())));
    }
    if rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(Error::Io(format!("{}: ragged grid", path.display())));
    }
    Ok(rows)
}

/// Bilinear sample of an image-like grid stretched over the mesh bounding box.
pub fn sample_grid<T: Real>(mesh: &Mesh<T>, grid: &[Vec<f64>]) -> Vec<T> {
    let (lo, hi) = mesh.bounding_box();
    let (lo, hi) = ([lo[0].to_f64_lossy(), lo[1].to_f64_lossy()], [hi[0].to_f64_lossy(), hi[1].to_f64_lossy()]);
    let rows = grid.len();
    let cols = grid[0].len();
    let at = |r: usize, c: usize| grid[rows - 1 - r][c];
    mesh.dof_coordinates()
        .into_iter()
        .map(|p| {
            let fx = if cols > 1 { (p[0].to_f64_lossy() - lo[0]) / (hi[0] - lo[0]) * (cols - 1) as f64 } else { 0.0 };
            let fy = if rows > 1 { (p[1].to_f64_lossy() - lo[1]) / (hi[1] - lo[1]) * (rows - 1) as f64 } else { 0.0 };
            let (i0, j0) = (fx.floor().clamp(0.0, (cols - 1) as f64) as usize, fy.floor().clamp(0.0, (rows - 1) as f64) as usize);
            let (i1, j1) = ((i0 + 1).min(cols - 1), (j0 + 1).min(rows - 1));
            let (tx, ty) = ((fx - i0 as f64).clamp(0.0, 1.0), (fy - j0 as f64).clamp(0.0, 1.0));
            let v = (1.0 - tx) * (1.0 - ty) * at(j0, i0)
                + tx * (1.0 - ty) * at(j0, i1)
                + (1.0 - tx) * ty * at(j1, i0)
                + tx * ty * at(j1, i1);
            T::lit(v)
        })
        .collect()
}
