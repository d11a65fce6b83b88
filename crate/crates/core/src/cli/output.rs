//! Metrics CSV and legacy VTK writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::fem::rt0_eval;
use crate::mesh::StructuredTriMesh;
use crate::solvers::FieldState;

use super::experiment::MetricsRecord;

pub const METRICS_HEADER: [&str; 7] = [
    "param_name",
    "param_value",
    "strategy",
    "converged",
    "outer_iters",
    "inner_newton_iters",
    "wall_seconds",
];

pub fn write_metrics_csv(records: &[MetricsRecord], path: &Path) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in records {
        w.write_record([
            r.param_name.clone(),
            r.param_value.map(|v| v.to_string()).unwrap_or_default(),
            r.strategy.to_string(),
            r.converged.to_string(),
            r.outer_iters.to_string(),
            r.inner_newton_iters.to_string(),
            format!("{:.6}", r.wall_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Legacy ASCII VTK: `φ`, `μ`, `u` as point data, `p` and the flux at
/// cell centroids as cell data. Values are printed in shortest round-trip
/// form.
pub fn write_vtk(state: &FieldState, mesh: &StructuredTriMesh, path: &Path) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let nv = mesh.num_vertices();
    let nc = mesh.num_cells();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "Cahn-Hilliard-Biot fields, step {}", state.step)?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for x in mesh.vertices() {
        writeln!(w, "{} {} 0", x[0], x[1])?;
    }
    writeln!(w, "CELLS {nc} {}", 4 * nc)?;
    for c in mesh.cells() {
        writeln!(w, "3 {} {} {}", c[0], c[1], c[2])?;
    }
    writeln!(w, "CELL_TYPES {nc}")?;
    for _ in 0..nc {
        writeln!(w, "5")?;
    }

    writeln!(w, "POINT_DATA {nv}")?;
    for (name, values) in [("phi", &state.phi), ("mu", &state.mu)] {
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in values.iter() {
            writeln!(w, "{v}")?;
        }
    }
    writeln!(w, "VECTORS u double")?;
    for v in state.u.chunks_exact(2) {
        writeln!(w, "{} {} 0", v[0], v[1])?;
    }

    writeln!(w, "CELL_DATA {nc}")?;
    writeln!(w, "SCALARS p double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in &state.p {
        writeln!(w, "{v}")?;
    }
    writeln!(w, "VECTORS q double")?;
    for c in 0..nc {
        let x = mesh.cell_geometry(c).expect("cell in range").centroid();
        let q = rt0_eval(mesh, &state.q, c, x);
        writeln!(w, "{} {} 0", q[0], q[1])?;
    }
    w.flush()
}
