//! Legacy ASCII VTK output of discrete fields at the mesh vertices.

use std::io::Write;

use crate::fem::FeSpace;

/// Writes the triangulation with point data: velocity `u` and control `f`
/// as vectors and pressure `p` as a scalar. P2 velocities are sampled at the
/// vertices, where they coincide with their nodal values.
pub fn write_fields<W: Write>(space: &FeSpace, u: &[f64], p: &[f64], f: &[f64], mut out: W) -> std::io::Result<()> {
    let mesh = space.mesh();
    let nn = mesh.num_nodes();
    let ns = space.n_scalar();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "optimal state and control n={}", mesh.n())?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {nn} double")?;
    for x in mesh.nodes() {
        writeln!(out, "{} {} 0", x[0], x[1])?;
    }
    let nt = mesh.num_triangles();
    writeln!(out, "CELLS {nt} {}", 4 * nt)?;
    for t in mesh.triangles() {
        writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(out, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(out, "5")?;
    }
    writeln!(out, "POINT_DATA {nn}")?;
    writeln!(out, "VECTORS u double")?;
    for i in 0..nn {
        writeln!(out, "{:.12e} {:.12e} 0", u[i], u[ns + i])?;
    }
    writeln!(out, "VECTORS f double")?;
    for i in 0..nn {
        writeln!(out, "{:.12e} {:.12e} 0", f[i], f[nn + i])?;
    }
    writeln!(out, "SCALARS p double 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for v in p.iter().take(nn) {
        writeln!(out, "{v:.12e}")?;
    }
    Ok(())
}
