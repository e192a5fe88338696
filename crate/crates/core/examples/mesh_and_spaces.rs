//! Builds the structured unit-square mesh and the Taylor-Hood spaces,
//! interpolates Example 1's target fields, reports interpolation errors
//! under refinement and writes the mesh and fields as legacy VTK.
//!
//! ```text
//! cargo run --release --example mesh_and_spaces -- out
//! ```

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::PathBuf;

use hvi_cbfed::experiment::{catalog, vtk};
use hvi_cbfed::fem::FeSpace;
use hvi_cbfed::mesh::TriMesh;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "out".into()));
    fs::create_dir_all(&out)?;

    println!("{:>4} {:>10} {:>8} {:>8} {:>12}", "n", "h", "nodes", "edges", "|u_d - Iu_d|");
    for n in [4, 8, 16] {
        let space = FeSpace::new(TriMesh::unit_square(n)?);
        let u = space.interpolate_velocity(catalog::example1_velocity)?;
        let err = space
            .integrate(|x, e, q| {
                let a = catalog::example1_velocity(x);
                let b = space.velocity_at_qp(&u, e, q);
                (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
            })
            .sqrt();
        println!(
            "{n:>4} {:>10.4e} {:>8} {:>8} {err:>12.4e}",
            space.mesh().mesh_size(),
            space.num_nodes(),
            space.edges().len()
        );
    }

    let space = FeSpace::new(TriMesh::unit_square(8)?);
    space.mesh().write_vtk(BufWriter::new(File::create(out.join("mesh.vtk"))?))?;
    let u = space.interpolate_velocity(catalog::example1_velocity)?;
    let p = space.interpolate_pressure(catalog::example1_pressure)?;
    let f = space.interpolate_control(catalog::example1_control)?;
    vtk::write_fields(&space, &u, &p, &f, BufWriter::new(File::create(out.join("example1_targets.vtk"))?))?;
    println!("wrote {} and {}", out.join("mesh.vtk").display(), out.join("example1_targets.vtk").display());
    Ok(())
}
