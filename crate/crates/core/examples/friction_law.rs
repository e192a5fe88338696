//! The nonmonotone slip law: slip coefficient, regularized traction and
//! its derivative, superpotential and Clarke derivative, the sampled
//! relaxed-monotonicity constant and the trace constant on a few meshes.
//!
//! ```text
//! cargo run --release --example friction_law
//! ```

use hvi_cbfed::fem::FeSpace;
use hvi_cbfed::friction::{estimate_delta1, estimate_lambda0, SlipLaw, DEFAULT_EPS_REG};
use hvi_cbfed::mesh::TriMesh;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = SlipLaw::new(1.55, 1.53, 3.0, DEFAULT_EPS_REG)?;

    println!("{:>8} {:>10} {:>12} {:>12} {:>12}", "z", "omega(|z|)", "T(z)", "T'(z)", "j(z)");
    for z in [-2.0, -0.5, -1e-3, 0.0, 1e-7, 1e-3, 0.5, 2.0] {
        println!(
            "{z:>8.1e} {:>10.6} {:>12.6} {:>12.4e} {:>12.6}",
            law.omega(f64::abs(z))?,
            law.traction(z),
            law.traction_derivative(z),
            law.potential(z)
        );
    }
    println!("Clarke derivative at 0 in direction -1: {}", law.clarke_derivative(0.0, -1.0));

    let d = estimate_delta1(&law, 200_001)?;
    println!(
        "delta1 = {:.6e} (envelope rho (a - b) = {:.6e}) near (s, t) = ({:.2e}, {:.2e})",
        d.delta1,
        law.rho * (law.a - law.b),
        d.location.0,
        d.location.1
    );

    for n in [4, 8, 16] {
        let spec = estimate_lambda0(&FeSpace::new(TriMesh::unit_square(n)?))?;
        println!("lambda0(n = {n}) = {:.6}", spec.lambda0);
    }
    Ok(())
}
