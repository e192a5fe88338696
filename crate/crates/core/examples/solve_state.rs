//! Solves the stationary state equation with the nonmonotone slip law on
//! the top edge for Example 3's parameters and initial control, comparing
//! the Uzawa, Uzawa-then-coupled and coupled strategies.
//!
//! ```text
//! cargo run --release --example solve_state -- 16
//! ```

use hvi_cbfed::experiment::Experiment;
use hvi_cbfed::fem::FeSpace;
use hvi_cbfed::friction::friction_dissipation;
use hvi_cbfed::mesh::TriMesh;
use hvi_cbfed::solver::{SolverConfig, StateProblem, Strategy};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(16), |s| s.parse())?;
    let exp = Experiment::example(3)?;

    // 1. Taylor-Hood spaces on the n x n unit-square mesh.
    let space = FeSpace::new(TriMesh::unit_square(n)?);
    println!(
        "n = {n}: {} velocity, {} pressure, {} control DOFs",
        space.n_velocity(),
        space.n_pressure(),
        space.n_control()
    );

    // 2. Operators that do not depend on the state are assembled once.
    let problem = StateProblem::new(&space, exp.params, exp.law)?;
    let f = space.interpolate_control(exp.f0)?;

    // 3. Solve with each outer strategy from a zero initial guess.
    for strategy in [Strategy::Uzawa, Strategy::UzawaThenCoupled, Strategy::Coupled] {
        let cfg = SolverConfig {
            strategy,
            eps_hvi: 1e-8,
            max_outer: 2000,
            ..exp.solver
        };
        match problem.solve(&f, None, &cfg) {
            Ok(state) => println!(
                "{strategy:?}: {} outer iterations, residual {:.3e}, |u|_V = {:.8e}, friction work = {:.3e}",
                state.iterations,
                state.final_residual(),
                space.velocity_v_norm(&state.u),
                friction_dissipation(&space, &exp.law, &state.u)
            ),
            Err(e) => println!("{strategy:?}: {e}"),
        }
    }
    Ok(())
}
