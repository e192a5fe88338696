//! Projected subgradient optimization of the body force on one mesh,
//! printing the cost history (tracking, regularization, control change).
//!
//! ```text
//! cargo run --release --example optimize_control -- 1 8
//! ```

use hvi_cbfed::experiment::Experiment;
use hvi_cbfed::fem::FeSpace;
use hvi_cbfed::mesh::TriMesh;
use hvi_cbfed::optimize::{optimize, write_cost_csv, AdmissibleBox, OptContext};
use hvi_cbfed::solver::StateProblem;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let id: u8 = args.next().map_or(Ok(1), |s| s.parse())?;
    let n: usize = args.next().map_or(Ok(8), |s| s.parse())?;
    let mut exp = Experiment::example(id)?;
    exp.opt.max_iter = 20;

    let space = FeSpace::new(TriMesh::unit_square(n)?);
    let problem = StateProblem::new(&space, exp.params, exp.law)?;
    let ctx = OptContext::new(&problem, exp.targets, exp.weights, exp.opt.cost_kind, exp.opt.check_energy)?;
    let f0 = space.interpolate_control(exp.f0)?;

    // Unconstrained run, as in the built-in experiments.
    let res = optimize(&ctx, &f0, None, &exp.solver, &exp.opt)?;
    write_cost_csv(&res.history, std::io::stdout().lock())?;
    println!(
        "{} iterations, stopped on eps_opt: {}, energy bound checked on {} states",
        res.iterations,
        res.converged,
        res.energy_checks.len()
    );

    // The same run inside the box |f_i| <= 0.5.
    let bounds = AdmissibleBox::uniform(space.n_control(), -0.5, 0.5)?;
    let boxed = optimize(&ctx, &f0, Some(&bounds), &exp.solver, &exp.opt)?;
    println!(
        "boxed: cost {:.6e} -> {:.6e}, admissible: {}",
        boxed.history[0].cost.total,
        boxed.history.last().map_or(f64::NAN, |c| c.cost.total),
        bounds.contains(&boxed.control)
    );
    Ok(())
}
