//! Optimizes one of the built-in examples on the mesh family n = 4, 8, 12,
//! 16 and tabulates the errors against the n = 25 reference solution.
//!
//! ```text
//! cargo run --release --example convergence_study -- 2
//! ```

use std::time::Instant;

use hvi_cbfed::experiment::Experiment;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let id: u8 = std::env::args().nth(1).map_or(Ok(2), |s| s.parse())?;
    let exp = Experiment::example(id)?;
    let start = Instant::now();
    let (table, runs) = hvi_cbfed::experiment::convergence_study(&exp)?;
    println!("example {id}: {} meshes in {:.1?}", runs.len(), start.elapsed());
    for run in &runs {
        let first = run.history.first().map_or(f64::NAN, |c| c.cost.total);
        let last = run.history.last().map_or(f64::NAN, |c| c.cost.total);
        let change = run.history.last().and_then(|c| c.control_change_l2).unwrap_or(f64::NAN);
        println!(
            "  n = {:>2}: {} iterations (converged: {}), cost {first:.6e} -> {last:.6e}, last |df| = {change:.3e}",
            run.n, run.iterations, run.converged
        );
    }
    println!();
    println!("{:>10} {:>12} {:>12} {:>12} {:>12}", "h", "|u|_L2", "|u|_V", "|p|_L2", "|f|_L2");
    for r in table.study_rows() {
        let [a, b, c, d] = r.absolute();
        println!("{:>10.4e} {a:>12.4e} {b:>12.4e} {c:>12.4e} {d:>12.4e}", r.h);
    }
    println!("relative:");
    for r in table.study_rows() {
        let [a, b, c, d] = r.relative();
        println!("{:>10.4e} {a:>12.4e} {b:>12.4e} {c:>12.4e} {d:>12.4e}", r.h);
    }
    Ok(())
}
