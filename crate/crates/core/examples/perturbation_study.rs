//! Continuity of the control-to-state map: perturbs the manufactured
//! forcing of Example 3 by t g for t = 0.1, 0.05, 0.025, 0.0125 and reports
//! the velocity and pressure deviations.
//!
//! ```text
//! cargo run --release --example perturbation_study -- 16
//! ```

use hvi_cbfed::experiment::{force_perturbation_study, Experiment, PERTURBATION_SIZES};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(Ok(16), |s| s.parse())?;
    let exp = Experiment::example(3)?;
    let table = force_perturbation_study(&exp, n, &PERTURBATION_SIZES)?;
    table.write_csv(std::io::stdout().lock())?;
    println!("|u|_V of the unperturbed state: {:.6e}", table.baseline_v_norm);
    println!(
        "monotone decrease: {}, smallest halving factor: {:.3}",
        table.velocity_monotone(),
        table.min_reduction()
    );
    Ok(())
}
