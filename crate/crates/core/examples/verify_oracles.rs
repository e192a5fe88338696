//! Runs the numerical oracle suite (monotonicity inequalities, Gateaux
//! derivative, form identities, inf-sup constants, trace inequality) and
//! prints one line per check.
//!
//! ```text
//! cargo run --release --example verify_oracles
//! ```

use hvi_cbfed::experiment::{catalog, Experiment};
use hvi_cbfed::verify::{run_all, VerifyConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let exp = Experiment::example(1)?;
    let report = run_all(&VerifyConfig::default(), &exp.law, catalog::example3_velocity)?;
    for c in &report.checks {
        println!(
            "{} {:<34} worst margin {:>11.3e} over {} samples",
            if c.pass { "ok  " } else { "FAIL" },
            c.name,
            c.worst_margin,
            c.samples
        );
    }
    for ((n, th), (m, p1)) in report.inf_sup.iter().zip(report.inf_sup_p1p1.iter().chain(std::iter::repeat(&(0, f64::NAN)))) {
        println!("n = {n}: Taylor-Hood inf-sup {th:.5}; P1/P1 (n = {m}) {p1:.3e}");
    }
    println!("all checks pass: {}", report.all_pass);
    Ok(())
}
