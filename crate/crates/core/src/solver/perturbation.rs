//! Empirical continuity of the control-to-state map: solve for
//! `f + t g` with decreasing `t` and measure the state deviation.

use serde::Serialize;

use super::{SolverConfig, StateProblem, StateSolution};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationRow {
    pub t: f64,
    /// `||u_t - u||_V`.
    pub velocity_error: f64,
    /// `||p_t - p||_{L2}`.
    pub pressure_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationTable {
    /// `||u||_V` of the unperturbed state.
    pub baseline_v_norm: f64,
    pub rows: Vec<PerturbationRow>,
}

impl PerturbationTable {
    /// Whether the velocity errors strictly decrease along the rows.
    pub fn velocity_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].velocity_error < w[0].velocity_error)
    }

    /// Smallest ratio of consecutive velocity errors.
    pub fn min_reduction(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[0].velocity_error / w[1].velocity_error)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,velocity_error_V,pressure_error_L2,relative_velocity_error")?;
        for r in &self.rows {
            writeln!(
                out,
                "{:.6e},{:.6e},{:.6e},{:.6e}",
                r.t,
                r.velocity_error,
                r.pressure_error,
                r.velocity_error / self.baseline_v_norm
            )?;
        }
        Ok(())
    }
}

/// Runs the study for the sizes in `ts` (each state warm-started from the
/// baseline and polished to roundoff so that small differences are resolved).
pub fn perturbation_study(
    problem: &StateProblem<'_>,
    f: &[f64],
    direction: &[f64],
    ts: &[f64],
    cfg: &SolverConfig,
) -> Result<PerturbationTable> {
    let space = problem.space();
    let solve = |g: &[f64], init: Option<&StateSolution>| -> Result<StateSolution> {
        let load = problem.load(g);
        let mut s = problem.solve_load(&load, init, cfg)?;
        problem.polish(&mut s, &load, 20)?;
        Ok(s)
    };
    let base = solve(f, None)?;
    let mut rows = Vec::with_capacity(ts.len());
    for &t in ts {
        let ft: Vec<f64> = f.iter().zip(direction).map(|(a, b)| a + t * b).collect();
        // f + 0 g is bitwise f: reuse the baseline rather than re-polishing it
        let s = if t == 0.0 { base.clone() } else { solve(&ft, Some(&base))? };
        let du: Vec<f64> = s.u.iter().zip(&base.u).map(|(a, b)| a - b).collect();
        let dp: Vec<f64> = s.p.iter().zip(&base.p).map(|(a, b)| a - b).collect();
        rows.push(PerturbationRow {
            t,
            velocity_error: space.velocity_v_norm(&du),
            pressure_error: space.pressure_l2_norm(&dp),
        });
    }
    Ok(PerturbationTable {
        baseline_v_norm: space.velocity_v_norm(&base.u),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::FeSpace;
    use crate::forms::ModelParams;
    use crate::friction::SlipLaw;
    use crate::mesh::TriMesh;

    #[test]
    fn zero_perturbation_gives_zero_error() {
        let space = FeSpace::new(TriMesh::unit_square(3).unwrap());
        let prob = StateProblem::new(
            &space,
            ModelParams::default(),
            SlipLaw::new(1.55, 1.53, 3.0, 1e-6).unwrap(),
        )
        .unwrap();
        let f = space.interpolate_control(|x| [x[1], 0.0]).unwrap();
        let g = space.interpolate_control(|x| [0.0, x[0]]).unwrap();
        let cfg = SolverConfig {
            eps_hvi: 1e-10,
            ..Default::default()
        };
        let tab = perturbation_study(&prob, &f, &g, &[0.0, 0.1, 0.05], &cfg).unwrap();
        assert_eq!(tab.rows[0].velocity_error, 0.0);
        assert!(tab.rows[1].velocity_error > tab.rows[2].velocity_error);
    }
}
