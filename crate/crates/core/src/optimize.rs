//! Tracking-type cost functionals and the projected subgradient method with
//! finite-difference subgradients over the nodal control basis.

use std::io::Write;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::forms::{assemble_a0, assemble_curl_curl};
use crate::friction::estimate_lambda0;
use crate::solver::conditions::{EnergyCheck, EnergyChecker};
use crate::solver::{pressure_mass, SolverConfig, StateProblem, StateSolution};
use crate::sparse::{dot, CsrMatrix};

/// Analytic velocity field.
pub type VectorField = fn([f64; 2]) -> [f64; 2];
/// Analytic scalar field.
pub type ScalarField = fn([f64; 2]) -> f64;

/// Desired state.
#[derive(Debug, Clone, Copy)]
pub struct Targets {
    pub u_d: VectorField,
    pub p_d: ScalarField,
}

/// Nodal bounds `g1 <= f <= g2` on the P1 control DOFs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl AdmissibleBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidArgument("box bounds differ in length".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l <= u)) {
            return Err(Error::InvalidArgument("box requires g1 <= g2 nodewise".into()));
        }
        Ok(Self { lower, upper })
    }

    /// Same scalar bounds on every DOF.
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn contains(&self, f: &[f64]) -> bool {
        f.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| l <= x && x <= u)
    }
}

/// Componentwise clamp onto the box; identity without a box.
pub fn project(f: &[f64], bounds: Option<&AdmissibleBox>) -> Vec<f64> {
    match bounds {
        None => f.to_vec(),
        Some(b) => f
            .iter()
            .zip(b.lower.iter().zip(&b.upper))
            .map(|(x, (l, u))| x.clamp(*l, *u))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

impl CostWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha1 >= 0.0 && self.alpha2 >= 0.0 && self.alpha3 > 0.0) {
            return Err(Error::InvalidArgument(
                "cost weights need alpha1, alpha2 >= 0 and alpha3 > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostKind {
    /// Velocity and pressure tracking.
    R1,
    /// Vorticity penalization and pressure tracking.
    R2,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CostBreakdown {
    pub total: f64,
    pub tracking_u: f64,
    pub tracking_p: f64,
    pub regularization: f64,
}

impl CostBreakdown {
    fn new(tracking_u: f64, tracking_p: f64, regularization: f64) -> Self {
        Self {
            total: tracking_u + tracking_p + regularization,
            tracking_u,
            tracking_p,
            regularization,
        }
    }
}

fn pressure_tracking(space: &FeSpace, p: &[f64], p_d: ScalarField) -> f64 {
    space.integrate(|x, e, q| (space.pressure_at_qp(p, e, q) - p_d(x)).powi(2))
}

/// `R1 = a1/2 ||u - u_d||^2 + a2/2 ||p - p_d||^2 + a3/2 ||f||^2`.
pub fn cost_r1(space: &FeSpace, u: &[f64], p: &[f64], f: &[f64], targets: &Targets, w: &CostWeights) -> CostBreakdown {
    let tu = space.integrate(|x, e, q| {
        let v = space.velocity_at_qp(u, e, q);
        let d = (targets.u_d)(x);
        (v[0] - d[0]).powi(2) + (v[1] - d[1]).powi(2)
    });
    CostBreakdown::new(
        0.5 * w.alpha1 * tu,
        0.5 * w.alpha2 * pressure_tracking(space, p, targets.p_d),
        0.5 * w.alpha3 * space.control_l2_norm(f).powi(2),
    )
}

/// `R2 = a1/2 ||curl u||^2 + a2/2 ||p - p_d||^2 + a3/2 ||f||^2`.
pub fn cost_r2(space: &FeSpace, u: &[f64], p: &[f64], f: &[f64], p_d: ScalarField, w: &CostWeights) -> CostBreakdown {
    let curl = space.integrate(|_, e, q| {
        let g = space.velocity_grad_at_qp(u, e, q);
        (g[1][0] - g[0][1]).powi(2)
    });
    CostBreakdown::new(
        0.5 * w.alpha1 * curl,
        0.5 * w.alpha2 * pressure_tracking(space, p, p_d),
        0.5 * w.alpha3 * space.control_l2_norm(f).powi(2),
    )
}

/// How the subgradient is formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum GradientMode {
    /// Forward differences of the tracking part, exact gradient of the
    /// regularization.
    Hybrid,
    /// Forward differences of the whole cost.
    PureFd,
    /// Hybrid differences on a random subset of coordinates (others zero).
    Subset { fraction: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSchedule {
    Constant,
    /// `tau / (k + 1)`.
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptConfig {
    pub tau: f64,
    pub delta_fd: f64,
    pub eps_opt: f64,
    pub max_iter: usize,
    pub cost_kind: CostKind,
    pub gradient: GradientMode,
    pub schedule: StepSchedule,
    /// Evaluate the a priori energy bound for every converged state and
    /// abort if it fails.
    pub check_energy: bool,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            tau: 1e-2,
            delta_fd: 1e-5,
            eps_opt: 1e-5,
            max_iter: 10,
            cost_kind: CostKind::R1,
            gradient: GradientMode::Hybrid,
            schedule: StepSchedule::Constant,
            check_energy: true,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.delta_fd > 0.0 && self.eps_opt > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidArgument(
                "tau, delta_fd, eps_opt and max_iter must be positive".into(),
            ));
        }
        if let GradientMode::Subset { fraction, .. } = self.gradient {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::InvalidArgument("subset fraction must lie in (0, 1]".into()));
            }
        }
        Ok(())
    }

    fn step(&self, k: usize) -> f64 {
        match self.schedule {
            StepSchedule::Constant => self.tau,
            StepSchedule::Harmonic => self.tau / (k as f64 + 1.0),
        }
    }
}

/// One row of the cost history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostRecord {
    pub iter: usize,
    pub cost: CostBreakdown,
    /// `||f^k - f^{k-1}||_{L2}`; absent for the initial control.
    pub control_change_l2: Option<f64>,
}

pub fn write_cost_csv<W: Write>(history: &[CostRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iter,cost,tracking_u,tracking_p,regularization,control_change_L2")?;
    for r in history {
        let change = r.control_change_l2.map(|c| format!("{c:.12e}")).unwrap_or_default();
        writeln!(
            out,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            r.iter, r.cost.total, r.cost.tracking_u, r.cost.tracking_p, r.cost.regularization, change
        )?;
    }
    Ok(())
}

/// Finite-difference subgradient split into its two parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient {
    pub tracking: Vec<f64>,
    pub regularization: Vec<f64>,
    pub total: Vec<f64>,
    /// Coordinates that were differenced.
    pub evaluated: Vec<usize>,
}

/// Everything the optimizer needs on one mesh.
pub struct OptContext<'a> {
    problem: &'a StateProblem<'a>,
    targets: Targets,
    weights: CostWeights,
    control_mass: CsrMatrix,
    velocity_metric: CsrMatrix,
    pressure_mass: CsrMatrix,
    load_op_t: CsrMatrix,
    energy: Option<EnergyChecker>,
}

impl std::fmt::Debug for OptContext<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OptContext").field("weights", &self.weights).finish()
    }
}

/// P1 vector mass matrix in control numbering.
pub fn control_mass(space: &FeSpace) -> CsrMatrix {
    let mp = pressure_mass(space);
    let nn = space.num_nodes();
    let mut trip = Vec::with_capacity(2 * mp.nnz());
    for c in 0..2 {
        for i in 0..nn {
            for k in mp.row_ptr()[i]..mp.row_ptr()[i + 1] {
                trip.push((c * nn + i, c * nn + mp.col_idx()[k], mp.values()[k]));
            }
        }
    }
    CsrMatrix::from_triplets(2 * nn, 2 * nn, &trip)
}

impl<'a> OptContext<'a> {
    pub fn new(
        problem: &'a StateProblem<'a>,
        targets: Targets,
        weights: CostWeights,
        kind: CostKind,
        check_energy: bool,
    ) -> Result<Self> {
        weights.validate()?;
        let space = problem.space();
        let velocity_metric = match kind {
            CostKind::R1 => assemble_a0(space),
            CostKind::R2 => assemble_curl_curl(space),
        };
        let energy = if check_energy {
            let spec = estimate_lambda0(space)?;
            Some(EnergyChecker::new(space, *problem.params(), *problem.law(), &spec)?)
        } else {
            None
        };
        Ok(Self {
            problem,
            targets,
            weights,
            control_mass: control_mass(space),
            velocity_metric,
            pressure_mass: pressure_mass(space),
            load_op_t: problem.load_operator().transpose(),
            energy,
        })
    }

    pub fn problem(&self) -> &StateProblem<'a> {
        self.problem
    }

    pub fn cost(&self, kind: CostKind, state: &StateSolution, f: &[f64]) -> CostBreakdown {
        let space = self.problem.space();
        match kind {
            CostKind::R1 => cost_r1(space, &state.u, &state.p, f, &self.targets, &self.weights),
            CostKind::R2 => cost_r2(space, &state.u, &state.p, f, self.targets.p_d, &self.weights),
        }
    }

    /// `||f - g||_{L2}` for two controls.
    pub fn control_distance(&self, f: &[f64], g: &[f64]) -> f64 {
        let d: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
        self.control_mass.bilinear(&d, &d).max(0.0).sqrt()
    }

    pub fn check_energy(&self, f: &[f64], state: &StateSolution) -> Result<Option<EnergyCheck>> {
        let Some(checker) = &self.energy else {
            return Ok(None);
        };
        let space = self.problem.space();
        let chk = checker.check(space, &self.problem.load(f), &state.u)?;
        if !chk.holds() {
            return Err(Error::ConditionViolated(format!(
                "energy bound violated: {:.6e} > {:.6e}",
                chk.lhs, chk.bound.k_tilde
            )));
        }
        Ok(Some(chk))
    }

    /// Linear functionals `b_u`, `b_p` such that the tracking change for a
    /// state increment `(du, dp)` is
    /// `a1 (du . b_u + du^T K du / 2) + a2 (dp . b_p + dp^T Mp dp / 2)`.
    fn tracking_gradients(&self, kind: CostKind, state: &StateSolution) -> (Vec<f64>, Vec<f64>) {
        let space = self.problem.space();
        let nq = space.num_qp();
        let b_u = match kind {
            CostKind::R2 => self.velocity_metric.mul_vec(&state.u),
            CostKind::R1 => {
                let mut b = vec![0.0; space.n_velocity()];
                for (e, el) in space.elements().iter().enumerate() {
                    let d = crate::forms::vector_dofs(space, &el.dofs);
                    for q in 0..nq {
                        let w = space.qp_w(e, q);
                        let phi = space.ref_p2(q);
                        let v = space.velocity_at_qp(&state.u, e, q);
                        let t = (self.targets.u_d)(space.qp_x(e, q));
                        for i in 0..6 {
                            b[d[i]] += w * (v[0] - t[0]) * phi[i];
                            b[d[6 + i]] += w * (v[1] - t[1]) * phi[i];
                        }
                    }
                }
                b
            }
        };
        let mut b_p = vec![0.0; space.n_pressure()];
        let quad = space.quadrature();
        for (e, el) in space.elements().iter().enumerate() {
            for q in 0..nq {
                let w = space.qp_w(e, q);
                let r = space.pressure_at_qp(&state.p, e, q) - (self.targets.p_d)(space.qp_x(e, q));
                for k in 0..3 {
                    b_p[el.nodes[k]] += w * r * quad.points[q][k];
                }
            }
        }
        (b_u, b_p)
    }

    /// Forward-difference subgradient at `f`. `state` must be the polished
    /// state for `f`.
    pub fn fd_subgradient(
        &self,
        f: &[f64],
        state: &StateSolution,
        cfg: &OptConfig,
        iteration: usize,
    ) -> Result<Subgradient> {
        let n = f.len();
        let delta = cfg.delta_fd;
        let a3 = self.weights.alpha3;
        let mf = self.control_mass.mul_vec(f);
        let coords: Vec<usize> = match cfg.gradient {
            GradientMode::Subset { fraction, seed } => {
                let k = ((fraction * n as f64).ceil() as usize).clamp(1, n);
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(iteration as u64));
                let mut idx = sample(&mut rng, n, k).into_vec();
                idx.sort_unstable();
                idx
            }
            _ => (0..n).collect(),
        };

        let (tracking_vals, needs_fd) = if self.weights.alpha1 == 0.0 && self.weights.alpha2 == 0.0 {
            (vec![0.0; coords.len()], false)
        } else {
            (Vec::new(), true)
        };
        let tracking_vals = if needs_fd {
            let problem = self.problem;
            let factor = problem.coupled_factor(&state.u)?;
            let base_load = problem.load(f);
            let (b_u, b_p) = self.tracking_gradients(cfg.cost_kind, state);
            let (a1, a2) = (self.weights.alpha1, self.weights.alpha2);
            coords
                .par_iter()
                .map(|&i| -> Result<f64> {
                    let mut load = base_load.clone();
                    let col = self.load_op_t.row_ptr()[i]..self.load_op_t.row_ptr()[i + 1];
                    for k in col {
                        load[self.load_op_t.col_idx()[k]] += delta * self.load_op_t.values()[k];
                    }
                    let (u2, p2) = problem
                        .chord_solve(&factor, state, &load, 30)
                        .map_err(|e| Error::PerturbedSolve {
                            dof: i,
                            source: Box::new(e),
                        })?;
                    let du: Vec<f64> = u2.iter().zip(&state.u).map(|(a, b)| a - b).collect();
                    let dp: Vec<f64> = p2.iter().zip(&state.p).map(|(a, b)| a - b).collect();
                    let change_u = dot(&du, &b_u) + 0.5 * self.velocity_metric.bilinear(&du, &du);
                    let change_p = dot(&dp, &b_p) + 0.5 * self.pressure_mass.bilinear(&dp, &dp);
                    Ok((a1 * change_u + a2 * change_p) / delta)
                })
                .collect::<Result<Vec<f64>>>()?
        } else {
            tracking_vals
        };

        let mut tracking = vec![0.0; n];
        let mut regularization = vec![0.0; n];
        let diag: Vec<f64> = (0..n).map(|i| self.control_mass.get(i, i)).collect();
        for (k, &i) in coords.iter().enumerate() {
            tracking[i] = tracking_vals[k];
            regularization[i] = match cfg.gradient {
                // (a3/2)[(f + d e_i)^T M (f + d e_i) - f^T M f] / d, expanded exactly
                GradientMode::PureFd => a3 * (mf[i] + 0.5 * delta * diag[i]),
                _ => a3 * mf[i],
            };
        }
        let total = tracking.iter().zip(&regularization).map(|(a, b)| a + b).collect();
        Ok(Subgradient {
            tracking,
            regularization,
            total,
            evaluated: coords,
        })
    }
}

/// Result of a projected subgradient run.
#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub control: Vec<f64>,
    pub state: StateSolution,
    pub history: Vec<CostRecord>,
    /// Stopped because the control change fell below `eps_opt`.
    pub converged: bool,
    pub iterations: usize,
    /// Energy-bound evaluations of every accepted state (empty when disabled).
    pub energy_checks: Vec<EnergyCheck>,
}

/// Projected subgradient iteration `f <- P(f - tau g)` from `f0`.
pub fn optimize(
    ctx: &OptContext<'_>,
    f0: &[f64],
    bounds: Option<&AdmissibleBox>,
    solver: &SolverConfig,
    cfg: &OptConfig,
) -> Result<OptimizeResult> {
    cfg.validate()?;
    let problem = ctx.problem();
    let mut f = project(f0, bounds);
    let mut history: Vec<CostRecord> = Vec::new();
    let mut energy_checks = Vec::new();
    let abort = |iteration: usize, history: &[CostRecord], e: Error| Error::OptimizationAborted {
        iteration,
        history: history.to_vec(),
        source: Box::new(e),
    };

    let solve = |f: &[f64], init: Option<&StateSolution>| -> Result<StateSolution> {
        let load = problem.load(f);
        let mut s = problem.solve_load(&load, init, solver)?;
        problem.polish(&mut s, &load, 20)?;
        Ok(s)
    };
    let mut state = solve(&f, None).map_err(|e| abort(0, &history, e))?;
    energy_checks.extend(ctx.check_energy(&f, &state).map_err(|e| abort(0, &history, e))?);
    history.push(CostRecord {
        iter: 0,
        cost: ctx.cost(cfg.cost_kind, &state, &f),
        control_change_l2: None,
    });

    let mut converged = false;
    let mut k = 0;
    while k < cfg.max_iter {
        let g = ctx
            .fd_subgradient(&f, &state, cfg, k)
            .map_err(|e| abort(k, &history, e))?;
        let tau = cfg.step(k);
        let trial: Vec<f64> = f.iter().zip(&g.total).map(|(a, b)| a - tau * b).collect();
        let f_new = project(&trial, bounds);
        let change = ctx.control_distance(&f_new, &f);
        k += 1;
        state = solve(&f_new, Some(&state)).map_err(|e| abort(k, &history, e))?;
        energy_checks.extend(ctx.check_energy(&f_new, &state).map_err(|e| abort(k, &history, e))?);
        f = f_new;
        history.push(CostRecord {
            iter: k,
            cost: ctx.cost(cfg.cost_kind, &state, &f),
            control_change_l2: Some(change),
        });
        if change < cfg.eps_opt {
            converged = true;
            break;
        }
    }
    Ok(OptimizeResult {
        control: f,
        state,
        history,
        converged,
        iterations: k,
        energy_checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::ModelParams;
    use crate::friction::SlipLaw;
    use crate::mesh::TriMesh;
    use rand::Rng;

    fn zero_v(_: [f64; 2]) -> [f64; 2] {
        [0.0, 0.0]
    }
    fn zero_s(_: [f64; 2]) -> f64 {
        0.0
    }

    fn targets() -> Targets {
        Targets {
            u_d: zero_v,
            p_d: zero_s,
        }
    }

    fn w(a1: f64, a2: f64, a3: f64) -> CostWeights {
        CostWeights {
            alpha1: a1,
            alpha2: a2,
            alpha3: a3,
        }
    }

    #[test]
    fn cost_r1_closed_forms() {
        let space = FeSpace::new(TriMesh::unit_square(3).unwrap());
        let u = vec![0.0; space.n_velocity()];
        let p = vec![0.0; space.n_pressure()];
        let f0 = vec![0.0; space.n_control()];
        assert_eq!(cost_r1(&space, &u, &p, &f0, &targets(), &w(1.0, 1.0, 1.0)).total, 0.0);
        let f1 = space.interpolate_control(|_| [1.0, 0.0]).unwrap();
        let c = cost_r1(&space, &u, &p, &f1, &targets(), &w(1.0, 1.0, 0.2));
        assert!((c.total - 0.1).abs() < 1e-14);
        let u1 = space.interpolate_velocity(|_| [1.0, 0.0]).unwrap();
        let c = cost_r1(&space, &u1, &p, &f0, &targets(), &w(1.0, 0.0, 1.0));
        assert!((c.total - 0.5).abs() < 1e-13 && (c.tracking_u - 0.5).abs() < 1e-13);
    }

    #[test]
    fn cost_r2_closed_forms() {
        let space = FeSpace::new(TriMesh::unit_square(3).unwrap());
        let p = vec![0.0; space.n_pressure()];
        let f0 = vec![0.0; space.n_control()];
        let rot = space.interpolate_velocity(|x| [-x[1], x[0]]).unwrap();
        let c = cost_r2(&space, &rot, &p, &f0, zero_s, &w(1.0, 0.0, 1.0));
        assert!((c.tracking_u - 2.0).abs() < 1e-12);
        let grad = space.interpolate_velocity(|x| [2.0 * x[0], 2.0 * x[1]]).unwrap();
        assert!(cost_r2(&space, &grad, &p, &f0, zero_s, &w(1.0, 0.0, 1.0)).tracking_u.abs() < 1e-12);
        // independent evaluation through the assembled curl-curl form
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..space.n_velocity()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let k = assemble_curl_curl(&space);
        let c = cost_r2(&space, &u, &p, &f0, zero_s, &w(1.0, 0.0, 1.0));
        assert!((c.tracking_u - 0.5 * k.bilinear(&u, &u)).abs() < 1e-10 * c.tracking_u.max(1.0));
    }

    #[test]
    fn projection_properties() {
        let b = AdmissibleBox::uniform(4, -1.0, 1.0).unwrap();
        let f = vec![5.0, 0.3, -7.0, 1.0];
        let pf = project(&f, Some(&b));
        assert_eq!(pf, vec![1.0, 0.3, -1.0, 1.0]);
        assert_eq!(project(&pf, Some(&b)), pf);
        assert_eq!(project(&f, None), f);
        assert!(b.contains(&pf) && !b.contains(&f));
        assert!(AdmissibleBox::uniform(2, 1.0, 0.0).is_err());
    }

    fn setup(space: &FeSpace) -> StateProblem<'_> {
        StateProblem::new(
            space,
            ModelParams {
                mu: 1.0,
                ..Default::default()
            },
            SlipLaw::new(1.55, 1.53, 3.0, 1e-6).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn regularization_only_flow_contracts() {
        let space = FeSpace::new(TriMesh::unit_square(3).unwrap());
        let prob = setup(&space);
        let ctx = OptContext::new(&prob, targets(), w(0.0, 0.0, 1.0), CostKind::R1, false).unwrap();
        let f0 = space.interpolate_control(|x| [x[0] - 1.0, x[1] - 1.0]).unwrap();
        let cfg = OptConfig {
            tau: 1.0,
            max_iter: 5,
            ..Default::default()
        };
        let sg = ctx.fd_subgradient(&f0, &StateSolution::zero(&space), &cfg, 0).unwrap();
        let mf = control_mass(&space).mul_vec(&f0);
        assert_eq!(sg.total, mf);
        let res = optimize(&ctx, &f0, None, &SolverConfig::default(), &cfg).unwrap();
        // closed form: f_k = (I - tau M)^k f0
        let mut fk = f0.clone();
        let m = control_mass(&space);
        for _ in 0..res.iterations {
            let mf = m.mul_vec(&fk);
            fk.iter_mut().zip(&mf).for_each(|(a, b)| *a -= b);
        }
        for (a, b) in fk.iter().zip(&res.control) {
            assert!((a - b).abs() < 1e-14);
        }
        let norms: Vec<f64> = res.history.iter().map(|h| h.cost.regularization).collect();
        assert!(norms.windows(2).all(|p| p[1] < p[0]));
    }

    #[test]
    fn hybrid_and_pure_fd_agree() {
        let space = FeSpace::new(TriMesh::unit_square(3).unwrap());
        let prob = setup(&space);
        fn ud(x: [f64; 2]) -> [f64; 2] {
            [x[1] * (1.0 - x[1]), 0.0]
        }
        let t = Targets { u_d: ud, p_d: zero_s };
        let ctx = OptContext::new(&prob, t, w(1.0, 1.0, 0.2), CostKind::R1, false).unwrap();
        let f = space.interpolate_control(|x| [3.0 * x[1], -x[0]]).unwrap();
        let scfg = SolverConfig {
            eps_hvi: 1e-10,
            ..Default::default()
        };
        let load = prob.load(&f);
        let mut st = prob.solve_load(&load, None, &scfg).unwrap();
        prob.polish(&mut st, &load, 20).unwrap();
        let mut cfg = OptConfig::default();
        let hybrid = ctx.fd_subgradient(&f, &st, &cfg, 0).unwrap();
        cfg.gradient = GradientMode::PureFd;
        let pure = ctx.fd_subgradient(&f, &st, &cfg, 0).unwrap();
        assert_eq!(hybrid.tracking, pure.tracking);
        let scale = hybrid.total.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for (a, b) in hybrid.total.iter().zip(&pure.total) {
            assert!((a - b).abs() < 1e-5 * scale);
        }
        cfg.gradient = GradientMode::Subset {
            fraction: 0.25,
            seed: 3,
        };
        let sub = ctx.fd_subgradient(&f, &st, &cfg, 0).unwrap();
        assert_eq!(sub.evaluated.len(), (0.25 * f.len() as f64).ceil() as usize);
        for &i in &sub.evaluated {
            assert_eq!(sub.tracking[i], hybrid.tracking[i]);
        }
        // delta robustness
        let cfg6 = OptConfig {
            delta_fd: 1e-6,
            ..Default::default()
        };
        let h6 = ctx.fd_subgradient(&f, &st, &cfg6, 0).unwrap();
        let num: f64 = h6.total.iter().zip(&hybrid.total).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let den: f64 = hybrid.total.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(num / den < 1e-3, "{}", num / den);
    }

    #[test]
    fn cost_csv_format() {
        let h = vec![
            CostRecord {
                iter: 0,
                cost: CostBreakdown::new(1.0, 2.0, 3.0),
                control_change_l2: None,
            },
            CostRecord {
                iter: 1,
                cost: CostBreakdown::new(0.5, 1.0, 2.0),
                control_change_l2: Some(0.1),
            },
        ];
        let mut buf = Vec::new();
        write_cost_csv(&h, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "iter,cost,tracking_u,tracking_p,regularization,control_change_L2");
        assert!(lines[1].starts_with("0,6.0") && lines[1].ends_with(','));
        assert!(lines[2].ends_with("1.000000000000e-1"));
    }
}
