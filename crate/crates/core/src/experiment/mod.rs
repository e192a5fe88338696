//! Experiment drivers: per-mesh optimization runs, the cross-mesh
//! convergence study, force-perturbation studies, condition reports and
//! artifact output.

pub mod catalog;
pub mod config;
pub mod vtk;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{Experiment, ExperimentConfig, DEFAULT_MESHES};

use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::friction::{estimate_delta1, estimate_lambda0, Delta1Estimate, SpectralConstants};
use crate::mesh::TriMesh;
use crate::optimize::{optimize, write_cost_csv, CostRecord, OptContext};
use crate::solver::conditions::{
    check_existence_condition, check_uniqueness_conditions, AnalyticConstants, ConditionOutcome, EnergyBound,
    EnergyCheck, EnergyChecker, UniquenessReport,
};
use crate::solver::perturbation::{perturbation_study, PerturbationTable};
use crate::solver::{StateProblem, StateSolution};

/// Samples used for the relaxed-monotonicity constant.
pub const DELTA1_SAMPLES: usize = 200_001;

/// Optimized fields on one mesh.
#[derive(Debug, Clone)]
pub struct MeshRun {
    pub n: usize,
    pub space: FeSpace,
    pub control: Vec<f64>,
    pub state: StateSolution,
    pub history: Vec<CostRecord>,
    pub converged: bool,
    pub iterations: usize,
    pub energy_checks: Vec<EnergyCheck>,
}

impl MeshRun {
    pub fn h(&self) -> f64 {
        self.space.mesh().mesh_size()
    }
}

/// Runs the projected subgradient method on an `n x n` mesh from the
/// interpolated initial control.
pub fn run_mesh(exp: &Experiment, n: usize) -> Result<MeshRun> {
    let space = FeSpace::new(TriMesh::unit_square(n)?);
    let (control, state, history, converged, iterations, energy_checks) = {
        let problem = StateProblem::new(&space, exp.params, exp.law)?;
        let ctx = OptContext::new(&problem, exp.targets, exp.weights, exp.opt.cost_kind, exp.opt.check_energy)?;
        let f0 = space.interpolate_control(exp.f0)?;
        let res = optimize(&ctx, &f0, None, &exp.solver, &exp.opt)?;
        (res.control, res.state, res.history, res.converged, res.iterations, res.energy_checks)
    };
    Ok(MeshRun {
        n,
        space,
        control,
        state,
        history,
        converged,
        iterations,
        energy_checks,
    })
}

/// Runs every mesh of the experiment (independently, in parallel).
pub fn run_all_meshes(exp: &Experiment) -> Result<Vec<MeshRun>> {
    exp.meshes.par_iter().map(|&n| run_mesh(exp, n)).collect()
}

/// Errors of one mesh against the reference, absolute and relative to the
/// reference norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub velocity_l2: f64,
    pub velocity_v: f64,
    pub pressure_l2: f64,
    pub control_l2: f64,
    pub rel_velocity_l2: f64,
    pub rel_velocity_v: f64,
    pub rel_pressure_l2: f64,
    pub rel_control_l2: f64,
}

impl ConvergenceRow {
    /// Absolute errors in table order.
    pub fn absolute(&self) -> [f64; 4] {
        [self.velocity_l2, self.velocity_v, self.pressure_l2, self.control_l2]
    }

    /// Relative errors in table order.
    pub fn relative(&self) -> [f64; 4] {
        [self.rel_velocity_l2, self.rel_velocity_v, self.rel_pressure_l2, self.rel_control_l2]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub label: String,
    pub reference_n: usize,
    /// One row per mesh, the reference last (all zeros).
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Rows of the study meshes, without the reference.
    pub fn study_rows(&self) -> &[ConvergenceRow] {
        &self.rows[..self.rows.len() - 1]
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "n,h,velocity_L2,velocity_V,pressure_L2,control_L2,rel_velocity_L2,rel_velocity_V,rel_pressure_L2,rel_control_L2"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e},{:.10e}",
                r.n,
                r.h,
                r.velocity_l2,
                r.velocity_v,
                r.pressure_l2,
                r.control_l2,
                r.rel_velocity_l2,
                r.rel_velocity_v,
                r.rel_pressure_l2,
                r.rel_control_l2
            )?;
        }
        Ok(())
    }
}

/// Errors of `run` against `reference`, with the coarse fields evaluated at
/// the reference mesh's quadrature points.
pub fn compare_runs(run: &MeshRun, reference: &MeshRun) -> ConvergenceRow {
    let rs = &reference.space;
    let same = Arc::ptr_eq(&run.space.mesh_arc(), &rs.mesh_arc()) || run.n == reference.n;
    let mut acc = [0.0f64; 4];
    let mut norms = [0.0f64; 4];
    let nq = rs.num_qp();
    for e in 0..rs.elements().len() {
        for q in 0..nq {
            let w = rs.qp_w(e, q);
            let x = rs.qp_x(e, q);
            let ur = rs.velocity_at_qp(&reference.state.u, e, q);
            let gr = rs.velocity_grad_at_qp(&reference.state.u, e, q);
            let pr = rs.pressure_at_qp(&reference.state.p, e, q);
            let fr = rs.control_at_qp(&reference.control, e, q);
            let (uh, gh, ph, fh) = if same {
                (
                    rs.velocity_at_qp(&run.state.u, e, q),
                    rs.velocity_grad_at_qp(&run.state.u, e, q),
                    rs.pressure_at_qp(&run.state.p, e, q),
                    rs.control_at_qp(&run.control, e, q),
                )
            } else {
                let (v, g) = run.space.velocity_at_point(&run.state.u, x);
                (
                    v,
                    g,
                    run.space.pressure_at_point(&run.state.p, x),
                    run.space.control_at_point(&run.control, x),
                )
            };
            let du = [uh[0] - ur[0], uh[1] - ur[1]];
            let dg = [[gh[0][0] - gr[0][0], gh[0][1] - gr[0][1]], [gh[1][0] - gr[1][0], gh[1][1] - gr[1][1]]];
            let df = [fh[0] - fr[0], fh[1] - fr[1]];
            acc[0] += w * (du[0] * du[0] + du[1] * du[1]);
            acc[1] += w * crate::fem::strain_sq(&dg);
            acc[2] += w * (ph - pr).powi(2);
            acc[3] += w * (df[0] * df[0] + df[1] * df[1]);
            norms[0] += w * (ur[0] * ur[0] + ur[1] * ur[1]);
            norms[1] += w * crate::fem::strain_sq(&gr);
            norms[2] += w * pr * pr;
            norms[3] += w * (fr[0] * fr[0] + fr[1] * fr[1]);
        }
    }
    let abs = acc.map(f64::sqrt);
    let rel = |k: usize| if norms[k] > 0.0 { abs[k] / norms[k].sqrt() } else { abs[k] };
    ConvergenceRow {
        n: run.n,
        h: run.h(),
        velocity_l2: abs[0],
        velocity_v: abs[1],
        pressure_l2: abs[2],
        control_l2: abs[3],
        rel_velocity_l2: rel(0),
        rel_velocity_v: rel(1),
        rel_pressure_l2: rel(2),
        rel_control_l2: rel(3),
    }
}

/// Error table of the study meshes against the last (finest) mesh.
pub fn convergence_table(label: &str, runs: &[MeshRun]) -> Result<ConvergenceTable> {
    let reference = runs
        .last()
        .ok_or_else(|| Error::Config("convergence study needs at least one mesh".into()))?;
    Ok(ConvergenceTable {
        label: label.to_string(),
        reference_n: reference.n,
        rows: runs.iter().map(|r| compare_runs(r, reference)).collect(),
    })
}

/// Optimizes on every mesh and tabulates errors against the reference mesh.
pub fn convergence_study(exp: &Experiment) -> Result<(ConvergenceTable, Vec<MeshRun>)> {
    if exp.meshes.len() < 2 {
        return Err(Error::Config("convergence study needs study meshes and a reference mesh".into()));
    }
    let runs = run_all_meshes(exp)?;
    Ok((convergence_table(&exp.label, &runs)?, runs))
}

/// Per-mesh summary for the run report.
#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub n: usize,
    pub h: f64,
    pub iterations: usize,
    pub converged: bool,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub last_control_change: Option<f64>,
    pub energy_checks: usize,
    pub worst_energy_ratio: f64,
}

impl From<&MeshRun> for MeshSummary {
    fn from(run: &MeshRun) -> Self {
        Self {
            n: run.n,
            h: run.h(),
            iterations: run.iterations,
            converged: run.converged,
            initial_cost: run.history.first().map_or(f64::NAN, |c| c.cost.total),
            final_cost: run.history.last().map_or(f64::NAN, |c| c.cost.total),
            last_control_change: run.history.last().and_then(|c| c.control_change_l2),
            energy_checks: run.energy_checks.len(),
            worst_energy_ratio: run
                .energy_checks
                .iter()
                .map(|c| c.lhs / c.bound.k_tilde)
                .fold(0.0, f64::max),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes per-mesh cost and residual histories, the finest-mesh VTK dump
/// and a JSON summary under `out`.
pub fn write_run_artifacts(out: &Path, runs: &[MeshRun]) -> Result<()> {
    for run in runs {
        let dir = out.join(format!("n{}", run.n));
        write_cost_csv(&run.history, create(&dir.join("cost_history.csv"))?)?;
        run.state.write_residual_csv(create(&dir.join("residual_history.csv"))?)?;
    }
    if let Some(fine) = runs.last() {
        vtk::write_fields(&fine.space, &fine.state.u, &fine.state.p, &fine.control, create(&out.join("fields.vtk"))?)?;
    }
    let summary: Vec<MeshSummary> = runs.iter().map(MeshSummary::from).collect();
    serde_json::to_writer_pretty(create(&out.join("summary.json"))?, &summary)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(())
}

/// Runs the experiment and writes artifacts; returns the runs.
pub fn run_example(exp: &Experiment) -> Result<Vec<MeshRun>> {
    let runs = run_all_meshes(exp)?;
    write_run_artifacts(&exp.out, &runs)?;
    Ok(runs)
}

/// Solves the state equation for the initial control of the experiment.
pub fn solve_initial_state(exp: &Experiment, n: usize) -> Result<(FeSpace, Vec<f64>, StateSolution)> {
    let space = FeSpace::new(TriMesh::unit_square(n)?);
    let f = space.interpolate_control(exp.f0)?;
    let state = {
        let problem = StateProblem::new(&space, exp.params, exp.law)?;
        let load = problem.load(&f);
        let mut s = problem.solve_load(&load, None, &exp.solver)?;
        problem.polish(&mut s, &load, 20)?;
        s
    };
    Ok((space, f, state))
}

/// Analytic solvability conditions of an experiment on one mesh.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub spectral: SpectralConstants,
    pub delta1: Delta1Estimate,
    pub existence: ConditionOutcome,
    pub f_dual_norm: f64,
    pub energy_bound: EnergyBound,
    pub energy_lhs: f64,
    pub uniqueness: UniquenessReport,
}

/// Evaluates existence, the energy bound at the initial control and the
/// uniqueness conditions.
pub fn condition_report(exp: &Experiment, n: usize, constants: &AnalyticConstants) -> Result<ConditionReport> {
    let (space, f, state) = solve_initial_state(exp, n)?;
    let spectral = estimate_lambda0(&space)?;
    let delta1 = estimate_delta1(&exp.law, DELTA1_SAMPLES)?;
    let existence = check_existence_condition(&exp.params, &exp.law, &spectral);
    let checker = EnergyChecker::new(&space, exp.params, exp.law, &spectral)?;
    let load = crate::forms::assemble_load(&space, &f);
    let chk = checker.check(&space, &load, &state.u)?;
    let uniqueness =
        check_uniqueness_conditions(&exp.params, &spectral, delta1.delta1, constants, Some(chk.bound.k_tilde));
    Ok(ConditionReport {
        n,
        spectral,
        delta1,
        existence,
        f_dual_norm: chk.f_dual_norm,
        energy_bound: chk.bound,
        energy_lhs: chk.lhs,
        uniqueness,
    })
}

/// Perturbation sizes of the force-perturbation study.
pub const PERTURBATION_SIZES: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Force-perturbation study around the manufactured forcing of the target
/// state, perturbed along the unit-`L2` curl of a bubble stream function.
pub fn force_perturbation_study(exp: &Experiment, n: usize, ts: &[f64]) -> Result<PerturbationTable> {
    let space = FeSpace::new(TriMesh::unit_square(n)?);
    let (u_d, p_d, params) = (exp.targets.u_d, exp.targets.p_d, exp.params);
    let f = space.interpolate_control(|x| catalog::manufactured_force(&params, u_d, p_d, x))?;
    let mut g = space.interpolate_control(catalog::bubble_curl)?;
    let gn = space.control_l2_norm(&g);
    g.iter_mut().for_each(|v| *v /= gn);
    let problem = StateProblem::new(&space, exp.params, exp.law)?;
    perturbation_study(&problem, &f, &g, ts, &exp.solver)
}
