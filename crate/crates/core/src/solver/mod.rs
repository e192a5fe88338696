//! Discrete state solver for the regularized slip problem.
//!
//! Unknowns are the velocity `u` (P2, constrained DOFs held at zero) and
//! the zero-mean pressure `p` (P1). The momentum residual is
//!
//! `R(u, p) = mu A u + alpha M u + N(u) u + beta C_r(u) + kappa C_q(u) + F(u) + D^T p - L`
//!
//! restricted to free DOFs, and the continuity residual is `D u`.
//!
//! [`StateProblem::solve`] runs the Uzawa outer loop (pressure step `eta`)
//! around a damped Newton iteration on the velocity. If the linear Uzawa
//! rate has not reached the tolerance after `uzawa_sweeps` outer steps, the
//! iterate is finished by a damped Newton iteration on the coupled
//! velocity-pressure system, which converges quadratically. The coupled
//! Jacobian is also exposed for chord iterations on nearby problems.

pub mod conditions;
pub mod perturbation;

use std::io::Write;

use faer::sparse::Triplet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, ResidualRecord, Result};
use crate::fem::FeSpace;
use crate::forms::{
    assemble_a, assemble_a0, assemble_d, assemble_load_operator, assemble_nonlinear,
    velocity_pattern, ModelParams,
};
use crate::friction::{assemble_friction, SlipLaw};
use crate::sparse::{dot, norm2, CsrMatrix, SparseLu};

/// How the outer iteration is organized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Pure Uzawa with Newton inner solves, up to `max_outer` sweeps.
    Uzawa,
    /// Uzawa for at most `uzawa_sweeps` sweeps, then coupled Newton.
    UzawaThenCoupled,
    /// Coupled Newton from the start.
    Coupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Tolerance on the combined residual.
    pub eps_hvi: f64,
    /// Uzawa pressure step.
    pub eta: f64,
    /// Cap on outer iterations (Uzawa sweeps plus coupled Newton steps).
    pub max_outer: usize,
    /// Cap on inner Newton steps per Uzawa sweep.
    pub max_newton: usize,
    /// Uzawa sweeps before switching to coupled Newton.
    pub uzawa_sweeps: usize,
    /// Friction smoothing length, forwarded to the slip law.
    pub eps_reg: f64,
    pub strategy: Strategy,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_hvi: 1e-5,
            eta: 1.0,
            max_outer: 200,
            max_newton: 30,
            uzawa_sweeps: 20,
            eps_reg: crate::friction::DEFAULT_EPS_REG,
            strategy: Strategy::UzawaThenCoupled,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_hvi > 0.0 && self.eta > 0.0 && self.eps_reg > 0.0) {
            return Err(Error::InvalidArgument(
                "eps_hvi, eta and eps_reg must be positive".into(),
            ));
        }
        if self.max_outer == 0 || self.max_newton == 0 {
            return Err(Error::InvalidArgument("iteration caps must be positive".into()));
        }
        Ok(())
    }
}

/// Converged (or best) discrete state.
#[derive(Debug, Clone, Serialize)]
pub struct StateSolution {
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub residual_history: Vec<ResidualRecord>,
    pub converged: bool,
    pub iterations: usize,
}

impl StateSolution {
    pub fn zero(space: &FeSpace) -> Self {
        Self {
            u: vec![0.0; space.n_velocity()],
            p: vec![0.0; space.n_pressure()],
            residual_history: Vec::new(),
            converged: false,
            iterations: 0,
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history
            .last()
            .map(ResidualRecord::combined)
            .unwrap_or(f64::NAN)
    }

    /// Writes `iteration,velocity_residual,divergence_residual`.
    pub fn write_residual_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iteration,velocity_residual,divergence_residual")?;
        for r in &self.residual_history {
            writeln!(out, "{},{:.12e},{:.12e}", r.iteration, r.velocity, r.divergence)?;
        }
        Ok(())
    }
}

/// Factorized coupled Jacobian, reusable for chord iterations.
pub struct CoupledFactor {
    lu: SparseLu,
}

impl std::fmt::Debug for CoupledFactor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoupledFactor").field("dim", &self.lu.dim()).finish()
    }
}

/// Operators of one discrete problem, assembled once and shared by all solves.
#[derive(Debug)]
pub struct StateProblem<'a> {
    space: &'a FeSpace,
    params: ModelParams,
    law: SlipLaw,
    /// `mu A + alpha M` on the full velocity space.
    linear: CsrMatrix,
    pattern: CsrMatrix,
    d: CsrMatrix,
    /// `D` restricted to free velocity columns, and its transpose.
    d_free: CsrMatrix,
    dt_free: CsrMatrix,
    load_op: CsrMatrix,
    mp: CsrMatrix,
    mp_lu: SparseLu,
    free_map: Vec<Option<usize>>,
}

impl<'a> StateProblem<'a> {
    pub fn new(space: &'a FeSpace, params: ModelParams, law: SlipLaw) -> Result<Self> {
        params.validate()?;
        law.validate()?;
        let pattern = velocity_pattern(space);
        let mut linear = assemble_a(space);
        linear.scale(params.mu);
        if params.alpha != 0.0 {
            linear.axpy(params.alpha, &assemble_a0(space));
        }
        let d = assemble_d(space);
        let nv = space.n_velocity();
        let free_map: Vec<Option<usize>> = (0..nv).map(|i| space.free_index(i)).collect();
        let prow: Vec<usize> = (0..space.n_pressure()).collect();
        let d_free = d.submatrix(&prow, &free_map, space.free_dofs().len());
        let dt_free = d_free.transpose();
        let mp = pressure_mass(space);
        let mut trip = Vec::new();
        mp.push_triplets(0, 0, &mut trip);
        let mp_lu = SparseLu::factor(space.n_pressure(), &trip)?;
        Ok(Self {
            space,
            params,
            law,
            linear,
            pattern,
            d,
            d_free,
            dt_free,
            load_op: assemble_load_operator(space),
            mp,
            mp_lu,
            free_map,
        })
    }

    pub fn space(&self) -> &FeSpace {
        self.space
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn law(&self) -> &SlipLaw {
        &self.law
    }

    pub fn divergence_operator(&self) -> &CsrMatrix {
        &self.d
    }

    pub fn pressure_mass(&self) -> &CsrMatrix {
        &self.mp
    }

    /// Load vector of a P1 control.
    pub fn load(&self, f: &[f64]) -> Vec<f64> {
        self.load_op.mul_vec(f)
    }

    pub fn load_operator(&self) -> &CsrMatrix {
        &self.load_op
    }

    fn with_eps(&self, eps_reg: f64) -> SlipLaw {
        SlipLaw {
            eps_reg,
            ..self.law
        }
    }

    /// Momentum residual on the full velocity space, zero on constrained DOFs.
    pub fn momentum_residual(&self, u: &[f64], p: &[f64], load: &[f64]) -> Vec<f64> {
        self.momentum_residual_with(&self.law, u, p, load)
    }

    fn momentum_residual_with(&self, law: &SlipLaw, u: &[f64], p: &[f64], load: &[f64]) -> Vec<f64> {
        let (mut r, _) = assemble_nonlinear(self.space, &self.params, u, None);
        let (fr, _) = assemble_friction(self.space, law, u, None);
        let lin = self.linear.mul_vec(u);
        let dtp = self.d.mul_transpose_vec(p);
        for i in 0..r.len() {
            r[i] += lin[i] + fr[i] + dtp[i] - load[i];
        }
        self.space.apply_mask(&mut r);
        r
    }

    /// Velocity Jacobian on the full velocity pattern.
    fn jacobian_with(&self, law: &SlipLaw, u: &[f64]) -> CsrMatrix {
        let (_, nl) = assemble_nonlinear(self.space, &self.params, u, Some(&self.pattern));
        let (_, fj) = assemble_friction(self.space, law, u, Some(&self.pattern));
        let mut j = nl.expect("jacobian requested");
        j.axpy(1.0, &self.linear);
        j.axpy(1.0, &fj.expect("jacobian requested"));
        j
    }

    /// `sqrt(r^T Mp^{-1} r)` for `r = D u`: the L2 norm of the projected divergence.
    pub fn divergence_norm(&self, u: &[f64]) -> Result<f64> {
        let r = self.d.mul_vec(u);
        let z = self.mp_lu.solve(&r)?;
        Ok(dot(&r, &z).max(0.0).sqrt())
    }

    fn record(&self, law: &SlipLaw, iteration: usize, u: &[f64], p: &[f64], load: &[f64]) -> Result<ResidualRecord> {
        let r = self.momentum_residual_with(law, u, p, load);
        Ok(ResidualRecord {
            iteration,
            velocity: norm2(&r),
            divergence: self.divergence_norm(u)?,
        })
    }

    fn free_part(&self, v: &[f64]) -> Vec<f64> {
        self.space.free_dofs().iter().map(|&i| v[i]).collect()
    }

    /// Damped Newton on the velocity with the pressure frozen.
    fn velocity_newton(
        &self,
        law: &SlipLaw,
        u: &mut [f64],
        p: &[f64],
        load: &[f64],
        tol: f64,
        max_newton: usize,
    ) -> Result<f64> {
        let nf = self.space.free_dofs().len();
        let mut r = self.momentum_residual_with(law, u, p, load);
        let mut rn = norm2(&r);
        for _ in 0..max_newton {
            if rn <= tol {
                break;
            }
            let j = self.jacobian_with(law, u);
            let jf = j.submatrix(self.space.free_dofs(), &self.free_map, nf);
            let mut trip = Vec::with_capacity(jf.nnz());
            jf.push_triplets(0, 0, &mut trip);
            let lu = SparseLu::factor(nf, &trip)?;
            let rhs: Vec<f64> = self.free_part(&r).iter().map(|x| -x).collect();
            let step = lu.solve(&rhs)?;
            let (nu, nr, nrn) = self.line_search(law, u, p, load, &step, rn)?;
            u.copy_from_slice(&nu);
            r = nr;
            rn = nrn;
        }
        Ok(rn)
    }

    /// Step halving on the momentum residual norm (at most 8 halvings).
    #[allow(clippy::type_complexity)]
    fn line_search(
        &self,
        law: &SlipLaw,
        u: &[f64],
        p: &[f64],
        load: &[f64],
        step: &[f64],
        rn: f64,
    ) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let mut t = 1.0;
        let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
        for _ in 0..=8 {
            let mut cand = u.to_vec();
            for (k, &i) in self.space.free_dofs().iter().enumerate() {
                cand[i] += t * step[k];
            }
            let r = self.momentum_residual_with(law, &cand, p, load);
            let n = norm2(&r);
            if !n.is_finite() {
                t *= 0.5;
                continue;
            }
            let improved = n < rn;
            if best.as_ref().is_none_or(|b| n < b.2) {
                best = Some((cand, r, n));
            }
            if improved {
                break;
            }
            t *= 0.5;
        }
        best.ok_or_else(|| Error::LinearSolver("Newton step produced non-finite residuals".into()))
    }

    /// Assembles the bordered coupled Jacobian
    /// `[J D^T 0; D 0 w; 0 w^T 0]` on free velocity DOFs.
    fn coupled_triplets(&self, law: &SlipLaw, u: &[f64]) -> (usize, Vec<Triplet<usize, usize, f64>>) {
        let nf = self.space.free_dofs().len();
        let np = self.space.n_pressure();
        let j = self.jacobian_with(law, u);
        let jf = j.submatrix(self.space.free_dofs(), &self.free_map, nf);
        let mut trip = Vec::with_capacity(jf.nnz() + 2 * self.d_free.nnz() + 2 * np);
        jf.push_triplets(0, 0, &mut trip);
        self.dt_free.push_triplets(0, nf, &mut trip);
        self.d_free.push_triplets(nf, 0, &mut trip);
        for (i, &w) in self.space.pressure_weights().iter().enumerate() {
            trip.push(Triplet::new(nf + i, nf + np, w));
            trip.push(Triplet::new(nf + np, nf + i, w));
        }
        (nf + np + 1, trip)
    }

    /// Factorizes the coupled Jacobian at `u`.
    pub fn coupled_factor(&self, u: &[f64]) -> Result<CoupledFactor> {
        let (n, trip) = self.coupled_triplets(&self.law, u);
        Ok(CoupledFactor {
            lu: SparseLu::factor(n, &trip)?,
        })
    }

    /// Coupled residual `[R_free; D u; w^T p]`.
    fn coupled_residual(&self, law: &SlipLaw, u: &[f64], p: &[f64], load: &[f64]) -> (Vec<f64>, ResidualRecord) {
        let r = self.momentum_residual_with(law, u, p, load);
        let du = self.d.mul_vec(u);
        let mut out = self.free_part(&r);
        out.extend_from_slice(&du);
        out.push(dot(self.space.pressure_weights(), p));
        let z = self.mp_lu.solve(&du).unwrap_or_else(|_| vec![f64::NAN; du.len()]);
        let rec = ResidualRecord {
            iteration: 0,
            velocity: norm2(&r),
            divergence: dot(&du, &z).max(0.0).sqrt(),
        };
        (out, rec)
    }

    fn apply_coupled_step(&self, u: &mut [f64], p: &mut [f64], step: &[f64], t: f64) {
        let nf = self.space.free_dofs().len();
        for (k, &i) in self.space.free_dofs().iter().enumerate() {
            u[i] += t * step[k];
        }
        for (k, pk) in p.iter_mut().enumerate() {
            *pk += t * step[nf + k];
        }
    }

    /// Solves the state equation for the load vector `load`, starting from
    /// `init` (zero when absent).
    pub fn solve_load(&self, load: &[f64], init: Option<&StateSolution>, cfg: &SolverConfig) -> Result<StateSolution> {
        cfg.validate()?;
        let law = self.with_eps(cfg.eps_reg);
        let space = self.space;
        let (mut u, mut p) = match init {
            Some(s) => (s.u.clone(), s.p.clone()),
            None => (vec![0.0; space.n_velocity()], vec![0.0; space.n_pressure()]),
        };
        space.apply_mask(&mut u);
        space.remove_pressure_mean(&mut p);
        let mut history = Vec::new();
        let mut it = 0usize;

        let mut rec = self.record(&law, it, &u, &p, load)?;
        history.push(rec);
        let done = |rec: &ResidualRecord| rec.combined() < cfg.eps_hvi;

        let uzawa_cap = match cfg.strategy {
            Strategy::Uzawa => cfg.max_outer,
            Strategy::UzawaThenCoupled => cfg.uzawa_sweeps.min(cfg.max_outer),
            Strategy::Coupled => 0,
        };
        // Uzawa sweeps: inner Newton at frozen pressure, then pressure update.
        while !done(&rec) && it < uzawa_cap {
            it += 1;
            let inner_tol = 0.1 * cfg.eps_hvi;
            self.velocity_newton(&law, &mut u, &p, load, inner_tol, cfg.max_newton)?;
            rec = self.record(&law, it, &u, &p, load)?;
            history.push(rec);
            if done(&rec) {
                break;
            }
            let du = self.d.mul_vec(&u);
            let z = self.mp_lu.solve(&du)?;
            for (pk, zk) in p.iter_mut().zip(&z) {
                *pk += cfg.eta * zk;
            }
            space.remove_pressure_mean(&mut p);
        }
        // Coupled Newton.
        if cfg.strategy != Strategy::Uzawa {
            while !done(&rec) && it < cfg.max_outer {
                it += 1;
                let (n, trip) = self.coupled_triplets(&law, &u);
                let lu = SparseLu::factor(n, &trip)?;
                let (res, r0) = self.coupled_residual(&law, &u, &p, load);
                let step = lu.solve(&res.iter().map(|x| -x).collect::<Vec<_>>())?;
                let mut t = 1.0;
                let mut accepted = None;
                for _ in 0..=8 {
                    let mut uc = u.clone();
                    let mut pc = p.clone();
                    self.apply_coupled_step(&mut uc, &mut pc, &step, t);
                    space.remove_pressure_mean(&mut pc);
                    let (_, rc) = self.coupled_residual(&law, &uc, &pc, load);
                    let better = rc.combined() < r0.combined();
                    if rc.combined().is_finite()
                        && accepted.as_ref().is_none_or(|a: &(Vec<f64>, Vec<f64>, ResidualRecord)| rc.combined() < a.2.combined())
                    {
                        accepted = Some((uc, pc, rc));
                    }
                    if better {
                        break;
                    }
                    t *= 0.5;
                }
                let (uc, pc, mut rc) =
                    accepted.ok_or_else(|| Error::LinearSolver("coupled Newton produced non-finite residuals".into()))?;
                u = uc;
                p = pc;
                rc.iteration = it;
                rec = rc;
                history.push(rec);
            }
        }
        let converged = done(&rec);
        if !converged {
            return Err(Error::NotConverged {
                iterations: it,
                last_residual: rec.combined(),
                history,
            });
        }
        Ok(StateSolution {
            u,
            p,
            residual_history: history,
            converged,
            iterations: it,
        })
    }

    /// Solves for a P1 control `f`.
    pub fn solve(&self, f: &[f64], init: Option<&StateSolution>, cfg: &SolverConfig) -> Result<StateSolution> {
        let load = self.load(f);
        self.solve_load(&load, init, cfg)
    }

    /// Newton on the coupled system until the update stagnates at roundoff
    /// level; used to produce baselines for finite differences.
    pub fn polish(&self, state: &mut StateSolution, load: &[f64], max_steps: usize) -> Result<()> {
        let mut prev = f64::INFINITY;
        for _ in 0..max_steps {
            let (n, trip) = self.coupled_triplets(&self.law, &state.u);
            let lu = SparseLu::factor(n, &trip)?;
            let (res, _) = self.coupled_residual(&self.law, &state.u, &state.p, load);
            let step = lu.solve(&res.iter().map(|x| -x).collect::<Vec<_>>())?;
            let sn = norm2(&step);
            if !(sn < prev) {
                break;
            }
            self.apply_coupled_step(&mut state.u, &mut state.p, &step, 1.0);
            prev = sn;
            let scale = norm2(&state.u) + norm2(&state.p) + 1.0;
            if sn < 1e-15 * scale {
                break;
            }
        }
        self.space.remove_pressure_mean(&mut state.p);
        let mut rec = self.record(&self.law, 0, &state.u, &state.p, load)?;
        rec.iteration = state.iterations + 1;
        state.residual_history.push(rec);
        Ok(())
    }

    /// Chord iteration with a fixed coupled factorization, starting from
    /// `base`, for the load `load`. Stops when the update stagnates.
    pub fn chord_solve(
        &self,
        factor: &CoupledFactor,
        base: &StateSolution,
        load: &[f64],
        max_steps: usize,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut u = base.u.clone();
        let mut p = base.p.clone();
        let mut prev = f64::INFINITY;
        let scale = norm2(&u) + norm2(&p) + 1.0;
        for k in 0..max_steps {
            let (res, _) = self.coupled_residual(&self.law, &u, &p, load);
            let step = factor.lu.solve(&res.iter().map(|x| -x).collect::<Vec<_>>())?;
            let sn = norm2(&step);
            if !sn.is_finite() || (k > 1 && sn > prev) {
                if prev < 1e-10 * scale {
                    break;
                }
                return Err(Error::NotConverged {
                    iterations: k,
                    last_residual: sn,
                    history: Vec::new(),
                });
            }
            self.apply_coupled_step(&mut u, &mut p, &step, 1.0);
            if sn < 1e-15 * scale || (k > 0 && sn > 0.5 * prev && sn < 1e-12 * scale) {
                break;
            }
            prev = sn;
        }
        Ok((u, p))
    }
}

/// P1 pressure mass matrix.
pub fn pressure_mass(space: &FeSpace) -> CsrMatrix {
    let blocks: Vec<[usize; 3]> = space.elements().iter().map(|e| e.nodes).collect();
    let n = space.n_pressure();
    let mut m = CsrMatrix::from_blocks(n, n, blocks.iter().map(|b| (&b[..], &b[..])));
    for el in space.elements() {
        let mut blk = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                blk[i * 3 + j] = el.area * if i == j { 2.0 } else { 1.0 } / 12.0;
            }
        }
        m.add_block(&el.nodes, &el.nodes, &blk);
    }
    m
}

/// Standalone solve: assembles the problem and solves from zero.
pub fn solve_state(
    space: &FeSpace,
    params: ModelParams,
    law: SlipLaw,
    f: &[f64],
    cfg: &SolverConfig,
) -> Result<StateSolution> {
    let law = SlipLaw {
        eps_reg: cfg.eps_reg,
        ..law
    };
    StateProblem::new(space, params, law)?.solve(f, None, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;

    fn ex2() -> (ModelParams, SlipLaw) {
        (
            ModelParams {
                mu: 1.0,
                alpha: 1.5,
                beta: 1.0,
                kappa: 0.0,
                r: 3.0,
                q: 1.0,
            },
            SlipLaw::new(4.01, 4.00, 1.5, 1e-6).unwrap(),
        )
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let space = FeSpace::new(TriMesh::unit_square(4).unwrap());
        let (params, law) = ex2();
        let f = vec![0.0; space.n_control()];
        let sol = solve_state(&space, params, law, &f, &SolverConfig::default()).unwrap();
        assert!(sol.converged && sol.iterations <= 2);
        assert!(sol.final_residual() < 1e-12);
        assert!(sol.u.iter().chain(&sol.p).all(|&x| x == 0.0));
    }

    #[test]
    fn strategies_agree() {
        let space = FeSpace::new(TriMesh::unit_square(4).unwrap());
        let (params, law) = ex2();
        let f = space
            .interpolate_control(|x| [10.0 * x[1], -5.0 * x[0] * x[1]])
            .unwrap();
        let mut cfg = SolverConfig {
            eps_hvi: 1e-10,
            eta: 2.0,
            max_outer: 2000,
            ..Default::default()
        };
        let mut sols = Vec::new();
        for s in [Strategy::Uzawa, Strategy::UzawaThenCoupled, Strategy::Coupled] {
            cfg.strategy = s;
            let sol = solve_state(&space, params, law, &f, &cfg).unwrap();
            assert!(sol.converged);
            assert!(space.pressure_mean(&sol.p).abs() < 1e-12);
            for &i in (0..space.n_velocity()).filter(|&i| space.is_constrained(i)).collect::<Vec<_>>().iter() {
                assert_eq!(sol.u[i], 0.0);
            }
            sols.push(sol);
        }
        for s in &sols[1..] {
            let du: f64 = s.u.iter().zip(&sols[0].u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(du < 1e-7, "{du}");
        }
        assert!(sols[0].iterations > sols[2].iterations);
    }

    #[test]
    fn chord_matches_full_solve() {
        let space = FeSpace::new(TriMesh::unit_square(4).unwrap());
        let (params, law) = ex2();
        let prob = StateProblem::new(&space, params, law).unwrap();
        let f = space.interpolate_control(|x| [5.0 * x[1], x[0]]).unwrap();
        let cfg = SolverConfig {
            eps_hvi: 1e-10,
            ..Default::default()
        };
        let load = prob.load(&f);
        let mut base = prob.solve_load(&load, None, &cfg).unwrap();
        prob.polish(&mut base, &load, 10).unwrap();
        assert!(base.final_residual() < 1e-11);
        let factor = prob.coupled_factor(&base.u).unwrap();
        let mut f2 = f.clone();
        f2[7] += 1e-3;
        let load2 = prob.load(&f2);
        let (u2, _) = prob.chord_solve(&factor, &base, &load2, 20).unwrap();
        let mut full = prob.solve_load(&load2, Some(&base), &cfg).unwrap();
        prob.polish(&mut full, &load2, 10).unwrap();
        let diff: f64 = u2.iter().zip(&full.u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn residual_csv_header() {
        let space = FeSpace::new(TriMesh::unit_square(2).unwrap());
        let sol = StateSolution::zero(&space);
        let mut buf = Vec::new();
        sol.write_residual_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("iteration,velocity_residual,divergence_residual"));
    }
}
