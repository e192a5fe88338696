//! Numerical oracles for the analytic identities, inequalities and discrete
//! stability constants the solver relies on. Every check yields a
//! [`CheckReport`]; the suite serializes to JSON.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dense::generalized_symmetric_eigen;
use crate::error::{Error, Result};
use crate::fem::{Constraint, FeSpace};
use crate::forms::{assemble_a, assemble_c_residual, assemble_d, power_derivative};
use crate::friction::{estimate_lambda0, tangential_trace_sq, SlipLaw};
use crate::mesh::TriMesh;
use crate::optimize::VectorField;
use crate::solver::pressure_mass;
use crate::sparse::{dot, CsrMatrix, SparseLu};

/// Tolerance class for identities that hold up to roundoff.
pub const EXACT_TOL: f64 = 1e-10;
/// Tolerance class for quadrature- or interpolation-limited identities.
pub const QUADRATURE_TOL: f64 = 1e-6;
/// Relative slack for the pointwise monotonicity inequalities.
pub const MONOTONICITY_TOL: f64 = 1e-12;
/// Relative tolerance of the Gateaux derivative against central differences.
pub const GATEAUX_TOL: f64 = 1e-7;
/// Seed used when none is supplied.
pub const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub samples: usize,
    /// Smallest signed margin; negative values are violations.
    pub worst_margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Where the worst margin occurred.
    pub location: String,
}

impl CheckReport {
    fn new(name: impl Into<String>, samples: usize, worst: (f64, String), tolerance: f64) -> Self {
        let (worst_margin, location) = worst;
        Self {
            name: name.into(),
            samples,
            worst_margin,
            tolerance,
            pass: worst_margin >= -tolerance,
            location,
        }
    }
}

/// Running minimum of a margin together with a description of its location.
struct Worst {
    margin: f64,
    location: String,
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            location: String::new(),
        }
    }

    fn update(&mut self, margin: f64, location: impl FnOnce() -> String) {
        // NaN margins must count as violations
        if margin.is_nan() || margin < self.margin {
            self.margin = if margin.is_nan() { f64::NEG_INFINITY } else { margin };
            self.location = location();
        }
    }

    fn finish(self) -> (f64, String) {
        (self.margin, self.location)
    }
}

fn gaussian2(rng: &mut ChaCha8Rng) -> [f64; 2] {
    [rng.sample(StandardNormal), rng.sample(StandardNormal)]
}

fn norm(x: [f64; 2]) -> f64 {
    x[0].hypot(x[1])
}

fn power_map(x: [f64; 2], r: f64) -> [f64; 2] {
    let m = norm(x).powf(r - 1.0);
    [m * x[0], m * x[1]]
}

/// Pointwise monotonicity of `x -> |x|^(r-1) x` on Gaussian pairs in R^2:
/// the lower bound by `(|x|^(r-1) + |y|^(r-1)) |x-y|^2 / 2` and the one by
/// `2^(1-r) |x-y|^(r+1)`. Margins are relative to the larger side.
pub fn check_pointwise_monotonicity(r: f64, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    if !(r >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent r = {r} below 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weighted = Worst::new();
    let mut power = Worst::new();
    for _ in 0..samples {
        let x = gaussian2(&mut rng);
        let y = gaussian2(&mut rng);
        let cx = power_map(x, r);
        let cy = power_map(y, r);
        let d = [x[0] - y[0], x[1] - y[1]];
        let lhs = (cx[0] - cy[0]) * d[0] + (cx[1] - cy[1]) * d[1];
        let d2 = d[0] * d[0] + d[1] * d[1];
        let rhs1 = 0.5 * (norm(x).powf(r - 1.0) + norm(y).powf(r - 1.0)) * d2;
        let rhs2 = 2f64.powf(1.0 - r) * d2.sqrt().powf(r + 1.0);
        let rel = |rhs: f64| (lhs - rhs) / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        let loc = || format!("x = ({:.6}, {:.6}), y = ({:.6}, {:.6})", x[0], x[1], y[0], y[1]);
        weighted.update(rel(rhs1), loc);
        power.update(rel(rhs2), loc);
    }
    Ok(vec![
        CheckReport::new(format!("monotonicity_weighted_r{r}"), samples, weighted.finish(), MONOTONICITY_TOL),
        CheckReport::new(format!("monotonicity_power_r{r}"), samples, power.finish(), MONOTONICITY_TOL),
    ])
}

/// Gateaux derivative of `C(u) = |u|^(r-1) u` against central differences
/// at Gaussian points; the margin is minus the relative discrepancy.
pub fn check_gateaux(r: f64, samples: usize, seed: u64) -> Result<CheckReport> {
    if !(r >= 1.0) {
        return Err(Error::InvalidArgument(format!("exponent r = {r} below 1")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Worst::new();
    for _ in 0..samples {
        let u = gaussian2(&mut rng);
        let v = gaussian2(&mut rng);
        let h = 1e-5 * norm(u) / norm(v);
        let p = power_map([u[0] + h * v[0], u[1] + h * v[1]], r);
        let m = power_map([u[0] - h * v[0], u[1] - h * v[1]], r);
        let fd = [(p[0] - m[0]) / (2.0 * h), (p[1] - m[1]) / (2.0 * h)];
        let exact = power_derivative(u, v, r);
        let err = norm([fd[0] - exact[0], fd[1] - exact[1]]) / norm(exact);
        worst.update(-err, || {
            format!("u = ({:.6}, {:.6}), v = ({:.6}, {:.6})", u[0], u[1], v[0], v[1])
        });
    }
    let branch = if r == 1.0 {
        "linear"
    } else if r < 3.0 {
        "subquadratic"
    } else {
        "superquadratic"
    };
    Ok(CheckReport::new(format!("gateaux_{branch}_r{r}"), samples, worst.finish(), GATEAUX_TOL))
}

fn random_velocity(space: &FeSpace, rng: &mut ChaCha8Rng, masked: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..space.n_velocity()).map(|_| rng.sample(StandardNormal)).collect();
    if masked {
        space.apply_mask(&mut v);
    }
    v
}

/// `b(u, v, w)` with `u` an analytic field evaluated at the quadrature points.
fn trilinear_analytic(space: &FeSpace, u: VectorField, v: &[f64], w: &[f64]) -> f64 {
    space.integrate(|x, e, q| {
        let uu = u(x);
        let gv = space.velocity_grad_at_qp(v, e, q);
        let ww = space.velocity_at_qp(w, e, q);
        (0..2).map(|d| (uu[0] * gv[d][0] + uu[1] * gv[d][1]) * ww[d]).sum::<f64>()
    })
}

/// Identities of the forms on random discrete fields:
/// `a(u,u) = 2||u||_V^2`, `|a(u,v)| <= 2||u||_V ||v||_V`, `a(c,c) = 0` for
/// constants, `c(u,u) = ||u||_{L^(r+1)}^(r+1)` for each `r`, and
/// `b(u,v,v) = 0`, `b(u,v,w) = -b(u,w,v)` for the analytic divergence-free
/// `div_free` (which must vanish in the normal direction on the boundary).
pub fn check_form_identities(
    space: &FeSpace,
    rs: &[f64],
    div_free: VectorField,
    samples: usize,
    seed: u64,
) -> Result<Vec<CheckReport>> {
    let a = assemble_a(space);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fields: Vec<Vec<f64>> = (0..samples + 1).map(|_| random_velocity(space, &mut rng, false)).collect();

    let mut energy = Worst::new();
    let mut continuity = Worst::new();
    for (k, u) in fields.iter().take(samples).enumerate() {
        let au = a.bilinear(u, u);
        let vn = space.velocity_v_norm(u);
        energy.update(-(au - 2.0 * vn * vn).abs() / au.abs().max(f64::MIN_POSITIVE), || format!("sample {k}"));
        let v = &fields[k + 1];
        let bound = 2.0 * vn * space.velocity_v_norm(v);
        continuity.update((bound - a.bilinear(u, v).abs()) / bound, || format!("sample {k}"));
    }
    let mut kernel = Worst::new();
    for (k, c) in [[1.0, 0.0], [0.0, 1.0], [0.3, -2.0]].iter().enumerate() {
        let u = space.interpolate_velocity(|_| *c)?;
        let scale = dot(&u, &u);
        kernel.update(-a.bilinear(&u, &u).abs() / scale, || format!("constant {k}"));
    }
    let mut reports = vec![
        CheckReport::new("a_energy_identity", samples, energy.finish(), EXACT_TOL),
        CheckReport::new("a_continuity", samples, continuity.finish(), EXACT_TOL),
        CheckReport::new("a_constant_kernel", 3, kernel.finish(), EXACT_TOL),
    ];

    for &r in rs {
        let mut w = Worst::new();
        for (k, u) in fields.iter().take(samples).enumerate() {
            let c = dot(&assemble_c_residual(space, u, r)?, u);
            let lp = space.velocity_lp_power(u, r + 1.0);
            w.update(-(c - lp).abs() / lp, || format!("sample {k}"));
        }
        reports.push(CheckReport::new(format!("c_power_identity_r{r}"), samples, w.finish(), EXACT_TOL));
    }

    let masked: Vec<Vec<f64>> = (0..samples + 1).map(|_| random_velocity(space, &mut rng, true)).collect();
    let mut skew = Worst::new();
    let mut anti = Worst::new();
    for k in 0..samples {
        let (v, w) = (&masked[k], &masked[k + 1]);
        skew.update(-trilinear_analytic(space, div_free, v, v).abs(), || format!("sample {k}"));
        let s = trilinear_analytic(space, div_free, v, w) + trilinear_analytic(space, div_free, w, v);
        anti.update(-s.abs(), || format!("sample {k}"));
    }
    reports.push(CheckReport::new("b_skew_zero", samples, skew.finish(), QUADRATURE_TOL));
    reports.push(CheckReport::new("b_antisymmetry", samples, anti.finish(), QUADRATURE_TOL));
    Ok(reports)
}

/// Smallest eigenvalue of `D A^{-1} D^T` against `Mp` on mean-zero
/// pressures, square-rooted. `a` and `d` act on the free velocity DOFs only.
fn inf_sup_from_operators(a: &CsrMatrix, d: &CsrMatrix, mp: &CsrMatrix) -> Result<f64> {
    let nv = a.nrows();
    let np = d.nrows();
    let mut trip = Vec::new();
    a.push_triplets(0, 0, &mut trip);
    let lu = SparseLu::factor(nv, &trip)?;
    let dt = d.transpose().to_dense();
    let cols: Vec<Vec<f64>> = (0..np).map(|j| dt.iter().map(|row| row[j]).collect()).collect();
    let x = lu.solve_many(&cols)?;
    let mpd = mp.to_dense();
    // constants are in the kernel of D^T; lift them out of the spectrum
    let m1: Vec<f64> = mpd.iter().map(|row| row.iter().sum()).collect();
    let area: f64 = m1.iter().sum();
    let shift = 10.0 / area;
    let mut s = vec![vec![0.0; np]; np];
    for i in 0..np {
        for j in 0..np {
            s[i][j] = dot(&cols[i], &x[j]) + shift * m1[i] * m1[j];
        }
    }
    let (vals, _) = generalized_symmetric_eigen(&s, &mpd)?;
    Ok(vals[0].max(0.0).sqrt())
}

/// Discrete inf-sup constant of the Taylor-Hood pair on `V_{0,h}` (zero
/// trace on the whole boundary) with respect to `||eps(v)||` and the `L2`
/// pressure norm.
pub fn inf_sup_constant(mesh: Arc<TriMesh>) -> Result<f64> {
    let space = FeSpace::with_constraint(mesh, Constraint::NoSlip);
    let free = space.free_dofs();
    let mut map = vec![None; space.n_velocity()];
    free.iter().enumerate().for_each(|(k, &g)| map[g] = Some(k));
    let mut a = assemble_a(&space).submatrix(free, &map, free.len());
    a.scale(0.5);
    let d = assemble_d(&space);
    let rows: Vec<usize> = (0..d.nrows()).collect();
    let d_free = d.submatrix(&rows, &map, free.len());
    inf_sup_from_operators(&a, &d_free, &pressure_mass(&space))
}

/// The same constant for equal-order P1/P1 elements, which violate the
/// inf-sup condition; used as a negative control.
pub fn inf_sup_constant_p1p1(mesh: &TriMesh) -> Result<f64> {
    let nn = mesh.num_nodes();
    let interior: Vec<usize> = (0..nn).filter(|&i| !TriMesh::on_boundary(mesh.nodes()[i])).collect();
    let mut map = vec![None; nn];
    interior.iter().enumerate().for_each(|(k, &g)| map[g] = Some(k));
    let ni = interior.len();
    let mut a_trip = Vec::new();
    let mut d_trip = Vec::new();
    let mut m_trip = Vec::new();
    for t in 0..mesh.num_triangles() {
        let tri = mesh.triangles()[t];
        let area = mesh.signed_area(t);
        let p = mesh.vertices(t);
        let mut g = [[0.0; 2]; 3];
        for i in 0..3 {
            let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
            g[i] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
        }
        for i in 0..3 {
            for j in 0..3 {
                m_trip.push((tri[i], tri[j], area * if i == j { 1.0 / 6.0 } else { 1.0 / 12.0 }));
            }
        }
        for i in 0..3 {
            let Some(li) = map[tri[i]] else { continue };
            for c in 0..2 {
                for k in 0..3 {
                    // -int lambda_k d_c phi_i
                    d_trip.push((tri[k], c * ni + li, -area / 3.0 * g[i][c]));
                }
                for j in 0..3 {
                    let Some(lj) = map[tri[j]] else { continue };
                    for e in 0..2 {
                        let delta = if c == e { dot(&g[i], &g[j]) } else { 0.0 };
                        let v = 0.5 * area * (delta + g[i][e] * g[j][c]);
                        a_trip.push((c * ni + li, e * ni + lj, v));
                    }
                }
            }
        }
    }
    let a = CsrMatrix::from_triplets(2 * ni, 2 * ni, &a_trip);
    let d = CsrMatrix::from_triplets(nn, 2 * ni, &d_trip);
    let m = CsrMatrix::from_triplets(nn, nn, &m_trip);
    inf_sup_from_operators(&a, &d, &m)
}

/// Inf-sup report over a mesh family: each constant must exceed `min_value`
/// and consecutive constants may differ by at most `max_variation`
/// (relative).
pub fn check_inf_sup(ns: &[usize], min_value: f64, max_variation: f64) -> Result<(Vec<f64>, Vec<CheckReport>)> {
    let values = ns
        .par_iter()
        .map(|&n| inf_sup_constant(Arc::new(TriMesh::unit_square(n)?)))
        .collect::<Result<Vec<f64>>>()?;
    let mut lower = Worst::new();
    for (n, v) in ns.iter().zip(&values) {
        lower.update(v - min_value, || format!("n = {n}"));
    }
    let mut uniform = Worst::new();
    for k in 1..values.len() {
        let var = (values[k] - values[k - 1]).abs() / values[k - 1];
        uniform.update(max_variation - var, || format!("n = {} vs {}", ns[k - 1], ns[k]));
    }
    Ok((
        values,
        vec![
            CheckReport::new("inf_sup_lower_bound", ns.len(), lower.finish(), 0.0),
            CheckReport::new("inf_sup_uniformity", ns.len().saturating_sub(1), uniform.finish(), 0.0),
        ],
    ))
}

/// Trace inequality `||v_x||^2_{Gamma1} <= ||v||_V^2 / lambda0` on random
/// discrete fields, equality at the computed eigenfunction, and the growth
/// bound `|j0(s; d)| <= (k0 + k1 |s|) |d|` of the friction superpotential.
pub fn check_trace_and_j0(space: &FeSpace, law: &SlipLaw, samples: usize, seed: u64) -> Result<Vec<CheckReport>> {
    let spec = estimate_lambda0(space)?;
    let lambda0 = spec.lambda0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Worst::new();
    for k in 0..samples {
        let v = random_velocity(space, &mut rng, true);
        let vn2 = space.velocity_v_norm(&v).powi(2);
        trace.update(1.0 - lambda0 * tangential_trace_sq(space, &v) / vn2, || format!("sample {k}"));
    }
    let eig = &spec.eigenfunction;
    let ratio = lambda0 * tangential_trace_sq(space, eig) / space.velocity_v_norm(eig).powi(2);
    let equality = (-(ratio - 1.0).abs(), format!("lambda0 = {lambda0:.10}"));

    let mut j0 = Worst::new();
    for k in 0..samples {
        let s: f64 = if k % 10 == 0 { 0.0 } else { rng.sample(StandardNormal) };
        let d: f64 = rng.sample(StandardNormal);
        let bound = (law.k0() + law.k1() * s.abs()) * d.abs();
        j0.update(bound - law.clarke_derivative(s, d).abs(), || format!("s = {s:.6}, d = {d:.6}"));
    }
    Ok(vec![
        CheckReport::new("trace_inequality", samples, trace.finish(), EXACT_TOL),
        CheckReport::new("trace_eigenfunction_equality", 1, equality, 1e-8),
        CheckReport::new("j0_growth_bound", samples, j0.finish(), EXACT_TOL),
    ])
}

/// Aggregated result of a verification run.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckReport>,
    pub inf_sup: Vec<(usize, f64)>,
    pub inf_sup_p1p1: Vec<(usize, f64)>,
    pub all_pass: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn write_json<W: std::io::Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(|e| Error::Io(std::io::Error::other(e)))
    }
}

/// Settings of the full suite.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub seed: u64,
    pub pair_samples: usize,
    pub gateaux_samples: usize,
    pub field_samples: usize,
    pub exponents: Vec<f64>,
    pub gateaux_exponents: Vec<f64>,
    pub form_mesh_n: usize,
    pub trace_mesh_n: usize,
    pub inf_sup_ns: Vec<usize>,
    pub p1p1_ns: Vec<usize>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            pair_samples: 100_000,
            gateaux_samples: 1_000,
            field_samples: 100,
            exponents: vec![1.0, 2.0, 3.0, 3.5, 5.0],
            gateaux_exponents: vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 5.0],
            form_mesh_n: 16,
            trace_mesh_n: 8,
            inf_sup_ns: vec![2, 4, 8],
            p1p1_ns: vec![4, 8],
        }
    }
}

/// Spurious-mode threshold for the P1/P1 negative control.
pub const P1P1_THRESHOLD: f64 = 1e-3;

/// Runs every check; independent checks run in parallel and are collected
/// in a fixed order.
pub fn run_all(cfg: &VerifyConfig, law: &SlipLaw, div_free: VectorField) -> Result<VerifyReport> {
    type Job<'a> = Box<dyn Fn() -> Result<Vec<CheckReport>> + Send + Sync + 'a>;
    let mut jobs: Vec<Job> = Vec::new();
    for (k, &r) in cfg.exponents.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(k as u64);
        jobs.push(Box::new(move || check_pointwise_monotonicity(r, cfg.pair_samples, seed)));
    }
    for (k, &r) in cfg.gateaux_exponents.iter().enumerate() {
        let seed = cfg.seed.wrapping_add(100 + k as u64);
        jobs.push(Box::new(move || Ok(vec![check_gateaux(r, cfg.gateaux_samples, seed)?])));
    }
    jobs.push(Box::new(move || {
        let space = FeSpace::new(TriMesh::unit_square(cfg.form_mesh_n)?);
        check_form_identities(&space, &cfg.exponents, div_free, cfg.field_samples, cfg.seed)
    }));
    jobs.push(Box::new(move || {
        let space = FeSpace::new(TriMesh::unit_square(cfg.trace_mesh_n)?);
        check_trace_and_j0(&space, law, cfg.field_samples, cfg.seed)
    }));
    let mut checks: Vec<CheckReport> = jobs
        .par_iter()
        .map(|job| job())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let (values, reports) = check_inf_sup(&cfg.inf_sup_ns, 0.1, 0.2)?;
    checks.extend(reports);
    let p1p1 = cfg
        .p1p1_ns
        .iter()
        .map(|&n| Ok((n, inf_sup_constant_p1p1(&TriMesh::unit_square(n)?)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut spurious = Worst::new();
    for (n, v) in &p1p1 {
        spurious.update(P1P1_THRESHOLD - v, || format!("n = {n}"));
    }
    checks.push(CheckReport::new("p1p1_negative_control", p1p1.len(), spurious.finish(), 0.0));

    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport {
        checks,
        inf_sup: cfg.inf_sup_ns.iter().copied().zip(values).collect(),
        inf_sup_p1p1: p1p1,
        all_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn taylor_green(x: [f64; 2]) -> [f64; 2] {
        let (sx, cx) = (2.0 * PI * x[0]).sin_cos();
        let (sy, cy) = (2.0 * PI * x[1]).sin_cos();
        [sy * (1.0 - cx), -sx * (1.0 - cy)]
    }

    #[test]
    fn monotonicity_substitution() {
        let x = [2.0, 0.0];
        let cx = power_map(x, 3.0);
        assert_eq!(cx[0] * 2.0, 16.0);
        for r in [1.0, 2.0, 3.0, 3.5, 5.0] {
            for rep in check_pointwise_monotonicity(r, 2_000, 1).unwrap() {
                assert!(rep.pass, "{rep:?}");
            }
        }
        assert!(check_pointwise_monotonicity(0.5, 1, 1).is_err());
    }

    #[test]
    fn gateaux_branches() {
        assert_eq!(power_derivative([0.3, -0.2], [1.5, 2.0], 1.0), [1.5, 2.0]);
        assert_eq!(power_derivative([0.0, 0.0], [1.5, 2.0], 2.0), [0.0, 0.0]);
        for r in [1.0, 1.5, 2.5, 3.0, 5.0] {
            let rep = check_gateaux(r, 200, 2).unwrap();
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn form_identities_small_mesh() {
        // the analytic trilinear identities are quadrature-limited; n = 16 is the pinned size
        let space = FeSpace::new(TriMesh::unit_square(16).unwrap());
        for rep in check_form_identities(&space, &[1.0, 3.0, 3.5], taylor_green, 5, 3).unwrap() {
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn inf_sup_taylor_hood_vs_p1p1() {
        let th = inf_sup_constant(Arc::new(TriMesh::unit_square(4).unwrap())).unwrap();
        assert!(th > 0.1, "{th}");
        let bad = inf_sup_constant_p1p1(&TriMesh::unit_square(4).unwrap()).unwrap();
        assert!(bad < P1P1_THRESHOLD, "{bad}");
    }

    #[test]
    fn trace_checks_pass() {
        let space = FeSpace::new(TriMesh::unit_square(4).unwrap());
        let law = SlipLaw::new(1.55, 1.53, 3.0, 1e-6).unwrap();
        for rep in check_trace_and_j0(&space, &law, 20, 4).unwrap() {
            assert!(rep.pass, "{rep:?}");
        }
    }

    #[test]
    fn report_pass_flag_matches_margin() {
        let rep = CheckReport::new("x", 1, (-2e-10, String::new()), 1e-10);
        assert!(!rep.pass);
        let rep = CheckReport::new("x", 1, (-5e-11, String::new()), 1e-10);
        assert!(rep.pass);
        let mut w = Worst::new();
        w.update(f64::NAN, || "nan".into());
        assert_eq!(w.finish().0, f64::NEG_INFINITY);
    }
}
