//! Nonmonotone slip law on the top edge: the coefficient `omega`, its
//! smoothed traction used by Newton, the structural constants of the
//! superpotential, and the trace constant `lambda0`.

use serde::{Deserialize, Serialize};

use crate::dense::generalized_symmetric_eigen;
use crate::error::{Error, Result};
use crate::fem::basis::p2_line_values;
use crate::fem::FeSpace;
use crate::forms::assemble_a;
use crate::sparse::{CsrMatrix, SparseLu};

/// Slip coefficient `omega(t) = (a - b) exp(-rho t) + b` with smoothing length `eps_reg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlipLaw {
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    pub eps_reg: f64,
}

pub const DEFAULT_EPS_REG: f64 = 1e-6;

impl SlipLaw {
    /// Builds a law with `a >= b > 0`, `rho > 0`, `eps_reg > 0`. The equality
    /// `a = b` is accepted as the monotone (Tresca-like) limit.
    pub fn new(a: f64, b: f64, rho: f64, eps_reg: f64) -> Result<Self> {
        let law = Self { a, b, rho, eps_reg };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = [self.a, self.b, self.rho, self.eps_reg].iter().all(|x| x.is_finite())
            && self.b > 0.0
            && self.a >= self.b
            && self.rho > 0.0
            && self.eps_reg > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "slip law requires a >= b > 0, rho > 0, eps_reg > 0 (got {self:?})"
            )))
        }
    }

    /// `omega(t)`; negative speeds are rejected.
    pub fn omega(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("omega evaluated at t = {t}")));
        }
        Ok(self.omega_unchecked(t))
    }

    fn omega_unchecked(&self, t: f64) -> f64 {
        (self.a - self.b) * (-self.rho * t).exp() + self.b
    }

    fn omega_prime(&self, t: f64) -> f64 {
        -self.rho * (self.a - self.b) * (-self.rho * t).exp()
    }

    /// Smoothed traction `omega(m) z / m`, `m = sqrt(z^2 + eps^2)`.
    pub fn traction(&self, z: f64) -> f64 {
        let m = z.hypot(self.eps_reg);
        self.omega_unchecked(m) * z / m
    }

    /// Derivative of [`SlipLaw::traction`] in `z`.
    pub fn traction_derivative(&self, z: f64) -> f64 {
        let e2 = self.eps_reg * self.eps_reg;
        let m2 = z * z + e2;
        let m = m2.sqrt();
        self.omega_prime(m) * z * z / m2 + self.omega_unchecked(m) * e2 / (m2 * m)
    }

    /// Unsmoothed single-valued selection `omega(|s|) sign(s)` of the
    /// subdifferential, with `g(0) = 0`.
    pub fn selection(&self, s: f64) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            self.omega_unchecked(s.abs()) * s.signum()
        }
    }

    /// `selection(s) - selection(t)`, evaluated without cancellation when
    /// both arguments lie on the same side of zero.
    fn selection_difference(&self, s: f64, t: f64) -> f64 {
        let same_side = (s > 0.0 && t > 0.0) || (s < 0.0 && t < 0.0);
        if !same_side {
            return self.selection(s) - self.selection(t);
        }
        let (near, far) = if s.abs() < t.abs() { (s, t) } else { (t, s) };
        // omega(|far|) - omega(|near|) = (a-b) e^{-rho|near|} expm1(-rho(|far|-|near|))
        let d = (self.a - self.b) * (-self.rho * near.abs()).exp() * (-self.rho * (far.abs() - near.abs())).exp_m1();
        let signed = if far == s { d } else { -d };
        signed * s.signum()
    }

    /// Growth constants of the subdifferential: `|xi| <= k0 + k1 |s|`.
    pub fn k0(&self) -> f64 {
        self.a
    }

    pub fn k1(&self) -> f64 {
        0.0
    }

    /// Superpotential `j(s) = int_0^|s| omega(t) dt`.
    pub fn potential(&self, s: f64) -> f64 {
        let t = s.abs();
        (self.a - self.b) * (1.0 - (-self.rho * t).exp()) / self.rho + self.b * t
    }

    /// Clarke directional derivative `j0(s; d)` of the superpotential.
    pub fn clarke_derivative(&self, s: f64, d: f64) -> f64 {
        if s == 0.0 {
            self.a * d.abs()
        } else {
            self.selection(s) * d
        }
    }
}

/// Friction residual `v -> int_{Gamma1} T(u_x) v_x` and, if a pattern is
/// supplied, its Jacobian on that pattern.
pub fn assemble_friction(
    space: &FeSpace,
    law: &SlipLaw,
    u: &[f64],
    pattern: Option<&CsrMatrix>,
) -> (Vec<f64>, Option<CsrMatrix>) {
    let mut res = vec![0.0; space.n_velocity()];
    let mut jac = pattern.map(|p| p.zeroed());
    let line = space.line_rule();
    for seg in space.slip_segments() {
        let d = seg.dofs;
        let mut blk = [0.0; 9];
        for (s, w) in line.points.iter().zip(&line.weights) {
            let phi = p2_line_values(*s);
            let z: f64 = (0..3).map(|k| phi[k] * u[d[k]]).sum();
            let wl = w * seg.length;
            let t = law.traction(z);
            for i in 0..3 {
                res[d[i]] += wl * t * phi[i];
            }
            if jac.is_some() {
                let dt = law.traction_derivative(z);
                for i in 0..3 {
                    for j in 0..3 {
                        blk[i * 3 + j] += wl * dt * phi[i] * phi[j];
                    }
                }
            }
        }
        if let Some(j) = jac.as_mut() {
            j.add_block(&d, &d, &blk);
        }
    }
    (res, jac)
}

/// `int_{Gamma1} T(u_x) u_x`, the boundary dissipation.
pub fn friction_dissipation(space: &FeSpace, law: &SlipLaw, u: &[f64]) -> f64 {
    space
        .slip_trace_points(u)
        .iter()
        .map(|&(z, w)| w * law.traction(z) * z)
        .sum()
}

/// Tangential boundary mass `int_{Gamma1} u_x v_x` on the full velocity space.
pub fn assemble_slip_mass(space: &FeSpace) -> CsrMatrix {
    let blocks: Vec<[usize; 3]> = space.slip_segments().iter().map(|s| s.dofs).collect();
    let n = space.n_velocity();
    let mut m = CsrMatrix::from_blocks(n, n, blocks.iter().map(|b| (&b[..], &b[..])));
    let line = space.line_rule();
    for seg in space.slip_segments() {
        let mut blk = [0.0; 9];
        for (s, w) in line.points.iter().zip(&line.weights) {
            let phi = p2_line_values(*s);
            for i in 0..3 {
                for j in 0..3 {
                    blk[i * 3 + j] += w * seg.length * phi[i] * phi[j];
                }
            }
        }
        m.add_block(&seg.dofs, &seg.dofs, &blk);
    }
    m
}

/// Sampled relaxed-monotonicity constant of the selection `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Delta1Estimate {
    pub delta1: f64,
    /// Pair `(s, t)` realizing the sampled infimum of the difference quotient.
    pub location: (f64, f64),
}

/// `delta1 = max(0, -inf (g(s)-g(t))/(s-t))` over a dense symmetric grid of
/// `samples` points covering the decay region of `omega`.
pub fn estimate_delta1(law: &SlipLaw, samples: usize) -> Result<Delta1Estimate> {
    if samples < 10_000 {
        return Err(Error::InvalidArgument(format!(
            "delta1 estimation needs at least 1e4 samples, got {samples}"
        )));
    }
    let half = samples / 2;
    let tmax = 20.0 / law.rho;
    // geometric refinement toward 0, where the slope of omega is steepest
    let pts: Vec<f64> = (1..=half)
        .map(|k| tmax * ((k as f64) / half as f64).powi(2))
        .collect();
    let mut grid: Vec<f64> = pts.iter().rev().map(|t| -t).collect();
    grid.extend_from_slice(&pts);
    let mut worst = f64::INFINITY;
    let mut loc = (0.0, 0.0);
    for w in grid.windows(2) {
        let (t, s) = (w[0], w[1]);
        let q = law.selection_difference(s, t) / (s - t);
        if q < worst {
            worst = q;
            loc = (s, t);
        }
    }
    Ok(Delta1Estimate {
        delta1: (-worst).max(0.0),
        location: loc,
    })
}

/// Trace constant of the slip boundary on one mesh.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralConstants {
    pub lambda0: f64,
    pub mesh_n: usize,
    /// Full velocity vector of the minimizing eigenfunction, normalized to
    /// unit tangential trace.
    #[serde(skip)]
    pub eigenfunction: Vec<f64>,
}

/// Smallest eigenvalue of `int eps(u):eps(v) = lambda int_{Gamma1} u_x v_x`
/// over the constrained velocity space, via the Schur complement of the
/// strain form onto the free tangential DOFs of the slip edge.
pub fn estimate_lambda0(space: &FeSpace) -> Result<SpectralConstants> {
    let mut av = assemble_a(space);
    av.scale(0.5);
    let mg = assemble_slip_mass(space);

    let mut boundary: Vec<usize> = space
        .slip_segments()
        .iter()
        .flat_map(|s| s.dofs)
        .filter(|&d| !space.is_constrained(d))
        .collect();
    boundary.sort_unstable();
    boundary.dedup();
    if boundary.is_empty() {
        return Err(Error::Config("no free tangential DOFs on the slip boundary".into()));
    }
    let is_b: Vec<bool> = {
        let mut v = vec![false; space.n_velocity()];
        boundary.iter().for_each(|&d| v[d] = true);
        v
    };
    let interior: Vec<usize> = space
        .free_dofs()
        .iter()
        .copied()
        .filter(|&d| !is_b[d])
        .collect();

    let local = |list: &[usize]| {
        let mut map = vec![None; space.n_velocity()];
        list.iter().enumerate().for_each(|(k, &d)| map[d] = Some(k));
        map
    };
    let map_i = local(&interior);
    let map_b = local(&boundary);
    let a_ii = av.submatrix(&interior, &map_i, interior.len());
    let a_ib = av.submatrix(&interior, &map_b, boundary.len());
    let a_bb = av.submatrix(&boundary, &map_b, boundary.len()).to_dense();
    let m_bb = mg.submatrix(&boundary, &map_b, boundary.len()).to_dense();

    let mut trip = Vec::new();
    a_ii.push_triplets(0, 0, &mut trip);
    let lu = SparseLu::factor(interior.len(), &trip)
        .map_err(|e| Error::Config(format!("strain form singular on interior DOFs: {e}")))?;
    let a_ib_dense = a_ib.to_dense();
    let cols: Vec<Vec<f64>> = (0..boundary.len())
        .map(|j| a_ib_dense.iter().map(|row| row[j]).collect())
        .collect();
    let x = lu.solve_many(&cols)?;
    let nb = boundary.len();
    let mut schur = a_bb;
    for i in 0..nb {
        for j in 0..nb {
            let s: f64 = cols[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum();
            schur[i][j] -= s;
        }
    }
    let (vals, vecs) = generalized_symmetric_eigen(&schur, &m_bb)?;
    let lambda0 = vals[0];
    if !(lambda0 > 0.0) {
        return Err(Error::Config(format!("non-positive trace eigenvalue {lambda0}")));
    }
    let xb = &vecs[0];
    let mut u = vec![0.0; space.n_velocity()];
    for (k, &d) in boundary.iter().enumerate() {
        u[d] = xb[k];
    }
    for (k, &d) in interior.iter().enumerate() {
        u[d] = -(0..nb).map(|j| x[j][k] * xb[j]).sum::<f64>();
    }
    Ok(SpectralConstants {
        lambda0,
        mesh_n: space.mesh().n(),
        eigenfunction: u,
    })
}

/// `||u_x||^2` on the slip edge.
pub fn tangential_trace_sq(space: &FeSpace, u: &[f64]) -> f64 {
    space.slip_trace_points(u).iter().map(|&(z, w)| w * z * z).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ex1() -> SlipLaw {
        SlipLaw::new(1.55, 1.53, 3.0, DEFAULT_EPS_REG).unwrap()
    }

    #[test]
    fn omega_values() {
        assert_eq!(ex1().omega(0.0).unwrap(), 1.55);
        let ex3 = SlipLaw::new(3.25, 3.20, 0.5, DEFAULT_EPS_REG).unwrap();
        assert_eq!(ex3.omega(0.0).unwrap(), 3.25);
        let law = ex1();
        let t = 10.0 / law.rho;
        assert!(law.omega(t).unwrap() - law.b <= (law.a - law.b) * (-10.0f64).exp() * (1.0 + 1e-12));
        assert!(law.omega(-1.0).is_err());
        assert!(SlipLaw::new(1.0, 2.0, 1.0, 1e-6).is_err());
        assert!(SlipLaw::new(1.0, 1.0, 0.0, 1e-6).is_err());
        let mut prev = law.omega(0.0).unwrap();
        for k in 1..100 {
            let w = law.omega(k as f64 * 0.05).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn traction_shape() {
        let law = ex1();
        assert_eq!(law.traction(0.0), 0.0);
        assert!((law.traction(1e6) - law.b).abs() < 1e-9);
        assert!((law.traction(-1e6) + law.b).abs() < 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let z: f64 = rng.gen_range(-3.0..3.0);
            assert_eq!(law.traction(-z), -law.traction(z));
            assert!(law.traction(z).abs() <= law.a);
        }
    }

    #[test]
    fn traction_derivative_matches_fd() {
        let law = SlipLaw::new(1.55, 1.53, 3.0, 1e-2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let z: f64 = rng.gen_range(-2.0..2.0);
            // fourth-order central stencil on a scale-aware step
            let h = 1e-3 * z.abs().max(law.eps_reg);
            let t = |k: f64| law.traction(z + k * h);
            let fd = (8.0 * (t(1.0) - t(-1.0)) - (t(2.0) - t(-2.0))) / (12.0 * h);
            let ex = law.traction_derivative(z);
            assert!(((fd - ex) / ex.abs().max(1e-6)).abs() < 1e-7, "z={z}: {fd} vs {ex}");
        }
    }

    #[test]
    fn friction_residual_constant_slip() {
        let space = FeSpace::new(TriMesh::unit_square(4).unwrap());
        let law = ex1();
        let s = 0.3;
        let u = space.interpolate_velocity(|_| [s, 0.0]).unwrap();
        let v = space.interpolate_velocity(|_| [1.0, 0.0]).unwrap();
        let (r, _) = assemble_friction(&space, &law, &u, None);
        let val: f64 = r.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!((val - law.traction(s)).abs() < 1e-13);
        // zero tangential trace gives an identically zero residual
        let w = space.interpolate_velocity(|x| [x[1] * (1.0 - x[1]), x[0]]).unwrap();
        let (r0, _) = assemble_friction(&space, &law, &w, None);
        assert!(r0.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn friction_jacobian_matches_fd() {
        let space = FeSpace::new(TriMesh::unit_square(3).unwrap());
        let law = SlipLaw::new(1.55, 1.53, 3.0, 1e-2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u: Vec<f64> = (0..space.n_velocity()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d: Vec<f64> = (0..space.n_velocity()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pat = crate::forms::velocity_pattern(&space);
        let (_, j) = assemble_friction(&space, &law, &u, Some(&pat));
        let jd = j.unwrap().mul_vec(&d);
        let t = 1e-7;
        let up: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + t * b).collect();
        let um: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - t * b).collect();
        let (rp, _) = assemble_friction(&space, &law, &up, None);
        let (rm, _) = assemble_friction(&space, &law, &um, None);
        let err: f64 = rp
            .iter()
            .zip(&rm)
            .zip(&jd)
            .map(|((a, b), c)| ((a - b) / (2.0 * t) - c).powi(2))
            .sum::<f64>()
            .sqrt();
        let nrm: f64 = jd.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(err / nrm < 1e-6);
    }

    #[test]
    fn delta1_estimates() {
        let mono = SlipLaw::new(2.0, 2.0, 1.0, 1e-6).unwrap();
        assert_eq!(estimate_delta1(&mono, 20_000).unwrap().delta1, 0.0);
        for (a, b, rho) in [(4.01, 4.00, 1.5), (1.55, 1.53, 3.0), (3.25, 3.20, 0.5)] {
            let law = SlipLaw::new(a, b, rho, 1e-6).unwrap();
            let d = estimate_delta1(&law, 20_000).unwrap().delta1;
            // oracle: inf g' over t > 0 is omega'(0+) = -rho (a - b)
            let envelope = rho * (a - b);
            assert!(d <= envelope * (1.0 + 1e-12) && d > 0.9 * envelope, "{d} vs {envelope}");
        }
        assert!(estimate_delta1(&mono, 100).is_err());
        let law = ex1();
        for (s, t) in [(0.3, 0.7), (-0.2, -1.1), (-0.5, 0.4), (2.0, 0.0)] {
            let direct = law.selection(s) - law.selection(t);
            assert!((law.selection_difference(s, t) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn lambda0_trace_inequality() {
        let space = FeSpace::new(TriMesh::unit_square(4).unwrap());
        let sc = estimate_lambda0(&space).unwrap();
        assert!(sc.lambda0 > 0.0);
        let a = assemble_a(&space);
        let e = &sc.eigenfunction;
        let ratio = tangential_trace_sq(&space, e) * sc.lambda0 / (0.5 * a.bilinear(e, e));
        assert!((ratio - 1.0).abs() < 1e-8, "{ratio}");
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let mut v: Vec<f64> = (0..space.n_velocity()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            space.apply_mask(&mut v);
            let lhs = tangential_trace_sq(&space, &v);
            let rhs = space.velocity_v_norm(&v).powi(2) / sc.lambda0;
            assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
