//! Bilinear, trilinear and power-law forms of the CBFeD system and their
//! Newton linearizations.
//!
//! Conventions, with `u` the trial and `v` the test function:
//!
//! * `a(u, v)   = int 2 eps(u) : eps(v)`
//! * `a0(u, v)  = int u . v`
//! * `b(w, u, v) = int (w . grad) u . v`
//! * `c_s(u, v) = int |u|^(s-1) u . v`
//! * `d(v, q)   = -int q div v`
//!
//! Matrices act on full (unconstrained) velocity DOF vectors; row index is
//! the test DOF.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::sparse::CsrMatrix;

/// Coefficients of the CBFeD momentum equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Effective viscosity (Brinkman coefficient).
    pub mu: f64,
    /// Darcy coefficient.
    pub alpha: f64,
    /// Forchheimer coefficient.
    pub beta: f64,
    /// Pumping coefficient, non-positive.
    pub kappa: f64,
    /// Absorption exponent.
    pub r: f64,
    /// Pumping exponent.
    pub q: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            mu: 1.0,
            alpha: 0.0,
            beta: 0.0,
            kappa: 0.0,
            r: 3.0,
            q: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        let all = [self.mu, self.alpha, self.beta, self.kappa, self.r, self.q];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("model parameters must be finite");
        }
        if self.mu <= 0.0 {
            return bad("mu must be positive");
        }
        if self.alpha < 0.0 || self.beta < 0.0 {
            return bad("alpha and beta must be non-negative");
        }
        if self.kappa > 0.0 {
            return bad("kappa must be non-positive");
        }
        if self.r < 1.0 || self.q < 1.0 {
            return bad("exponents r and q must be at least 1");
        }
        if self.beta > 0.0 && self.r <= self.q {
            return bad("r must exceed q when beta > 0");
        }
        Ok(())
    }
}

/// Element-block sparsity pattern on the full velocity space.
pub fn velocity_pattern(space: &FeSpace) -> CsrMatrix {
    let blocks: Vec<[usize; 12]> = space
        .elements()
        .iter()
        .map(|el| vector_dofs(space, &el.dofs))
        .collect();
    let n = space.n_velocity();
    CsrMatrix::from_blocks(n, n, blocks.iter().map(|b| (&b[..], &b[..])))
}

/// Pattern of the pressure-by-velocity coupling.
pub fn divergence_pattern(space: &FeSpace) -> CsrMatrix {
    let blocks: Vec<([usize; 3], [usize; 12])> = space
        .elements()
        .iter()
        .map(|el| (el.nodes, vector_dofs(space, &el.dofs)))
        .collect();
    CsrMatrix::from_blocks(
        space.n_pressure(),
        space.n_velocity(),
        blocks.iter().map(|(r, c)| (&r[..], &c[..])),
    )
}

/// Global vector DOFs of an element: six x-components then six y-components.
pub fn vector_dofs(space: &FeSpace, dofs: &[usize; 6]) -> [usize; 12] {
    let ns = space.n_scalar();
    let mut out = [0; 12];
    for k in 0..6 {
        out[k] = dofs[k];
        out[6 + k] = ns + dofs[k];
    }
    out
}

fn assemble_velocity_matrix<F>(space: &FeSpace, mut element: F) -> CsrMatrix
where
    F: FnMut(usize, &mut [f64; 144]),
{
    let mut m = velocity_pattern(space);
    let mut blk = [0.0; 144];
    for (e, el) in space.elements().iter().enumerate() {
        blk.iter_mut().for_each(|x| *x = 0.0);
        element(e, &mut blk);
        let d = vector_dofs(space, &el.dofs);
        m.add_block(&d, &d, &blk);
    }
    m
}

/// Matrix of `a(u, v) = int 2 eps(u) : eps(v)`.
pub fn assemble_a(space: &FeSpace) -> CsrMatrix {
    let nq = space.num_qp();
    assemble_velocity_matrix(space, |e, blk| {
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let g = space.qp_grad(e, q);
            for i in 0..6 {
                for j in 0..6 {
                    let dot = g[i][0] * g[j][0] + g[i][1] * g[j][1];
                    for d in 0..2 {
                        for c in 0..2 {
                            // 2 eps(phi_j e_c) : eps(phi_i e_d)
                            let mut v = g[j][d] * g[i][c];
                            if c == d {
                                v += dot;
                            }
                            blk[(6 * d + i) * 12 + 6 * c + j] += w * v;
                        }
                    }
                }
            }
        }
    })
}

/// Velocity mass matrix, the form `a0`.
pub fn assemble_a0(space: &FeSpace) -> CsrMatrix {
    let nq = space.num_qp();
    assemble_velocity_matrix(space, |e, blk| {
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            for i in 0..6 {
                for j in 0..6 {
                    let v = w * (phi[i] * phi[j]);
                    blk[i * 12 + j] += v;
                    blk[(6 + i) * 12 + 6 + j] += v;
                }
            }
        }
    })
}

/// Matrix of `d(v, q) = -int q div v`, rows indexed by pressure DOFs.
pub fn assemble_d(space: &FeSpace) -> CsrMatrix {
    let mut m = divergence_pattern(space);
    let nq = space.num_qp();
    let quad = space.quadrature();
    for (e, el) in space.elements().iter().enumerate() {
        let mut blk = [0.0; 36];
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let g = space.qp_grad(e, q);
            let lam = &quad.points[q];
            for i in 0..3 {
                for j in 0..6 {
                    blk[i * 12 + j] -= w * lam[i] * g[j][0];
                    blk[i * 12 + 6 + j] -= w * lam[i] * g[j][1];
                }
            }
        }
        let cols = vector_dofs(space, &el.dofs);
        m.add_block(&el.nodes, &cols, &blk);
    }
    m
}

/// Matrix of `u -> b(w, u, .)`.
pub fn assemble_oseen(space: &FeSpace, w: &[f64]) -> CsrMatrix {
    let nq = space.num_qp();
    assemble_velocity_matrix(space, |e, blk| {
        for q in 0..nq {
            let wq = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            let g = space.qp_grad(e, q);
            let wv = space.velocity_at_qp(w, e, q);
            for i in 0..6 {
                for j in 0..6 {
                    let v = wq * phi[i] * (wv[0] * g[j][0] + wv[1] * g[j][1]);
                    blk[i * 12 + j] += v;
                    blk[(6 + i) * 12 + 6 + j] += v;
                }
            }
        }
    })
}

/// Matrix of `(curl u, curl v)` with the scalar curl `d_x u_2 - d_y u_1`.
pub fn assemble_curl_curl(space: &FeSpace) -> CsrMatrix {
    let nq = space.num_qp();
    assemble_velocity_matrix(space, |e, blk| {
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let g = space.qp_grad(e, q);
            // curl(phi e_x) = -d_y phi, curl(phi e_y) = d_x phi
            let c = |k: usize| [-g[k][1], g[k][0]];
            for i in 0..6 {
                for j in 0..6 {
                    let (ci, cj) = (c(i), c(j));
                    for d in 0..2 {
                        for cc in 0..2 {
                            blk[(6 * d + i) * 12 + 6 * cc + j] += w * (ci[d] * cj[cc]);
                        }
                    }
                }
            }
        }
    })
}

/// Evaluates `b(u, v, w)` for three velocity DOF vectors by quadrature.
pub fn trilinear_b(space: &FeSpace, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
    space.integrate(|_, e, q| {
        let uu = space.velocity_at_qp(u, e, q);
        let gv = space.velocity_grad_at_qp(v, e, q);
        let ww = space.velocity_at_qp(w, e, q);
        let mut s = 0.0;
        for d in 0..2 {
            s += (uu[0] * gv[d][0] + uu[1] * gv[d][1]) * ww[d];
        }
        s
    })
}

/// Coefficients of `C(u) = |u|^(s-1) u` and its derivative at one point:
/// returns `(|u|^(s-1), (s-1) |u|^(s-3))`, the second factor multiplying
/// `u (u . v)`. Both vanish at `u = 0` when `s > 1`.
pub fn power_coefficients(u: [f64; 2], s: f64) -> (f64, f64) {
    let m2 = u[0] * u[0] + u[1] * u[1];
    if s == 1.0 {
        return (1.0, 0.0);
    }
    if m2 < 1e-300 {
        return (0.0, 0.0);
    }
    let m = m2.sqrt();
    let c0 = m.powf(s - 1.0);
    (c0, (s - 1.0) * c0 / m2)
}

/// Pointwise Gateaux derivative `C'(u) v`.
pub fn power_derivative(u: [f64; 2], v: [f64; 2], s: f64) -> [f64; 2] {
    let (c0, c1) = power_coefficients(u, s);
    let uv = u[0] * v[0] + u[1] * v[1];
    [c0 * v[0] + c1 * u[0] * uv, c0 * v[1] + c1 * u[1] * uv]
}

fn check_exponent(s: f64) -> Result<()> {
    if !(s >= 1.0) {
        return Err(Error::InvalidArgument(format!("power exponent {s} below 1")));
    }
    Ok(())
}

/// Vector `v_i -> int |u|^(s-1) u . phi_i`.
pub fn assemble_c_residual(space: &FeSpace, u: &[f64], s: f64) -> Result<Vec<f64>> {
    check_exponent(s)?;
    let mut out = vec![0.0; space.n_velocity()];
    let nq = space.num_qp();
    for (e, el) in space.elements().iter().enumerate() {
        let d = vector_dofs(space, &el.dofs);
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            let uv = space.velocity_at_qp(u, e, q);
            let (c0, _) = power_coefficients(uv, s);
            for i in 0..6 {
                out[d[i]] += w * c0 * uv[0] * phi[i];
                out[d[6 + i]] += w * c0 * uv[1] * phi[i];
            }
        }
    }
    Ok(out)
}

/// Jacobian of [`assemble_c_residual`] with respect to `u`.
pub fn assemble_c_jacobian(space: &FeSpace, u: &[f64], s: f64) -> Result<CsrMatrix> {
    check_exponent(s)?;
    let nq = space.num_qp();
    Ok(assemble_velocity_matrix(space, |e, blk| {
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            let uv = space.velocity_at_qp(u, e, q);
            let (c0, c1) = power_coefficients(uv, s);
            let m = [
                [c0 + c1 * uv[0] * uv[0], c1 * uv[0] * uv[1]],
                [c1 * uv[1] * uv[0], c0 + c1 * uv[1] * uv[1]],
            ];
            for i in 0..6 {
                for j in 0..6 {
                    let pp = w * (phi[i] * phi[j]);
                    for d in 0..2 {
                        for c in 0..2 {
                            blk[(6 * d + i) * 12 + 6 * c + j] += pp * m[d][c];
                        }
                    }
                }
            }
        }
    }))
}

/// `(f, phi_i)` for a P1 vector control given by nodal values.
pub fn assemble_load(space: &FeSpace, f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; space.n_velocity()];
    let nq = space.num_qp();
    for (e, el) in space.elements().iter().enumerate() {
        let d = vector_dofs(space, &el.dofs);
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            let fv = space.control_at_qp(f, e, q);
            for i in 0..6 {
                out[d[i]] += w * fv[0] * phi[i];
                out[d[6 + i]] += w * fv[1] * phi[i];
            }
        }
    }
    out
}

/// Load vector of an analytic body force.
pub fn assemble_load_analytic<F>(space: &FeSpace, f: F) -> Vec<f64>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let mut out = vec![0.0; space.n_velocity()];
    let nq = space.num_qp();
    for (e, el) in space.elements().iter().enumerate() {
        let d = vector_dofs(space, &el.dofs);
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            let fv = f(space.qp_x(e, q));
            for i in 0..6 {
                out[d[i]] += w * fv[0] * phi[i];
                out[d[6 + i]] += w * fv[1] * phi[i];
            }
        }
    }
    out
}

/// Load operator mapping control DOFs to velocity load vectors.
pub fn assemble_load_operator(space: &FeSpace) -> CsrMatrix {
    let nn = space.num_nodes();
    let nq = space.num_qp();
    let quad = space.quadrature();
    let blocks: Vec<([usize; 12], [usize; 6])> = space
        .elements()
        .iter()
        .map(|el| {
            let n = el.nodes;
            (
                vector_dofs(space, &el.dofs),
                [n[0], n[1], n[2], nn + n[0], nn + n[1], nn + n[2]],
            )
        })
        .collect();
    let mut m = CsrMatrix::from_blocks(
        space.n_velocity(),
        space.n_control(),
        blocks.iter().map(|(r, c)| (&r[..], &c[..])),
    );
    for (e, (rows, cols)) in blocks.iter().enumerate() {
        let mut blk = [0.0; 72];
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            let lam = &quad.points[q];
            for i in 0..6 {
                for k in 0..3 {
                    let v = w * phi[i] * lam[k];
                    blk[i * 6 + k] += v;
                    blk[(6 + i) * 6 + 3 + k] += v;
                }
            }
        }
        m.add_block(rows, cols, &blk);
    }
    m
}

/// Residual and optional Jacobian of `b(u,u,v) + beta c_r(u,v) + kappa c_q(u,v)`.
pub fn assemble_nonlinear(
    space: &FeSpace,
    params: &ModelParams,
    u: &[f64],
    with_jacobian: Option<&CsrMatrix>,
) -> (Vec<f64>, Option<CsrMatrix>) {
    let nq = space.num_qp();
    let mut res = vec![0.0; space.n_velocity()];
    let mut jac = with_jacobian.map(|p| p.zeroed());
    let mut blk = [0.0; 144];
    for (e, el) in space.elements().iter().enumerate() {
        let d = vector_dofs(space, &el.dofs);
        if jac.is_some() {
            blk.iter_mut().for_each(|x| *x = 0.0);
        }
        for q in 0..nq {
            let w = space.qp_w(e, q);
            let phi = space.ref_p2(q);
            let g = space.qp_grad(e, q);
            let uv = space.velocity_at_qp(u, e, q);
            let gu = space.velocity_grad_at_qp(u, e, q);
            // convection (u . grad) u
            let conv = [
                uv[0] * gu[0][0] + uv[1] * gu[0][1],
                uv[0] * gu[1][0] + uv[1] * gu[1][1],
            ];
            let mut f = conv;
            let mut m = [[0.0; 2]; 2];
            for &(coef, s) in &[(params.beta, params.r), (params.kappa, params.q)] {
                if coef == 0.0 {
                    continue;
                }
                let (c0, c1) = power_coefficients(uv, s);
                f[0] += coef * c0 * uv[0];
                f[1] += coef * c0 * uv[1];
                for a in 0..2 {
                    for b in 0..2 {
                        m[a][b] += coef * c1 * uv[a] * uv[b];
                    }
                    m[a][a] += coef * c0;
                }
            }
            for i in 0..6 {
                res[d[i]] += w * f[0] * phi[i];
                res[d[6 + i]] += w * f[1] * phi[i];
            }
            if jac.is_some() {
                for i in 0..6 {
                    for j in 0..6 {
                        let pp = w * (phi[i] * phi[j]);
                        let adv = w * phi[i] * (uv[0] * g[j][0] + uv[1] * g[j][1]);
                        for dd in 0..2 {
                            for c in 0..2 {
                                // b(delta, u, v): phi_j d_c u_d ; b(u, delta, v): u . grad phi_j
                                let mut v = pp * (gu[dd][c] + m[dd][c]);
                                if dd == c {
                                    v += adv;
                                }
                                blk[(6 * dd + i) * 12 + 6 * c + j] += v;
                            }
                        }
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::TriMesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn space(n: usize) -> FeSpace {
        FeSpace::new(TriMesh::unit_square(n).unwrap())
    }

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::default().validate().is_ok());
        let bad = [
            ModelParams { mu: 0.0, ..Default::default() },
            ModelParams { kappa: 0.1, ..Default::default() },
            ModelParams { beta: 1.0, r: 1.5, q: 1.5, ..Default::default() },
            ModelParams { r: 0.5, ..Default::default() },
            ModelParams { alpha: -1.0, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn a_on_shear_field() {
        let s = space(3);
        let a = assemble_a(&s);
        let v = s.interpolate_velocity(|x| [x[1], 0.0]).unwrap();
        assert!((a.bilinear(&v, &v) - 1.0).abs() < 1e-12);
        let t = s.interpolate_velocity(|_| [1.0, 1.0]).unwrap();
        assert!(a.bilinear(&t, &t).abs() < 1e-12);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn a_is_twice_the_strain_norm() {
        let s = space(3);
        let a = assemble_a(&s);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v = random_vec(s.n_velocity(), &mut rng);
            let lhs = a.bilinear(&v, &v);
            let rhs = 2.0 * s.velocity_v_norm(&v).powi(2);
            assert!(((lhs - rhs) / rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn mass_matrix_values() {
        let s = space(3);
        let m = assemble_a0(&s);
        let e1 = s.interpolate_velocity(|_| [1.0, 0.0]).unwrap();
        let e2 = s.interpolate_velocity(|_| [0.0, 1.0]).unwrap();
        let xf = s.interpolate_velocity(|x| [x[0], 0.0]).unwrap();
        assert!((m.bilinear(&e1, &e1) - 1.0).abs() < 1e-13);
        assert!(m.bilinear(&e1, &e2).abs() < 1e-15);
        assert!((m.bilinear(&xf, &xf) - 1.0 / 3.0).abs() < 1e-13);
        assert_eq!(m.asymmetry(), 0.0);
    }

    #[test]
    fn divergence_operator() {
        let s = space(4);
        let d = assemble_d(&s);
        let shear = s.interpolate_velocity(|x| [x[1], 0.0]).unwrap();
        assert!(d.mul_vec(&shear).iter().all(|x| x.abs() < 1e-12));
        // d(v, q) = -int q div v with v = (x, 0), div v = 1
        let v = s.interpolate_velocity(|x| [x[0], 0.0]).unwrap();
        let one = s.interpolate_pressure(|_| 1.0).unwrap();
        assert!(d.bilinear(&one, &v).abs() < 1e-14);
        let q = s.interpolate_pressure(|x| 2.0 * x[0] - 1.0).unwrap();
        assert!(d.bilinear(&q, &v).abs() < 1e-13);
        // q = x (unshifted): -int x = -1/2
        let qx: Vec<f64> = s.mesh().nodes().iter().map(|p| p[0]).collect();
        assert!((d.bilinear(&qx, &v) + 0.5).abs() < 1e-13);
        // q = x y, v = (x^2, 0): -int xy * 2x = -1/3
        let qxy: Vec<f64> = s.mesh().nodes().iter().map(|p| p[0] * p[1]).collect();
        let v2 = s.interpolate_velocity(|x| [x[0] * x[0], 0.0]).unwrap();
        let exact = -s.integrate(|x, e, qp| {
            let _ = x;
            s.pressure_at_qp(&qxy, e, qp) * 2.0 * s.qp_x(e, qp)[0]
        });
        assert!((d.bilinear(&qxy, &v2) - exact).abs() < 1e-13);
    }

    #[test]
    fn curl_curl_values() {
        let s = space(3);
        let k = assemble_curl_curl(&s);
        let rot = s.interpolate_velocity(|x| [-x[1], x[0]]).unwrap();
        assert!((k.bilinear(&rot, &rot) - 4.0).abs() < 1e-12);
        let grad = s.interpolate_velocity(|x| [2.0 * x[0], 2.0 * x[1]]).unwrap();
        assert!(k.bilinear(&grad, &grad).abs() < 1e-12);
    }

    #[test]
    fn oseen_zero_and_trilinear_consistency() {
        let s = space(3);
        let zero = vec![0.0; s.n_velocity()];
        assert!(assemble_oseen(&s, &zero).values().iter().all(|&v| v == 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = random_vec(s.n_velocity(), &mut rng);
        let u = random_vec(s.n_velocity(), &mut rng);
        let v = random_vec(s.n_velocity(), &mut rng);
        let n = assemble_oseen(&s, &w);
        let a = n.bilinear(&v, &u);
        let b = trilinear_b(&s, &w, &u, &v);
        assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
    }

    #[test]
    fn c_form_values() {
        let s = space(3);
        for (c, expected) in [(1.0, 1.0), (2.0, 16.0)] {
            let u = s.interpolate_velocity(|_| [c, 0.0]).unwrap();
            let r = assemble_c_residual(&s, &u, 3.0).unwrap();
            let val: f64 = r.iter().zip(&u).map(|(a, b)| a * b).sum();
            assert!((val - expected).abs() < 1e-12);
        }
        let u = vec![0.0; s.n_velocity()];
        assert!(assemble_c_residual(&s, &u, 0.5).is_err());
        assert!(assemble_c_jacobian(&s, &u, 0.9).is_err());
    }

    #[test]
    fn c_jacobian_matches_finite_differences() {
        let s = space(3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for exp in [1.0, 1.5, 2.0, 3.0, 3.5] {
            let u = random_vec(s.n_velocity(), &mut rng);
            let dlt = random_vec(s.n_velocity(), &mut rng);
            let jac = assemble_c_jacobian(&s, &u, exp).unwrap();
            let jd = jac.mul_vec(&dlt);
            let t = 1e-7;
            let up: Vec<f64> = u.iter().zip(&dlt).map(|(a, b)| a + t * b).collect();
            let um: Vec<f64> = u.iter().zip(&dlt).map(|(a, b)| a - t * b).collect();
            let rp = assemble_c_residual(&s, &up, exp).unwrap();
            let rm = assemble_c_residual(&s, &um, exp).unwrap();
            let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * t)).collect();
            let num: f64 = fd.iter().zip(&jd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = jd.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(num / den < 1e-6, "s={exp}: {}", num / den);
            // positive semidefinite
            assert!(jac.bilinear(&dlt, &dlt) >= 0.0);
        }
    }

    #[test]
    fn nonlinear_jacobian_matches_finite_differences() {
        let s = space(3);
        let params = ModelParams {
            mu: 1.0,
            alpha: 0.5,
            beta: 1.0,
            kappa: -0.5,
            r: 3.0,
            q: 1.5,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_vec(s.n_velocity(), &mut rng);
        let dlt = random_vec(s.n_velocity(), &mut rng);
        let pat = velocity_pattern(&s);
        let (_, jac) = assemble_nonlinear(&s, &params, &u, Some(&pat));
        let jd = jac.unwrap().mul_vec(&dlt);
        let t = 1e-6;
        let up: Vec<f64> = u.iter().zip(&dlt).map(|(a, b)| a + t * b).collect();
        let um: Vec<f64> = u.iter().zip(&dlt).map(|(a, b)| a - t * b).collect();
        let (rp, _) = assemble_nonlinear(&s, &params, &up, None);
        let (rm, _) = assemble_nonlinear(&s, &params, &um, None);
        let err: f64 = rp
            .iter()
            .zip(&rm)
            .zip(&jd)
            .map(|((a, b), j)| ((a - b) / (2.0 * t) - j).powi(2))
            .sum::<f64>()
            .sqrt();
        let den = jd.iter().map(|a| a * a).sum::<f64>().sqrt();
        assert!(err / den < 1e-7, "{}", err / den);
    }

    #[test]
    fn load_vectors() {
        let s = space(4);
        let zero = vec![0.0; s.n_control()];
        assert!(assemble_load(&s, &zero).iter().all(|&x| x == 0.0));
        let f = s.interpolate_control(|x| [x[0] - 1.0, x[1] - 1.0]).unwrap();
        let ones = s.interpolate_velocity(|_| [1.0, 1.0]).unwrap();
        let l = assemble_load(&s, &f);
        let val: f64 = l.iter().zip(&ones).map(|(a, b)| a * b).sum();
        assert!((val + 1.0).abs() < 1e-13);
        let e1 = s.interpolate_control(|_| [1.0, 0.0]).unwrap();
        let v1 = s.interpolate_velocity(|_| [1.0, 0.0]).unwrap();
        let val: f64 = assemble_load(&s, &e1).iter().zip(&v1).map(|(a, b)| a * b).sum();
        assert!((val - 1.0).abs() < 1e-13);
        let op = assemble_load_operator(&s);
        let via_op = op.mul_vec(&f);
        for (a, b) in via_op.iter().zip(&l) {
            assert!((a - b).abs() < 1e-15);
        }
        let analytic = assemble_load_analytic(&s, |x| [x[0] - 1.0, x[1] - 1.0]);
        for (a, b) in analytic.iter().zip(&l) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
