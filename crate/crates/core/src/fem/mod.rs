//! Taylor-Hood P2/P1 spaces on a [`TriMesh`], plus the P1 vector control space.
//!
//! Velocity DOF vectors are blocked by component: entry `c * n_scalar + s`
//! holds component `c` of scalar DOF `s`, where scalar DOFs `0..N` are the
//! mesh nodes and `N..N+E` are the edge midpoints. Control vectors use the
//! same blocking over nodes only (`c * N + node`).

pub mod basis;
pub mod quadrature;

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{BoundaryTag, TriMesh};
use basis::{p2_gradients, p2_line_values, p2_values};
pub use quadrature::{LineRule, QuadratureRule};

/// Per-triangle geometry and DOF indices.
#[derive(Debug, Clone)]
pub struct Element {
    pub nodes: [usize; 3],
    /// Scalar P2 DOFs: vertices then midpoints of the edges opposite each vertex.
    pub dofs: [usize; 6],
    pub area: f64,
    pub grad_lambda: [[f64; 2]; 3],
}

/// One edge of the slip boundary with its quadratic trace DOFs.
#[derive(Debug, Clone, Copy)]
pub struct SlipSegment {
    /// Scalar DOFs ordered as start node, end node, midpoint.
    pub dofs: [usize; 3],
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct FeSpace {
    mesh: Arc<TriMesh>,
    edges: Vec<[usize; 2]>,
    elements: Vec<Element>,
    slip_segments: Vec<SlipSegment>,
    constrained: Vec<bool>,
    free: Vec<usize>,
    free_index: Vec<Option<usize>>,
    pressure_weights: Vec<f64>,
    quad: QuadratureRule,
    line: LineRule,
    ref_p2: Vec<[f64; 6]>,
    qp_x: Vec<[f64; 2]>,
    qp_w: Vec<f64>,
    qp_grad: Vec<[[f64; 2]; 6]>,
}

/// Which velocity DOFs carry essential constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    /// `v = 0` on Gamma0 and `v . n = 0` on Gamma1.
    SlipSpace,
    /// `v = 0` on the whole boundary.
    NoSlip,
}

impl FeSpace {
    pub fn new(mesh: TriMesh) -> Self {
        Self::with_constraint(Arc::new(mesh), Constraint::SlipSpace)
    }

    pub fn with_constraint(mesh: Arc<TriMesh>, constraint: Constraint) -> Self {
        let nn = mesh.num_nodes();
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut elements = Vec::with_capacity(mesh.num_triangles());
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let mut dofs = [tri[0], tri[1], tri[2], 0, 0, 0];
            for k in 0..3 {
                let a = tri[(k + 1) % 3];
                let b = tri[(k + 2) % 3];
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edges.len() - 1
                });
                dofs[3 + k] = nn + id;
            }
            let area = mesh.signed_area(t);
            let p = mesh.vertices(t);
            let mut gl = [[0.0; 2]; 3];
            for i in 0..3 {
                let a = p[(i + 1) % 3];
                let b = p[(i + 2) % 3];
                // gradient of lambda_i is the inward normal of the opposite edge over 2|T|
                gl[i] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
            }
            elements.push(Element {
                nodes: *tri,
                dofs,
                area,
                grad_lambda: gl,
            });
        }
        let ns = nn + edges.len();

        let mut constrained = vec![false; 2 * ns];
        let mut slip_segments = Vec::new();
        for be in mesh.boundary_edges() {
            let [a, b] = be.nodes;
            let mid = nn + edge_ids[&(a.min(b), a.max(b))];
            let tag = match constraint {
                Constraint::NoSlip => BoundaryTag::Gamma0,
                Constraint::SlipSpace => be.tag,
            };
            match tag {
                BoundaryTag::Gamma0 => {
                    for s in [a, b, mid] {
                        constrained[s] = true;
                        constrained[ns + s] = true;
                    }
                }
                BoundaryTag::Gamma1 => {
                    // outward normal is (0, 1): only the y-component is fixed
                    for s in [a, b, mid] {
                        constrained[ns + s] = true;
                    }
                }
            }
            if be.tag == BoundaryTag::Gamma1 {
                let pa = mesh.nodes()[a];
                let pb = mesh.nodes()[b];
                slip_segments.push(SlipSegment {
                    dofs: [a, b, mid],
                    length: ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt(),
                });
            }
        }
        let mut free = Vec::new();
        let mut free_index = vec![None; 2 * ns];
        for (i, &c) in constrained.iter().enumerate() {
            if !c {
                free_index[i] = Some(free.len());
                free.push(i);
            }
        }

        let mut pressure_weights = vec![0.0; nn];
        for el in &elements {
            for &v in &el.nodes {
                pressure_weights[v] += el.area / 3.0;
            }
        }

        let quad = QuadratureRule::triangle_degree8();
        let ref_p2: Vec<[f64; 6]> = quad.points.iter().map(p2_values).collect();
        let nq = quad.len();
        let mut qp_x = Vec::with_capacity(elements.len() * nq);
        let mut qp_w = Vec::with_capacity(elements.len() * nq);
        let mut qp_grad = Vec::with_capacity(elements.len() * nq);
        for (t, el) in elements.iter().enumerate() {
            let p = mesh.vertices(t);
            for (lam, w) in quad.points.iter().zip(&quad.weights) {
                qp_x.push([
                    lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                    lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                ]);
                qp_w.push(w * el.area);
                qp_grad.push(p2_gradients(lam, &el.grad_lambda));
            }
        }

        Self {
            mesh,
            edges,
            elements,
            slip_segments,
            constrained,
            free,
            free_index,
            pressure_weights,
            quad,
            line: LineRule::gauss5(),
            ref_p2,
            qp_x,
            qp_w,
            qp_grad,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> Arc<TriMesh> {
        Arc::clone(&self.mesh)
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn slip_segments(&self) -> &[SlipSegment] {
        &self.slip_segments
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.num_nodes()
    }

    /// Scalar P2 DOF count (nodes plus edges).
    pub fn n_scalar(&self) -> usize {
        self.mesh.num_nodes() + self.edges.len()
    }

    pub fn n_velocity(&self) -> usize {
        2 * self.n_scalar()
    }

    pub fn n_pressure(&self) -> usize {
        self.mesh.num_nodes()
    }

    pub fn n_control(&self) -> usize {
        2 * self.mesh.num_nodes()
    }

    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained[dof]
    }

    pub fn constrained_mask(&self) -> &[bool] {
        &self.constrained
    }

    /// Unconstrained velocity DOFs in increasing order.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn free_index(&self, dof: usize) -> Option<usize> {
        self.free_index[dof]
    }

    /// Zeroes every constrained velocity DOF.
    pub fn apply_mask(&self, v: &mut [f64]) {
        for (x, &c) in v.iter_mut().zip(&self.constrained) {
            if c {
                *x = 0.0;
            }
        }
    }

    /// `int phi_i` for each P1 basis function.
    pub fn pressure_weights(&self) -> &[f64] {
        &self.pressure_weights
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn line_rule(&self) -> &LineRule {
        &self.line
    }

    pub fn num_qp(&self) -> usize {
        self.quad.len()
    }

    /// P2 shape values at reference quadrature point `q`.
    pub fn ref_p2(&self, q: usize) -> &[f64; 6] {
        &self.ref_p2[q]
    }

    /// Physical coordinates of quadrature point `q` of element `e`.
    pub fn qp_x(&self, e: usize, q: usize) -> [f64; 2] {
        self.qp_x[e * self.quad.len() + q]
    }

    /// Quadrature weight times element area.
    pub fn qp_w(&self, e: usize, q: usize) -> f64 {
        self.qp_w[e * self.quad.len() + q]
    }

    pub fn qp_grad(&self, e: usize, q: usize) -> &[[f64; 2]; 6] {
        &self.qp_grad[e * self.quad.len() + q]
    }

    /// Coordinates of scalar P2 DOF `s`.
    pub fn scalar_dof_point(&self, s: usize) -> [f64; 2] {
        let nn = self.num_nodes();
        let nodes = self.mesh.nodes();
        if s < nn {
            nodes[s]
        } else {
            let [a, b] = self.edges[s - nn];
            [0.5 * (nodes[a][0] + nodes[b][0]), 0.5 * (nodes[a][1] + nodes[b][1])]
        }
    }

    pub fn interpolate_velocity<F>(&self, field: F) -> Result<Vec<f64>>
    where
        F: Fn([f64; 2]) -> [f64; 2],
    {
        let ns = self.n_scalar();
        let mut v = vec![0.0; 2 * ns];
        for s in 0..ns {
            let p = self.scalar_dof_point(s);
            let val = field(p);
            if !(val[0].is_finite() && val[1].is_finite()) {
                return Err(Error::Evaluation(format!("velocity field at {p:?}")));
            }
            v[s] = val[0];
            v[ns + s] = val[1];
        }
        Ok(v)
    }

    /// P1 nodal interpolant shifted to zero mean.
    pub fn interpolate_pressure<F>(&self, field: F) -> Result<Vec<f64>>
    where
        F: Fn([f64; 2]) -> f64,
    {
        let mut p = Vec::with_capacity(self.n_pressure());
        for &x in self.mesh.nodes() {
            let val = field(x);
            if !val.is_finite() {
                return Err(Error::Evaluation(format!("pressure field at {x:?}")));
            }
            p.push(val);
        }
        self.remove_pressure_mean(&mut p);
        Ok(p)
    }

    pub fn interpolate_control<F>(&self, field: F) -> Result<Vec<f64>>
    where
        F: Fn([f64; 2]) -> [f64; 2],
    {
        let nn = self.num_nodes();
        let mut f = vec![0.0; 2 * nn];
        for (i, &x) in self.mesh.nodes().iter().enumerate() {
            let val = field(x);
            if !(val[0].is_finite() && val[1].is_finite()) {
                return Err(Error::Evaluation(format!("control field at {x:?}")));
            }
            f[i] = val[0];
            f[nn + i] = val[1];
        }
        Ok(f)
    }

    pub fn pressure_mean(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.pressure_weights).map(|(a, w)| a * w).sum::<f64>()
    }

    pub fn remove_pressure_mean(&self, p: &mut [f64]) {
        // the domain has unit area
        let m = self.pressure_mean(p);
        p.iter_mut().for_each(|x| *x -= m);
    }

    pub fn velocity_at_qp(&self, u: &[f64], e: usize, q: usize) -> [f64; 2] {
        let ns = self.n_scalar();
        let phi = &self.ref_p2[q];
        let dofs = &self.elements[e].dofs;
        let mut v = [0.0; 2];
        for k in 0..6 {
            v[0] += phi[k] * u[dofs[k]];
            v[1] += phi[k] * u[ns + dofs[k]];
        }
        v
    }

    /// `g[c][d] = d u_c / d x_d` at a quadrature point.
    pub fn velocity_grad_at_qp(&self, u: &[f64], e: usize, q: usize) -> [[f64; 2]; 2] {
        let ns = self.n_scalar();
        let grad = self.qp_grad(e, q);
        let dofs = &self.elements[e].dofs;
        let mut g = [[0.0; 2]; 2];
        for k in 0..6 {
            let (ux, uy) = (u[dofs[k]], u[ns + dofs[k]]);
            g[0][0] += ux * grad[k][0];
            g[0][1] += ux * grad[k][1];
            g[1][0] += uy * grad[k][0];
            g[1][1] += uy * grad[k][1];
        }
        g
    }

    pub fn pressure_at_qp(&self, p: &[f64], e: usize, q: usize) -> f64 {
        let lam = &self.quad.points[q];
        let n = &self.elements[e].nodes;
        lam[0] * p[n[0]] + lam[1] * p[n[1]] + lam[2] * p[n[2]]
    }

    pub fn control_at_qp(&self, f: &[f64], e: usize, q: usize) -> [f64; 2] {
        let nn = self.num_nodes();
        let lam = &self.quad.points[q];
        let n = &self.elements[e].nodes;
        let mut v = [0.0; 2];
        for k in 0..3 {
            v[0] += lam[k] * f[n[k]];
            v[1] += lam[k] * f[nn + n[k]];
        }
        v
    }

    /// Velocity value and gradient at an arbitrary point of the square.
    pub fn velocity_at_point(&self, u: &[f64], x: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let (e, lam) = self.mesh.locate(x);
        let el = &self.elements[e];
        let ns = self.n_scalar();
        let phi = p2_values(&lam);
        let grad = p2_gradients(&lam, &el.grad_lambda);
        let mut v = [0.0; 2];
        let mut g = [[0.0; 2]; 2];
        for k in 0..6 {
            let (ux, uy) = (u[el.dofs[k]], u[ns + el.dofs[k]]);
            v[0] += phi[k] * ux;
            v[1] += phi[k] * uy;
            for d in 0..2 {
                g[0][d] += ux * grad[k][d];
                g[1][d] += uy * grad[k][d];
            }
        }
        (v, g)
    }

    pub fn pressure_at_point(&self, p: &[f64], x: [f64; 2]) -> f64 {
        let (e, lam) = self.mesh.locate(x);
        let n = &self.elements[e].nodes;
        lam[0] * p[n[0]] + lam[1] * p[n[1]] + lam[2] * p[n[2]]
    }

    pub fn control_at_point(&self, f: &[f64], x: [f64; 2]) -> [f64; 2] {
        let (e, lam) = self.mesh.locate(x);
        let nn = self.num_nodes();
        let n = &self.elements[e].nodes;
        let mut v = [0.0; 2];
        for k in 0..3 {
            v[0] += lam[k] * f[n[k]];
            v[1] += lam[k] * f[nn + n[k]];
        }
        v
    }

    /// `int_O g(x, e, q)` over all quadrature points.
    pub fn integrate<G>(&self, mut g: G) -> f64
    where
        G: FnMut([f64; 2], usize, usize) -> f64,
    {
        let nq = self.quad.len();
        let mut total = 0.0;
        for e in 0..self.elements.len() {
            for q in 0..nq {
                total += self.qp_w[e * nq + q] * g(self.qp_x[e * nq + q], e, q);
            }
        }
        total
    }

    pub fn velocity_l2_norm(&self, u: &[f64]) -> f64 {
        self.integrate(|_, e, q| {
            let v = self.velocity_at_qp(u, e, q);
            v[0] * v[0] + v[1] * v[1]
        })
        .sqrt()
    }

    /// `||eps(u)||_{L2}`, the norm of the velocity space.
    pub fn velocity_v_norm(&self, u: &[f64]) -> f64 {
        self.integrate(|_, e, q| strain_sq(&self.velocity_grad_at_qp(u, e, q)))
            .sqrt()
    }

    /// `||u||_{L^s}^s`.
    pub fn velocity_lp_power(&self, u: &[f64], s: f64) -> f64 {
        self.integrate(|_, e, q| {
            let v = self.velocity_at_qp(u, e, q);
            (v[0] * v[0] + v[1] * v[1]).sqrt().powf(s)
        })
    }

    pub fn pressure_l2_norm(&self, p: &[f64]) -> f64 {
        self.integrate(|_, e, q| self.pressure_at_qp(p, e, q).powi(2))
            .sqrt()
    }

    pub fn control_l2_norm(&self, f: &[f64]) -> f64 {
        self.integrate(|_, e, q| {
            let v = self.control_at_qp(f, e, q);
            v[0] * v[0] + v[1] * v[1]
        })
        .sqrt()
    }

    /// Tangential (x-component) velocity values along the slip boundary at
    /// the line quadrature points, with their weights times edge length.
    pub fn slip_trace_points(&self, u: &[f64]) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.slip_segments.len() * self.line.points.len());
        for seg in &self.slip_segments {
            for (s, w) in self.line.points.iter().zip(&self.line.weights) {
                let phi = p2_line_values(*s);
                let z: f64 = (0..3).map(|k| phi[k] * u[seg.dofs[k]]).sum();
                out.push((z, w * seg.length));
            }
        }
        out
    }
}

/// `eps(u) : eps(u)` from a velocity gradient.
pub fn strain_sq(g: &[[f64; 2]; 2]) -> f64 {
    let e12 = 0.5 * (g[0][1] + g[1][0]);
    g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * e12 * e12
}
