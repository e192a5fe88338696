//! Structured triangulations of the unit square.
//!
//! Every grid cell is split along its lower-left to upper-right diagonal.
//! Nodes are numbered row-major starting at the origin, so node `(i, j)`
//! sits at `(i / n, j / n)` with index `i + j (n + 1)`.

use crate::error::{Error, Result};

/// Boundary part an edge belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum BoundaryTag {
    /// Homogeneous Dirichlet part.
    Gamma0,
    /// Slip part, the top side `y = 1`.
    Gamma1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryEdge {
    pub nodes: [usize; 2],
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    n: usize,
    nodes: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
}

impl TriMesh {
    /// Uniform `n x n` grid on `(0,1)^2`, two triangles per cell.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "mesh subdivision count must be at least 1".into(),
            ));
        }
        let np = n + 1;
        let id = |i: usize, j: usize| i + j * np;
        let h = 1.0 / n as f64;

        let mut nodes = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                // exact endpoints, no accumulated rounding
                let x = if i == n { 1.0 } else { i as f64 * h };
                let y = if j == n { 1.0 } else { j as f64 * h };
                nodes.push([x, y]);
            }
        }

        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = id(i, j);
                let v10 = id(i + 1, j);
                let v01 = id(i, j + 1);
                let v11 = id(i + 1, j + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }

        // counter-clockwise walk around the boundary
        let mut boundary_edges = Vec::with_capacity(4 * n);
        for i in 0..n {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(i, 0), id(i + 1, 0)],
                tag: BoundaryTag::Gamma0,
            });
        }
        for j in 0..n {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(n, j), id(n, j + 1)],
                tag: BoundaryTag::Gamma0,
            });
        }
        for i in (0..n).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(i + 1, n), id(i, n)],
                tag: BoundaryTag::Gamma1,
            });
        }
        for j in (0..n).rev() {
            boundary_edges.push(BoundaryEdge {
                nodes: [id(0, j + 1), id(0, j)],
                tag: BoundaryTag::Gamma0,
            });
        }

        Ok(Self {
            n,
            nodes,
            triangles,
            boundary_edges,
        })
    }

    /// Subdivisions per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.nodes[a], self.nodes[b], self.nodes[c]]
    }

    /// Signed area of triangle `t` (positive for counter-clockwise).
    pub fn signed_area(&self, t: usize) -> f64 {
        let [p0, p1, p2] = self.vertices(t);
        0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]))
    }

    /// Maximum edge length over all triangles.
    pub fn mesh_size(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let p = self.vertices(t);
            for k in 0..3 {
                let a = p[k];
                let b = p[(k + 1) % 3];
                h = h.max(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
            }
        }
        h
    }

    pub fn on_gamma1(p: [f64; 2]) -> bool {
        p[1] == 1.0
    }

    pub fn on_boundary(p: [f64; 2]) -> bool {
        p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0
    }

    /// Triangle containing `p` together with its barycentric coordinates.
    ///
    /// Points slightly outside the square are clamped onto it.
    pub fn locate(&self, p: [f64; 2]) -> (usize, [f64; 3]) {
        let n = self.n;
        let nf = n as f64;
        let x = p[0].clamp(0.0, 1.0);
        let y = p[1].clamp(0.0, 1.0);
        let i = ((x * nf).floor() as usize).min(n - 1);
        let j = ((y * nf).floor() as usize).min(n - 1);
        let lx = x * nf - i as f64;
        let ly = y * nf - j as f64;
        let cell = 2 * (i + j * n);
        // lower triangle (v00, v10, v11) holds ly <= lx
        if ly <= lx {
            (cell, [1.0 - lx, lx - ly, ly])
        } else {
            (cell + 1, [1.0 - ly, lx, ly - lx])
        }
    }

    /// Legacy ASCII VTK dump of the triangulation with boundary tags as cell data.
    pub fn write_vtk<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "unit square mesh n={}", self.n)?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.nodes.len())?;
        for p in &self.nodes {
            writeln!(out, "{} {} 0", p[0], p[1])?;
        }
        let nt = self.triangles.len();
        let ne = self.boundary_edges.len();
        writeln!(out, "CELLS {} {}", nt + ne, 4 * nt + 3 * ne)?;
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        for e in &self.boundary_edges {
            writeln!(out, "2 {} {}", e.nodes[0], e.nodes[1])?;
        }
        writeln!(out, "CELL_TYPES {}", nt + ne)?;
        for _ in 0..nt {
            writeln!(out, "5")?;
        }
        for _ in 0..ne {
            writeln!(out, "3")?;
        }
        writeln!(out, "CELL_DATA {}", nt + ne)?;
        writeln!(out, "SCALARS boundary_tag int 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for _ in 0..nt {
            writeln!(out, "-1")?;
        }
        for e in &self.boundary_edges {
            let v = match e.tag {
                BoundaryTag::Gamma0 => 0,
                BoundaryTag::Gamma1 => 1,
            };
            writeln!(out, "{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn edge_len(m: &TriMesh, e: &BoundaryEdge) -> f64 {
        let a = m.nodes()[e.nodes[0]];
        let b = m.nodes()[e.nodes[1]];
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    #[test]
    fn counts() {
        let m = TriMesh::unit_square(1).unwrap();
        assert_eq!((m.num_nodes(), m.num_triangles(), m.boundary_edges().len()), (4, 2, 4));
        let g1 = |m: &TriMesh| {
            m.boundary_edges()
                .iter()
                .filter(|e| e.tag == BoundaryTag::Gamma1)
                .count()
        };
        assert_eq!(g1(&m), 1);
        let m = TriMesh::unit_square(2).unwrap();
        assert_eq!((m.num_nodes(), m.num_triangles(), m.boundary_edges().len()), (9, 8, 8));
        assert_eq!(g1(&m), 2);
        let m = TriMesh::unit_square(25).unwrap();
        assert_eq!((m.num_nodes(), m.num_triangles()), (676, 1250));
    }

    #[test]
    fn zero_subdivisions_rejected() {
        assert!(matches!(TriMesh::unit_square(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mesh_size_matches_table_values() {
        for (n, h) in [(4, 3.5355e-1), (8, 1.7678e-1), (12, 1.1785e-1), (16, 8.8388e-2)] {
            let m = TriMesh::unit_square(n).unwrap();
            assert!((m.mesh_size() - h).abs() < 5e-5 * h, "n={n}");
            assert!((m.mesh_size() - 2f64.sqrt() / n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn geometry_invariants() {
        for n in [1, 2, 3, 7, 16] {
            let m = TriMesh::unit_square(n).unwrap();
            let mut area = 0.0;
            for t in 0..m.num_triangles() {
                let a = m.signed_area(t);
                assert!(a > 0.0);
                area += a;
            }
            assert!((area - 1.0).abs() < 1e-12);

            let total: f64 = m.boundary_edges().iter().map(|e| edge_len(&m, e)).sum();
            let top: f64 = m
                .boundary_edges()
                .iter()
                .filter(|e| e.tag == BoundaryTag::Gamma1)
                .map(|e| edge_len(&m, e))
                .sum();
            assert!((total - 4.0).abs() < 1e-12);
            assert!((top - 1.0).abs() < 1e-12);

            for e in m.boundary_edges() {
                let both_top = e.nodes.iter().all(|&v| m.nodes()[v][1] == 1.0);
                assert_eq!(both_top, e.tag == BoundaryTag::Gamma1);
            }

            let mut count: HashMap<(usize, usize), usize> = HashMap::new();
            for tri in m.triangles() {
                for k in 0..3 {
                    let a = tri[k];
                    let b = tri[(k + 1) % 3];
                    *count.entry((a.min(b), a.max(b))).or_default() += 1;
                }
            }
            let boundary: std::collections::HashSet<_> = m
                .boundary_edges()
                .iter()
                .map(|e| (e.nodes[0].min(e.nodes[1]), e.nodes[0].max(e.nodes[1])))
                .collect();
            for (edge, c) in count {
                let expected = if boundary.contains(&edge) { 1 } else { 2 };
                assert_eq!(c, expected);
            }
        }
    }

    #[test]
    fn locate_reproduces_points() {
        let m = TriMesh::unit_square(5).unwrap();
        for &p in &[[0.0, 0.0], [1.0, 1.0], [0.33, 0.71], [0.9, 0.05], [0.5, 0.5], [1.0, 0.3]] {
            let (t, lam) = m.locate(p);
            let v = m.vertices(t);
            let x = lam[0] * v[0][0] + lam[1] * v[1][0] + lam[2] * v[2][0];
            let y = lam[0] * v[0][1] + lam[1] * v[1][1] + lam[2] * v[2][1];
            assert!((x - p[0]).abs() < 1e-14 && (y - p[1]).abs() < 1e-14);
            assert!(lam.iter().all(|&l| l >= -1e-14));
        }
    }

    #[test]
    fn vtk_dump_has_all_cells() {
        let m = TriMesh::unit_square(2).unwrap();
        let mut buf = Vec::new();
        m.write_vtk(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.contains("POINTS 9 double"));
        assert!(s.contains("CELLS 16 56"));
    }
}
