//! Lagrange shape functions in barycentric form.
//!
//! Local P2 ordering: the three vertices, then the three edge midpoints,
//! where local edge `k` is the edge opposite vertex `k`.

pub fn p1_values(lam: &[f64; 3]) -> [f64; 3] {
    *lam
}

pub fn p2_values(lam: &[f64; 3]) -> [f64; 6] {
    let [l0, l1, l2] = *lam;
    [
        l0 * (2.0 * l0 - 1.0),
        l1 * (2.0 * l1 - 1.0),
        l2 * (2.0 * l2 - 1.0),
        4.0 * l1 * l2,
        4.0 * l2 * l0,
        4.0 * l0 * l1,
    ]
}

pub fn p2_gradients(lam: &[f64; 3], gl: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut g = [[0.0; 2]; 6];
    for i in 0..3 {
        let s = 4.0 * lam[i] - 1.0;
        g[i] = [s * gl[i][0], s * gl[i][1]];
    }
    for k in 0..3 {
        let a = (k + 1) % 3;
        let b = (k + 2) % 3;
        g[3 + k] = [
            4.0 * (lam[a] * gl[b][0] + lam[b] * gl[a][0]),
            4.0 * (lam[a] * gl[b][1] + lam[b] * gl[a][1]),
        ];
    }
    g
}

/// Quadratic shape functions on a segment parametrised by `s` in `[0, 1]`:
/// start node, end node, midpoint.
pub fn p2_line_values(s: f64) -> [f64; 3] {
    [(1.0 - s) * (1.0 - 2.0 * s), s * (2.0 * s - 1.0), 4.0 * s * (1.0 - s)]
}
