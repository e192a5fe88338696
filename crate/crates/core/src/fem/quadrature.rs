//! Quadrature rules on the reference triangle and the reference segment.

/// Barycentric points and weights; the weights sum to 1 and are scaled by
/// the element area (or length) at use sites.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// 16-point symmetric rule, exact for polynomials of degree 8.
    pub fn triangle_degree8() -> Self {
        let mut points = Vec::with_capacity(16);
        let mut weights = Vec::with_capacity(16);
        let third = 1.0 / 3.0;
        points.push([third, third, third]);
        weights.push(0.144_315_607_677_787);
        for &(w, a) in &[
            (0.095_091_634_267_285, 0.081_414_823_414_554),
            (0.103_217_370_534_718, 0.658_861_384_496_480),
            (0.032_458_497_623_198, 0.898_905_543_365_938),
        ] {
            // orbit of (a, b, b)
            let b = 0.5 * (1.0 - a);
            for p in [[a, b, b], [b, a, b], [b, b, a]] {
                points.push(p);
                weights.push(w);
            }
        }
        let (a, b) = (0.008_394_777_409_958, 0.263_112_829_634_638);
        let c = 1.0 - a - b;
        for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            points.push(p);
            weights.push(0.027_230_314_174_435);
        }
        normalize(&mut weights);
        Self {
            points,
            weights,
            degree: 8,
        }
    }

    /// Three-point rule exact for degree 2 (used for cheap lumped checks).
    pub fn triangle_degree2() -> Self {
        let a = 2.0 / 3.0;
        let b = 1.0 / 6.0;
        Self {
            points: vec![[a, b, b], [b, a, b], [b, b, a]],
            weights: vec![1.0 / 3.0; 3],
            degree: 2,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Gauss-Legendre rule on `[0, 1]`: points as the parameter `s`, weights sum to 1.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl LineRule {
    /// Five-point Gauss-Legendre, exact for degree 9.
    pub fn gauss5() -> Self {
        let x1 = 0.538_469_310_105_683_1;
        let x2 = 0.906_179_845_938_664_0;
        let w0 = 128.0 / 225.0;
        let w1 = 0.478_628_670_499_366_5;
        let w2 = 0.236_926_885_056_189_1;
        let nodes = [-x2, -x1, 0.0, x1, x2];
        let ws = [w2, w1, w0, w1, w2];
        Self {
            points: nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
            weights: ws.iter().map(|w| 0.5 * w).collect(),
            degree: 9,
        }
    }

    /// Gauss-Legendre with `m` points computed by Newton iteration on the Legendre polynomial.
    pub fn gauss(m: usize) -> Self {
        let mut points = Vec::with_capacity(m);
        let mut weights = Vec::with_capacity(m);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(m, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points.push(0.5 * (1.0 - x));
            weights.push(0.5 * w);
        }
        Self {
            points,
            weights,
            degree: 2 * m - 1,
        }
    }
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn normalize(w: &mut [f64]) {
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|x| x as f64).product()
    }

    // integral of x^i y^j over the reference triangle (0,0),(1,0),(0,1)
    fn exact_monomial(i: usize, j: usize) -> f64 {
        factorial(i) * factorial(j) / factorial(i + j + 2)
    }

    #[test]
    fn triangle_rule_exact_to_degree_8() {
        let q = QuadratureRule::triangle_degree8();
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert!((q.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..=8 {
            for j in 0..=(8 - i) {
                let approx: f64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .map(|(p, w)| 0.5 * w * p[1].powi(i as i32) * p[2].powi(j as i32))
                    .sum();
                let exact = exact_monomial(i, j);
                assert!(
                    ((approx - exact) / exact).abs() < 1e-12,
                    "x^{i} y^{j}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn line_rule_exact_to_degree_9() {
        for q in [LineRule::gauss5(), LineRule::gauss(5)] {
            assert!(q.weights.iter().all(|&w| w > 0.0));
            for k in 0..=9 {
                let approx: f64 = q
                    .points
                    .iter()
                    .zip(&q.weights)
                    .map(|(s, w)| w * s.powi(k))
                    .sum();
                assert!((approx - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
            }
        }
    }

    #[test]
    fn generic_gauss_matches_fixed_rule() {
        let a = LineRule::gauss5();
        let mut b = LineRule::gauss(5);
        let mut idx: Vec<usize> = (0..5).collect();
        idx.sort_by(|&i, &j| b.points[i].partial_cmp(&b.points[j]).unwrap());
        b.points = idx.iter().map(|&i| b.points[i]).collect();
        b.weights = idx.iter().map(|&i| b.weights[i]).collect();
        for k in 0..5 {
            assert!((a.points[k] - b.points[k]).abs() < 1e-15);
            assert!((a.weights[k] - b.weights[k]).abs() < 1e-15);
        }
    }
}
