//! Built-in experiment data: parameter rows for Examples 1-3 and the named
//! analytic fields that configurations may reference.

use std::f64::consts::PI;

use crate::forms::ModelParams;
use crate::optimize::{CostWeights, ScalarField, VectorField};

/// One row of the experiment setup table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExampleSetup {
    pub id: u8,
    pub params: ModelParams,
    /// Slip coefficient `omega(t) = (a - b) exp(-rho t) + b`.
    pub a: f64,
    pub b: f64,
    pub rho: f64,
    /// Uzawa pressure step.
    pub eta: f64,
    pub weights: CostWeights,
    pub u_d: &'static str,
    pub p_d: &'static str,
    pub f0: &'static str,
}

/// Setup of Example `id` (1, 2 or 3). Exponents that the setup leaves
/// unspecified default to `r = 3` and `q = 1`; they are inactive there.
pub fn example(id: u8) -> Option<ExampleSetup> {
    let row = |params, a, b, rho, eta, (alpha1, alpha2, alpha3)| {
        let name = match id {
            1 => "example1",
            2 => "example2",
            _ => "example3",
        };
        ExampleSetup {
            id,
            params,
            a,
            b,
            rho,
            eta,
            weights: CostWeights { alpha1, alpha2, alpha3 },
            u_d: name,
            p_d: name,
            f0: name,
        }
    };
    match id {
        1 => Some(row(
            ModelParams { mu: 1.2, alpha: 0.0, beta: 0.0, kappa: 0.0, r: 3.0, q: 1.0 },
            1.55,
            1.53,
            3.0,
            1.0,
            (1.0, 1.2, 0.2),
        )),
        2 => Some(row(
            ModelParams { mu: 1.0, alpha: 1.5, beta: 1.0, kappa: 0.0, r: 3.0, q: 1.0 },
            4.01,
            4.00,
            1.5,
            2.0,
            (1.0, 1.0, 0.5),
        )),
        3 => Some(row(
            ModelParams { mu: 1.0, alpha: 0.5, beta: 1.0, kappa: -0.5, r: 3.0, q: 1.5 },
            3.25,
            3.20,
            0.5,
            0.1,
            (1.0, 0.5, 0.1),
        )),
        _ => None,
    }
}

fn zero_vector(_: [f64; 2]) -> [f64; 2] {
    [0.0, 0.0]
}

fn zero_scalar(_: [f64; 2]) -> f64 {
    0.0
}

pub fn example1_velocity(p: [f64; 2]) -> [f64; 2] {
    let [x, y] = p;
    [
        -x * x * (x - 1.0) * y * (3.0 * y - 2.0),
        x * (3.0 * x - 2.0) * y * y * (y - 1.0),
    ]
}

pub fn example1_pressure(p: [f64; 2]) -> f64 {
    (2.0 * p[0] - 1.0) * (2.0 * p[1] - 1.0)
}

pub fn example1_control(p: [f64; 2]) -> [f64; 2] {
    [p[0] - 1.0, p[1] - 1.0]
}

pub fn example2_velocity(p: [f64; 2]) -> [f64; 2] {
    let (sx, cx) = (PI * p[0]).sin_cos();
    let (sy, cy) = (PI * p[1]).sin_cos();
    [sx * sy, cx * cy]
}

pub fn example2_pressure(p: [f64; 2]) -> f64 {
    (PI * p[0]).sin() * (PI * p[1]).cos()
}

pub fn example2_control(p: [f64; 2]) -> [f64; 2] {
    [(PI * p[0]).sin(), (PI * p[1]).cos()]
}

/// Divergence-free and vanishing on the whole boundary.
pub fn example3_velocity(p: [f64; 2]) -> [f64; 2] {
    let (sx, cx) = (2.0 * PI * p[0]).sin_cos();
    let (sy, cy) = (2.0 * PI * p[1]).sin_cos();
    [-cx * sy + sy, sx * cy - sx]
}

pub fn example3_pressure(p: [f64; 2]) -> f64 {
    2.0 * PI * ((2.0 * PI * p[1]).cos() - (2.0 * PI * p[0]).cos())
}

pub fn example3_control(p: [f64; 2]) -> [f64; 2] {
    [(2.0 * PI * p[1]).sin(), -(2.0 * PI * p[0]).sin()]
}

/// Stream-function perturbation `curl(sin^2(pi x) sin^2(pi y))`, divergence
/// free and zero on the boundary.
pub fn bubble_curl(p: [f64; 2]) -> [f64; 2] {
    let (sx, sy) = ((PI * p[0]).sin(), (PI * p[1]).sin());
    let (s2x, s2y) = ((2.0 * PI * p[0]).sin(), (2.0 * PI * p[1]).sin());
    [PI * sx * sx * s2y, -PI * s2x * sy * sy]
}

/// Target velocity fields by name.
pub fn velocity_field(name: &str) -> Option<VectorField> {
    Some(match name {
        "zero" => zero_vector,
        "example1" => example1_velocity,
        "example2" => example2_velocity,
        "example3" => example3_velocity,
        "bubble-curl" => bubble_curl,
        _ => return None,
    })
}

/// Target pressure fields by name.
pub fn pressure_field(name: &str) -> Option<ScalarField> {
    Some(match name {
        "zero" => zero_scalar,
        "example1" => example1_pressure,
        "example2" => example2_pressure,
        "example3" => example3_pressure,
        _ => return None,
    })
}

/// Initial controls by name.
pub fn control_field(name: &str) -> Option<VectorField> {
    Some(match name {
        "zero" => zero_vector,
        "example1" => example1_control,
        "example2" => example2_control,
        "example3" => example3_control,
        "bubble-curl" => bubble_curl,
        _ => return None,
    })
}

/// Fourth-order central difference of a scalar function along `dir`.
fn diff(g: &dyn Fn([f64; 2]) -> f64, x: [f64; 2], dir: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut y = x;
        y[dir] += s * h;
        g(y)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

/// Body force for which `(u, p)` satisfies the momentum equation in the
/// interior when `u` is divergence free:
/// `-mu lap u + (u . grad) u + alpha u + beta |u|^(r-1) u + kappa |u|^(q-1) u + grad p`.
/// Derivatives are fourth-order finite differences of the analytic fields.
pub fn manufactured_force(params: &ModelParams, u: VectorField, p: ScalarField, x: [f64; 2]) -> [f64; 2] {
    let h = 1e-3;
    let uv = u(x);
    let m = uv[0].hypot(uv[1]);
    let pow = |s: f64| if s == 1.0 { 1.0 } else { m.powf(s - 1.0) };
    let mut out = [0.0; 2];
    for c in 0..2 {
        let comp = |y: [f64; 2]| u(y)[c];
        let dcomp = |d: usize| move |y: [f64; 2]| diff(&comp, y, d, h);
        let lap: f64 = (0..2).map(|d| diff(&dcomp(d), x, d, h)).sum();
        let conv: f64 = (0..2).map(|d| uv[d] * diff(&comp, x, d, h)).sum();
        out[c] = -params.mu * lap
            + conv
            + params.alpha * uv[c]
            + params.beta * pow(params.r) * uv[c]
            + params.kappa * pow(params.q) * uv[c]
            + diff(&p, x, c, h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_rows() {
        let e1 = example(1).unwrap();
        assert_eq!((e1.params.mu, e1.a, e1.b, e1.rho, e1.eta), (1.2, 1.55, 1.53, 3.0, 1.0));
        assert_eq!((e1.weights.alpha1, e1.weights.alpha2, e1.weights.alpha3), (1.0, 1.2, 0.2));
        let e2 = example(2).unwrap();
        assert_eq!((e2.params.alpha, e2.params.beta, e2.params.r, e2.eta), (1.5, 1.0, 3.0, 2.0));
        let e3 = example(3).unwrap();
        assert_eq!((e3.params.kappa, e3.params.r, e3.params.q), (-0.5, 3.0, 1.5));
        assert_eq!((e3.a, e3.b, e3.rho, e3.eta), (3.25, 3.20, 0.5, 0.1));
        assert!(example(4).is_none());
        for id in 1..=3 {
            let e = example(id).unwrap();
            e.params.validate().unwrap();
            assert!(velocity_field(e.u_d).is_some() && pressure_field(e.p_d).is_some() && control_field(e.f0).is_some());
        }
    }

    #[test]
    fn example3_velocity_is_solenoidal_and_vanishes_on_boundary() {
        let f = example3_velocity;
        for &x in &[[0.3, 0.7], [0.11, 0.52], [0.9, 0.05]] {
            let ux = |y: [f64; 2]| f(y)[0];
            let uy = |y: [f64; 2]| f(y)[1];
            assert!((diff(&ux, x, 0, 1e-3) + diff(&uy, x, 1, 1e-3)).abs() < 1e-8);
        }
        for t in [0.0, 0.25, 0.6, 1.0] {
            for p in [[t, 0.0], [t, 1.0], [0.0, t], [1.0, t]] {
                let v = f(p);
                assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn manufactured_force_of_linear_stokes_flow() {
        // u = (y, 0), p = x: -lap u = 0, (u . grad) u = 0, grad p = (1, 0)
        fn u(p: [f64; 2]) -> [f64; 2] {
            [p[1], 0.0]
        }
        fn p(x: [f64; 2]) -> f64 {
            x[0]
        }
        let params = ModelParams { alpha: 2.0, ..Default::default() };
        let f = manufactured_force(&params, u, p, [0.3, 0.4]);
        assert!((f[0] - (1.0 + 0.8)).abs() < 1e-9 && f[1].abs() < 1e-9);
        // Kovasznay-like check of the Laplacian on a quadratic field
        fn q(p: [f64; 2]) -> [f64; 2] {
            [p[1] * p[1], 0.0]
        }
        let f = manufactured_force(&ModelParams::default(), q, |_| 0.0, [0.5, 0.5]);
        assert!((f[0] + 2.0).abs() < 1e-7, "{f:?}");
    }
}
