//! Analytic solvability conditions: smallness condition for existence, the
//! a priori energy bound, and the parameter conditions for uniqueness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::FeSpace;
use crate::forms::{assemble_a, ModelParams};
use crate::friction::{SlipLaw, SpectralConstants};
use crate::sparse::{dot, SparseLu};

/// Truth value of one inequality together with its slack (positive when it holds).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionOutcome {
    pub holds: bool,
    pub margin: f64,
}

impl ConditionOutcome {
    fn strict(margin: f64) -> Self {
        Self {
            holds: margin > 0.0,
            margin,
        }
    }

    fn non_strict(margin: f64) -> Self {
        Self {
            holds: margin >= 0.0,
            margin,
        }
    }

    fn and(self, other: Self) -> Self {
        Self {
            holds: self.holds && other.holds,
            margin: self.margin.min(other.margin),
        }
    }
}

/// Smallness condition `k1 < 2 mu lambda0` with the slip law's `k1`.
pub fn check_existence_condition(params: &ModelParams, law: &SlipLaw, spec: &SpectralConstants) -> ConditionOutcome {
    existence_condition(params.mu, law.k1(), spec.lambda0)
}

/// Smallness condition for explicit constants.
pub fn existence_condition(mu: f64, k1: f64, lambda0: f64) -> ConditionOutcome {
    ConditionOutcome::strict(2.0 * mu * lambda0 - k1)
}

/// Dual norm `sup (f, v) / ||v||_V` of a load vector over the constrained
/// discrete velocity space, `||v||_V = ||eps(v)||`.
pub fn dual_norm(space: &FeSpace, load: &[f64]) -> Result<f64> {
    let mut av = assemble_a(space);
    av.scale(0.5);
    let free = space.free_dofs();
    let map: Vec<Option<usize>> = (0..space.n_velocity()).map(|i| space.free_index(i)).collect();
    let af = av.submatrix(free, &map, free.len());
    let mut trip = Vec::new();
    af.push_triplets(0, 0, &mut trip);
    let lu = SparseLu::factor(free.len(), &trip)?;
    let rhs: Vec<f64> = free.iter().map(|&i| load[i]).collect();
    let x = lu.solve(&rhs)?;
    Ok(dot(&rhs, &x).max(0.0).sqrt())
}

/// Energy bound: `K_f` and `K~_f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBound {
    pub k_f: f64,
    pub k_tilde: f64,
    /// Whether `||u||^{r+1}_{L^{r+1}}` is part of the bounded quantity
    /// (only when `beta > 0`).
    pub includes_lr_term: bool,
}

/// Bound with the slip law's constants (`k0 = a`, `k1 = 0`) and `|Gamma1| = 1`.
pub fn energy_bound(params: &ModelParams, law: &SlipLaw, f_dual_norm: f64, spec: &SpectralConstants) -> Result<EnergyBound> {
    energy_bound_with(params, law.k0(), law.k1(), 1.0, f_dual_norm, spec.lambda0)
}

/// `K_f = (2mu - k1/lambda0)^{-1} (||f||_* + k0 |Gamma1|^{1/2} lambda0^{-1/2})^2 + |kappa|^{(r+1)/(r-q)}`
/// and `K~_f = 2 max{(2mu - k1/lambda0)^{-1}, 1/beta} K_f`. With `beta = 0`
/// the `1/beta` branch is dropped and only `||u||_V^2` is bounded.
pub fn energy_bound_with(
    params: &ModelParams,
    k0: f64,
    k1: f64,
    gamma1_measure: f64,
    f_dual_norm: f64,
    lambda0: f64,
) -> Result<EnergyBound> {
    let coercivity = 2.0 * params.mu - k1 / lambda0;
    if !(coercivity > 0.0) {
        return Err(Error::ConditionViolated(format!(
            "2 mu - k1/lambda0 = {coercivity} is not positive"
        )));
    }
    let pumping = if params.kappa == 0.0 {
        0.0
    } else {
        if params.r <= params.q {
            return Err(Error::ConditionViolated("pumping term requires r > q".into()));
        }
        params.kappa.abs().powf((params.r + 1.0) / (params.r - params.q))
    };
    let k_f = (f_dual_norm + k0 * gamma1_measure.sqrt() / lambda0.sqrt()).powi(2) / coercivity + pumping;
    let includes_lr_term = params.beta > 0.0;
    let factor = if includes_lr_term {
        (1.0 / coercivity).max(1.0 / params.beta)
    } else {
        1.0 / coercivity
    };
    Ok(EnergyBound {
        k_f,
        k_tilde: 2.0 * factor * k_f,
        includes_lr_term,
    })
}

/// Left-hand side of the energy bound for a discrete velocity.
pub fn energy_functional(space: &FeSpace, params: &ModelParams, u: &[f64]) -> f64 {
    let v = space.velocity_v_norm(u).powi(2);
    if params.beta > 0.0 {
        v + space.velocity_lp_power(u, params.r + 1.0)
    } else {
        v
    }
}

/// Reusable evaluator of the energy bound on one mesh: caches the
/// factorized strain form for dual norms and the trace constant.
#[derive(Debug)]
pub struct EnergyChecker {
    lu: SparseLu,
    params: ModelParams,
    law: SlipLaw,
    lambda0: f64,
}

/// Outcome of one energy-bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyCheck {
    pub lhs: f64,
    pub bound: EnergyBound,
    pub f_dual_norm: f64,
}

impl EnergyCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.bound.k_tilde
    }
}

impl EnergyChecker {
    pub fn new(space: &FeSpace, params: ModelParams, law: SlipLaw, spec: &SpectralConstants) -> Result<Self> {
        let mut av = assemble_a(space);
        av.scale(0.5);
        let free = space.free_dofs();
        let map: Vec<Option<usize>> = (0..space.n_velocity()).map(|i| space.free_index(i)).collect();
        let mut trip = Vec::new();
        av.submatrix(free, &map, free.len()).push_triplets(0, 0, &mut trip);
        Ok(Self {
            lu: SparseLu::factor(free.len(), &trip)?,
            params,
            law,
            lambda0: spec.lambda0,
        })
    }

    pub fn dual_norm(&self, space: &FeSpace, load: &[f64]) -> Result<f64> {
        let rhs: Vec<f64> = space.free_dofs().iter().map(|&i| load[i]).collect();
        let x = self.lu.solve(&rhs)?;
        Ok(dot(&rhs, &x).max(0.0).sqrt())
    }

    /// Evaluates both sides of the bound for the state `u` driven by `load`.
    pub fn check(&self, space: &FeSpace, load: &[f64], u: &[f64]) -> Result<EnergyCheck> {
        let f_dual_norm = self.dual_norm(space, load)?;
        let bound = energy_bound_with(&self.params, self.law.k0(), self.law.k1(), 1.0, f_dual_norm, self.lambda0)?;
        Ok(EnergyCheck {
            lhs: energy_functional(space, &self.params, u),
            bound,
            f_dual_norm,
        })
    }
}

/// Korn, Gagliardo-Nirenberg and Sobolev constants; none have known values
/// for this domain, so they are configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, serde::Deserialize)]
pub struct AnalyticConstants {
    pub c_k: Option<f64>,
    pub c_g: Option<f64>,
    pub c_s: Option<f64>,
}

impl AnalyticConstants {
    /// `C_b = C_k^3 C_g^2`.
    pub fn c_b(&self) -> Option<f64> {
        Some(self.c_k?.powi(3) * self.c_g?.powi(2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    pub r: f64,
    pub delta1: f64,
    pub lambda0: f64,
    /// `mu > delta1 / (2 lambda0)`.
    pub viscosity: ConditionOutcome,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3_r: Option<f64>,
    pub rho3_hat: Option<f64>,
    pub rho4_hat: Option<f64>,
    /// `r > 3`: viscosity and `alpha >= rho1 + rho2 + rho3_r`.
    pub large_r_primary: Option<ConditionOutcome>,
    /// `r > 3`: viscosity, `alpha >= rho1 + rho2 + rho3_hat` and `beta >= 4 rho3_hat`.
    pub large_r_alternative: Option<ConditionOutcome>,
    /// `r <= 3`: viscosity and `alpha > rho4_hat (C_g C_k)^4 K~^2 + rho1 + rho2`.
    pub small_r: Option<ConditionOutcome>,
    /// Branches that could not be evaluated, with the reason.
    pub unevaluated: Vec<String>,
    /// True when the verdict depends on user-supplied analytic constants.
    pub conditional: bool,
}

impl UniquenessReport {
    /// Whether any evaluated branch guarantees uniqueness.
    pub fn any_holds(&self) -> bool {
        [self.large_r_primary, self.large_r_alternative, self.small_r]
            .iter()
            .flatten()
            .any(|c| c.holds)
    }
}

/// `rho_{i,r}` for `i = 1, 2`; zero without pumping.
pub fn rho_i(params: &ModelParams, i: u32) -> f64 {
    let ModelParams { beta, kappa, r, q, .. } = *params;
    if kappa == 0.0 {
        return 0.0;
    }
    let base = 2.0 * f64::from(i) * (q - 1.0) / (beta * (r - 1.0));
    ((r - q) / (r - 1.0))
        * base.powf((q - 1.0) / (r - q))
        * (kappa.abs() * q * 2f64.powf(q - 1.0)).powf((r - 1.0) / (r - q))
}

/// Evaluates the uniqueness conditions. `k_tilde` is the energy bound for
/// the small-`r` branch.
pub fn check_uniqueness_conditions(
    params: &ModelParams,
    spec: &SpectralConstants,
    delta1: f64,
    constants: &AnalyticConstants,
    k_tilde: Option<f64>,
) -> UniquenessReport {
    let lambda0 = spec.lambda0;
    let ModelParams { mu, alpha, beta, r, .. } = *params;
    let coercivity = 2.0 * mu - delta1 / lambda0;
    let viscosity = ConditionOutcome::strict(mu - delta1 / (2.0 * lambda0));
    let rho1 = rho_i(params, 1);
    let rho2 = rho_i(params, 2);
    let mut unevaluated = Vec::new();
    let d = 2.0;

    let rho3_hat = constants.c_k.map(|ck| ck * ck / (2.0 * coercivity));
    let mut rho3_r = None;
    let mut large_r_primary = None;
    let mut large_r_alternative = None;
    let mut rho4_hat = None;
    let mut small_r = None;

    if r > 3.0 {
        match rho3_hat {
            Some(h) if beta > 0.0 => {
                let r3 = h.powf((r - 1.0) / (r - 3.0))
                    * ((r - 3.0) / (r - 1.0))
                    * (8.0 / (beta * (r - 1.0))).powf(2.0 / (r - 3.0));
                rho3_r = Some(r3);
                large_r_primary =
                    Some(viscosity.and(ConditionOutcome::non_strict(alpha - (rho1 + rho2 + r3))));
                large_r_alternative = Some(
                    viscosity
                        .and(ConditionOutcome::non_strict(alpha - (rho1 + rho2 + h)))
                        .and(ConditionOutcome::non_strict(beta - 4.0 * h)),
                );
            }
            Some(_) => unevaluated.push("r > 3 branches need beta > 0".to_string()),
            None => unevaluated.push("r > 3 branches need the Korn constant C_k".to_string()),
        }
    } else {
        match (constants.c_g, constants.c_k, k_tilde) {
            (Some(cg), Some(ck), Some(kt)) => {
                let e = 8.0 / (4.0 - d);
                let h4 = (cg * ck).powf(e) * e * ((4.0 + d) / (2.0 * coercivity)).powf((4.0 + d) / (4.0 - d));
                rho4_hat = Some(h4);
                let rhs = h4 * (cg * ck).powf(e) * kt.powf(4.0 / (4.0 - d)) + rho1 + rho2;
                small_r = Some(viscosity.and(ConditionOutcome::strict(alpha - rhs)));
            }
            (_, _, None) => unevaluated.push("r <= 3 branch needs the energy bound".to_string()),
            _ => unevaluated.push("r <= 3 branch needs C_g and C_k".to_string()),
        }
    }
    UniquenessReport {
        r,
        delta1,
        lambda0,
        viscosity,
        rho1,
        rho2,
        rho3_r,
        rho3_hat,
        rho4_hat,
        large_r_primary,
        large_r_alternative,
        small_r,
        unevaluated,
        conditional: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(lambda0: f64) -> SpectralConstants {
        SpectralConstants {
            lambda0,
            mesh_n: 0,
            eigenfunction: Vec::new(),
        }
    }

    #[test]
    fn existence_boundary_cases() {
        let law = SlipLaw::new(1.55, 1.53, 3.0, 1e-6).unwrap();
        let p = ModelParams::default();
        assert!(check_existence_condition(&p, &law, &spec(0.7)).holds);
        let (mu, l0) = (1.2, 0.8);
        assert!(!existence_condition(mu, 2.0 * mu * l0, l0).holds);
        let c = existence_condition(mu, mu * l0, l0);
        assert!(c.holds && (c.margin - mu * l0).abs() < 1e-15);
    }

    #[test]
    fn energy_bound_closed_forms() {
        let p = ModelParams {
            mu: 1.2,
            ..Default::default()
        };
        let b = energy_bound_with(&p, 1.55, 0.0, 1.0, 0.0, 0.5).unwrap();
        assert!((b.k_f - 1.55f64.powi(2) / 0.5 / 2.4).abs() < 1e-14);
        assert!(!b.includes_lr_term);
        let z = energy_bound_with(&p, 0.0, 0.0, 1.0, 0.0, 0.5).unwrap();
        assert_eq!(z.k_tilde, 0.0);
        assert!(energy_bound_with(&p, 1.0, 2.4 * 0.5, 1.0, 0.0, 0.5).is_err());
        let p3 = ModelParams {
            mu: 1.0,
            alpha: 0.5,
            beta: 1.0,
            kappa: -0.5,
            r: 3.0,
            q: 1.5,
        };
        let b3 = energy_bound_with(&p3, 3.25, 0.0, 1.0, 0.1, 1.0).unwrap();
        let kf = (0.1f64 + 3.25).powi(2) / 2.0 + 0.5f64.powf(4.0 / 1.5);
        assert!((b3.k_f - kf).abs() < 1e-13);
        assert!((b3.k_tilde - 2.0 * kf).abs() < 1e-13);
    }

    #[test]
    fn uniqueness_without_pumping() {
        let p = ModelParams {
            mu: 1.0,
            alpha: 1e9,
            beta: 1.0,
            kappa: 0.0,
            r: 4.0,
            q: 1.0,
        };
        assert_eq!(rho_i(&p, 1), 0.0);
        assert_eq!(rho_i(&p, 2), 0.0);
        let c = AnalyticConstants {
            c_k: Some(1.0),
            c_g: Some(1.0),
            c_s: None,
        };
        let rep = check_uniqueness_conditions(&p, &spec(1.0), 0.0, &c, None);
        assert!(rep.large_r_primary.unwrap().holds);
        assert!(rep.large_r_alternative.unwrap().holds);
        assert!(rep.any_holds());
        let partial = check_uniqueness_conditions(&p, &spec(1.0), 0.0, &AnalyticConstants::default(), None);
        assert!(partial.large_r_primary.is_none() && !partial.unevaluated.is_empty());
    }

    #[test]
    fn uniqueness_small_r_formula() {
        let p = ModelParams {
            mu: 1.0,
            alpha: 0.5,
            beta: 1.0,
            kappa: -0.5,
            r: 3.0,
            q: 1.5,
        };
        let c = AnalyticConstants {
            c_k: Some(1.0),
            c_g: Some(0.5),
            c_s: None,
        };
        let rep = check_uniqueness_conditions(&p, &spec(2.0), 0.01, &c, Some(0.3));
        let coerc: f64 = 2.0 - 0.01 / 2.0;
        let h4 = 0.5f64.powi(4) * 4.0 * (3.0f64 / coerc).powi(3);
        assert!((rep.rho4_hat.unwrap() - h4).abs() < 1e-14);
        let r1 = (1.5 / 2.0) * (2.0 * 0.5 / 2.0f64).powf(0.5 / 1.5) * (0.5 * 1.5 * 2f64.powf(0.5)).powf(2.0 / 1.5);
        assert!((rep.rho1 - r1).abs() < 1e-14);
        let rhs = h4 * 0.5f64.powi(4) * 0.09 + rep.rho1 + rep.rho2;
        assert!((rep.small_r.unwrap().margin - (0.5 - rhs).min(rep.viscosity.margin)).abs() < 1e-14);
        assert_eq!(c.c_b(), Some(0.25));
    }
}
