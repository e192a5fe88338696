//! TOML experiment configuration. Keys mirror the setup-table names
//! (`mu`, `alpha`, `beta`, `kappa`, `r`, `q`, `a`, `b`, `rho`, `eta`,
//! `alpha1`..`alpha3`); an `example` key preloads a catalog row which the
//! remaining keys override.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::catalog::{self, ExampleSetup};
use crate::error::{Error, Result};
use crate::forms::ModelParams;
use crate::friction::{SlipLaw, DEFAULT_EPS_REG};
use crate::optimize::{CostKind, CostWeights, GradientMode, OptConfig, ScalarField, StepSchedule, Targets, VectorField};
use crate::solver::{SolverConfig, Strategy};

/// Default mesh family: four study meshes and the reference mesh.
pub const DEFAULT_MESHES: [usize; 5] = [4, 8, 12, 16, 25];

/// Raw configuration file contents; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub example: Option<u8>,
    pub mu: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub r: Option<f64>,
    pub q: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub rho: Option<f64>,
    pub eta: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub alpha3: Option<f64>,
    /// Named catalog fields.
    pub u_d: Option<String>,
    pub p_d: Option<String>,
    pub f0: Option<String>,
    /// Ascending mesh list; the last entry is the reference mesh.
    pub mesh_n: Option<Vec<usize>>,
    pub eps_hvi: Option<f64>,
    pub eps_reg: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_newton: Option<usize>,
    pub uzawa_sweeps: Option<usize>,
    pub strategy: Option<Strategy>,
    pub tau: Option<f64>,
    pub delta_fd: Option<f64>,
    pub eps_opt: Option<f64>,
    pub max_iter: Option<usize>,
    pub cost: Option<CostKind>,
    /// `hybrid`, `pure-fd` or `subset`.
    pub gradient: Option<String>,
    pub subset_fraction: Option<f64>,
    pub schedule: Option<StepSchedule>,
    pub check_energy: Option<bool>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn for_example(id: u8) -> Self {
        Self {
            example: Some(id),
            ..Default::default()
        }
    }

    /// Validates the configuration and fills every unset key.
    pub fn resolve(&self) -> Result<Experiment> {
        let base: Option<ExampleSetup> = match self.example {
            Some(id) => Some(catalog::example(id).ok_or_else(|| Error::Config(format!("unknown example {id}")))?),
            None => None,
        };
        let need = |v: Option<f64>, from: Option<f64>, key: &str| -> Result<f64> {
            v.or(from)
                .ok_or_else(|| Error::Config(format!("`{key}` is required without `example`")))
        };
        let defaults = ModelParams::default();
        let params = ModelParams {
            mu: need(self.mu, base.map(|b| b.params.mu), "mu")?,
            alpha: self.alpha.or(base.map(|b| b.params.alpha)).unwrap_or(defaults.alpha),
            beta: self.beta.or(base.map(|b| b.params.beta)).unwrap_or(defaults.beta),
            kappa: self.kappa.or(base.map(|b| b.params.kappa)).unwrap_or(defaults.kappa),
            r: self.r.or(base.map(|b| b.params.r)).unwrap_or(defaults.r),
            q: self.q.or(base.map(|b| b.params.q)).unwrap_or(defaults.q),
        };
        params.validate().map_err(|e| Error::Config(e.to_string()))?;
        let eps_reg = self.eps_reg.unwrap_or(DEFAULT_EPS_REG);
        let law = SlipLaw::new(
            need(self.a, base.map(|b| b.a), "a")?,
            need(self.b, base.map(|b| b.b), "b")?,
            need(self.rho, base.map(|b| b.rho), "rho")?,
            eps_reg,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let weights = CostWeights {
            alpha1: need(self.alpha1, base.map(|b| b.weights.alpha1), "alpha1")?,
            alpha2: need(self.alpha2, base.map(|b| b.weights.alpha2), "alpha2")?,
            alpha3: need(self.alpha3, base.map(|b| b.weights.alpha3), "alpha3")?,
        };
        weights.validate().map_err(|e| Error::Config(e.to_string()))?;

        let name = |v: &Option<String>, from: Option<&'static str>, key: &str| -> Result<String> {
            v.clone()
                .or(from.map(String::from))
                .ok_or_else(|| Error::Config(format!("`{key}` is required without `example`")))
        };
        let u_d_name = name(&self.u_d, base.map(|b| b.u_d), "u_d")?;
        let p_d_name = name(&self.p_d, base.map(|b| b.p_d), "p_d")?;
        let f0_name = name(&self.f0, base.map(|b| b.f0), "f0")?;
        let unknown = |k: &str, n: &str| Error::Config(format!("unknown {k} field `{n}`"));
        let u_d: VectorField = catalog::velocity_field(&u_d_name).ok_or_else(|| unknown("velocity", &u_d_name))?;
        let p_d: ScalarField = catalog::pressure_field(&p_d_name).ok_or_else(|| unknown("pressure", &p_d_name))?;
        let f0: VectorField = catalog::control_field(&f0_name).ok_or_else(|| unknown("control", &f0_name))?;

        let meshes = self.mesh_n.clone().unwrap_or_else(|| DEFAULT_MESHES.to_vec());
        if meshes.is_empty() || meshes.contains(&0) {
            return Err(Error::Config("mesh list must contain positive sizes".into()));
        }
        if meshes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("mesh list must be strictly ascending".into()));
        }

        let solver_defaults = SolverConfig::default();
        let solver = SolverConfig {
            eps_hvi: self.eps_hvi.unwrap_or(solver_defaults.eps_hvi),
            eta: need(self.eta, base.map(|b| b.eta), "eta")?,
            max_outer: self.max_outer.unwrap_or(solver_defaults.max_outer),
            max_newton: self.max_newton.unwrap_or(solver_defaults.max_newton),
            uzawa_sweeps: self.uzawa_sweeps.unwrap_or(solver_defaults.uzawa_sweeps),
            eps_reg,
            strategy: self.strategy.unwrap_or(solver_defaults.strategy),
        };
        solver.validate().map_err(|e| Error::Config(e.to_string()))?;

        let seed = self.seed.unwrap_or(0);
        let gradient = match self.gradient.as_deref().unwrap_or("hybrid") {
            "hybrid" => GradientMode::Hybrid,
            "pure-fd" => GradientMode::PureFd,
            "subset" => GradientMode::Subset {
                fraction: self.subset_fraction.unwrap_or(0.1),
                seed,
            },
            other => return Err(Error::Config(format!("unknown gradient mode `{other}`"))),
        };
        let od = OptConfig::default();
        let opt = OptConfig {
            tau: self.tau.unwrap_or(od.tau),
            delta_fd: self.delta_fd.unwrap_or(od.delta_fd),
            eps_opt: self.eps_opt.unwrap_or(od.eps_opt),
            max_iter: self.max_iter.unwrap_or(od.max_iter),
            cost_kind: self.cost.unwrap_or(od.cost_kind),
            gradient,
            schedule: self.schedule.unwrap_or(od.schedule),
            check_energy: self.check_energy.unwrap_or(od.check_energy),
        };
        opt.validate().map_err(|e| Error::Config(e.to_string()))?;

        let label = match self.example {
            Some(id) => format!("example{id}"),
            None => "custom".to_string(),
        };
        Ok(Experiment {
            label: label.clone(),
            params,
            law,
            weights,
            targets: Targets { u_d, p_d },
            target_names: (u_d_name, p_d_name),
            f0,
            f0_name,
            meshes,
            solver,
            opt,
            seed,
            out: self.out.clone().unwrap_or_else(|| PathBuf::from("out").join(label)),
        })
    }
}

/// Fully resolved experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub label: String,
    pub params: ModelParams,
    pub law: SlipLaw,
    pub weights: CostWeights,
    pub targets: Targets,
    pub target_names: (String, String),
    pub f0: VectorField,
    pub f0_name: String,
    pub meshes: Vec<usize>,
    pub solver: SolverConfig,
    pub opt: OptConfig,
    pub seed: u64,
    pub out: PathBuf,
}

impl Experiment {
    /// Resolved experiment for a catalog example with default settings.
    pub fn example(id: u8) -> Result<Self> {
        ExperimentConfig::for_example(id).resolve()
    }

    pub fn reference_n(&self) -> usize {
        *self.meshes.last().expect("mesh list is non-empty")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_with_overrides() {
        let cfg = ExperimentConfig::from_toml("example = 2\nmu = 2.5\nmesh_n = [4, 8]\ntau = 0.05\n").unwrap();
        let exp = cfg.resolve().unwrap();
        assert_eq!(exp.params.mu, 2.5);
        assert_eq!(exp.params.alpha, 1.5);
        assert_eq!(exp.solver.eta, 2.0);
        assert_eq!(exp.opt.tau, 0.05);
        assert_eq!(exp.reference_n(), 8);
        assert_eq!(exp.weights.alpha3, 0.5);
    }

    #[test]
    fn explicit_configuration() {
        let text = r#"
            mu = 1.0
            a = 2.0
            b = 1.0
            rho = 1.0
            eta = 1.0
            alpha1 = 1.0
            alpha2 = 0.0
            alpha3 = 0.1
            u_d = "example3"
            p_d = "zero"
            f0 = "zero"
            gradient = "subset"
            subset_fraction = 0.5
            seed = 7
        "#;
        let exp = ExperimentConfig::from_toml(text).unwrap().resolve().unwrap();
        assert_eq!(exp.label, "custom");
        assert_eq!(exp.opt.gradient, GradientMode::Subset { fraction: 0.5, seed: 7 });
        assert_eq!(exp.meshes, DEFAULT_MESHES.to_vec());
    }

    #[test]
    fn rejects_bad_configurations() {
        for text in [
            "example = 9",
            "mu = 1.0",
            "example = 1\nmesh_n = [8, 4]",
            "example = 1\nu_d = \"nope\"",
            "example = 1\nunknown_key = 3",
            "example = 1\nmu = -1.0",
            "example = 1\ngradient = \"adjoint\"",
        ] {
            let r = ExperimentConfig::from_toml(text).and_then(|c| c.resolve());
            assert!(matches!(r, Err(Error::Config(_))), "{text}");
        }
    }
}
