//! Command-line driver for the built-in experiments.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hvi_cbfed::experiment::{self, catalog, Experiment, ExperimentConfig, PERTURBATION_SIZES};
use hvi_cbfed::solver::conditions::AnalyticConstants;
use hvi_cbfed::verify::{self, VerifyConfig};
use hvi_cbfed::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Brinkman-Forchheimer flow with nonmonotone slip: state solves, optimal control, checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the state equation for the initial control on each mesh.
    SolveState(Common),
    /// Run the projected subgradient method on each mesh.
    Optimize(Common),
    /// Optimize on every mesh and tabulate errors against the finest one.
    ConvergenceStudy(Common),
    /// Evaluate existence, energy-bound and uniqueness conditions.
    CheckConditions(Common),
    /// Run the numerical oracle suite.
    Verify(Common),
    /// Perturb the manufactured forcing and measure the state deviation.
    PerturbationStudy(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in example (1, 2 or 3); overrides `example` in the config.
    #[arg(long)]
    example: Option<u8>,
    /// Comma-separated mesh sizes, ascending; the last is the reference.
    #[arg(long, value_delimiter = ',')]
    mesh_n: Option<Vec<usize>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled checks and the subset gradient mode.
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn experiment(&self, default_example: Option<u8>) -> Result<Experiment> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if self.example.is_some() {
            cfg.example = self.example;
        }
        if cfg.example.is_none() && self.config.is_none() {
            cfg.example = default_example;
        }
        if cfg.example.is_none() && self.config.is_none() {
            return Err(Error::Config("pass --example or --config".into()));
        }
        if self.mesh_n.is_some() {
            cfg.mesh_n = self.mesh_n.clone();
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        cfg.resolve()
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(create(path)?, value).map_err(|e| Error::Io(std::io::Error::other(e)))
}

fn solve_state(exp: &Experiment) -> Result<()> {
    for &n in &exp.meshes {
        let (space, f, state) = experiment::solve_initial_state(exp, n)?;
        let dir = exp.out.join(format!("n{n}"));
        state.write_residual_csv(create(&dir.join("residual_history.csv"))?)?;
        experiment::vtk::write_fields(&space, &state.u, &state.p, &f, create(&dir.join("state.vtk"))?)?;
        println!(
            "n = {n}: {} iterations, residual {:.3e}, |u|_V = {:.6e}, |p|_L2 = {:.6e}",
            state.iterations,
            state.final_residual(),
            space.velocity_v_norm(&state.u),
            space.pressure_l2_norm(&state.p)
        );
    }
    Ok(())
}

fn print_runs(runs: &[experiment::MeshRun]) {
    for run in runs {
        let s = experiment::MeshSummary::from(run);
        println!(
            "n = {}: {} iterations (stopped on eps_opt: {}), cost {:.6e} -> {:.6e}, last |df| = {}",
            s.n,
            s.iterations,
            s.converged,
            s.initial_cost,
            s.final_cost,
            s.last_control_change.map_or("-".into(), |c| format!("{c:.3e}"))
        );
    }
}

fn optimize(exp: &Experiment) -> Result<()> {
    let runs = experiment::run_example(exp)?;
    print_runs(&runs);
    println!("artifacts written to {}", exp.out.display());
    Ok(())
}

fn convergence_study(exp: &Experiment) -> Result<()> {
    let (table, runs) = experiment::convergence_study(exp)?;
    experiment::write_run_artifacts(&exp.out, &runs)?;
    let path = exp.out.join("convergence.csv");
    table.write_csv(create(&path)?)?;
    print_runs(&runs);
    table.write_csv(std::io::stdout().lock())?;
    println!("table written to {}", path.display());
    Ok(())
}

fn check_conditions(exp: &Experiment) -> Result<()> {
    let mut reports = Vec::new();
    for &n in &exp.meshes {
        let rep = experiment::condition_report(exp, n, &AnalyticConstants::default())?;
        println!(
            "n = {n}: lambda0 = {:.6e}, delta1 = {:.6e}, existence {} (margin {:.3e}), energy {:.6e} <= {:.6e}, uniqueness {}",
            rep.spectral.lambda0,
            rep.delta1.delta1,
            rep.existence.holds,
            rep.existence.margin,
            rep.energy_lhs,
            rep.energy_bound.k_tilde,
            if rep.uniqueness.any_holds() { "guaranteed" } else { "not guaranteed" }
        );
        reports.push(rep);
    }
    write_json(&exp.out.join("conditions.json"), &reports)?;
    let failed = reports
        .iter()
        .any(|r| !r.existence.holds || r.energy_lhs > r.energy_bound.k_tilde);
    if failed {
        return Err(Error::Verification("existence condition or energy bound violated".into()));
    }
    Ok(())
}

fn verify(exp: &Experiment, seed: Option<u64>) -> Result<()> {
    let cfg = VerifyConfig {
        seed: seed.unwrap_or(verify::DEFAULT_SEED),
        ..Default::default()
    };
    let report = verify::run_all(&cfg, &exp.law, catalog::example3_velocity)?;
    for c in &report.checks {
        println!(
            "{:<6} {:<34} margin {:>11.3e} (tol {:.0e}) {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.worst_margin,
            c.tolerance,
            c.location
        );
    }
    for (n, v) in &report.inf_sup {
        println!("inf-sup (P2/P1) n = {n}: {v:.6}");
    }
    for (n, v) in &report.inf_sup_p1p1 {
        println!("inf-sup (P1/P1) n = {n}: {v:.3e}");
    }
    let path = exp.out.join("verify_report.json");
    report.write_json(create(&path)?)?;
    if !report.all_pass {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        return Err(Error::Verification(names.join(", ")));
    }
    Ok(())
}

fn perturbation_study(exp: &Experiment) -> Result<()> {
    let n = exp.reference_n();
    let table = experiment::force_perturbation_study(exp, n, &PERTURBATION_SIZES)?;
    let path = exp.out.join("perturbation.csv");
    table.write_csv(create(&path)?)?;
    table.write_csv(std::io::stdout().lock())?;
    println!("monotone: {}, smallest reduction factor: {:.3}", table.velocity_monotone(), table.min_reduction());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SolveState(c) => solve_state(&c.experiment(None)?),
        Command::Optimize(c) => optimize(&c.experiment(None)?),
        Command::ConvergenceStudy(c) => convergence_study(&c.experiment(None)?),
        Command::CheckConditions(c) => check_conditions(&c.experiment(None)?),
        Command::Verify(c) => verify(&c.experiment(Some(1))?, c.seed),
        Command::PerturbationStudy(c) => perturbation_study(&c.experiment(Some(3))?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
