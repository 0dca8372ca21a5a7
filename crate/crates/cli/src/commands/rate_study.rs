use std::time::Instant;

use anyhow::{bail, Context, Result};
use douba::gaussian::log_log_slope;
use douba::measures::{relative_entropy, sample};
use rayon::prelude::*;
use serde::Serialize;

use super::{derive_seed, elapsed_ms, solve_grid};
use crate::config::{self, RateStudyConfig};
use crate::output::{f, write_csv, write_json};
use crate::{Outcome, RunArgs};

#[derive(Debug, Serialize)]
pub struct MeanKl {
    pub n: usize,
    pub mean_kl: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    /// Least-squares slope of `log mean_kl` against `log n`.
    pub slope: f64,
    pub means: Vec<MeanKl>,
    pub population_iterations: usize,
    pub unconverged_solves: usize,
    pub wall_time_ms: u64,
    pub converged: bool,
}

pub struct Trial {
    pub n: usize,
    pub trial: usize,
    pub kl: f64,
    pub converged: bool,
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let cfg: RateStudyConfig = config::load(&args.config)?;
    let population = config::read_marginals(args, &cfg.population, "population")?;
    let grid = match population[0].grid() {
        Some(g) => g.clone(),
        None => bail!("`population` entries must be grid measures with a sidecar"),
    };
    let problem = config::problem(population.clone(), cfg.weights.clone(), cfg.lambda, cfg.tau, grid.domain().clone())?;
    if cfg.n.is_empty() || cfg.n.contains(&0) {
        bail!("`n` must be a nonempty list of positive sample sizes");
    }
    if cfg.trials == 0 {
        bail!("`trials` must be at least 1");
    }
    cfg.solver.validate()?;
    let out = config::output_dir(args, &cfg.output_dir)?;
    let start = Instant::now();
    let star = solve_grid(&problem, &grid, &cfg.solver, false).context("population barycenter")?;
    let jobs: Vec<(usize, usize)> = cfg.n.iter().flat_map(|&n| (0..cfg.trials).map(move |t| (n, t))).collect();
    let trials: Vec<Trial> = jobs
        .par_iter()
        .map(|&(n, trial)| -> Result<Trial> {
            let empirical = population
                .iter()
                .enumerate()
                .map(|(k, p)| sample(p, n, derive_seed(cfg.seed, &[n as u64, trial as u64, k as u64])))
                .collect::<douba::Result<Vec<_>>>()?;
            let sol = solve_grid(&problem.with_marginals(empirical)?, &grid, &cfg.solver, false)
                .with_context(|| format!("empirical barycenter n = {n}, trial = {trial}"))?;
            let kl = relative_entropy(&sol.barycenter, &star.barycenter)?;
            Ok(Trial { n, trial, kl, converged: sol.converged })
        })
        .collect::<Result<_>>()?;
    let wall_time_ms = elapsed_ms(start);
    write_csv(&out.join("rate.csv"), &["n", "trial", "kl"], trials.iter().map(|t| vec![t.n.to_string(), t.trial.to_string(), f(t.kl)]))?;
    let means: Vec<MeanKl> = cfg
        .n
        .iter()
        .map(|&n| {
            let kls: Vec<f64> = trials.iter().filter(|t| t.n == n).map(|t| t.kl).collect();
            MeanKl { n, mean_kl: kls.iter().sum::<f64>() / kls.len() as f64 }
        })
        .collect();
    let xs: Vec<f64> = means.iter().map(|m| m.n as f64).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.mean_kl).collect();
    let slope = if xs.len() >= 2 { log_log_slope(&xs, &ys) } else { f64::NAN };
    let unconverged = trials.iter().filter(|t| !t.converged).count() + usize::from(!star.converged);
    write_json(
        &out.join("summary.json"),
        &Summary {
            slope,
            means,
            population_iterations: star.iterations,
            unconverged_solves: unconverged,
            wall_time_ms,
            converged: unconverged == 0,
        },
    )?;
    Ok(if unconverged == 0 {
        Outcome::Certified
    } else {
        Outcome::Flagged(format!("{unconverged} barycenter solves did not converge"))
    })
}
