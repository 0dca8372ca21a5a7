use std::time::Instant;

use anyhow::Result;
use douba::measures::io::write_measure;
use serde::Serialize;

use super::{certified, elapsed_ms, solve_grid};
use crate::config::{self, BarycenterConfig};
use crate::output::{f, opt, write_csv, write_json};
use crate::{Outcome, RunArgs};

#[derive(Debug, Serialize)]
pub struct Summary {
    pub objective: f64,
    pub certificate_upper: f64,
    pub iterations: usize,
    pub wall_time_ms: u64,
    pub converged: bool,
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let cfg: BarycenterConfig = config::load(&args.config)?;
    let marginals = config::read_marginals(args, &cfg.marginals, "marginals")?;
    let grid = config::grid_for(&cfg.grid, &marginals, "marginals")?;
    let problem = config::problem(marginals, cfg.weights.clone(), cfg.lambda, cfg.tau, grid.domain().clone())?;
    cfg.solver.validate()?;
    let out = config::output_dir(args, &cfg.output_dir)?;
    let start = Instant::now();
    let sol = solve_grid(&problem, &grid, &cfg.solver, args.trace)?;
    let wall_time_ms = elapsed_ms(start);
    write_measure(&out.join("barycenter.csv"), &sol.barycenter)?;
    if args.trace {
        write_csv(
            &out.join("trace.csv"),
            &["iter", "objective", "grad_norm", "certificate_upper"],
            sol.trace.iter().map(|r| vec![r.iter.to_string(), f(r.objective), f(r.grad_norm), opt(r.certificate_upper)]),
        )?;
    }
    let summary = Summary {
        objective: sol.state.objective,
        certificate_upper: sol.certificate_upper,
        iterations: sol.iterations,
        wall_time_ms,
        converged: sol.converged,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(if certified(&sol, &cfg.solver) {
        Outcome::Certified
    } else if !sol.converged {
        Outcome::Flagged(format!("solver stopped after {} iterations without converging", sol.iterations))
    } else {
        Outcome::Flagged(format!(
            "certificate upper bound {:e} exceeds certificate_tol {:e}",
            sol.certificate_upper, cfg.solver.certificate_tol
        ))
    })
}
