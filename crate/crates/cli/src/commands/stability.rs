use std::time::Instant;

use anyhow::{bail, Context, Result};
use douba::measures::{perturb, relative_entropy, wasserstein1_1d};
use serde::Serialize;

use super::{derive_seed, elapsed_ms, solve_grid};
use crate::config::{self, StabilityConfig};
use crate::output::{f, write_csv, write_json};
use crate::{Outcome, RunArgs};

#[derive(Debug, Serialize)]
pub struct Probe {
    pub delta: f64,
    pub w1_sum: f64,
    pub kl: f64,
    pub bound: f64,
    pub violated: bool,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    /// `exact_1d` or `displacement_upper_bound`.
    pub w1_method: &'static str,
    /// Lipschitz constant of `c(x, ·)` on the box, its diameter for `½‖x - y‖²`.
    pub lipschitz: f64,
    /// Slack granted to the comparison for solver error.
    pub tolerance: f64,
    pub probes: Vec<Probe>,
    pub violations: usize,
    pub wall_time_ms: u64,
    pub converged: bool,
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let cfg: StabilityConfig = config::load(&args.config)?;
    let marginals = config::read_marginals(args, &cfg.marginals, "marginals")?;
    let grid = config::grid_for(&cfg.grid, &marginals, "marginals")?;
    let domain = grid.domain().clone();
    let problem = config::problem(marginals.clone(), cfg.weights.clone(), cfg.lambda, cfg.tau, domain.clone())?;
    config::positive("tau", cfg.tau)?;
    if cfg.deltas.is_empty() {
        bail!("`deltas` must list at least one displacement");
    }
    cfg.solver.validate()?;
    let out = config::output_dir(args, &cfg.output_dir)?;
    let exact = domain.dim() == 1;
    let lipschitz = domain.diameter();
    let tolerance = 10.0 * cfg.solver.tol;
    let start = Instant::now();
    let base = solve_grid(&problem, &grid, &cfg.solver, false).context("unperturbed barycenter")?;
    let mut converged = base.converged;
    let mut probes = Vec::with_capacity(cfg.deltas.len());
    for (i, &delta) in cfg.deltas.iter().enumerate() {
        let mut w1_sum = 0.0;
        let mut moved = Vec::with_capacity(marginals.len());
        for (k, (m, w)) in marginals.iter().zip(&problem.weights).enumerate() {
            let (p, displacement) = perturb(m, delta, &domain, derive_seed(cfg.seed, &[i as u64, k as u64]))
                .with_context(|| format!("`deltas[{i}]`"))?;
            let w1 = if exact { wasserstein1_1d(m, &p)? } else { displacement };
            w1_sum += w * w1;
            moved.push(p);
        }
        let sol = solve_grid(&problem.with_marginals(moved)?, &grid, &cfg.solver, false)
            .with_context(|| format!("perturbed barycenter for delta = {delta}"))?;
        converged &= sol.converged;
        let kl = relative_entropy(&sol.barycenter, &base.barycenter)?;
        let bound = 2.0 * lipschitz / cfg.tau * w1_sum;
        probes.push(Probe { delta, w1_sum, kl, bound, violated: kl > bound + tolerance });
    }
    let wall_time_ms = elapsed_ms(start);
    write_csv(&out.join("stability.csv"), &["delta", "w1_sum", "kl"], probes.iter().map(|p| vec![f(p.delta), f(p.w1_sum), f(p.kl)]))?;
    let violations = probes.iter().filter(|p| p.violated).count();
    write_json(
        &out.join("summary.json"),
        &Summary {
            w1_method: if exact { "exact_1d" } else { "displacement_upper_bound" },
            lipschitz,
            tolerance,
            probes,
            violations,
            wall_time_ms,
            converged,
        },
    )?;
    Ok(if violations > 0 {
        Outcome::Flagged(format!("{violations} probes violate the W1 stability bound"))
    } else if !converged {
        Outcome::Flagged("some barycenter solves did not converge".into())
    } else {
        Outcome::Certified
    })
}
