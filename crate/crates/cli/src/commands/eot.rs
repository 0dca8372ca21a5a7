use std::time::Instant;

use anyhow::{Context, Result};
use douba::eot::{solve_eot, write_potentials};
use douba::measures::io::read_measure;
use douba::Cost;
use serde::Serialize;

use super::elapsed_ms;
use crate::config::{self, EotConfig};
use crate::output::write_json;
use crate::{Outcome, RunArgs};

#[derive(Debug, Serialize)]
pub struct Summary {
    pub cost: f64,
    pub marginal_error: f64,
    pub iterations: usize,
    pub wall_time_ms: u64,
    pub converged: bool,
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let cfg: EotConfig = config::load(&args.config)?;
    config::positive("lambda", cfg.lambda)?;
    let opts = cfg.sinkhorn.options()?;
    let load = |key: &str, p: &std::path::Path| {
        let full = config::resolve(args, p);
        read_measure(&full).with_context(|| format!("`{key}`: cannot load {}", full.display()))
    };
    let mu = load("mu", &cfg.mu)?;
    let nu = load("nu", &cfg.nu)?;
    let out = config::output_dir(args, &cfg.output_dir)?;
    let start = Instant::now();
    let sol = solve_eot(&mu, &nu, cfg.lambda, &Cost::SquaredHalf, &opts)?;
    let wall_time_ms = elapsed_ms(start);
    write_potentials(&out.join("phi.csv"), &sol.potentials.phi)?;
    write_potentials(&out.join("psi.csv"), &sol.potentials.psi)?;
    write_json(
        &out.join("summary.json"),
        &Summary {
            cost: sol.cost,
            marginal_error: sol.marginal_error,
            iterations: sol.iterations,
            wall_time_ms,
            converged: sol.converged,
        },
    )?;
    Ok(if sol.converged {
        Outcome::Certified
    } else {
        Outcome::Flagged(format!("Sinkhorn stopped after {} iterations, marginal error {:e}", sol.iterations, sol.marginal_error))
    })
}
