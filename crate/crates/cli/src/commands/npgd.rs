use std::time::Instant;

use anyhow::{bail, Context, Result};
use douba::measures::io::{read_measure, write_measure};
use douba::npgd::{npgd_run, smoothed_diagnostics, NpgdConfig, SmoothedDiagnostics};
use douba::Grid;
use serde::Serialize;

use super::elapsed_ms;
use crate::config::{self, NpgdFileConfig};
use crate::output::{f, write_csv, write_json};
use crate::{Outcome, RunArgs};

#[derive(Debug, Serialize)]
pub struct Diagnostics {
    pub entropy: f64,
    pub free_energy: f64,
    pub certificate_upper: f64,
}

impl From<SmoothedDiagnostics> for Diagnostics {
    fn from(d: SmoothedDiagnostics) -> Self {
        Diagnostics { entropy: d.entropy, free_energy: d.free_energy, certificate_upper: d.certificate_upper }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub iterations: usize,
    pub particles: usize,
    pub g_lambda_final: Option<f64>,
    pub eot_unconverged_steps: usize,
    pub initial: Option<Diagnostics>,
    #[serde(rename = "final")]
    pub last: Option<Diagnostics>,
    pub wall_time_ms: u64,
    pub converged: bool,
}

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let cfg: NpgdFileConfig = config::load(&args.config)?;
    let domain = cfg.domain.build()?;
    let marginals = config::read_marginals(args, &cfg.marginals, "marginals")?;
    let problem = config::problem(marginals, cfg.weights.clone(), cfg.lambda, cfg.tau, domain.clone())?;
    let init_path = config::resolve(args, &cfg.init);
    let init = read_measure(&init_path).with_context(|| format!("`init`: cannot load {}", init_path.display()))?;
    if cfg.particles == 0 {
        bail!("`particles` must be at least 1");
    }
    if !(cfg.eta.is_finite() && cfg.eta >= 0.0) {
        bail!("`eta` = {} must be nonnegative and finite", cfg.eta);
    }
    let mut npgd = NpgdConfig::for_problem(&problem, cfg.particles, cfg.eta, cfg.iterations, cfg.seed, init);
    npgd.eot = cfg.sinkhorn.options()?;
    let diag_grid = match &cfg.diagnostics {
        Some(d) if cfg.tau > 0.0 && cfg.eta > 0.0 => Some(Grid::new(domain.clone(), d.cells.clone()).context("`diagnostics.cells`")?),
        _ => None,
    };
    let out = config::output_dir(args, &cfg.output_dir)?;
    let start = Instant::now();
    let run = npgd_run(&problem, &npgd, args.snapshot_every)?;
    let diagnose = |c| -> Result<Option<Diagnostics>> {
        match &diag_grid {
            Some(g) => Ok(Some(smoothed_diagnostics(c, &problem, g, cfg.eta, &npgd.eot)?.into())),
            None => Ok(None),
        }
    };
    let initial = diagnose(&run.initial)?;
    let last = diagnose(&run.cloud)?;
    let wall_time_ms = elapsed_ms(start);
    write_measure(&out.join("cloud.csv"), &run.cloud.measure())?;
    write_csv(
        &out.join("trace.csv"),
        &["iter", "G_lambda", "drift_sup", "mean_disp"],
        run.trace.iter().map(|r| vec![r.iter.to_string(), f(r.g_lambda), f(r.drift_sup), f(r.mean_disp)]),
    )?;
    for (it, cloud) in &run.snapshots {
        write_measure(&out.join(format!("snapshot_{it:06}.csv")), &cloud.measure())?;
    }
    let unconverged = run.trace.iter().filter(|r| !r.eot_converged).count();
    write_json(
        &out.join("summary.json"),
        &Summary {
            iterations: cfg.iterations,
            particles: cfg.particles,
            g_lambda_final: run.trace.last().map(|r| r.g_lambda),
            eot_unconverged_steps: unconverged,
            initial,
            last,
            wall_time_ms,
            converged: unconverged == 0,
        },
    )?;
    Ok(if unconverged == 0 {
        Outcome::Certified
    } else {
        Outcome::Flagged(format!("{unconverged} steps used EOT potentials that missed the Sinkhorn tolerance"))
    })
}
