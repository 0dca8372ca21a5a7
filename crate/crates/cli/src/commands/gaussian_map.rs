use std::fs;

use anyhow::{Context, Result};
use douba::gaussian::{tau_star, w2_distance};
use rayon::prelude::*;

use crate::config::{self, GaussianMapConfig};
use crate::output::{f, heatmap_svg, write_csv};
use crate::{Outcome, RunArgs};

pub fn run(args: &RunArgs) -> Result<Outcome> {
    let cfg: GaussianMapConfig = config::load(&args.config)?;
    config::positive("a", cfg.a)?;
    let lambdas = cfg.lambda.values("lambda")?;
    let taus = cfg.tau.values("tau")?;
    let out = config::output_dir(args, &cfg.output_dir)?;
    let a = cfg.a;
    let values: Vec<Vec<f64>> = lambdas
        .par_iter()
        .map(|&l| taus.iter().map(|&t| w2_distance(a, l, t)).collect::<douba::Result<Vec<_>>>())
        .collect::<douba::Result<_>>()?;
    write_csv(
        &out.join("heatmap.csv"),
        &["lambda", "tau", "w2_distance"],
        lambdas.iter().zip(&values).flat_map(|(&l, row)| taus.iter().zip(row).map(move |(&t, &v)| vec![f(l), f(t), f(v)])),
    )?;
    let curve: Vec<(f64, f64, f64)> = lambdas
        .iter()
        .map(|&l| {
            let t = tau_star(a, l)?;
            Ok((l, t, w2_distance(a, l, t)?))
        })
        .collect::<douba::Result<_>>()?;
    write_csv(&out.join("tau_star.csv"), &["lambda", "tau_star", "w2_distance"], curve.iter().map(|&(l, t, d)| vec![f(l), f(t), f(d)]))?;
    if cfg.svg {
        let pts: Vec<(f64, f64)> = curve.iter().map(|&(l, t, _)| (l, t)).collect();
        let path = out.join("heatmap.svg");
        fs::write(&path, heatmap_svg(&lambdas, &taus, &values, &pts, "lambda", "tau")).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(Outcome::Certified)
}
