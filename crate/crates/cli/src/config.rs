//! JSON configurations. Every struct rejects unknown keys; relative paths are
//! taken relative to the directory holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use douba::barycenter_grid::{AlternatingOptions, AscentOptions};
use douba::eot::SinkhornOptions;
use douba::measures::io::read_measure;
use douba::{BarycenterProblem, BoxDomain, Cost, DiscreteMeasure, Grid};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::{config_dir, RunArgs};

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
}

/// Resolves `p` against the config directory unless it is absolute.
pub fn resolve(args: &RunArgs, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_dir(&args.config).join(p)
    }
}

/// `--out` if given, else the config's `output_dir` resolved like any other path.
pub fn output_dir(args: &RunArgs, configured: &Path) -> Result<PathBuf> {
    let dir = match &args.out {
        Some(d) => d.clone(),
        None => resolve(args, configured),
    };
    fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

pub fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

pub fn read_marginals(args: &RunArgs, paths: &[PathBuf], key: &str) -> Result<Vec<DiscreteMeasure>> {
    if paths.is_empty() {
        bail!("`{key}` must list at least one file");
    }
    paths
        .iter()
        .map(|p| {
            let full = resolve(args, p);
            read_measure(&full).with_context(|| format!("`{key}`: cannot load {}", full.display()))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SinkhornConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        SinkhornConfig { tol: default_tol(), max_iter: default_max_iter() }
    }
}

impl SinkhornConfig {
    pub fn options(&self) -> Result<SinkhornOptions> {
        positive("sinkhorn.tol", self.tol)?;
        if self.max_iter == 0 {
            bail!("`sinkhorn.max_iter` must be at least 1");
        }
        Ok(SinkhornOptions::new(self.tol, self.max_iter))
    }
}

fn default_tol() -> f64 {
    1e-9
}

fn default_max_iter() -> usize {
    100_000
}

fn default_certificate_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        let domain = BoxDomain::new(self.lo.clone(), self.hi.clone()).context("`grid`")?;
        Grid::new(domain, self.cells.clone()).context("`grid`")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl DomainConfig {
    pub fn build(&self) -> Result<BoxDomain> {
        BoxDomain::new(self.lo.clone(), self.hi.clone()).context("`domain`")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    #[default]
    DualAscent,
    Alternating,
}

/// Grid-solver settings shared by the barycenter, rate-study and
/// stability-probe commands.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default)]
    pub kind: SolverKind,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "yes")]
    pub preconditioned: bool,
    #[serde(default)]
    pub certificate_every: usize,
    #[serde(default = "default_certificate_tol")]
    pub certificate_tol: f64,
    #[serde(default)]
    pub sinkhorn: SinkhornConfig,
}

fn yes() -> bool {
    true
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: SolverKind::default(),
            tol: default_tol(),
            max_iter: default_max_iter(),
            step: None,
            preconditioned: true,
            certificate_every: 0,
            certificate_tol: default_certificate_tol(),
            sinkhorn: SinkhornConfig::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        positive("solver.tol", self.tol)?;
        positive("solver.certificate_tol", self.certificate_tol)?;
        if let Some(s) = self.step {
            positive("solver.step", s)?;
        }
        if self.max_iter == 0 {
            bail!("`solver.max_iter` must be at least 1");
        }
        self.sinkhorn.options()?;
        Ok(())
    }

    pub fn ascent(&self, record_trace: bool) -> Result<AscentOptions> {
        self.validate()?;
        Ok(AscentOptions {
            step: self.step,
            tol: self.tol,
            max_iter: self.max_iter,
            preconditioned: self.preconditioned,
            certificate_every: self.certificate_every,
            record_trace,
            sinkhorn: self.sinkhorn.options()?,
        })
    }

    pub fn alternating(&self) -> Result<AlternatingOptions> {
        self.validate()?;
        Ok(AlternatingOptions { tol: self.tol, max_iter: self.max_iter, sinkhorn: self.sinkhorn.options()? })
    }
}

pub fn positive(key: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        bail!("`{key}` = {v} must be positive and finite");
    }
    Ok(())
}

/// Grid from the config if present, otherwise from the first marginal's sidecar.
pub fn grid_for(grid: &Option<GridConfig>, marginals: &[DiscreteMeasure], key: &str) -> Result<Grid> {
    match grid {
        Some(g) => g.build(),
        None => match marginals.first().and_then(|m| m.grid()) {
            Some(g) => Ok(g.clone()),
            None => bail!("`grid` is missing and the first entry of `{key}` has no grid sidecar"),
        },
    }
}

pub fn problem(
    marginals: Vec<DiscreteMeasure>,
    weights: Option<Vec<f64>>,
    lambda: f64,
    tau: f64,
    domain: BoxDomain,
) -> Result<BarycenterProblem> {
    positive("lambda", lambda)?;
    if !(tau.is_finite() && tau >= 0.0) {
        bail!("`tau` = {tau} must be nonnegative and finite");
    }
    let k = marginals.len();
    let weights = weights.unwrap_or_else(|| vec![1.0 / k as f64; k]);
    if weights.len() != k {
        bail!("`weights` has {} entries for {k} marginals", weights.len());
    }
    BarycenterProblem::new(marginals, weights, lambda, tau, Cost::SquaredHalf, domain).context("`marginals`/`weights`")
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarycenterConfig {
    pub marginals: Vec<PathBuf>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub lambda: f64,
    pub tau: f64,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub cells: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NpgdFileConfig {
    pub marginals: Vec<PathBuf>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub lambda: f64,
    pub tau: f64,
    pub domain: DomainConfig,
    pub init: PathBuf,
    pub particles: usize,
    pub eta: f64,
    pub iterations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sinkhorn: SinkhornConfig,
    #[serde(default)]
    pub diagnostics: Option<DiagnosticsConfig>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateStudyConfig {
    pub population: Vec<PathBuf>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub lambda: f64,
    pub tau: f64,
    pub n: Vec<usize>,
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl AxisConfig {
    pub fn values(&self, key: &str) -> Result<Vec<f64>> {
        if !(self.min.is_finite() && self.max.is_finite() && self.min >= 0.0 && self.max >= self.min) {
            bail!("`{key}` needs 0 <= min <= max, got [{}, {}]", self.min, self.max);
        }
        match self.steps {
            0 => bail!("`{key}.steps` must be at least 1"),
            1 => Ok(vec![self.min]),
            s => Ok((0..s).map(|i| self.min + (self.max - self.min) * i as f64 / (s - 1) as f64).collect()),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianMapConfig {
    #[serde(default = "one")]
    pub a: f64,
    pub lambda: AxisConfig,
    pub tau: AxisConfig,
    #[serde(default)]
    pub svg: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub marginals: Vec<PathBuf>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    pub lambda: f64,
    pub tau: f64,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EotConfig {
    pub mu: PathBuf,
    pub nu: PathBuf,
    pub lambda: f64,
    #[serde(default)]
    pub sinkhorn: SinkhornConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}
