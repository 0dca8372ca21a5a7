//! Noisy particle gradient descent on `F_{λ,τ}`:
//!
//! ```text
//! X_i ← P_X(X_i - η ∇V[μ̂](X_i) + √(2ητ) Z_i),   μ̂ = (1/m) Σ_i δ_{X_i}
//! ```
//!
//! where `V[μ̂]` is the first variation of `G_λ` at the empirical measure,
//! `P_X` the projection onto the box and `Z_i` standard Gaussian vectors.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::function::erf::erfc;

use crate::barycenter_grid::suboptimality_certificate;
use crate::eot::{self, PotentialPair, SinkhornOptions};
use crate::lse::log_sum_exp;
use crate::measures::{entropy, sample_with};
use crate::{BarycenterProblem, BoxDomain, DiscreteMeasure, Error, Grid, Result};

/// `m` particles in a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud {
    positions: Array2<f64>,
    domain: BoxDomain,
    step_count: usize,
}

impl ParticleCloud {
    /// `positions` is `m × d`; every particle must lie in `domain`.
    pub fn new(positions: Array2<f64>, domain: BoxDomain) -> Result<Self> {
        if positions.nrows() == 0 {
            return Err(Error::invalid("a particle cloud needs at least one particle"));
        }
        if positions.ncols() != domain.dim() {
            return Err(Error::UnsupportedDimension { expected: domain.dim(), got: positions.ncols() });
        }
        let positions = positions.as_standard_layout().into_owned();
        for (i, row) in positions.outer_iter().enumerate() {
            let p = row.as_slice().expect("standard layout");
            if !domain.contains(p) {
                return Err(Error::invalid(format!("particle {i} at {p:?} lies outside the domain")));
            }
        }
        Ok(ParticleCloud { positions, domain, step_count: 0 })
    }

    /// The atoms of `m`, one particle each (weights are ignored).
    pub fn from_measure(m: &DiscreteMeasure, domain: BoxDomain) -> Result<Self> {
        let positions = Array2::from_shape_vec((m.len(), m.dim()), m.coords().to_vec())
            .map_err(|e| Error::invalid(e.to_string()))?;
        Self::new(positions, domain)
    }

    pub fn len(&self) -> usize {
        self.positions.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.positions.ncols()
    }

    pub fn positions(&self) -> &Array2<f64> {
        &self.positions
    }

    pub fn position(&self, i: usize) -> &[f64] {
        self.positions.row(i).to_slice().expect("standard layout")
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn step_count(&self) -> usize {
        self.step_count
    }

    /// `μ̂ = (1/m) Σ_i δ_{X_i}`.
    pub fn measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::uniform(self.dim(), self.positions.iter().copied().collect()).expect("nonempty cloud")
    }
}

#[derive(Debug, Clone)]
pub struct NpgdConfig {
    pub particle_count: usize,
    pub eta: f64,
    pub lambda: f64,
    pub tau: f64,
    pub iterations: usize,
    pub seed: u64,
    pub eot: SinkhornOptions,
    /// Law of the initial particles.
    pub init: DiscreteMeasure,
}

impl NpgdConfig {
    /// Takes `λ` and `τ` from the problem.
    pub fn for_problem(problem: &BarycenterProblem, particle_count: usize, eta: f64, iterations: usize, seed: u64, init: DiscreteMeasure) -> Self {
        NpgdConfig {
            particle_count,
            eta,
            lambda: problem.lambda,
            tau: problem.tau,
            iterations,
            seed,
            eot: SinkhornOptions::default(),
            init,
        }
    }

    fn validate(&self, problem: &BarycenterProblem) -> Result<()> {
        if self.particle_count == 0 {
            return Err(Error::invalid("particle count must be at least 1"));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("step η = {} must be finite and nonnegative", self.eta)));
        }
        if self.lambda != problem.lambda || self.tau != problem.tau {
            return Err(Error::invalid("configuration λ and τ must match the problem"));
        }
        Ok(())
    }
}

/// One row of the run trace, describing the cloud before step `iter + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NpgdRecord {
    pub iter: usize,
    /// `G_λ(μ̂)`.
    pub g_lambda: f64,
    /// Largest absolute drift component.
    pub drift_sup: f64,
    /// Mean Euclidean particle displacement over the step.
    pub mean_disp: f64,
    /// Whether every EOT solve of the step met its tolerance.
    pub eot_converged: bool,
}

fn step_inner(
    cloud: &ParticleCloud,
    problem: &BarycenterProblem,
    config: &NpgdConfig,
    rng: &mut ChaCha8Rng,
    warm: Option<&[PotentialPair]>,
) -> Result<(ParticleCloud, NpgdRecord, Vec<PotentialPair>)> {
    config.validate(problem)?;
    let mu = cloud.measure();
    let fv = eot::first_variation_warm(&mu, problem, &config.eot, warm)?;
    let (m, d) = (cloud.len(), cloud.dim());
    let drift: Vec<Vec<f64>> = (0..m).into_par_iter().map(|i| fv.grad(cloud.position(i))).collect();
    let noise: Vec<f64> = (0..m * d).map(|_| StandardNormal.sample(rng)).collect();
    let sigma = (2.0 * config.eta * config.tau).sqrt();
    let mut positions = cloud.positions.clone();
    let mut disp = 0.0;
    let mut drift_sup: f64 = 0.0;
    for (i, (mut row, g)) in positions.outer_iter_mut().zip(&drift).enumerate() {
        let x = row.as_slice_mut().expect("standard layout");
        let before = x.to_vec();
        for (a, (xa, ga)) in x.iter_mut().zip(g).enumerate() {
            drift_sup = drift_sup.max(ga.abs());
            *xa += -config.eta * ga + sigma * noise[i * d + a];
        }
        cloud.domain.project(x);
        disp += x.iter().zip(&before).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    }
    if positions.iter().any(|v| !v.is_finite()) {
        return Err(Error::numerical("particle positions became non-finite"));
    }
    let record = NpgdRecord { iter: cloud.step_count, g_lambda: fv.functional_value(), drift_sup, mean_disp: disp / m as f64, eot_converged: fv.all_converged() };
    let pots = fv.solutions.into_iter().map(|s| s.potentials).collect();
    let next = ParticleCloud { positions, domain: cloud.domain.clone(), step_count: cloud.step_count + 1 };
    Ok((next, record, pots))
}

/// One update of every particle. The `m × d` Gaussian block is drawn from
/// `rng` in row-major order even when `τ = 0`.
pub fn npgd_step(cloud: &ParticleCloud, problem: &BarycenterProblem, config: &NpgdConfig, rng: &mut ChaCha8Rng) -> Result<ParticleCloud> {
    step_inner(cloud, problem, config, rng, None)
        .map(|(c, _, _)| c)
        .map_err(|e| Error::Step { iteration: cloud.step_count, source: Box::new(e) })
}

#[derive(Debug, Clone)]
pub struct NpgdRun {
    /// The sampled starting cloud.
    pub initial: ParticleCloud,
    pub cloud: ParticleCloud,
    pub trace: Vec<NpgdRecord>,
    /// `(iteration, cloud)` pairs at every multiple of the snapshot period,
    /// including 0 and the final iteration.
    pub snapshots: Vec<(usize, ParticleCloud)>,
}

/// Samples `m` particles from `config.init` and runs `config.iterations`
/// steps, warm-starting each EOT solve from the previous step's potentials.
/// The initial draws and the noise come from one generator seeded with
/// `config.seed`.
pub fn npgd_run(problem: &BarycenterProblem, config: &NpgdConfig, snapshot_every: usize) -> Result<NpgdRun> {
    config.validate(problem)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let init = sample_with(&config.init, config.particle_count, &mut rng)?;
    let initial = ParticleCloud::from_measure(&init, problem.domain.clone())?;
    let mut cloud = initial.clone();
    let mut trace = Vec::with_capacity(config.iterations);
    let mut snapshots = Vec::new();
    let mut warm: Option<Vec<PotentialPair>> = None;
    for it in 0..config.iterations {
        if snapshot_every > 0 && it % snapshot_every == 0 {
            snapshots.push((it, cloud.clone()));
        }
        let (next, record, pots) = step_inner(&cloud, problem, config, &mut rng, warm.as_deref())
            .map_err(|e| Error::Step { iteration: it, source: Box::new(e) })?;
        trace.push(record);
        warm = Some(pots);
        cloud = next;
    }
    if snapshot_every > 0 && config.iterations % snapshot_every == 0 {
        snapshots.push((config.iterations, cloud.clone()));
    }
    Ok(NpgdRun { initial, cloud, trace, snapshots })
}

/// Grid measure of the Gaussian KDE `(1/m) Σ_i N(X_i, h² I)` evaluated at
/// the cell centers, mixed with `floor` times the uniform measure.
pub fn smooth_cloud(cloud: &ParticleCloud, grid: &Grid, bandwidth: f64, floor: f64) -> Result<DiscreteMeasure> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::invalid(format!("bandwidth {bandwidth} must be positive")));
    }
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::invalid(format!("uniform floor {floor} must lie in [0, 1)")));
    }
    if grid.dim() != cloud.dim() {
        return Err(Error::UnsupportedDimension { expected: grid.dim(), got: cloud.dim() });
    }
    let d = grid.dim();
    let inv = 0.5 / (bandwidth * bandwidth);
    let logs: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|c| {
            let x = grid.center(c);
            let args: Vec<f64> = cloud
                .positions
                .outer_iter()
                .map(|p| -inv * p.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .collect();
            log_sum_exp(&args)
        })
        .collect();
    debug_assert_eq!(logs.len(), grid.len());
    let lse = log_sum_exp(&logs);
    if !lse.is_finite() {
        return Err(Error::numerical(format!("KDE vanishes on the grid ({d}-dimensional)")));
    }
    let n = grid.len() as f64;
    grid.measure(logs.iter().map(|l| (1.0 - floor) * (l - lse).exp() + floor / n).collect())
}

/// Mass of the uniform component mixed into smoothed clouds so that
/// certificates stay defined on every cell.
pub const KDE_FLOOR: f64 = 1e-12;

/// Diagnostics of a cloud through its KDE with bandwidth `√(ητ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothedDiagnostics {
    /// `H` of the smoothed cloud.
    pub entropy: f64,
    /// `G_λ(μ̂) + τ H(smoothed)`.
    pub free_energy: f64,
    /// Entropy-sandwich upper bound of the smoothed cloud.
    pub certificate_upper: f64,
}

pub fn smoothed_diagnostics(
    cloud: &ParticleCloud,
    problem: &BarycenterProblem,
    grid: &Grid,
    eta: f64,
    opts: &SinkhornOptions,
) -> Result<SmoothedDiagnostics> {
    let h = (eta * problem.tau).sqrt();
    let smooth = smooth_cloud(cloud, grid, h, KDE_FLOOR)?;
    let ent = entropy(&smooth, grid)?;
    let g = eot::barycenter_functional(&cloud.measure(), problem, opts)?;
    let cert = suboptimality_certificate(&smooth, problem, opts)?;
    Ok(SmoothedDiagnostics { entropy: ent, free_energy: g + problem.tau * ent, certificate_upper: cert.upper })
}

fn norm_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

struct Mixture<'a> {
    centers: &'a [f64],
    h: f64,
}

impl Mixture<'_> {
    fn cdf(&self, x: f64) -> f64 {
        self.centers.iter().map(|c| norm_cdf((x - c) / self.h)).sum::<f64>() / self.centers.len() as f64
    }

    fn pdf(&self, x: f64) -> f64 {
        self.centers.iter().map(|c| norm_pdf((x - c) / self.h)).sum::<f64>() / (self.centers.len() as f64 * self.h)
    }

    /// Safeguarded Newton iteration inside a bisection bracket.
    fn quantile(&self, u: f64, lo: f64, hi: f64) -> f64 {
        if u <= 0.0 {
            return f64::NEG_INFINITY;
        }
        if u >= 1.0 {
            return f64::INFINITY;
        }
        let (mut a, mut b) = (lo, hi);
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let f = self.cdf(x) - u;
            if f > 0.0 {
                b = x;
            } else {
                a = x;
            }
            let p = self.pdf(x);
            let newton = x - f / p;
            let next = if p > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (next - x).abs() <= 1e-14 * (1.0 + x.abs()) || b - a <= 1e-14 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }

    /// `∫_a^b (x - r)² f(x) dx` for the mixture density `f`.
    fn second_moment_about(&self, a: f64, b: f64, r: f64) -> f64 {
        let h = self.h;
        let total: f64 = self
            .centers
            .iter()
            .map(|&c| {
                let (za, zb) = ((a - c) / h, (b - c) / h);
                let (pa, pb) = (norm_cdf(za), norm_cdf(zb));
                let (fa, fb) = (norm_pdf(za), norm_pdf(zb));
                let zfa = if za.is_finite() { za * fa } else { 0.0 };
                let zfb = if zb.is_finite() { zb * fb } else { 0.0 };
                let delta = c - r;
                h * h * ((pb - pa) - (zfb - zfa)) - 2.0 * h * delta * (fb - fa) + delta * delta * (pb - pa)
            })
            .sum();
        total / self.centers.len() as f64
    }
}

/// Compares a cloud, smoothed by a Gaussian kernel of the given bandwidth,
/// with a grid measure: exact `W₂` in 1D, and in higher dimensions the
/// energy distance `2E|X-Y| - E|X-X'| - E|Y-Y'|` between the KDE evaluated
/// on the reference grid and the reference.
pub fn cloud_kde_compare(cloud: &ParticleCloud, reference: &DiscreteMeasure, bandwidth: f64) -> Result<f64> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::invalid(format!("bandwidth {bandwidth} must be positive")));
    }
    if reference.dim() != cloud.dim() {
        return Err(Error::UnsupportedDimension { expected: cloud.dim(), got: reference.dim() });
    }
    if cloud.dim() == 1 {
        return Ok(mixture_w2(cloud.positions.as_slice().expect("standard layout"), bandwidth, reference));
    }
    let grid = reference.grid().ok_or_else(|| Error::mismatch("the reference must be a grid measure"))?;
    let kde = smooth_cloud(cloud, grid, bandwidth, 0.0)?;
    energy_distance(&kde, reference)
}

fn mixture_w2(centers: &[f64], h: f64, reference: &DiscreteMeasure) -> f64 {
    let mut atoms: Vec<(f64, f64)> =
        reference.points().zip(reference.weights()).filter(|(_, w)| **w > 0.0).map(|(p, w)| (p[0], *w)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mix = Mixture { centers, h };
    let lo = centers.iter().copied().fold(f64::INFINITY, f64::min) - 40.0 * h;
    let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 40.0 * h;
    let mut cum = 0.0;
    let mut left = f64::NEG_INFINITY;
    let mut total = 0.0;
    let last = atoms.len() - 1;
    for (j, &(r, w)) in atoms.iter().enumerate() {
        cum += w;
        let right = if j == last { f64::INFINITY } else { mix.quantile(cum, lo, hi) };
        if right > left {
            total += mix.second_moment_about(left, right, r);
        }
        left = right;
    }
    total.max(0.0).sqrt()
}

/// `-Σ_ij δ_i δ_j |x_i - x_j|` with `δ = p - q` for measures on shared atoms.
pub fn energy_distance(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    p.check_same_support(q)?;
    let delta: Vec<f64> = p.weights().iter().zip(q.weights()).map(|(a, b)| a - b).collect();
    let rows: Vec<f64> = (0..p.len())
        .into_par_iter()
        .map(|i| {
            if delta[i] == 0.0 {
                return 0.0;
            }
            let xi = p.point(i);
            let s: f64 = (0..p.len())
                .map(|j| delta[j] * xi.iter().zip(p.point(j)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
                .sum();
            delta[i] * s
        })
        .collect();
    Ok((-rows.iter().sum::<f64>()).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{sample, wasserstein2_1d};
    use crate::{gaussian, Cost};

    fn cloud_1d(xs: &[f64], lo: f64, hi: f64) -> ParticleCloud {
        ParticleCloud::new(Array2::from_shape_vec((xs.len(), 1), xs.to_vec()).unwrap(), BoxDomain::interval(lo, hi).unwrap()).unwrap()
    }

    fn dirac_problem(b: &[f64], tau: f64, domain: BoxDomain) -> BarycenterProblem {
        BarycenterProblem::uniform(vec![DiscreteMeasure::dirac(b)], 0.3, tau, Cost::SquaredHalf, domain).unwrap()
    }

    #[test]
    fn noiseless_step_is_gradient_flow_to_target() {
        let dom = BoxDomain::cube(-2.0, 2.0, 2).unwrap();
        let p = dirac_problem(&[0.5, -0.25], 0.0, dom.clone());
        let cloud = ParticleCloud::new(Array2::from_shape_vec((3, 2), vec![1.0, 1.0, -1.0, 0.0, 0.5, -0.25]).unwrap(), dom).unwrap();
        let cfg = NpgdConfig::for_problem(&p, 3, 0.3, 1, 0, DiscreteMeasure::dirac(&[0.0, 0.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let next = npgd_step(&cloud, &p, &cfg, &mut rng).unwrap();
        for i in 0..3 {
            for a in 0..2 {
                let x = cloud.position(i)[a];
                let b = [0.5, -0.25][a];
                assert!((next.position(i)[a] - (x - 0.3 * (x - b))).abs() < 1e-12);
            }
        }
        assert_eq!(next.step_count(), 1);
    }

    #[test]
    fn zero_step_leaves_cloud() {
        let dom = BoxDomain::interval(-1.0, 1.0).unwrap();
        let p = dirac_problem(&[0.2], 0.5, dom);
        let cloud = cloud_1d(&[-0.5, 0.1, 0.9], -1.0, 1.0);
        let cfg = NpgdConfig::for_problem(&p, 3, 0.0, 1, 0, DiscreteMeasure::dirac(&[0.0]));
        let next = npgd_step(&cloud, &p, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(next.positions(), cloud.positions());
        assert_eq!(next.step_count(), 1);
    }

    #[test]
    fn projection_keeps_particles_on_the_box() {
        let dom = BoxDomain::interval(0.0, 1.0).unwrap();
        let p = dirac_problem(&[1.0], 50.0, dom);
        let cloud = cloud_1d(&[1.0; 20], 0.0, 1.0);
        let cfg = NpgdConfig::for_problem(&p, 20, 0.5, 1, 0, DiscreteMeasure::dirac(&[1.0]));
        let next = npgd_step(&cloud, &p, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert!(next.positions().iter().all(|&x| (0.0..=1.0).contains(&x)));
        assert!(next.positions().iter().any(|&x| x == 1.0));
        assert!(next.positions().iter().any(|&x| x == 0.0));
    }

    #[test]
    fn geometric_convergence_without_noise() {
        let dom = BoxDomain::interval(-3.0, 3.0).unwrap();
        let p = dirac_problem(&[1.0], 0.0, dom);
        let init = DiscreteMeasure::on_line(&[-2.0, 2.5], &[0.5, 0.5]).unwrap();
        let cfg = NpgdConfig::for_problem(&p, 10, 0.25, 30, 7, init);
        let run = npgd_run(&p, &cfg, 10).unwrap();
        let start = &run.snapshots[0].1;
        for i in 0..10 {
            let expect = 1.0 + (start.position(i)[0] - 1.0) * 0.75f64.powi(30);
            assert!((run.cloud.position(i)[0] - expect).abs() < 1e-12);
        }
        assert_eq!(run.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 10, 20, 30]);
    }

    #[test]
    fn runs_are_deterministic() {
        let dom = BoxDomain::interval(-2.0, 2.0).unwrap();
        let nu = DiscreteMeasure::on_line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let p = BarycenterProblem::uniform(vec![nu.clone()], 0.2, 0.1, Cost::SquaredHalf, dom).unwrap();
        let cfg = NpgdConfig::for_problem(&p, 20, 0.3, 15, 11, nu);
        let a = npgd_run(&p, &cfg, 0).unwrap();
        let b = npgd_run(&p, &cfg, 0).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.cloud, b.cloud);
        let c = npgd_run(&p, &NpgdConfig { seed: 12, ..cfg }, 0).unwrap();
        assert_ne!(a.cloud, c.cloud);
    }

    #[test]
    fn warm_start_matches_cold_start() {
        let dom = BoxDomain::interval(-3.0, 3.0).unwrap();
        let nu = DiscreteMeasure::on_line(&[-1.0, 0.0, 1.5], &[0.3, 0.3, 0.4]).unwrap();
        let p = BarycenterProblem::uniform(vec![nu.clone()], 0.2, 0.1, Cost::SquaredHalf, dom).unwrap();
        let cfg = NpgdConfig::for_problem(&p, 30, 0.3, 101, 5, nu);
        let run = npgd_run(&p, &cfg, 50).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (_, cloud) in &run.snapshots {
            let (next, _, pots) = step_inner(cloud, &p, &cfg, &mut rng, None).unwrap();
            let mu = next.measure();
            let cold = eot::first_variation(&mu, &p, &cfg.eot).unwrap();
            let warm = eot::first_variation_warm(&mu, &p, &cfg.eot, Some(&pots)).unwrap();
            for (c, w) in cold.solutions.iter().zip(&warm.solutions) {
                let gap = c.potentials.phi.iter().zip(&w.potentials.phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(gap <= 10.0 * cfg.eot.tol, "{gap}");
            }
        }
    }

    #[test]
    fn gaussian_target_second_moment() {
        let dom = BoxDomain::interval(-5.0, 5.0).unwrap();
        let grid = Grid::new(dom.clone(), vec![100]).unwrap();
        let nu = grid.discretize_log(|x| -0.5 * x[0] * x[0]).unwrap();
        let (lambda, tau) = (0.2, 0.1);
        let p = BarycenterProblem::uniform(vec![nu.clone()], lambda, tau, Cost::SquaredHalf, dom).unwrap();
        let m = 300;
        let cfg = NpgdConfig::for_problem(&p, m, 0.05, 300, 21, nu);
        let run = npgd_run(&p, &cfg, 0).unwrap();
        let xs = run.cloud.positions();
        let second = xs.iter().map(|x| x * x).sum::<f64>() / m as f64;
        let b = gaussian::barycenter_variance(1.0, lambda, tau).unwrap();
        assert!((second - b).abs() <= 3.0 * b * (2.0 / m as f64).sqrt(), "{second} vs {b}");
    }

    #[test]
    fn compare_identity_and_translation() {
        let grid = Grid::new(BoxDomain::interval(0.0, 1.0).unwrap(), vec![10]).unwrap();
        let reference = grid.uniform();
        let h = 1e-6;
        let same = ParticleCloud::from_measure(&reference, BoxDomain::interval(0.0, 1.0).unwrap()).unwrap();
        assert!(cloud_kde_compare(&same, &reference, h).unwrap() <= h * 1.0001);
        let shifted: Vec<f64> = reference.coords().iter().map(|x| x + 0.3).collect();
        let cloud = cloud_1d(&shifted, 0.0, 2.0);
        let w = cloud_kde_compare(&cloud, &reference, h).unwrap();
        assert!((w - 0.3).abs() <= h * 1.0001, "{w}");
    }

    #[test]
    fn compare_matches_gaussian_reference() {
        // One particle smoothed into N(0, h²) versus a Dirac at 0: W₂ = h.
        let cloud = cloud_1d(&[0.0], -1.0, 1.0);
        let w = cloud_kde_compare(&cloud, &DiscreteMeasure::dirac(&[0.0]), 0.2).unwrap();
        assert!((w - 0.2).abs() < 1e-10, "{w}");
        // Versus ½(δ_{-1} + δ_1): E|Z h - sign(Z)|² = h² - 2h E|Z| + 1.
        let two = DiscreteMeasure::on_line(&[-1.0, 1.0], &[0.5, 0.5]).unwrap();
        let w = cloud_kde_compare(&cloud, &two, 0.2).unwrap();
        let expect = (0.04 - 0.4 * (2.0 / std::f64::consts::PI).sqrt() + 1.0f64).sqrt();
        assert!((w - expect).abs() < 1e-10, "{w} vs {expect}");
    }

    #[test]
    fn compare_beats_resampling_baseline() {
        let dom = BoxDomain::interval(-4.0, 4.0).unwrap();
        let grid = Grid::new(dom.clone(), vec![200]).unwrap();
        let reference = grid.discretize_log(|x| -0.5 * x[0] * x[0] - (1.5 * x[0]).cos()).unwrap();
        let m = 10_000;
        let cloud = ParticleCloud::from_measure(&sample(&reference, m, 1).unwrap(), dom).unwrap();
        let stat = cloud_kde_compare(&cloud, &reference, 0.01).unwrap();
        let baseline = wasserstein2_1d(&sample(&reference, m, 2).unwrap(), &sample(&reference, m, 3).unwrap()).unwrap();
        assert!(stat < baseline, "{stat} vs {baseline}");
    }

    #[test]
    fn energy_distance_in_two_dimensions() {
        let dom = BoxDomain::cube(0.0, 1.0, 2).unwrap();
        let grid = Grid::new(dom.clone(), vec![12, 12]).unwrap();
        let reference = grid.discretize_log(|x| -((x[0] - 0.5).powi(2) + (x[1] - 0.4).powi(2)) / 0.05).unwrap();
        let near = ParticleCloud::from_measure(&sample(&reference, 2000, 4).unwrap(), dom.clone()).unwrap();
        let far = ParticleCloud::new(Array2::from_elem((5, 2), 0.95), dom).unwrap();
        let a = cloud_kde_compare(&near, &reference, 0.05).unwrap();
        let b = cloud_kde_compare(&far, &reference, 0.05).unwrap();
        assert!(a >= 0.0 && a < b / 100.0, "{a} vs {b}");
        assert_eq!(energy_distance(&reference, &reference).unwrap(), 0.0);
    }

    #[test]
    fn smoothing_has_a_floor() {
        let grid = Grid::new(BoxDomain::interval(0.0, 10.0).unwrap(), vec![50]).unwrap();
        let cloud = cloud_1d(&[1.0, 1.1], 0.0, 10.0);
        let s = smooth_cloud(&cloud, &grid, 0.05, KDE_FLOOR).unwrap();
        assert!(s.weights().iter().all(|&w| w >= KDE_FLOOR / 50.0));
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(smooth_cloud(&cloud, &grid, 0.0, 0.0).is_err());
    }
}
