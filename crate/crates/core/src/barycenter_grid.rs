//! Grid solvers for the `(λ, τ)`-barycenter
//! `argmin_μ Σ_k w_k T_λ(μ, ν_k) + τ H(μ)`.
//!
//! The barycenter is sought on the cells of a [`Grid`] covering the problem
//! box. Two dual solvers are provided:
//!
//! * gradient ascent on the concave dual
//!   `E(ψ) = Σ_k w_k ∫ψ_k dν_k - τ log ∫ exp(-V_ψ(x)/τ) dx`, where
//!   `V_ψ = Σ_k w_k φ_{ψ_k}` and `φ_{ψ_k}` is the soft c-transform of `ψ_k`,
//!   with the primal solution `μ ∝ exp(-V_ψ/τ)`;
//! * for `τ = λ`, block-coordinate maximization of the dual with the
//!   constraint `Σ_k w_k φ_k = 0`, where each block update is explicit.

use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;

use crate::eot::{self, SinkhornOptions};
use crate::lse::{log_sum_exp, log_sum_exp_softmax};
use crate::measures::{entropy, l1_distance};
use crate::{BarycenterProblem, DiscreteMeasure, Error, Grid, Result};

/// Dual potentials `ψ_k` on the atoms of each `ν_k`, the quadrature grid and
/// the last dual value.
#[derive(Debug, Clone)]
pub struct DualState {
    pub psis: Vec<Vec<f64>>,
    pub grid: Arc<Grid>,
    pub objective: f64,
}

impl DualState {
    pub fn zeros(problem: &BarycenterProblem, grid: &Grid) -> Self {
        DualState {
            psis: problem.marginals.iter().map(|m| vec![0.0; m.len()]).collect(),
            grid: Arc::new(grid.clone()),
            objective: f64::NAN,
        }
    }

    /// Shifts each `ψ_k` to have mean zero under `ν_k`.
    pub fn normalize(&mut self, problem: &BarycenterProblem) {
        for (psi, nu) in self.psis.iter_mut().zip(&problem.marginals) {
            let mean: f64 = psi.iter().zip(nu.weights()).map(|(p, w)| p * w).sum();
            psi.iter_mut().for_each(|p| *p -= mean);
        }
    }
}

/// Precomputed `c(x, y_j)/λ` tables between grid cells and marginal atoms.
pub struct DualWorkspace<'a> {
    problem: &'a BarycenterProblem,
    grid: &'a Grid,
    log_vol: f64,
    scaled_costs: Vec<Array2<f64>>,
    log_nus: Vec<Vec<f64>>,
}

/// Everything computed in one pass over the grid at a given `ψ`.
#[derive(Debug, Clone)]
pub struct DualEvaluation {
    pub objective: f64,
    /// `V_ψ` at the cell centers.
    pub potential: Vec<f64>,
    /// Log weights of the recovered grid measure `∝ exp(-V_ψ/τ)`.
    pub log_mu: Vec<f64>,
    /// Per-marginal softmax `p_k(x, ·) ∝ ν_k exp((ψ_k - c(x, ·))/λ)`.
    softmax: Vec<Array2<f64>>,
}

fn check_grid(problem: &BarycenterProblem, grid: &Grid) -> Result<()> {
    problem.require_positive_tau()?;
    let (d, p) = (grid.domain(), &problem.domain);
    if d.dim() != p.dim() {
        return Err(Error::UnsupportedDimension { expected: p.dim(), got: d.dim() });
    }
    let tol = 1e-12 * p.diameter().max(1.0);
    let same = d.lo().iter().zip(p.lo()).chain(d.hi().iter().zip(p.hi())).all(|(a, b)| (a - b).abs() <= tol);
    if !same {
        return Err(Error::mismatch("the grid must cover exactly the problem domain"));
    }
    Ok(())
}

impl<'a> DualWorkspace<'a> {
    pub fn new(problem: &'a BarycenterProblem, grid: &'a Grid) -> Result<Self> {
        check_grid(problem, grid)?;
        let centers = grid.centers();
        let d = grid.dim();
        let inv = 1.0 / problem.lambda;
        let scaled_costs: Vec<Array2<f64>> = problem
            .marginals
            .par_iter()
            .map(|nu| problem.cost.matrix(d, &centers, nu.coords()).mapv_into(|c| c * inv))
            .collect();
        if scaled_costs.iter().any(|m| m.iter().any(|c| !c.is_finite())) {
            return Err(Error::numerical("cost table has non-finite entries"));
        }
        let log_nus = problem.marginals.iter().map(|nu| nu.weights().iter().map(|w| w.ln()).collect()).collect();
        Ok(DualWorkspace { problem, grid, log_vol: grid.cell_volume().ln(), scaled_costs, log_nus })
    }

    pub fn problem(&self) -> &BarycenterProblem {
        self.problem
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    fn check_shape(&self, psis: &[Vec<f64>]) -> Result<()> {
        if psis.len() != self.problem.len()
            || psis.iter().zip(&self.problem.marginals).any(|(p, m)| p.len() != m.len())
        {
            return Err(Error::invalid("dual potentials do not match the marginal supports"));
        }
        Ok(())
    }

    /// Soft c-transform `φ_{ψ_k}` at every cell; fills `softmax` with the
    /// conditional weights when given.
    fn transform(&self, k: usize, psi: &[f64], softmax: Option<&mut Array2<f64>>) -> Vec<f64> {
        let lambda = self.problem.lambda;
        let base: Vec<f64> = self.log_nus[k].iter().zip(psi).map(|(l, p)| l + p / lambda).collect();
        let table = &self.scaled_costs[k];
        let cells = table.nrows();
        let mut phi = vec![0.0; cells];
        match softmax {
            Some(buf) => {
                for ((row, mut out), f) in table.outer_iter().zip(buf.outer_iter_mut()).zip(phi.iter_mut()) {
                    let out = out.as_slice_mut().expect("standard layout");
                    for ((o, b), c) in out.iter_mut().zip(&base).zip(row) {
                        *o = b - c;
                    }
                    *f = -lambda * log_sum_exp_softmax(out);
                }
            }
            None => {
                let mut scratch = vec![0.0; base.len()];
                for (row, f) in table.outer_iter().zip(phi.iter_mut()) {
                    for ((o, b), c) in scratch.iter_mut().zip(&base).zip(row) {
                        *o = b - c;
                    }
                    *f = -lambda * log_sum_exp(&scratch);
                }
            }
        }
        phi
    }

    pub fn evaluate(&self, psis: &[Vec<f64>]) -> Result<DualEvaluation> {
        self.check_shape(psis)?;
        let p = self.problem;
        let transformed: Vec<(Vec<f64>, Array2<f64>)> = (0..p.len())
            .into_par_iter()
            .map(|k| {
                let mut buf = Array2::zeros(self.scaled_costs[k].raw_dim());
                let phi = self.transform(k, &psis[k], Some(&mut buf));
                (phi, buf)
            })
            .collect();
        let cells = self.grid.len();
        let mut potential = vec![0.0; cells];
        for ((phi, _), w) in transformed.iter().zip(&p.weights) {
            for (v, f) in potential.iter_mut().zip(phi) {
                *v += w * f;
            }
        }
        let tau = p.tau;
        let mut log_mu: Vec<f64> = potential.iter().map(|v| self.log_vol - v / tau).collect();
        let lse = log_sum_exp(&log_mu);
        log_mu.iter_mut().for_each(|l| *l -= lse);
        let linear: f64 = psis
            .iter()
            .zip(&p.marginals)
            .zip(&p.weights)
            .map(|((psi, nu), w)| w * psi.iter().zip(nu.weights()).map(|(a, b)| if *b > 0.0 { a * b } else { 0.0 }).sum::<f64>())
            .sum();
        let objective = linear - tau * lse;
        if !objective.is_finite() {
            return Err(Error::numerical("dual objective is not finite"));
        }
        Ok(DualEvaluation { objective, potential, log_mu, softmax: transformed.into_iter().map(|(_, s)| s).collect() })
    }

    /// `E(ψ)` only.
    pub fn objective(&self, psis: &[Vec<f64>]) -> Result<f64> {
        self.check_shape(psis)?;
        let p = self.problem;
        let phis: Vec<Vec<f64>> = (0..p.len()).into_par_iter().map(|k| self.transform(k, &psis[k], None)).collect();
        let mut potential = vec![0.0; self.grid.len()];
        for (phi, w) in phis.iter().zip(&p.weights) {
            for (v, f) in potential.iter_mut().zip(phi) {
                *v += w * f;
            }
        }
        let args: Vec<f64> = potential.iter().map(|v| self.log_vol - v / p.tau).collect();
        let linear: f64 = psis
            .iter()
            .zip(&p.marginals)
            .zip(&p.weights)
            .map(|((psi, nu), w)| w * psi.iter().zip(nu.weights()).map(|(a, b)| if *b > 0.0 { a * b } else { 0.0 }).sum::<f64>())
            .sum();
        let e = linear - p.tau * log_sum_exp(&args);
        if !e.is_finite() {
            return Err(Error::numerical("dual objective is not finite"));
        }
        Ok(e)
    }

    /// `g_k(y_j) = w_k ν_{k,j} - w_k Σ_x μ_ψ(x) p_k(x, j)`.
    pub fn gradient(&self, eval: &DualEvaluation) -> Vec<Vec<f64>> {
        let p = self.problem;
        let mu: Vec<f64> = eval.log_mu.iter().map(|l| l.exp()).collect();
        eval.softmax
            .iter()
            .zip(&p.marginals)
            .zip(&p.weights)
            .map(|((sm, nu), &w)| {
                let mut col = vec![0.0; nu.len()];
                for (row, &m) in sm.outer_iter().zip(&mu) {
                    if m == 0.0 {
                        continue;
                    }
                    for (c, r) in col.iter_mut().zip(row) {
                        *c += m * r;
                    }
                }
                col.iter().zip(nu.weights()).map(|(c, n)| w * (n - c)).collect()
            })
            .collect()
    }

    /// The recovered grid measure `μ ∝ exp(-V_ψ/τ)`.
    pub fn measure(&self, eval: &DualEvaluation) -> Result<DiscreteMeasure> {
        self.grid.measure(eval.log_mu.iter().map(|l| l.exp()).collect())
    }
}

/// `E(ψ)` for the stored potentials.
pub fn dual_objective(state: &DualState, problem: &BarycenterProblem) -> Result<f64> {
    DualWorkspace::new(problem, &state.grid)?.objective(&state.psis)
}

/// `∇E(ψ)` for the stored potentials, one vector per marginal.
pub fn dual_gradient(state: &DualState, problem: &BarycenterProblem) -> Result<Vec<Vec<f64>>> {
    let ws = DualWorkspace::new(problem, &state.grid)?;
    let eval = ws.evaluate(&state.psis)?;
    Ok(ws.gradient(&eval))
}

/// Grid measure with weights `∝ vol · exp(-V_ψ(x)/τ)`.
pub fn recover_barycenter(state: &DualState, problem: &BarycenterProblem) -> Result<DiscreteMeasure> {
    let ws = DualWorkspace::new(problem, &state.grid)?;
    let eval = ws.evaluate(&state.psis)?;
    ws.measure(&eval)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOptions {
    /// Defaults to `min{λ, τ}`.
    pub step: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    /// Scale atom gradients by `1/(w_k ν_{k,j})`; plain Euclidean ascent
    /// otherwise.
    pub preconditioned: bool,
    /// Evaluate the certificate every this many iterations for the trace
    /// (0 disables; it is always evaluated when the gradient test passes).
    pub certificate_every: usize,
    pub record_trace: bool,
    pub sinkhorn: SinkhornOptions,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            step: None,
            tol: 1e-9,
            max_iter: 100_000,
            preconditioned: true,
            certificate_every: 0,
            record_trace: false,
            sinkhorn: SinkhornOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
    pub certificate_upper: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GridSolution {
    pub state: DualState,
    pub barycenter: DiscreteMeasure,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm of the last dual gradient (ψ change for the alternating
    /// scheme).
    pub residual: f64,
    pub certificate_upper: f64,
    pub trace: Vec<TraceRecord>,
}

fn sup_norm(g: &[Vec<f64>]) -> f64 {
    g.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// `ψ_k(y_j) = -λ log Σ_x N⁻¹ exp(-c(x, y_j)/λ)`: the potentials that match
/// the marginals exactly when `μ` is uniform on the grid.
fn uniform_start(ws: &DualWorkspace) -> Vec<Vec<f64>> {
    let lambda = ws.problem.lambda;
    let log_n = -(ws.grid.len() as f64).ln();
    ws.scaled_costs
        .iter()
        .map(|table| {
            let mut scratch = vec![0.0; table.nrows()];
            (0..table.ncols())
                .map(|j| {
                    for (s, c) in scratch.iter_mut().zip(table.column(j)) {
                        *s = log_n - c;
                    }
                    -lambda * log_sum_exp(&scratch)
                })
                .collect()
        })
        .collect()
}

/// Gradient ascent on `E`. The step is halved whenever a trial point lowers
/// the objective and is allowed to grow back towards its initial value after
/// accepted steps, so accepted iterates never decrease `E`.
pub fn solve_dual_ascent(problem: &BarycenterProblem, grid: &Grid, opts: &AscentOptions) -> Result<GridSolution> {
    let ws = DualWorkspace::new(problem, grid)?;
    let base_step = opts.step.unwrap_or(problem.lambda.min(problem.tau));
    if !(base_step > 0.0 && base_step.is_finite()) {
        return Err(Error::invalid(format!("step {base_step} must be positive")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let cert_opts = SinkhornOptions { tol: opts.sinkhorn.tol.min(opts.tol), ..opts.sinkhorn };
    let cert_target = 10.0 * problem.tau * opts.tol;
    let scale: Vec<Vec<f64>> = problem
        .marginals
        .iter()
        .zip(&problem.weights)
        .map(|(nu, &w)| {
            nu.weights()
                .iter()
                .map(|&n| match (opts.preconditioned, w * n > 0.0) {
                    (_, false) => 0.0,
                    (true, true) => 1.0 / (w * n),
                    (false, true) => 1.0,
                })
                .collect()
        })
        .collect();

    let mut psis = uniform_start(&ws);
    let mut eval = ws.evaluate(&psis)?;
    let mut grad = ws.gradient(&eval);
    let mut step = base_step;
    let mut trace = Vec::new();
    let mut warm: Option<Vec<eot::PotentialPair>> = None;
    let mut next_check = 0usize;
    let mut converged = false;
    let mut certificate = f64::NAN;
    let mut iterations = 0;
    let mut trial = psis.clone();
    for it in 0..=opts.max_iter {
        iterations = it;
        let gnorm = sup_norm(&grad);
        let mut cert_now = None;
        let want_trace_cert = opts.certificate_every > 0 && it % opts.certificate_every == 0;
        if (gnorm <= opts.tol && it >= next_check) || want_trace_cert {
            let mu = ws.measure(&eval)?;
            let (c, w) = certificate_of(&mu, grid, problem, &cert_opts, warm.as_deref())
                .map_err(|e| Error::Step { iteration: it, source: Box::new(e) })?;
            warm = Some(w);
            certificate = c;
            cert_now = Some(c);
            if gnorm <= opts.tol {
                if c <= cert_target {
                    converged = true;
                } else {
                    next_check = it + 50;
                }
            }
        }
        if opts.record_trace {
            trace.push(TraceRecord { iter: it, objective: eval.objective, grad_norm: gnorm, certificate_upper: cert_now });
        }
        if converged || it == opts.max_iter {
            break;
        }
        loop {
            for ((t, p), (g, s)) in trial.iter_mut().zip(&psis).zip(grad.iter().zip(&scale)) {
                for ((tj, pj), (gj, sj)) in t.iter_mut().zip(p).zip(g.iter().zip(s)) {
                    *tj = pj + step * gj * sj;
                }
            }
            let candidate = ws.evaluate(&trial)?;
            let slack = 1e-14 * (1.0 + eval.objective.abs());
            if candidate.objective >= eval.objective - slack {
                std::mem::swap(&mut psis, &mut trial);
                eval = candidate;
                grad = ws.gradient(&eval);
                step = (step * 2.0).min(base_step);
                break;
            }
            step *= 0.5;
            if step < base_step * 1e-12 {
                return Err(Error::StepSize(format!(
                    "dual objective keeps decreasing at iteration {it}; try a step below {base_step}"
                )));
            }
        }
    }
    let barycenter = ws.measure(&eval)?;
    if certificate.is_nan() {
        certificate = certificate_of(&barycenter, grid, problem, &cert_opts, warm.as_deref())?.0;
    }
    let mut state = DualState { psis, grid: Arc::new(grid.clone()), objective: eval.objective };
    state.normalize(problem);
    Ok(GridSolution {
        state,
        barycenter,
        iterations,
        converged,
        residual: sup_norm(&grad),
        certificate_upper: certificate,
        trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlternatingOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub sinkhorn: SinkhornOptions,
}

impl Default for AlternatingOptions {
    fn default() -> Self {
        AlternatingOptions { tol: 1e-9, max_iter: 100_000, sinkhorn: SinkhornOptions::default() }
    }
}

/// Block maximization of the `τ = λ` dual
/// `Σ_k w_k [∫ψ_k dν_k - λ ∫∫ exp((φ_k(x) + ψ_k(y) - c(x, y))/λ) dx dν_k(y)]`
/// under `Σ_k w_k φ_k = 0`. The φ-block gives
/// `φ_k = -λ log a_k + λ Σ_l w_l log a_l` with
/// `a_k(x) = Σ_j ν_{k,j} exp((ψ_k(y_j) - c(x, y_j))/λ)`, and the ψ-block is a
/// soft c-transform against Lebesgue measure.
pub fn solve_alternating_tau_eq_lambda(
    problem: &BarycenterProblem,
    grid: &Grid,
    opts: &AlternatingOptions,
) -> Result<GridSolution> {
    if (problem.tau - problem.lambda).abs() >= 1e-12 {
        return Err(Error::invalid(format!(
            "the alternating scheme needs τ = λ, got τ = {} and λ = {}",
            problem.tau, problem.lambda
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let ws = DualWorkspace::new(problem, grid)?;
    let lambda = problem.lambda;
    let kk = problem.len();
    let cells = grid.len();
    let mut psis = uniform_start(&ws);
    let mut converged = false;
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    let mut phis: Vec<Vec<f64>> = vec![vec![0.0; cells]; kk];
    let log_a = |psis: &[Vec<f64>]| -> Vec<Vec<f64>> {
        (0..kk).into_par_iter().map(|k| ws.transform(k, &psis[k], None).iter().map(|f| -f / lambda).collect()).collect()
    };
    for it in 1..=opts.max_iter {
        iterations = it;
        let la = log_a(&psis);
        let mut mean = vec![0.0; cells];
        for (l, w) in la.iter().zip(&problem.weights) {
            for (m, v) in mean.iter_mut().zip(l) {
                *m += w * v;
            }
        }
        for (phi, l) in phis.iter_mut().zip(&la) {
            for ((f, v), m) in phi.iter_mut().zip(l).zip(&mean) {
                *f = lambda * (m - v);
            }
        }
        let new: Vec<Vec<f64>> = (0..kk)
            .into_par_iter()
            .map(|k| {
                let table = &ws.scaled_costs[k];
                let base: Vec<f64> = phis[k].iter().map(|f| ws.log_vol + f / lambda).collect();
                let mut scratch = vec![0.0; cells];
                (0..table.ncols())
                    .map(|j| {
                        for ((s, b), c) in scratch.iter_mut().zip(&base).zip(table.column(j)) {
                            *s = b - c;
                        }
                        -lambda * log_sum_exp(&scratch)
                    })
                    .collect()
            })
            .collect();
        change = psis
            .iter()
            .zip(&new)
            .zip(&problem.marginals)
            .flat_map(|((a, b), nu)| a.iter().zip(b).zip(nu.weights()).filter(|(_, w)| **w > 0.0).map(|((x, y), _)| (x - y).abs()))
            .fold(0.0, f64::max);
        psis = new;
        if !change.is_finite() {
            return Err(Error::numerical(format!("alternating potentials became non-finite at iteration {it}")));
        }
        if change <= opts.tol {
            converged = true;
            break;
        }
    }
    // First marginals of the K plans under the final potentials.
    let la = log_a(&psis);
    let per_k: Vec<Vec<f64>> = phis
        .iter()
        .zip(&la)
        .map(|(phi, l)| phi.iter().zip(l).map(|(f, v)| (ws.log_vol + f / lambda + v).exp()).collect())
        .collect();
    if converged {
        for (k, m) in per_k.iter().enumerate().skip(1) {
            let gap: f64 = m.iter().zip(&per_k[0]).map(|(a, b)| (a - b).abs()).sum();
            if gap > 100.0 * opts.tol {
                return Err(Error::Consistency(format!(
                    "plan marginals for marginals 0 and {k} differ by {gap:e} in L1"
                )));
            }
        }
    }
    let mut weights = vec![0.0; cells];
    for (m, w) in per_k.iter().zip(&problem.weights) {
        for (a, b) in weights.iter_mut().zip(m) {
            *a += w * b;
        }
    }
    let barycenter = grid.measure(weights)?;
    let objective = ws.objective(&psis)?;
    let cert_opts = SinkhornOptions { tol: opts.sinkhorn.tol.min(opts.tol), ..opts.sinkhorn };
    let certificate = certificate_of(&barycenter, grid, problem, &cert_opts, None)?.0;
    let mut state = DualState { psis, grid: Arc::new(grid.clone()), objective };
    state.normalize(problem);
    Ok(GridSolution { state, barycenter, iterations, converged, residual: change, certificate_upper: certificate, trace: Vec::new() })
}

/// `F_{λ,τ}(μ) = Σ_k w_k T_λ(μ, ν_k) + τ H(μ)` for a grid measure.
pub fn primal_objective(mu: &DiscreteMeasure, problem: &BarycenterProblem, opts: &SinkhornOptions) -> Result<f64> {
    let grid = mu.grid().ok_or_else(|| Error::mismatch("primal objective needs a grid measure"))?;
    eot::primal_value(mu, grid, problem, opts)
}

/// Bounds on `F(μ) - F(μ*)`. Only the upper bound is computable; `lower`
/// is 0 by convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    pub lower: f64,
    pub upper: f64,
}

/// `τ H(μ | ν)` with the tangent Gibbs measure `ν ∝ exp(-V[μ]/τ)` on the
/// grid; zero-mass cells contribute nothing.
fn certificate_of(
    mu: &DiscreteMeasure,
    grid: &Grid,
    problem: &BarycenterProblem,
    opts: &SinkhornOptions,
    warm: Option<&[eot::PotentialPair]>,
) -> Result<(f64, Vec<eot::PotentialPair>)> {
    let fv = eot::first_variation_warm(mu, problem, opts, warm)?;
    let log_vol = grid.cell_volume().ln();
    let mut log_gibbs: Vec<f64> = fv.values.iter().map(|v| log_vol - v / problem.tau).collect();
    let lse = log_sum_exp(&log_gibbs);
    log_gibbs.iter_mut().for_each(|l| *l -= lse);
    let h = crate::measures::relative_entropy_log(mu.weights(), &log_gibbs)?;
    let pots = fv.solutions.into_iter().map(|s| s.potentials).collect();
    Ok(((problem.tau * h).max(0.0), pots))
}

pub fn suboptimality_certificate(mu: &DiscreteMeasure, problem: &BarycenterProblem, opts: &SinkhornOptions) -> Result<Certificate> {
    problem.require_positive_tau()?;
    let grid = mu.grid().ok_or_else(|| Error::mismatch("certificate needs a grid measure"))?;
    if let Some(i) = mu.weights().iter().position(|&w| w <= 0.0) {
        return Err(Error::CertificateUndefined(format!("cell {i} has zero mass")));
    }
    let (upper, _) = certificate_of(mu, grid, problem, opts, None)?;
    Ok(Certificate { lower: 0.0, upper })
}

/// `‖μ - μ'‖₁` between two measures on the same grid.
pub fn total_variation(a: &DiscreteMeasure, b: &DiscreteMeasure) -> Result<f64> {
    l1_distance(a, b)
}

/// `H(μ)` of a grid measure against its own grid.
pub fn grid_entropy(mu: &DiscreteMeasure) -> Result<f64> {
    let grid = mu.grid().ok_or_else(|| Error::mismatch("entropy needs a grid measure"))?;
    entropy(mu, grid)
}
