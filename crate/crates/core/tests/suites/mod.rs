//! Randomized property suites over small instances. Each suite runs a fixed
//! number of cases from a fixed seed and returns the first failure, so the
//! same code backs the property tests and the acceptance report.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use douba::barycenter_grid::{
    dual_objective, primal_objective, recover_barycenter, solve_dual_ascent, suboptimality_certificate, AscentOptions,
    DualState,
};
use douba::eot::{
    barycenter_functional, eot_cost_with_reference, first_variation, soft_c_transform, solve_eot, SinkhornOptions,
};
use douba::measures::{entropy, l1_distance};
use douba::{BarycenterProblem, BoxDomain, Cost, DiscreteMeasure, Grid};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub const CASES: u32 = 100;

pub fn run<S: Strategy>(seed: u64, strategy: S, check: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<u32, String> {
    let config = Config { cases: CASES, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() };
    let count = AtomicU32::new(0);
    TestRunner::new(config)
        .run(&strategy, |v| {
            count.fetch_add(1, Ordering::Relaxed);
            check(v)
        })
        .map_err(|e| e.to_string())?;
    Ok(count.into_inner())
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, TestCaseError> {
    r.map_err(|e| fail(e.to_string()))
}

/// Atoms in `[-2, 2]^dim` with weights bounded away from zero.
fn atoms(dim: usize, max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1..=max_atoms)
        .prop_flat_map(move |n| (prop::collection::vec(-2.0..2.0f64, n * dim), prop::collection::vec(0.05..1.0f64, n)))
        .prop_map(move |(c, w)| DiscreteMeasure::from_unnormalized(dim, c, w).unwrap())
}

fn line_atoms(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    atoms(1, max_atoms)
}

fn grid(cells: usize) -> Grid {
    Grid::new(BoxDomain::interval(-2.0, 2.0).unwrap(), vec![cells]).unwrap()
}

/// Positive weights on a `[-2, 2]` grid with log-ratios up to 6.
fn grid_weights(cells: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, cells).prop_map(|l| l.into_iter().map(f64::exp).collect())
}

fn grid_measure(g: &Grid, w: Vec<f64>) -> DiscreteMeasure {
    let total: f64 = w.iter().sum();
    g.measure(w.into_iter().map(|v| v / total).collect()).unwrap()
}

fn problem(marginals: Vec<DiscreteMeasure>, lambda: f64, tau: f64) -> BarycenterProblem {
    BarycenterProblem::uniform(marginals, lambda, tau, Cost::SquaredHalf, BoxDomain::interval(-2.0, 2.0).unwrap()).unwrap()
}

fn tight() -> SinkhornOptions {
    SinkhornOptions::new(1e-12, 100_000)
}

/// Plan marginals, λ-monotonicity, `T_0`-lower and product-plan upper cost
/// bounds and the Schrödinger fixed point.
pub fn sinkhorn_invariants() -> Result<u32, String> {
    let strat = (1usize..=2).prop_flat_map(|d| (atoms(d, 6), atoms(d, 6), 0.05..2.0f64));
    run(0x5EED_0001, strat, |(mu, nu, lambda)| {
        let cost = Cost::SquaredHalf;
        let tol = 1e-11;
        let s = ok(solve_eot(&mu, &nu, lambda, &cost, &SinkhornOptions::new(tol, 100_000)))?;
        prop_assert!(s.converged, "not converged after {} iterations", s.iterations);
        let plan = s.plan(&mu, &nu, &cost);
        let rows: f64 = plan.rows().into_iter().zip(mu.weights()).map(|(r, w)| (r.sum() - w).abs()).sum();
        let cols: f64 = plan.columns().into_iter().zip(nu.weights()).map(|(c, w)| (c.sum() - w).abs()).sum();
        prop_assert!(rows <= 1e-9 && cols <= 1e-9, "plan marginal errors {rows:e} {cols:e}");

        let c = cost.matrix(mu.dim(), mu.coords(), nu.coords());
        let product: f64 = mu.weights().iter().enumerate().map(|(i, a)| nu.weights().iter().enumerate().map(|(j, b)| a * b * c[[i, j]]).sum::<f64>()).sum();
        let row_min: f64 = mu.weights().iter().enumerate().map(|(i, a)| a * c.row(i).iter().cloned().fold(f64::INFINITY, f64::min)).sum();
        let col_min: f64 = nu.weights().iter().enumerate().map(|(j, b)| b * c.column(j).iter().cloned().fold(f64::INFINITY, f64::min)).sum();
        prop_assert!(s.cost <= product + 1e-9, "T = {} above product cost {product}", s.cost);
        prop_assert!(s.cost >= row_min.max(col_min) - 1e-9, "T = {} below the T_0 lower bound", s.cost);

        let wider = ok(solve_eot(&mu, &nu, 2.0 * lambda, &cost, &SinkhornOptions::new(tol, 100_000)))?;
        prop_assert!(s.cost <= wider.cost + 1e-9, "T_λ = {} > T_2λ = {}", s.cost, wider.cost);

        let phi = &s.potentials.phi;
        let psi = &s.potentials.psi;
        let residual = mu
            .points()
            .zip(phi)
            .map(|(x, p)| (soft_c_transform(x, &nu, psi, lambda, &cost) - p).abs())
            .fold(0.0, f64::max);
        prop_assert!(residual <= 10.0 * tol * lambda.max(1.0), "Schrödinger residual {residual:e}");
        Ok(())
    })
}

/// Concavity along segments, the oscillation Lipschitz bound and invariance
/// under per-marginal constant shifts of `E`.
pub fn dual_properties() -> Result<u32, String> {
    let strat = (8usize..=24, prop::collection::vec(line_atoms(5), 1..=3), 0.1..1.0f64, 0.1..1.0f64)
        .prop_flat_map(|(cells, margs, lambda, tau)| {
            let sizes: Vec<usize> = margs.iter().map(|m| m.len()).collect();
            let psis = |sizes: Vec<usize>| sizes.into_iter().map(|n| prop::collection::vec(-2.0..2.0f64, n)).collect::<Vec<_>>();
            (
                Just((cells, margs, lambda, tau)),
                psis(sizes.clone()),
                psis(sizes.clone()),
                0.0..1.0f64,
                prop::collection::vec(-5.0..5.0f64, sizes.len()),
            )
        });
    run(0x5EED_0002, strat, |((cells, margs, lambda, tau), a, b, t, shifts)| {
        let g = Arc::new(grid(cells));
        let p = problem(margs, lambda, tau);
        let e = |psis: Vec<Vec<f64>>| ok(dual_objective(&DualState { psis, grid: g.clone(), objective: 0.0 }, &p));
        let mid: Vec<Vec<f64>> = a.iter().zip(&b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| (1.0 - t) * u + t * v).collect()).collect();
        let (ea, eb, em) = (e(a.clone())?, e(b.clone())?, e(mid)?);
        prop_assert!(em >= (1.0 - t) * ea + t * eb - 1e-9, "concavity: {em} < {}", (1.0 - t) * ea + t * eb);

        let osc: f64 = a
            .iter()
            .zip(&b)
            .zip(&p.weights)
            .map(|((x, y), w)| {
                let d: Vec<f64> = x.iter().zip(y).map(|(u, v)| u - v).collect();
                w * (d.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - d.iter().cloned().fold(f64::INFINITY, f64::min))
            })
            .sum();
        prop_assert!((ea - eb).abs() <= osc + 1e-9, "Lipschitz: |ΔE| = {} > {osc}", (ea - eb).abs());

        let shifted: Vec<Vec<f64>> = a.iter().zip(&shifts).map(|(x, s)| x.iter().map(|v| v + s).collect()).collect();
        let es = e(shifted.clone())?;
        prop_assert!((es - ea).abs() <= 1e-9 * (1.0 + ea.abs()), "shift changed E: {ea} vs {es}");
        let ma = ok(recover_barycenter(&DualState { psis: a, grid: g.clone(), objective: 0.0 }, &p))?;
        let ms = ok(recover_barycenter(&DualState { psis: shifted, grid: g.clone(), objective: 0.0 }, &p))?;
        let tv = ok(l1_distance(&ma, &ms))?;
        prop_assert!(tv <= 1e-12, "shift changed the recovered barycenter by {tv:e}");
        Ok(())
    })
}

/// `d/dt G_λ(μ + t(μ̃ - μ))` at 0 against `∫ V[μ] d(μ̃ - μ)`.
pub fn first_variation_fd() -> Result<u32, String> {
    let strat = (6usize..=20)
        .prop_flat_map(|cells| (Just(cells), grid_weights(cells), grid_weights(cells), prop::collection::vec(line_atoms(4), 1..=3), 0.1..1.0f64));
    run(0x5EED_0003, strat, |(cells, wa, wb, margs, lambda)| {
        let g = grid(cells);
        let mu = grid_measure(&g, wa);
        let target = grid_measure(&g, wb);
        let p = problem(margs, lambda, lambda);
        let opts = tight();
        let fv = ok(first_variation(&mu, &p, &opts))?;
        let analytic: f64 = fv.values.iter().zip(target.weights().iter().zip(mu.weights())).map(|(v, (a, b))| v * (a - b)).sum();
        let h = 1e-4;
        let at = |t: f64| ok(mu.mix(&target, t)).and_then(|m| ok(barycenter_functional(&m, &p, &opts)));
        let fd = (at(h)? - at(-h)?) / (2.0 * h);
        prop_assert!((fd - analytic).abs() <= 1e-6, "finite difference {fd} vs first variation {analytic}");
        Ok(())
    })
}

/// `G_λ(μ | μ^α ⊗ ν) = G_λ(μ) + λ(1 - α)H(μ)` for `α ∈ {0, ½, 1}`.
pub fn change_of_reference() -> Result<u32, String> {
    let strat = (6usize..=24).prop_flat_map(|cells| (Just(cells), grid_weights(cells), line_atoms(5), 0.05..1.5f64));
    run(0x5EED_0004, strat, |(cells, w, nu, lambda)| {
        let g = grid(cells);
        let mu = grid_measure(&g, w);
        let opts = tight();
        let base = ok(solve_eot(&mu, &nu, lambda, &Cost::SquaredHalf, &opts))?.cost;
        let h = ok(entropy(&mu, &g))?;
        for alpha in [0.0, 0.5, 1.0] {
            let v = ok(eot_cost_with_reference(&mu, &nu, lambda, alpha, &g, &Cost::SquaredHalf, &opts))?;
            let expected = base + lambda * (1.0 - alpha) * h;
            prop_assert!((v - expected).abs() <= 1e-7, "α = {alpha}: {v} vs {expected}");
        }
        Ok(())
    })
}

/// `F(½μ + ½μ') ≤ ½F(μ) + ½F(μ') - (τ/8)‖μ - μ'‖₁²`.
pub fn strong_convexity() -> Result<u32, String> {
    let strat = (6usize..=20).prop_flat_map(|cells| {
        (Just(cells), grid_weights(cells), grid_weights(cells), prop::collection::vec(line_atoms(4), 1..=3), 0.1..1.0f64, 0.05..1.0f64)
    });
    run(0x5EED_0005, strat, |(cells, wa, wb, margs, lambda, tau)| {
        let g = grid(cells);
        let a = grid_measure(&g, wa);
        let b = grid_measure(&g, wb);
        let p = problem(margs, lambda, tau);
        let opts = tight();
        let f = |m: &DiscreteMeasure| ok(primal_objective(m, &p, &opts));
        let mid = ok(a.mix(&b, 0.5))?;
        let l1 = ok(l1_distance(&a, &b))?;
        let gap = 0.5 * f(&a)? + 0.5 * f(&b)? - f(&mid)?;
        prop_assert!(gap >= tau / 8.0 * l1 * l1 - 1e-9, "midpoint gap {gap} below τ‖μ-μ'‖²/8 = {}", tau / 8.0 * l1 * l1);
        Ok(())
    })
}

/// `0 ≤ F(μ) - F(μ*) ≤ τ H(μ | Gibbs[μ])` around the computed optimum.
pub fn entropy_sandwich() -> Result<u32, String> {
    let strat = (6usize..=16).prop_flat_map(|cells| {
        (Just(cells), grid_weights(cells), prop::collection::vec(line_atoms(4), 1..=3), 0.2..1.0f64, 0.2..1.0f64, 0.0..1.0f64)
    });
    run(0x5EED_0006, strat, |(cells, w, margs, lambda, tau, t)| {
        let g = grid(cells);
        let p = problem(margs, lambda, tau);
        let opts = tight();
        let sol = ok(solve_dual_ascent(&p, &g, &AscentOptions { tol: 1e-10, sinkhorn: opts, ..AscentOptions::default() }))?;
        prop_assert!(sol.converged, "dual ascent did not converge");
        let mu = ok(sol.barycenter.mix(&grid_measure(&g, w), t))?;
        let gap = ok(primal_objective(&mu, &p, &opts))? - ok(primal_objective(&sol.barycenter, &p, &opts))?;
        let cert = ok(suboptimality_certificate(&mu, &p, &opts))?;
        prop_assert!(cert.lower == 0.0);
        prop_assert!(gap >= -1e-9, "F(μ) below the optimum by {}", -gap);
        prop_assert!(gap <= cert.upper + 1e-9, "gap {gap} above certificate {}", cert.upper);
        Ok(())
    })
}

#[allow(dead_code)]
pub const ALL: [(&str, fn() -> Result<u32, String>); 6] = [
    ("Sinkhorn invariants", sinkhorn_invariants),
    ("dual concavity, Lipschitz and shift invariance", dual_properties),
    ("first-variation finite differences", first_variation_fd),
    ("change-of-reference identity", change_of_reference),
    ("τ-strong convexity", strong_convexity),
    ("entropy sandwich", entropy_sandwich),
];
