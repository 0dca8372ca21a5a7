use std::time::Instant;

use anyhow::{Context, Result};
use douba::barycenter_grid::{solve_alternating_tau_eq_lambda, solve_dual_ascent, GridSolution};
use douba::{BarycenterProblem, Grid};

use crate::config::{SolverConfig, SolverKind};

pub mod barycenter;
pub mod eot;
pub mod gaussian_map;
pub mod npgd;
pub mod rate_study;
pub mod stability;

pub fn solve_grid(problem: &BarycenterProblem, grid: &Grid, solver: &SolverConfig, record_trace: bool) -> Result<GridSolution> {
    match solver.kind {
        SolverKind::DualAscent => solve_dual_ascent(problem, grid, &solver.ascent(record_trace)?).context("dual ascent failed"),
        SolverKind::Alternating => {
            solve_alternating_tau_eq_lambda(problem, grid, &solver.alternating()?).context("alternating scheme failed")
        }
    }
}

/// Converged and certified to `solver.certificate_tol`.
pub fn certified(sol: &GridSolution, solver: &SolverConfig) -> bool {
    sol.converged && sol.certificate_upper.is_finite() && sol.certificate_upper <= solver.certificate_tol
}

/// SplitMix64 finalizer folded over `parts`, so seeds for (n, trial, k)
/// style indices are decorrelated and independent of evaluation order.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    };
    parts.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

pub fn elapsed_ms(start: Instant) -> u64 {
    start.elapsed().as_millis() as u64
}
