//! Stabilized log-sum-exp kernels shared by the solvers.

/// Terms more than this far below the running maximum are skipped; each
/// contributes less than `exp(-50) ≈ 2e-22` relative to the largest term.
pub const CUTOFF: f64 = 50.0;

/// `log Σ exp(a_i)` with max-subtraction. Returns `-inf` for an empty slice
/// or when every term is `-inf`.
pub fn log_sum_exp(args: &[f64]) -> f64 {
    let max = args.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let mut sum = 0.0;
    for &a in args {
        let z = a - max;
        if z > -CUTOFF {
            sum += z.exp();
        }
    }
    max + sum.ln()
}

/// Like [`log_sum_exp`] but overwrites `args` with the normalized softmax
/// probabilities `exp(a_i - lse)` (exactly zero for skipped terms).
pub fn log_sum_exp_softmax(args: &mut [f64]) -> f64 {
    let max = args.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        args.iter_mut().for_each(|a| *a = 0.0);
        return max;
    }
    let mut sum = 0.0;
    for a in args.iter_mut() {
        let z = *a - max;
        *a = if z > -CUTOFF { z.exp() } else { 0.0 };
        sum += *a;
    }
    let inv = 1.0 / sum;
    args.iter_mut().for_each(|a| *a *= inv);
    max + sum.ln()
}
