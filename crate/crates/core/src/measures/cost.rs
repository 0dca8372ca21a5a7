use std::fmt;
use std::sync::Arc;

type CostFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    SquaredHalf,
    Custom,
}

/// Ground cost `c(x, y)` together with its gradient in `x`.
#[derive(Clone, Default)]
pub enum Cost {
    /// `c(x, y) = ½‖y - x‖²`, `∇_x c = x - y`.
    #[default]
    SquaredHalf,
    Custom { value: Arc<CostFn>, grad_x: Arc<GradFn> },
}

impl fmt::Debug for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::SquaredHalf => f.write_str("Cost::SquaredHalf"),
            Cost::Custom { .. } => f.write_str("Cost::Custom"),
        }
    }
}

impl Cost {
    pub fn custom<V, G>(value: V, grad_x: G) -> Self
    where
        V: Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
        G: Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Cost::Custom { value: Arc::new(value), grad_x: Arc::new(grad_x) }
    }

    /// `c ≡ k`.
    pub fn constant(k: f64) -> Self {
        Cost::custom(move |_, _| k, |_, _, g| g.iter_mut().for_each(|v| *v = 0.0))
    }

    pub fn kind(&self) -> CostKind {
        match self {
            Cost::SquaredHalf => CostKind::SquaredHalf,
            Cost::Custom { .. } => CostKind::Custom,
        }
    }

    #[inline]
    pub fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            Cost::SquaredHalf => 0.5 * x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>(),
            Cost::Custom { value, .. } => value(x, y),
        }
    }

    /// Writes `∇_x c(x, y)` into `out`.
    #[inline]
    pub fn grad_x(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        match self {
            Cost::SquaredHalf => {
                for ((o, a), b) in out.iter_mut().zip(x).zip(y) {
                    *o = a - b;
                }
            }
            Cost::Custom { grad_x, .. } => grad_x(x, y, out),
        }
    }

    /// Dense `n × m` cost matrix between the atoms of two point sets
    /// (flattened coordinates in dimension `dim`).
    pub fn matrix(&self, dim: usize, xs: &[f64], ys: &[f64]) -> ndarray::Array2<f64> {
        let n = xs.len() / dim;
        let m = ys.len() / dim;
        ndarray::Array2::from_shape_fn((n, m), |(i, j)| {
            self.eval(&xs[i * dim..(i + 1) * dim], &ys[j * dim..(j + 1) * dim])
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn finite_difference_check(cost: &Cost, dim: usize, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let y: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mut g = vec![0.0; dim];
            cost.grad_x(&x, &y, &mut g);
            let h = 1e-5;
            for i in 0..dim {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (cost.eval(&xp, &y) - cost.eval(&xm, &y)) / (2.0 * h);
                assert!((fd - g[i]).abs() <= 1e-6 * (1.0 + g[i].abs()), "axis {i}: {fd} vs {}", g[i]);
            }
        }
    }

    #[test]
    fn squared_half_is_exact() {
        let c = Cost::SquaredHalf;
        assert_eq!(c.eval(&[1.0, 2.0], &[4.0, -2.0]), 12.5);
        let mut g = [0.0; 2];
        c.grad_x(&[1.0, 2.0], &[4.0, -2.0], &mut g);
        assert_eq!(g, [-3.0, 4.0]);
        finite_difference_check(&c, 3, 1);
    }

    #[test]
    fn custom_gradient_matches_finite_differences() {
        // c(x, y) = ‖x - y‖^4 / 4
        let c = Cost::custom(
            |x, y| {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                0.25 * r2 * r2
            },
            |x, y, g| {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                for ((o, a), b) in g.iter_mut().zip(x).zip(y) {
                    *o = r2 * (a - b);
                }
            },
        );
        assert_eq!(c.kind(), CostKind::Custom);
        finite_difference_check(&c, 2, 7);
    }
}
