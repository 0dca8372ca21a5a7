use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{BoxDomain, DiscreteMeasure, Error, Result};

/// Empirical measure of `count` i.i.d. draws from `m` (uniform weights,
/// repeated atoms kept), reproducible from `seed`.
pub fn sample(m: &DiscreteMeasure, count: usize, seed: u64) -> Result<DiscreteMeasure> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    sample_with(m, count, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// [`sample`] drawing from a caller-owned generator.
pub fn sample_with<R: Rng + ?Sized>(m: &DiscreteMeasure, count: usize, rng: &mut R) -> Result<DiscreteMeasure> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let dist = WeightedIndex::new(m.weights()).map_err(|e| Error::invalid(format!("cannot sample: {e}")))?;
    let mut coords = Vec::with_capacity(count * m.dim());
    for _ in 0..count {
        coords.extend_from_slice(m.point(dist.sample(rng)));
    }
    DiscreteMeasure::uniform(m.dim(), coords)
}

/// Moves every atom by `delta · u` with `u` uniform on `[-1, 1]^d`, then
/// projects onto `domain`. Returns the displaced measure (same weights) and
/// `Σ_j ν_j ‖x̂_j - x_j‖`, an upper bound on `W_1` between the two.
pub fn perturb(m: &DiscreteMeasure, delta: f64, domain: &BoxDomain, seed: u64) -> Result<(DiscreteMeasure, f64)> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid(format!("displacement {delta} must be finite and nonnegative")));
    }
    if domain.dim() != m.dim() {
        return Err(Error::UnsupportedDimension { expected: domain.dim(), got: m.dim() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = m.coords().to_vec();
    let mut bound = 0.0;
    for (x, w) in coords.chunks_mut(m.dim()).zip(m.weights()) {
        let before = x.to_vec();
        x.iter_mut().for_each(|v| *v += delta * rng.random_range(-1.0..=1.0));
        domain.project(x);
        bound += w * x.iter().zip(&before).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    }
    Ok((DiscreteMeasure::new(m.dim(), coords, m.weights().to_vec())?, bound))
}
