use crate::{DiscreteMeasure, Error, Grid, Result};

/// Negative differential entropy `H(μ) = ∫ log(dμ/dx) dμ` of a grid measure,
/// evaluated as `Σ_i w_i log(w_i / cell_volume)`. Empty cells contribute 0.
pub fn entropy(m: &DiscreteMeasure, grid: &Grid) -> Result<f64> {
    if !grid.aligned_with(m) {
        return Err(Error::mismatch("measure atoms are not the cell centers of the grid"));
    }
    let vol = grid.cell_volume();
    Ok(m.weights().iter().filter(|&&w| w > 0.0).map(|&w| w * (w / vol).ln()).sum())
}

impl DiscreteMeasure {
    /// [`entropy`] against the measure's own grid; `+∞` for measures that
    /// do not carry a grid (no Lebesgue density).
    pub fn differential_entropy(&self) -> f64 {
        match self.grid() {
            Some(g) => entropy(self, g).unwrap_or(f64::INFINITY),
            None => f64::INFINITY,
        }
    }
}

/// `H(m | r) = Σ_i m_i log(m_i / r_i)` for measures on identical atoms;
/// `+∞` when `m` charges an atom that `r` does not.
pub fn relative_entropy(m: &DiscreteMeasure, r: &DiscreteMeasure) -> Result<f64> {
    m.check_same_support(r)?;
    let mut total = 0.0;
    for (&w, &q) in m.weights().iter().zip(r.weights()) {
        if w > 0.0 {
            if q <= 0.0 {
                return Ok(f64::INFINITY);
            }
            total += w * (w / q).ln();
        }
    }
    Ok(total.max(0.0))
}

/// `Σ_i m_i (log m_i - log_r_i)` with the reference given by its log
/// weights, so references that underflow in linear scale stay exact.
pub fn relative_entropy_log(m: &[f64], log_r: &[f64]) -> Result<f64> {
    if m.len() != log_r.len() {
        return Err(Error::mismatch(format!("{} weights vs {} log weights", m.len(), log_r.len())));
    }
    let mut total = 0.0;
    for (&w, &lq) in m.iter().zip(log_r) {
        if w > 0.0 {
            if lq == f64::NEG_INFINITY {
                return Ok(f64::INFINITY);
            }
            total += w * (w.ln() - lq);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::BoxDomain;

    #[test]
    fn uniform_on_unit_interval_is_zero() {
        for n in [1, 7, 200] {
            let g = Grid::new(BoxDomain::interval(0.0, 1.0).unwrap(), vec![n]).unwrap();
            assert!(entropy(&g.uniform(), &g).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn uniform_on_length_two_is_minus_log_two() {
        let g = Grid::new(BoxDomain::interval(0.0, 2.0).unwrap(), vec![50]).unwrap();
        assert!((entropy(&g.uniform(), &g).unwrap() + 2f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn discretized_gaussian_matches_closed_form() {
        let var = 0.25;
        let g = Grid::new(BoxDomain::interval(-4.0, 4.0).unwrap(), vec![800]).unwrap();
        let m = g.discretize(|x| (-x[0] * x[0] / (2.0 * var)).exp()).unwrap();
        let expected = -0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * var).ln();
        assert!((entropy(&m, &g).unwrap() - expected).abs() < 1e-3);
    }

    #[test]
    fn entropy_is_translation_invariant() {
        let g = Grid::new(BoxDomain::interval(-1.0, 3.0).unwrap(), vec![64]).unwrap();
        let shifted = Grid::new(g.domain().translated(&[10.0]).unwrap(), vec![64]).unwrap();
        let f = |x: f64| (-(x - 1.0).powi(2)).exp() + 0.1;
        let a = g.discretize(|x| f(x[0])).unwrap();
        let b = shifted.discretize(|x| f(x[0] - 10.0)).unwrap();
        assert!((entropy(&a, &g).unwrap() - entropy(&b, &shifted).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn misaligned_measure_is_rejected() {
        let g = Grid::new(BoxDomain::interval(0.0, 1.0).unwrap(), vec![2]).unwrap();
        let m = DiscreteMeasure::on_line(&[0.1, 0.9], &[0.5, 0.5]).unwrap();
        assert!(matches!(entropy(&m, &g), Err(Error::DomainMismatch(_))));
        assert_eq!(m.differential_entropy(), f64::INFINITY);
    }

    #[test]
    fn relative_entropy_examples() {
        let m = DiscreteMeasure::on_line(&[0.0, 1.0], &[0.75, 0.25]).unwrap();
        let r = DiscreteMeasure::on_line(&[0.0, 1.0], &[0.5, 0.5]).unwrap();
        let expected = 0.75 * 1.5f64.ln() + 0.25 * 0.5f64.ln();
        assert!((relative_entropy(&m, &r).unwrap() - expected).abs() < 1e-15);
        assert_eq!(relative_entropy(&m, &m).unwrap(), 0.0);

        let d = DiscreteMeasure::on_line(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_eq!(relative_entropy(&m, &d).unwrap(), f64::INFINITY);

        let other = DiscreteMeasure::on_line(&[0.0, 2.0], &[0.5, 0.5]).unwrap();
        assert!(relative_entropy(&m, &other).is_err());
    }
}
