use crate::{DiscreteMeasure, Error, Result};

/// Sorted atoms with ties merged and empty atoms dropped, as
/// (positions, cumulative weights). The last cumulative weight is 1.
fn quantile_steps(m: &DiscreteMeasure) -> Result<(Vec<f64>, Vec<f64>)> {
    if m.dim() != 1 {
        return Err(Error::UnsupportedDimension { expected: 1, got: m.dim() });
    }
    let mut atoms: Vec<(f64, f64)> =
        m.coords().iter().copied().zip(m.weights().iter().copied()).filter(|(_, w)| *w > 0.0).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut xs: Vec<f64> = Vec::with_capacity(atoms.len());
    let mut ws: Vec<f64> = Vec::with_capacity(atoms.len());
    for (x, w) in atoms {
        match xs.last() {
            Some(&last) if last == x => *ws.last_mut().unwrap() += w,
            _ => {
                xs.push(x);
                ws.push(w);
            }
        }
    }
    let total: f64 = ws.iter().sum();
    let mut acc = 0.0;
    let cum = ws
        .iter()
        .map(|w| {
            acc += w;
            acc / total
        })
        .collect::<Vec<_>>();
    Ok((xs, cum))
}

/// Merged breakpoints of several right-continuous quantile functions; for
/// each segment `(t_prev, t]` the callback receives its length and the atom
/// index of every quantile function on that segment.
fn walk_segments(steps: &[(Vec<f64>, Vec<f64>)], mut visit: impl FnMut(f64, &[usize])) {
    let mut breaks: Vec<f64> = steps.iter().flat_map(|(_, c)| c.iter().copied()).collect();
    breaks.push(1.0);
    breaks.sort_by(f64::total_cmp);
    let mut idx = vec![0usize; steps.len()];
    let mut prev = 0.0;
    for t in breaks {
        let dt = t.min(1.0) - prev;
        if dt <= 1e-15 {
            continue;
        }
        let mid = prev + 0.5 * dt;
        for (k, (_, cum)) in steps.iter().enumerate() {
            idx[k] = cum.partition_point(|&c| c < mid).min(cum.len() - 1);
        }
        visit(dt, &idx);
        prev = t.min(1.0);
    }
}

fn wasserstein_p_1d(m: &DiscreteMeasure, n: &DiscreteMeasure, p: i32) -> Result<f64> {
    let steps = [quantile_steps(m)?, quantile_steps(n)?];
    let mut total = 0.0;
    walk_segments(&steps, |dt, idx| {
        let gap = (steps[0].0[idx[0]] - steps[1].0[idx[1]]).abs();
        total += dt * gap.powi(p);
    });
    Ok(total)
}

/// Exact `W₂` between two 1D measures via the monotone (quantile) coupling.
pub fn wasserstein2_1d(m: &DiscreteMeasure, n: &DiscreteMeasure) -> Result<f64> {
    Ok(wasserstein_p_1d(m, n, 2)?.sqrt())
}

/// Exact `W₁` between two 1D measures (`L¹` distance of quantile functions).
pub fn wasserstein1_1d(m: &DiscreteMeasure, n: &DiscreteMeasure) -> Result<f64> {
    wasserstein_p_1d(m, n, 1)
}

/// Unregularized 1D Wasserstein barycenter: its quantile function is the
/// weighted average of the marginal quantile functions.
pub fn quantile_barycenter_1d(marginals: &[DiscreteMeasure], weights: &[f64]) -> Result<DiscreteMeasure> {
    if marginals.is_empty() {
        return Err(Error::invalid("quantile barycenter of an empty family"));
    }
    if weights.len() != marginals.len() {
        return Err(Error::invalid(format!("{} weights for {} marginals", weights.len(), marginals.len())));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("barycenter weights must be nonnegative and sum to 1"));
    }
    let steps = marginals.iter().map(quantile_steps).collect::<Result<Vec<_>>>()?;
    let mut xs: Vec<f64> = Vec::new();
    let mut ws: Vec<f64> = Vec::new();
    walk_segments(&steps, |dt, idx| {
        let x: f64 = steps.iter().zip(idx).zip(weights).map(|(((pos, _), &i), w)| w * pos[i]).sum();
        match xs.last() {
            Some(&last) if last == x => *ws.last_mut().unwrap() += dt,
            _ => {
                xs.push(x);
                ws.push(dt);
            }
        }
    });
    DiscreteMeasure::from_unnormalized(1, xs, ws)
}
