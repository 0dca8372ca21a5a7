use douba::eot::{solve_eot, SinkhornOptions};
use douba::measures::io::{read_measure, write_measure};
use douba::measures::{quantile_barycenter_1d, relative_entropy, wasserstein2_1d};
use douba::{BoxDomain, Cost, DiscreteMeasure, Grid};
use proptest::prelude::*;

fn line() -> impl Strategy<Value = DiscreteMeasure> {
    (1usize..=5)
        .prop_flat_map(|n| (prop::collection::vec(-3.0..3.0f64, n), prop::collection::vec(0.05..1.0f64, n)))
        .prop_map(|(x, w)| DiscreteMeasure::from_unnormalized(1, x, w).unwrap())
}

fn cloud(dim: usize) -> impl Strategy<Value = DiscreteMeasure> {
    (1usize..=6)
        .prop_flat_map(move |n| (prop::collection::vec(-3.0..3.0f64, n * dim), prop::collection::vec(0.05..1.0f64, n)))
        .prop_map(move |(x, w)| DiscreteMeasure::from_unnormalized(dim, x, w).unwrap())
}

fn osc(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gibbs_inequality(w in prop::collection::vec(0.01..1.0f64, 2..8), v in prop::collection::vec(0.01..1.0f64, 2..8)) {
        let n = w.len().min(v.len());
        let pts: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let a = DiscreteMeasure::from_unnormalized(1, pts.clone(), w[..n].to_vec()).unwrap();
        let b = DiscreteMeasure::from_unnormalized(1, pts, v[..n].to_vec()).unwrap();
        prop_assert!(relative_entropy(&a, &b).unwrap() >= 0.0);
        prop_assert_eq!(relative_entropy(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn w2_triangle_inequality(a in line(), b in line(), c in line()) {
        let ab = wasserstein2_1d(&a, &b).unwrap();
        let bc = wasserstein2_1d(&b, &c).unwrap();
        let ac = wasserstein2_1d(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-10);
    }

    #[test]
    fn quantile_barycenter_with_one_weight_is_that_marginal(a in line(), b in line(), k in 0usize..2) {
        let ms = [a, b];
        let w = if k == 0 { [1.0, 0.0] } else { [0.0, 1.0] };
        let bary = quantile_barycenter_1d(&ms, &w).unwrap();
        prop_assert!(wasserstein2_1d(&bary, &ms[k]).unwrap() <= 1e-12);
    }

    #[test]
    fn quantile_barycenter_beats_every_marginal(a in line(), b in line(), c in line(), t in 0.05..0.9f64) {
        let ms = [a, b, c];
        let w = [t * 0.5, t * 0.5, 1.0 - t];
        let objective = |m: &DiscreteMeasure| -> f64 {
            ms.iter().zip(&w).map(|(n, wk)| 0.5 * wk * wasserstein2_1d(m, n).unwrap().powi(2)).sum()
        };
        let bary = quantile_barycenter_1d(&ms, &w).unwrap();
        let best = objective(&bary);
        for m in &ms {
            prop_assert!(best <= objective(m) + 1e-12);
        }
    }

    #[test]
    fn csv_round_trip_is_exact(m in cloud(2)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_measure(&path, &m).unwrap();
        let back = read_measure(&path).unwrap();
        prop_assert_eq!(back.coords(), m.coords());
        for (a, b) in back.weights().iter().zip(m.weights()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn eot_is_symmetric_and_potentials_are_bounded(mu in cloud(2), nu in cloud(2), lambda in 0.05..2.0f64) {
        let opts = SinkhornOptions::new(1e-11, 100_000);
        let ab = solve_eot(&mu, &nu, lambda, &Cost::SquaredHalf, &opts).unwrap();
        let ba = solve_eot(&nu, &mu, lambda, &Cost::SquaredHalf, &opts).unwrap();
        prop_assert!((ab.cost - ba.cost).abs() <= 1e-9);
        let c = Cost::SquaredHalf.matrix(2, mu.coords(), nu.coords());
        let c_osc = osc(c.as_slice().unwrap());
        prop_assert!(osc(&ab.potentials.phi) <= c_osc + 1e-9);
        prop_assert!(osc(&ab.potentials.psi) <= c_osc + 1e-9);
    }
}

#[test]
fn grid_measure_round_trip_keeps_the_grid() {
    let grid = Grid::new(BoxDomain::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap(), vec![4, 3]).unwrap();
    let m = grid.discretize(|x| 1.0 + x[0] * x[0] + x[1]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    write_measure(&path, &m).unwrap();
    let back = read_measure(&path).unwrap();
    assert_eq!(back.grid(), Some(&grid));
    assert_eq!(back.coords(), m.coords());
}
