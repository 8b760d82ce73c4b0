use std::sync::Arc;

use crystal_core::grid::{divergence, gradient, integrate, laplacian, EdgeField, Grid, NodeField};
use crystal_core::operators::{exp_divided_difference, gradient_power_quadrature, p_energy, p_laplacian_apply, weighted_laplacian_apply};
use crystal_core::verification::energy_gradient_check;
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = Arc<Grid<f64>>> {
    prop_oneof![
        (1usize..40, 0.2f64..5.0).prop_map(|(n, l)| Arc::new(Grid::new(1, &[n], &[l]).unwrap())),
        (1usize..9, 1usize..9, 0.2f64..5.0, 0.2f64..5.0)
            .prop_map(|(nx, ny, lx, ly)| Arc::new(Grid::new(2, &[nx, ny], &[lx, ly]).unwrap())),
    ]
}

/// Grid with a node field and an edge field drawn from `[-1, 1]`.
fn grid_with_fields() -> impl Strategy<Value = (Arc<Grid<f64>>, Vec<f64>, Vec<f64>)> {
    grid_strategy().prop_flat_map(|g| {
        let n = g.node_count();
        let m = g.edge_count();
        (Just(g), prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, m))
    })
}

fn grid_with_two_node_fields() -> impl Strategy<Value = (Arc<Grid<f64>>, Vec<f64>, Vec<f64>)> {
    grid_strategy().prop_flat_map(|g| {
        let n = g.node_count();
        (Just(g), prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn summation_by_parts_is_exact((g, u, f) in grid_with_fields()) {
        let u = NodeField::new(g.clone(), u).unwrap();
        let flux = EdgeField::new(g, f).unwrap();
        let lhs = divergence(&flux).inner(&u).unwrap();
        let rhs = -flux.inner(&gradient(&u)).unwrap();
        let scale = 1.0 + lhs.abs().max(rhs.abs());
        prop_assert!((lhs - rhs).abs() <= 1e-13 * scale, "{lhs} vs {rhs}");
    }

    #[test]
    fn divergence_integrates_to_zero((g, _u, f) in grid_with_fields()) {
        let flux = EdgeField::new(g, f).unwrap();
        let div = divergence(&flux);
        let mag: f64 = div.values().iter().map(|v| v.abs()).sum::<f64>() * div.grid().measure();
        prop_assert!(integrate(&div).abs() <= 1e-13 * (1.0 + mag));
    }

    #[test]
    fn gradient_of_constant_is_bitwise_zero(g in grid_strategy(), c in -1e6f64..1e6) {
        let grad = gradient(&NodeField::constant(g, c));
        prop_assert!(grad.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn p_laplacian_pairing_and_conservation((g, u, _f) in grid_with_fields(), p in 1.05f64..2.0) {
        let u = NodeField::new(g, u).unwrap();
        let lap = p_laplacian_apply(&u, p).unwrap();
        // <-Delta_p u, u> = p E(u)
        let pairing = -lap.inner(&u).unwrap();
        let energy = p_energy(&u, p).unwrap();
        prop_assert!((pairing - p * energy).abs() <= 1e-12 * (1.0 + pairing.abs()));
        let mag: f64 = lap.values().iter().map(|v| v.abs()).sum::<f64>() * lap.grid().measure();
        prop_assert!(integrate(&lap).abs() <= 1e-12 * (1.0 + mag));
    }

    #[test]
    fn p_laplacian_is_symmetric_for_p_two((g, u, v) in grid_with_two_node_fields()) {
        let u = NodeField::new(g.clone(), u).unwrap();
        let v = NodeField::new(g, v).unwrap();
        let a = p_laplacian_apply(&u, 2.0).unwrap().inner(&v).unwrap();
        let b = p_laplacian_apply(&v, 2.0).unwrap().inner(&u).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn weighted_laplacian_at_psi_equal_g_is_plain_laplacian_of_exp((g, u, _f) in grid_with_fields()) {
        let psi = NodeField::new(g, u.iter().map(|x| 3.0 * x).collect()).unwrap();
        let weighted = weighted_laplacian_apply(&psi, &psi).unwrap();
        let plain = laplacian(&psi.map(f64::exp));
        let scale = plain.values().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(weighted.max_abs_diff(&plain) <= 1e-13 * scale);
    }

    #[test]
    fn energy_gradient_matches_pairing((g, _u, v) in grid_with_two_node_fields(), p in 1.3f64..2.0) {
        // perturbation differences stay below 0.02 < the slope, so every gradient is away from 0
        let h = g.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
        let slope = NodeField::from_fn(g.clone(), |x| 2.0 * x[0] + x[1]);
        let u = NodeField::new(g.clone(), slope.values().iter().zip(&v).map(|(a, b)| a + 0.01 * h * b).collect()).unwrap();
        let v = NodeField::new(g, v).unwrap();
        let check = energy_gradient_check(&u, p, &v, 1e-5).unwrap();
        // Hoelder bound on |DE(u)[v]|; unlike the pairing itself it cannot cancel
        let bound = gradient_power_quadrature(&u, p).unwrap().powf((p - 1.0) / p)
            * gradient_power_quadrature(&v, p).unwrap().powf(1.0 / p);
        prop_assert!(check.pairing.abs() <= bound * (1.0 + 1e-12), "{check:?} {bound:e}");
        prop_assert!((check.finite_difference - check.pairing).abs() <= 1e-5 * bound, "{check:?} {bound:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn divided_difference_is_positive(a in -700.0f64..700.0, b in -700.0f64..700.0) {
        let c = exp_divided_difference(a, b);
        prop_assert!(c > 0.0 && c.is_finite());
    }
}

#[test]
fn divided_difference_on_single_edge() {
    // (4 - 1) / ln 4
    let c = exp_divided_difference(0.0, 4f64.ln());
    assert!((c - 3.0 / 4f64.ln()).abs() < 1e-15);
    assert!((c - 2.16404).abs() < 1e-5);
}
