use std::f64::consts::PI;
use std::sync::Arc;

use crystal_core::grid::{Grid, NodeField};
use crystal_core::operators::Params;
use crystal_core::stationary::{
    claim32_assert, map_b, singular_tracker, solve_perturbed, solve_stationary, stationary_diagnostics,
    StationaryOptions,
};
use crystal_core::elliptic::SolverOptions;
use crystal_core::verification::{fj_generator, oracle_stationary_dense};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid1(cells: usize) -> Arc<Grid<f64>> {
    Arc::new(Grid::new(1, &[cells], &[1.0]).unwrap())
}

/// Data for which `u = cos(pi x)` solves the p = 2 problem on (0, 1):
/// `psi = (pi^2 + tau) cos(pi x)`, `f = -(e^psi)'' + tau psi + a u`.
fn manufactured(x: f64, a: f64, tau: f64) -> f64 {
    let k = PI * PI + tau;
    let (c, s) = ((PI * x).cos(), (PI * x).sin());
    let psi = k * c;
    let d1 = -k * PI * s;
    let d2 = -k * PI * PI * c;
    -psi.exp() * (d2 + d1 * d1) + tau * psi + a * c
}

#[test]
fn manufactured_p2_converges_at_second_order() {
    let (a, tau) = (1.0, 0.1);
    let params = Params::new(2.0, a, tau);
    let mut errors = Vec::new();
    for cells in [32, 64, 128, 256] {
        let g = grid1(cells);
        let f = NodeField::from_fn(g.clone(), |x| manufactured(x[0], a, tau));
        let exact = NodeField::from_fn(g, |x| (PI * x[0]).cos());
        let r = solve_stationary(&f, &params, &StationaryOptions::default()).unwrap();
        errors.push(r.state.u.max_abs_diff(&exact));
    }
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 1.9, "{errors:?}");
    }
}

#[test]
fn constant_data_reproduces_closed_form() {
    let g = grid1(16);
    let f = NodeField::constant(g, 1.0);
    let r = solve_stationary(&f, &Params::new(2.0, 1.0, 0.1), &StationaryOptions::default()).unwrap();
    let m = 1.0 / 1.01;
    for ((u, psi), rho) in r.state.u.values().iter().zip(r.state.psi.values()).zip(r.state.rho.values()) {
        assert!((u - m).abs() <= 1e-10);
        assert!((psi - 0.1 * m).abs() <= 1e-10);
        assert!((rho - 1.10408).abs() <= 1e-5);
    }
    let c = claim32_assert(&r.state, &f, &Params::new(2.0, 1.0, 0.1)).unwrap();
    // the constant state saturates the sup bound
    assert!(c.inf_slack.abs() <= 1e-10);
}

/// Dense Newton for `-Delta_p u + tau |u|^{p-2} u = g` on a uniform 1D grid,
/// started from the p = 2 solution.
fn dense_p_laplace(g: &[f64], p: f64, tau: f64) -> Vec<f64> {
    let n = g.len();
    let h = 1.0 / (n - 1) as f64;
    let w = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
    let sp = |x: f64, q: f64| x.abs().powf(q - 1.0) * x.signum();
    let residual = |u: &[f64], q: f64| -> Vec<f64> {
        let mut r: Vec<f64> = (0..n).map(|i| tau * sp(u[i], q) - g[i]).collect();
        for e in 0..n - 1 {
            let flux = sp((u[e + 1] - u[e]) / h, q);
            r[e] -= flux / w(e);
            r[e + 1] += flux / w(e + 1);
        }
        r
    };
    let jacobian = |u: &[f64], q: f64| -> Vec<Vec<f64>> {
        let mut j = vec![vec![0.0; n]; n];
        for i in 0..n {
            j[i][i] = tau * (q - 1.0) * u[i].abs().powf(q - 2.0);
        }
        for e in 0..n - 1 {
            let k = (q - 1.0) * ((u[e + 1] - u[e]) / h).abs().powf(q - 2.0) / h;
            for (i, s) in [(e, -1.0 / w(e)), (e + 1, 1.0 / w(e + 1))] {
                j[i][e] -= s * k;
                j[i][e + 1] += s * k;
            }
        }
        j
    };
    let norm = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut u = vec![0.0; n];
    for q in [2.0, p] {
        for _ in 0..100 {
            let r = residual(&u, q);
            if norm(&r) < 1e-14 {
                break;
            }
            let d = gauss(jacobian(&u, q), r.iter().map(|x| -x).collect());
            let mut t = 1.0;
            while t > 1e-12 {
                let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                if norm(&residual(&trial, q)) < norm(&r) {
                    u = trial;
                    break;
                }
                t *= 0.5;
            }
        }
    }
    u
}

/// Dense `tau psi - div(c(g) grad psi) = rhs`.
fn dense_weighted(g: &[f64], tau: f64, rhs: &[f64]) -> Vec<f64> {
    let n = g.len();
    let h = 1.0 / (n - 1) as f64;
    let w = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = tau;
    }
    for e in 0..n - 1 {
        let (x, y) = (g[e], g[e + 1]);
        let c = if x == y { x.exp() } else { (y.exp() - x.exp()) / (y - x) } / h;
        for (i, s) in [(e, 1.0 / w(e)), (e + 1, -1.0 / w(e + 1))] {
            a[i][e] += s * c;
            a[i][e + 1] -= s * c;
        }
    }
    gauss(a, rhs.to_vec())
}

fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= l * a[k][j];
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

#[test]
fn map_b_matches_dense_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let grid = grid1(4);
    for p in [1.5, 2.0] {
        for _ in 0..5 {
            let g: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let params = Params::new(p, 1.0, 0.5);
            let (u, psi) = map_b(
                &NodeField::new(grid.clone(), g.clone()).unwrap(),
                &NodeField::new(grid.clone(), f.clone()).unwrap(),
                &params,
                &SolverOptions::default(),
            )
            .unwrap();
            let u_ref = dense_p_laplace(&g, p, 0.5);
            let rhs: Vec<f64> = f.iter().zip(&u_ref).map(|(f, u)| f - u).collect();
            let psi_ref = dense_weighted(&g, 0.5, &rhs);
            let du = u.values().iter().zip(&u_ref).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            let dp = psi.values().iter().zip(&psi_ref).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(du <= 1e-9 && dp <= 1e-9, "p {p}: {du:e} {dp:e}");
        }
    }
}

#[test]
fn five_node_instances_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let grid = grid1(4);
    for _ in 0..5 {
        let f = NodeField::new(grid.clone(), (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let r = solve_stationary(&f, &Params::new(1.5, 1.0, 0.5), &StationaryOptions::default()).unwrap();
        let oracle = oracle_stationary_dense(&f, 1.5, 1.0, 0.5, 32, 1).unwrap();
        assert_eq!(oracle.distinct(), 1);
        let (_, gap) = oracle.closest(r.state.u.values()).unwrap();
        assert!(gap <= 1e-8, "{gap:e}");
    }
}

#[test]
fn perturbed_solver_regressions() {
    let g = grid1(32);
    let f = NodeField::from_fn(g.clone(), |x| (4.0 * x[0]).sin());
    let params = Params::new(1.5, 1.0, 0.1);
    let opts = StationaryOptions::default();
    let plain = solve_stationary(&f, &params, &opts).unwrap();
    let zero_eps = solve_perturbed(&f, &params.with_perturbation(0.0), &opts).unwrap();
    assert_eq!(plain.state.u.values(), zero_eps.state.u.values());
    let zero = NodeField::zeros(g);
    for eps in [0.1, 0.01] {
        let r = solve_perturbed(&zero, &params.with_perturbation(eps), &opts).unwrap();
        assert!(r.state.u.values().iter().chain(r.state.psi.values()).all(|x| *x == 0.0));
    }
}

#[test]
fn perturbation_control_stays_bounded() {
    let g = grid1(64);
    let f = NodeField::from_fn(g.clone(), |x| (2.0 * PI * x[0]).cos());
    let grad_f: f64 = (0..64).map(|i| (f.values()[i + 1] - f.values()[i]).abs().powf(1.5) * 64.0).sum::<f64>() / 64.0;
    let mut ratios = Vec::new();
    for eps in [1e-1, 1e-2, 1e-3] {
        let params = Params::new(1.5, 1.0, 0.1).with_perturbation(eps);
        let r = solve_perturbed(&f, &params, &StationaryOptions::default()).unwrap();
        let d = stationary_diagnostics(&r.state, &f, &params).unwrap();
        assert!(d.perturbation_control.is_finite() && d.perturbation_control >= 0.0);
        ratios.push(d.perturbation_control / grad_f);
    }
    // eps sum (Delta_p u)^2 shrinks with eps
    assert!(ratios.windows(2).all(|w| w[1] <= w[0]), "{ratios:?}");
}

#[test]
fn random_smooth_identities_and_claim32() {
    let g = grid1(64);
    let f = NodeField::from_fn(g, |x| (7.0 * x[0]).sin() + 0.3 * (3.0 * x[0]).cos());
    for p in [1.5, 2.0] {
        let params = Params::new(p, 1.0, 0.1);
        let r = solve_stationary(&f, &params, &StationaryOptions::default()).unwrap();
        let d = stationary_diagnostics(&r.state, &f, &params).unwrap();
        for gap in [d.identity_i1, d.identity_i2, d.identity_i3, d.identity_i4] {
            assert!(gap.abs() <= 1e-9, "{d:?}");
        }
        assert!(claim32_assert(&r.state, &f, &params).unwrap().pass);
    }
}

#[test]
fn fj_stress_stays_within_claim32() {
    let g = grid1(256);
    let f = fj_generator(10, g).unwrap();
    let params = Params::new(1.5, 1.0, 0.1);
    let r = solve_stationary(&f, &params, &StationaryOptions::default()).unwrap();
    let c = claim32_assert(&r.state, &f, &params).unwrap();
    assert!(c.min_slack() >= 0.0, "{c:?}");
    let s = singular_tracker(&r.state, 1e-8);
    assert!(s.psi_l1.is_finite());
}
