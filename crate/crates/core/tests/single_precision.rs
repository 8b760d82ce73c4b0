use std::sync::Arc;

use crystal_core::elliptic::SolverOptions;
use crystal_core::evolution::evolve_step;
use crystal_core::grid::{Grid, NodeField};
use crystal_core::operators::Params;
use crystal_core::stationary::{solve_stationary, StationaryOptions};

fn data<T: crystal_core::Scalar>(cells: usize) -> NodeField<T> {
    let g = Arc::new(Grid::<T>::new(1, &[cells], &[T::one()]).unwrap());
    NodeField::from_fn(g, |x| T::lit((5.0 * x[0].as_f64()).sin()))
}

#[test]
fn f32_stationary_solve_tracks_f64() {
    let wide = solve_stationary(&data::<f64>(32), &Params::new(1.5, 1.0, 0.1), &StationaryOptions::default()).unwrap();
    let opts = StationaryOptions::<f32>::default().with_tol(1e-5);
    let narrow = solve_stationary(&data::<f32>(32), &Params::new(1.5, 1.0, 0.1), &opts).unwrap();
    let gap = wide.state.u.values().iter().zip(narrow.state.u.values()).fold(0.0f64, |m, (a, b)| m.max((a - *b as f64).abs()));
    assert!(gap <= 1e-3, "{gap:e}");
}

#[test]
fn f32_time_step_conserves_mass_to_single_precision() {
    let u = data::<f32>(32);
    let opts = SolverOptions { tol: 1e-5, ..SolverOptions::default() };
    let step = evolve_step(&u, 1e-3, &Params::new(2.0, 1.0, 0.1), &opts).unwrap();
    let mass = |v: &NodeField<f32>| crystal_core::grid::integrate(v) as f64;
    let psi = crystal_core::grid::integrate(&step.state.psi) as f64;
    let gap = mass(&step.state.u) - mass(&u) + 1e-6 * psi;
    assert!(gap.abs() <= 1e-5, "{gap:e}");
}
