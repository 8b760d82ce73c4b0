//! Implicit time stepping of the crystal-surface flow
//!
//! ```text
//! (u_k - u_{k-1}) / delta - Delta_h exp(psi_k) + delta psi_k = 0,
//! psi_k = -Delta_p u_k + delta |u_k|^{p-2} u_k,
//! ```
//!
//! with a per-step ledger of the discrete energy inequality
//! `E_{k-1} - E_k >= delta D_k`, and the linearized flow
//! `(u_k - u_{k-1}) / delta = -Delta_h Delta_p u_k`.

use std::fmt;
use std::sync::Arc;

use crate::coupled::Coupled;
use crate::elliptic::{SolverOptions, Termination};
use crate::error::{Error, Result};
use crate::grid::{Grid, NodeField};
use crate::operators::{check_p, lp_power_sum, p_energy_slice, Params};
use crate::scalar::Scalar;
use crate::stationary::{singular_tracker, SingularReport, StationaryState, DEFAULT_EPS_SING};

/// Smallest substep, as a fraction of the nominal step.
pub const SUBSTEP_DEPTH: u32 = 10;
/// Ledger slack per unit of `residual * field scale`.
pub const LEDGER_SLACK_FACTOR: f64 = 10.0;
/// Ledger slack in ulps of `E_{k-1} + E_k + delta D_k`: the rounding floor
/// of the gap itself, which binds once the residual reaches zero.
pub const LEDGER_ROUNDOFF_ULPS: f64 = 64.0;
/// `p_energy` below which the linearized flow counts as extinct.
pub const EXTINCTION_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig<T> {
    pub final_time: T,
    pub steps: usize,
}

impl<T: Scalar> EvolutionConfig<T> {
    pub fn new(final_time: T, steps: usize) -> Result<Self> {
        let c = Self { final_time, steps };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.final_time > T::zero()) || !self.final_time.is_finite() {
            return Err(Error::InvalidParameter(format!("final time {} must be positive", self.final_time)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidParameter("at least one step is required".into()));
        }
        Ok(())
    }

    pub fn delta(&self) -> T {
        self.final_time / T::from_usize_lossy(self.steps)
    }
}

/// `E = (1/p) sum |grad u|^p + (delta/p) sum |u|^p`.
pub fn step_energy<T: Scalar>(u: &NodeField<T>, p: T, delta: T) -> T {
    let g = u.grid();
    p_energy_slice(g, u.values(), p) + delta * lp_power_sum(g, u.values(), p) / p
}

/// `D = 4 sum |grad exp(psi/2)|^2 + delta sum psi^2`.
pub fn step_dissipation<T: Scalar>(psi: &NodeField<T>, delta: T) -> T {
    let g = psi.grid();
    let half: Vec<T> = psi.values().iter().map(|s| (*s * T::lit(0.5)).exp()).collect();
    let grad = g.gradient_slice(&half);
    T::lit(4.0) * g.edge_inner_slice(&grad, &grad) + delta * g.inner_slice(psi.values(), psi.values())
}

/// Outcome of one time step.
#[derive(Debug, Clone)]
pub struct StepResult<T> {
    pub state: StationaryState<T>,
    /// Residual of the last (sub)step solve.
    pub residual: T,
    /// `||psi||`, the field size the residual is paired with.
    pub field_scale: T,
    /// Dissipation, averaged over substeps with their lengths as weights.
    pub dissipation: T,
    /// Number of solves the step was split into; 1 without substepping.
    pub substeps: usize,
    pub iterations: usize,
    pub termination: Termination,
}

/// One implicit step of length `delta` from `u_prev`. A failed solve is
/// retried as two half steps, recursively down to `delta / 1024`.
pub fn evolve_step<T: Scalar>(
    u_prev: &NodeField<T>,
    delta: T,
    params: &Params<T>,
    opts: &SolverOptions<T>,
) -> Result<StepResult<T>> {
    check_p(params.p, params.experimental)?;
    opts.validate()?;
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("time step {delta} must be positive")));
    }
    if !u_prev.is_finite() {
        return Err(Error::NonFinite("previous height"));
    }
    let floor = delta / T::from_usize_lossy(1 << SUBSTEP_DEPTH);
    let mut acc = Accumulator { dissipation: T::zero(), substeps: 0, iterations: 0, last: None };
    let u = advance(u_prev.grid(), u_prev.values().to_vec(), delta, delta, floor, params, opts, &mut acc)?;
    let (psi, residual, termination) = acc.last.expect("at least one solve");
    let grid = u_prev.grid();
    let psi = NodeField::from_vec_unchecked(grid.clone(), psi);
    let rho = psi.map(|s| s.exp());
    let field_scale = psi.norm(T::lit(2.0));
    Ok(StepResult {
        state: StationaryState { u: NodeField::from_vec_unchecked(grid.clone(), u), psi, rho },
        residual,
        field_scale,
        dissipation: acc.dissipation / delta,
        substeps: acc.substeps,
        iterations: acc.iterations,
        termination,
    })
}

struct Accumulator<T> {
    /// Sum of `delta_s D_s` over completed substeps.
    dissipation: T,
    substeps: usize,
    iterations: usize,
    last: Option<(Vec<T>, T, Termination)>,
}

#[allow(clippy::too_many_arguments)]
fn advance<T: Scalar>(
    grid: &Arc<Grid<T>>,
    u_prev: Vec<T>,
    delta: T,
    nominal: T,
    floor: T,
    params: &Params<T>,
    opts: &SolverOptions<T>,
    acc: &mut Accumulator<T>,
) -> Result<Vec<T>> {
    // solve for the deviation from the mean: near extinction the height is
    // a constant plus differences of a few ulps of that constant
    let shift = grid.integrate_slice(&u_prev) / grid.measure();
    let data: Vec<T> = u_prev.iter().map(|x| *x - shift).collect();
    let prob = Coupled {
        grid,
        p: params.p,
        tau_u: delta,
        kappa: delta,
        tau_psi: delta * delta,
        a: T::one(),
        eps_perturb: T::zero(),
        f: &data,
        exponential: true,
        shift,
    };
    // psi(u_prev) is unbounded near flat Neumann ends for p < 2, so a
    // start from u_prev can sit at exp-overflow scale; the constant start
    // with p-continuation does not depend on it
    let solved = prob
        .solve_robust(Some(data.clone()), opts, params.eps_reg)
        .or_else(|_| prob.solve_robust(None, opts, params.eps_reg));
    match solved {
        Ok(mut out) => {
            out.u.iter_mut().for_each(|x| *x += shift);
            let psi = NodeField::from_vec_unchecked(grid.clone(), out.eval.psi.clone());
            acc.dissipation += delta * step_dissipation(&psi, delta);
            acc.substeps += 1;
            acc.iterations += out.iterations;
            acc.last = Some((out.eval.psi, out.eval.norm, out.termination));
            Ok(out.u)
        }
        Err(_) if delta * T::lit(0.5) >= floor => {
            let half = delta * T::lit(0.5);
            let mid = advance(grid, u_prev, half, nominal, floor, params, opts, acc)?;
            advance(grid, mid, half, nominal, floor, params, opts, acc)
        }
        Err(_) => Err(Error::SubstepFloor { delta: (delta * T::lit(0.5)).as_f64(), floor: floor.as_f64() }),
    }
}

/// One row of the dissipation ledger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow<T> {
    pub k: usize,
    pub t: T,
    pub delta: T,
    pub energy: T,
    pub dissipation: T,
    /// `E_{k-1} - E_k - delta D_k`.
    pub gap: T,
    pub residual: T,
    /// Allowed negative gap: `10 * residual * ||psi_k||` plus the rounding
    /// floor of the gap.
    pub slack: T,
    /// `sum u_k - sum u_{k-1} + delta^2 sum psi_k`.
    pub mass_gap: T,
    /// `sum u_k - sum u_0`, reported only.
    pub mass_drift: T,
    pub min_rho: T,
    pub sing_frac: T,
    pub substeps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepLedger<T> {
    /// Energy of the initial height.
    pub initial_energy: T,
    pub rows: Vec<LedgerRow<T>>,
}

#[derive(Debug, Clone)]
pub struct EvolutionRun<T> {
    /// Heights `u_0, ..., u_k`.
    pub trajectory: Vec<NodeField<T>>,
    /// States `(u_k, psi_k, rho_k)` for `k >= 1`.
    pub states: Vec<StationaryState<T>>,
    pub ledger: StepLedger<T>,
}

/// A failed run with everything computed before the failure.
#[derive(Debug, Clone)]
pub struct EvolutionFailure<T> {
    pub error: Error,
    pub partial: EvolutionRun<T>,
}

impl<T> fmt::Display for EvolutionFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} completed steps)", self.error, self.partial.ledger.rows.len())
    }
}

impl<T: fmt::Debug> std::error::Error for EvolutionFailure<T> {}

impl<T> From<EvolutionFailure<T>> for Error {
    fn from(f: EvolutionFailure<T>) -> Self {
        f.error
    }
}

pub fn run_evolution<T: Scalar>(
    u0: &NodeField<T>,
    config: &EvolutionConfig<T>,
    params: &Params<T>,
    opts: &SolverOptions<T>,
) -> std::result::Result<EvolutionRun<T>, EvolutionFailure<T>> {
    run_evolution_with(u0, config, params, opts, T::lit(DEFAULT_EPS_SING))
}

/// As [`run_evolution`] with a custom singular threshold.
pub fn run_evolution_with<T: Scalar>(
    u0: &NodeField<T>,
    config: &EvolutionConfig<T>,
    params: &Params<T>,
    opts: &SolverOptions<T>,
    eps_sing: T,
) -> std::result::Result<EvolutionRun<T>, EvolutionFailure<T>> {
    let delta = config.delta();
    let mut run = EvolutionRun {
        trajectory: vec![u0.clone()],
        states: Vec::new(),
        ledger: StepLedger { initial_energy: step_energy(u0, params.p, delta), rows: Vec::new() },
    };
    if let Err(error) = config.validate() {
        return Err(EvolutionFailure { error, partial: run });
    }
    let g = u0.grid();
    let mass0 = g.integrate_slice(u0.values());
    let mut prev_energy = run.ledger.initial_energy;
    for k in 1..=config.steps {
        let u_prev = run.trajectory.last().expect("nonempty trajectory");
        let step = match evolve_step(u_prev, delta, params, opts) {
            Ok(s) => s,
            Err(error) => return Err(EvolutionFailure { error, partial: run }),
        };
        let energy = step_energy(&step.state.u, params.p, delta);
        let mass_prev = g.integrate_slice(u_prev.values());
        let mass = g.integrate_slice(step.state.u.values());
        let tracker = singular_tracker(&step.state, eps_sing);
        run.ledger.rows.push(LedgerRow {
            k,
            t: delta * T::from_usize_lossy(k),
            delta,
            energy,
            dissipation: step.dissipation,
            gap: prev_energy - energy - delta * step.dissipation,
            residual: step.residual,
            slack: T::lit(LEDGER_SLACK_FACTOR) * step.residual * step.field_scale
                + T::lit(LEDGER_ROUNDOFF_ULPS)
                    * T::eps()
                    * (prev_energy.abs() + energy.abs() + delta * step.dissipation.abs()),
            mass_gap: mass - mass_prev + delta * delta * g.integrate_slice(step.state.psi.values()),
            mass_drift: mass - mass0,
            min_rho: tracker.min_rho,
            sing_frac: tracker.low_fraction,
            substeps: step.substeps,
        });
        prev_energy = energy;
        run.trajectory.push(step.state.u.clone());
        run.states.push(step.state);
    }
    Ok(run)
}

/// Singular tracker applied to every step of a run.
pub fn singular_series<T: Scalar>(run: &EvolutionRun<T>, eps_sing: T) -> Vec<SingularReport<T>> {
    run.states.iter().map(|s| singular_tracker(s, eps_sing)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerCheck<T> {
    pub pass: bool,
    /// First step whose inequality fails.
    pub first_violation: Option<usize>,
    /// Smallest `gap + slack` over all steps.
    pub worst_margin: T,
    /// Energies never increase.
    pub energy_nonincreasing: bool,
}

/// Checks `E_{k-1} - E_k >= delta D_k - slack_k`, recomputing the gap from
/// the stored energies.
pub fn dissipation_ledger_check<T: Scalar>(ledger: &StepLedger<T>) -> LedgerCheck<T> {
    let mut prev = ledger.initial_energy;
    let mut first_violation = None;
    let mut worst_margin = T::infinity();
    let mut energy_nonincreasing = true;
    for row in &ledger.rows {
        let margin = prev - row.energy - row.delta * row.dissipation + row.slack;
        if !(margin >= T::zero()) && first_violation.is_none() {
            first_violation = Some(row.k);
        }
        if row.energy > prev {
            energy_nonincreasing = false;
        }
        worst_margin = worst_margin.min(margin);
        prev = row.energy;
    }
    if ledger.rows.is_empty() {
        worst_margin = T::zero();
    }
    LedgerCheck { pass: first_violation.is_none(), first_violation, worst_margin, energy_nonincreasing }
}

// ---- linearized flow ----

#[derive(Debug, Clone)]
pub struct LinearizedRun<T> {
    pub trajectory: Vec<NodeField<T>>,
    /// `p_energy(u_k)` for `k = 0, 1, ...`.
    pub energies: Vec<T>,
    pub residuals: Vec<T>,
    /// First step with `p_energy <= 1e-12`; qualitative only.
    pub extinction_step: Option<usize>,
}

/// Backward Euler for `u_t = -Delta_h Delta_p u`.
pub fn linearized_evolve<T: Scalar>(
    u0: &NodeField<T>,
    config: &EvolutionConfig<T>,
    p: T,
    opts: &SolverOptions<T>,
) -> Result<LinearizedRun<T>> {
    config.validate()?;
    check_p(p, false)?;
    opts.validate()?;
    if !u0.is_finite() {
        return Err(Error::NonFinite("initial height"));
    }
    let g = u0.grid();
    let delta = config.delta();
    let energy = |u: &[T]| p_energy_slice(g, u, p);
    let mut run = LinearizedRun {
        trajectory: vec![u0.clone()],
        energies: vec![energy(u0.values())],
        residuals: Vec::new(),
        extinction_step: None,
    };
    let threshold = T::lit(EXTINCTION_THRESHOLD);
    if run.energies[0] <= threshold {
        run.extinction_step = Some(0);
    }
    for k in 1..=config.steps {
        let last = run.trajectory.last().expect("nonempty trajectory").values();
        let shift = g.integrate_slice(last) / g.measure();
        let u_prev: Vec<T> = last.iter().map(|x| *x - shift).collect();
        let prob = Coupled {
            grid: g,
            p,
            tau_u: T::zero(),
            kappa: delta,
            tau_psi: T::zero(),
            a: T::one(),
            eps_perturb: T::zero(),
            f: &u_prev,
            exponential: false,
            shift,
        };
        let mut out = prob.solve_robust(Some(u_prev.clone()), opts, T::lit(crate::elliptic::EPS_REG_FLOOR)).map_err(|f| f.error)?;
        out.u.iter_mut().for_each(|x| *x += shift);
        let e = energy(&out.u);
        if e <= threshold && run.extinction_step.is_none() {
            run.extinction_step = Some(k);
        }
        run.energies.push(e);
        run.residuals.push(out.eval.norm);
        run.trajectory.push(NodeField::from_vec_unchecked(g.clone(), out.u));
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(cells: usize) -> Arc<Grid<f64>> {
        Arc::new(Grid::new(1, &[cells], &[1.0]).unwrap())
    }

    #[test]
    fn zero_is_a_steady_state() {
        let g = grid(8);
        let u0 = NodeField::zeros(g);
        let cfg = EvolutionConfig::new(0.1, 5).unwrap();
        let run = run_evolution(&u0, &cfg, &Params::new(1.5, 1.0, 0.1), &SolverOptions::default()).unwrap();
        for row in &run.ledger.rows {
            assert_eq!((row.energy, row.dissipation - 4.0 * 0.0, row.gap, row.mass_gap), (0.0, 0.0, 0.0, 0.0));
        }
        assert!(run.trajectory.iter().all(|u| u.values().iter().all(|x| *x == 0.0)));
    }

    #[test]
    fn constant_height_matches_scalar_root() {
        let g = grid(6);
        let m = 0.7;
        let delta: f64 = 0.2;
        let p: f64 = 1.5;
        let step = evolve_step(&NodeField::constant(g, m), delta, &Params::new(p, 1.0, 0.1), &SolverOptions::default()).unwrap();
        // u = m - delta^3 |u|^{p-2} u, by bisection
        let h = |u: f64| u + delta.powi(3) * u.abs().powf(p - 2.0) * u - m;
        let (mut lo, mut hi) = (0.0, m);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 { hi = mid } else { lo = mid }
        }
        assert!(step.state.u.values().iter().all(|u| (u - lo).abs() < 1e-12));
    }

    #[test]
    fn corrupted_ledger_fails_at_injected_step() {
        let g = grid(32);
        let u0 = NodeField::from_fn(g, |x: [f64; 2]| (std::f64::consts::PI * x[0]).cos());
        let cfg = EvolutionConfig::new(0.01, 8).unwrap();
        let run = run_evolution(&u0, &cfg, &Params::new(2.0, 1.0, 0.1), &SolverOptions::default()).unwrap();
        assert!(dissipation_ledger_check(&run.ledger).pass);
        let mut bad = run.ledger.clone();
        bad.rows[4].energy += 1.0;
        assert_eq!(dissipation_ledger_check(&bad).first_violation, Some(5));
        let empty = StepLedger { initial_energy: 0.0, rows: Vec::new() };
        assert!(dissipation_ledger_check(&empty).pass);
    }
}
