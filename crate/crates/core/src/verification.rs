//! Independent checks: a dense oracle for small stationary and time-step
//! systems, the elementary inequality kernels, a gradient check of the
//! surface energy and the piecewise-linear counterexample data `f_j`.
//!
//! The oracle assembles its residual from the grid geometry alone and solves
//! with its own dense elimination, so it shares no operator code with the
//! production solvers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Grid, NodeField};
use crate::operators::{p_energy, p_laplacian_apply};
use crate::scalar::Scalar;
use crate::stationary::{DEFAULT_SEED, DISTINCT_GAP};

/// Largest node count the oracle accepts.
pub const ORACLE_MAX_NODES: usize = 6;
/// Minimum number of random starts.
pub const ORACLE_MIN_STARTS: usize = 32;
const ORACLE_MAX_ITERATIONS: usize = 200;
const ORACLE_TOL: f64 = 1e-13;
const ROUNDOFF_ULPS: f64 = 1024.0;

/// Coupled system
/// `kappa (-Delta exp(psi)) + tau_psi psi + a u - f = 0`,
/// `psi + Delta_p u - tau_u |u|^{p-2} u = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSystem<T> {
    pub p: T,
    pub kappa: T,
    pub tau_psi: T,
    pub a: T,
    pub tau_u: T,
}

impl<T: Scalar> OracleSystem<T> {
    /// The stationary problem.
    pub fn stationary(p: T, a: T, tau: T) -> Self {
        Self { p, kappa: T::one(), tau_psi: tau, a, tau_u: tau }
    }

    /// One implicit time step of length `delta`, with `f = u_prev`.
    pub fn time_step(p: T, delta: T) -> Self {
        Self { p, kappa: delta, tau_psi: delta * delta, a: T::one(), tau_u: delta }
    }
}

#[derive(Debug, Clone)]
pub struct OracleSolution<T> {
    pub u: Vec<T>,
    pub psi: Vec<T>,
    /// Max-norm residual of the full system.
    pub residual: T,
    /// Number of starts that converged to this solution.
    pub hits: usize,
}

#[derive(Debug, Clone)]
pub struct OracleResult<T> {
    /// Pairwise distinct solutions, most frequently reached first.
    pub solutions: Vec<OracleSolution<T>>,
    pub starts: usize,
    pub converged_starts: usize,
}

impl<T: Scalar> OracleResult<T> {
    pub fn distinct(&self) -> usize {
        self.solutions.len()
    }

    /// Solution closest to `u` in max norm, with the distance.
    pub fn closest(&self, u: &[T]) -> Option<(&OracleSolution<T>, T)> {
        self.solutions
            .iter()
            .map(|s| (s, max_diff(&s.u, u)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    }
}

fn max_diff<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

/// Dense multi-start Newton on the stationary system in all `2N` unknowns.
pub fn oracle_stationary_dense<T: Scalar>(
    f: &NodeField<T>,
    p: T,
    a: T,
    tau: T,
    starts: usize,
    seed: u64,
) -> Result<OracleResult<T>> {
    oracle_dense(f, &OracleSystem::stationary(p, a, tau), starts, seed)
}

/// Dense multi-start Newton on any instance of the coupled system.
pub fn oracle_dense<T: Scalar>(
    f: &NodeField<T>,
    sys: &OracleSystem<T>,
    starts: usize,
    seed: u64,
) -> Result<OracleResult<T>> {
    let g = f.grid();
    let n = g.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(Error::InvalidParameter(format!("oracle accepts at most {ORACLE_MAX_NODES} nodes, got {n}")));
    }
    if !(sys.p > T::one()) {
        return Err(Error::InvalidParameter(format!("p = {} must exceed 1", sys.p)));
    }
    if !f.is_finite() {
        return Err(Error::NonFinite("oracle data"));
    }
    let starts = starts.max(ORACLE_MIN_STARTS);
    let f = f.values();
    let fmax = f.iter().fold(0.0f64, |m, x| m.max(x.as_f64().abs()));
    let spread = 1.0 + fmax / sys.a.as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solutions: Vec<OracleSolution<T>> = Vec::new();
    let mut converged_starts = 0;
    for s in 0..starts {
        let mut x = vec![T::zero(); 2 * n];
        if s > 0 {
            for (i, xi) in x.iter_mut().enumerate() {
                let r: f64 = rng.gen_range(-1.0..=1.0);
                *xi = T::lit(if i < n { r * spread } else { r });
            }
        }
        let Some((x, res)) = newton(g, sys, f, x) else { continue };
        converged_starts += 1;
        let (u, psi) = x.split_at(n);
        match solutions.iter_mut().find(|sol| max_diff(&sol.u, u).as_f64() <= DISTINCT_GAP) {
            Some(sol) => sol.hits += 1,
            None => solutions.push(OracleSolution { u: u.to_vec(), psi: psi.to_vec(), residual: res, hits: 1 }),
        }
    }
    if solutions.is_empty() {
        return Err(Error::NotConverged { solver: "dense oracle", iterations: ORACLE_MAX_ITERATIONS, residual: f64::NAN });
    }
    solutions.sort_by(|a, b| b.hits.cmp(&a.hits));
    Ok(OracleResult { solutions, starts, converged_starts })
}

/// Full residual `[R1; R2]` and the magnitude of its terms.
fn system_residual<T: Scalar>(g: &Grid<T>, sys: &OracleSystem<T>, f: &[T], x: &[T]) -> (Vec<T>, T) {
    let n = g.node_count();
    let (u, psi) = x.split_at(n);
    let w = g.node_weights();
    let two = T::lit(2.0);
    // -Delta exp(psi) and -Delta_p u, both as (W-scaled) energy gradients
    let rho: Vec<T> = psi.iter().map(|s| s.exp()).collect();
    let mut lap = vec![T::zero(); n];
    let mut plap = vec![T::zero(); n];
    let mut mag = T::zero();
    for (e, we) in g.edges().iter().zip(g.edge_weights()) {
        let h = g.spacing()[e.axis];
        let q = *we * (rho[e.head] - rho[e.tail]) / (h * h);
        lap[e.tail] -= q;
        lap[e.head] += q;
        mag = mag.max(*we * (rho[e.head] + rho[e.tail]) / (h * h * w[e.tail].min(w[e.head])));
    }
    let mu = g.corner_weight();
    for c in g.corners() {
        let comps: Vec<_> = c.edges[..g.dim()].iter().map(|&k| g.edges()[k]).collect();
        let gv: Vec<T> = comps.iter().map(|e| (u[e.head] - u[e.tail]) / g.spacing()[e.axis]).collect();
        let sq = gv.iter().fold(T::zero(), |s, v| s + *v * *v);
        if sq == T::zero() {
            continue;
        }
        let weight = mu * sq.powf((sys.p - two) / two);
        for (e, gk) in comps.iter().zip(&gv) {
            let flux = weight * *gk / g.spacing()[e.axis];
            plap[e.head] += flux;
            plap[e.tail] -= flux;
        }
    }
    let mut r = vec![T::zero(); 2 * n];
    for i in 0..n {
        let zeroth = if u[i] == T::zero() { T::zero() } else { sys.tau_u * u[i].abs().powf(sys.p - two) * u[i] };
        r[i] = sys.kappa * lap[i] / w[i] + sys.tau_psi * psi[i] + sys.a * u[i] - f[i];
        r[n + i] = psi[i] - plap[i] / w[i] - zeroth;
        mag = mag.max(f[i].abs()).max(psi[i].abs()).max(sys.a * u[i].abs());
    }
    (r, mag)
}

/// Jacobian of [`system_residual`] in the unknowns `(u, psi)`.
fn system_jacobian<T: Scalar>(g: &Grid<T>, sys: &OracleSystem<T>, x: &[T]) -> Vec<Vec<T>> {
    let n = g.node_count();
    let (u, psi) = x.split_at(n);
    let w = g.node_weights();
    let two = T::lit(2.0);
    let mut jac = vec![vec![T::zero(); 2 * n]; 2 * n];
    for (e, we) in g.edges().iter().zip(g.edge_weights()) {
        let h = g.spacing()[e.axis];
        for (j, sign) in [(e.head, T::one()), (e.tail, -T::one())] {
            let d = sign * *we * psi[j].exp() / (h * h);
            jac[e.tail][n + j] -= sys.kappa * d / w[e.tail];
            jac[e.head][n + j] += sys.kappa * d / w[e.head];
        }
    }
    let mu = g.corner_weight();
    for c in g.corners() {
        let comps: Vec<_> = c.edges[..g.dim()].iter().map(|&k| g.edges()[k]).collect();
        let gv: Vec<T> = comps.iter().map(|e| (u[e.head] - u[e.tail]) / g.spacing()[e.axis]).collect();
        let sq = gv.iter().fold(T::zero(), |s, v| s + *v * *v);
        if sq == T::zero() {
            continue;
        }
        let base = mu * sq.powf((sys.p - two) / two);
        let rank1 = (sys.p - two) * mu * sq.powf((sys.p - T::lit(4.0)) / two);
        // d(flux_a)/d(G_b), then chain through G_b = (u_head - u_tail) / h_b
        for (ea, ga) in comps.iter().zip(&gv) {
            for (eb, gb) in comps.iter().zip(&gv) {
                let mut hab = rank1 * *ga * *gb;
                if ea == eb {
                    hab += base;
                }
                let coef = hab / (g.spacing()[ea.axis] * g.spacing()[eb.axis]);
                for (i, si) in [(ea.head, T::one()), (ea.tail, -T::one())] {
                    for (j, sj) in [(eb.head, T::one()), (eb.tail, -T::one())] {
                        jac[n + i][j] -= si * sj * coef / w[i];
                    }
                }
            }
        }
    }
    for i in 0..n {
        jac[i][i] += sys.a;
        jac[i][n + i] += sys.tau_psi;
        jac[n + i][n + i] += T::one();
        if u[i] != T::zero() {
            jac[n + i][i] -= sys.tau_u * (sys.p - T::one()) * u[i].abs().powf(sys.p - two);
        }
    }
    jac
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn newton<T: Scalar>(g: &Grid<T>, sys: &OracleSystem<T>, f: &[T], mut x: Vec<T>) -> Option<(Vec<T>, T)> {
    let (mut r, mut mag) = system_residual(g, sys, f, &x);
    for _ in 0..ORACLE_MAX_ITERATIONS {
        let res = inf_norm(&r);
        if !res.is_finite() {
            return None;
        }
        if res <= T::lit(ORACLE_TOL) * (T::one() + mag) {
            return Some((x, res));
        }
        let jac = system_jacobian(g, sys, &x);
        let d = gauss_solve(jac, r.iter().map(|v| -*v).collect())?;
        let mut alpha = T::one();
        let mut accepted = false;
        while alpha > T::lit(1e-12) {
            let trial: Vec<T> = x.iter().zip(&d).map(|(a, b)| *a + alpha * *b).collect();
            let (tr, tmag) = system_residual(g, sys, f, &trial);
            let tres = inf_norm(&tr);
            if tres.is_finite() && tres < res {
                (x, r, mag) = (trial, tr, tmag);
                accepted = true;
                break;
            }
            alpha *= T::lit(0.5);
        }
        if !accepted {
            // a correction at the resolution of the iterate: the residual is
            // at its rounding floor (gradients of a few ulps for p near 1)
            let dmax = inf_norm(&d);
            let xmax = inf_norm(&x);
            let floor = T::lit(ROUNDOFF_ULPS) * T::eps() * (T::one() + xmax);
            return (dmax <= floor).then_some((x, res));
        }
    }
    None
}

/// Gaussian elimination with partial pivoting.
fn gauss_solve<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for k in 0..n {
        let piv = (k..n).max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if !(a[piv][k].abs() > T::zero()) {
            return None;
        }
        a.swap(k, piv);
        b.swap(k, piv);
        for i in k + 1..n {
            let l = a[i][k] / a[k][k];
            for j in k..n {
                let v = a[k][j];
                a[i][j] -= l * v;
            }
            let v = b[k];
            b[i] -= l * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for k in (0..n).rev() {
        let s = (k + 1..n).fold(b[k], |s, j| s - a[k][j] * x[j]);
        x[k] = s / a[k][k];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

// ---- inequality kernels ----

/// Slack and magnitude of one inequality `lhs >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slack<T> {
    pub slack: T,
    pub scale: T,
}

impl<T: Scalar> Slack<T> {
    fn of(lhs: T, rhs: T) -> Self {
        Self { slack: lhs - rhs, scale: lhs.abs() + rhs.abs() }
    }

    /// `slack >= -rel * scale`.
    pub fn holds(&self, rel: T) -> bool {
        self.slack >= -rel * self.scale
    }
}

/// Monotonicity of `x -> |x|^{p-2} x`: the lower bound by
/// `2^{1-p} |x - y|^p` for `p >= 2`, and the one by
/// `(p - 1) |x - y|^2 (1 + |x|^2 + |y|^2)^{(p-2)/2}` for `p <= 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VectorSlacks<T> {
    pub large_p: Option<Slack<T>>,
    pub small_p: Option<Slack<T>>,
}

pub fn vector_inequality_check<T: Scalar>(x: &[T], y: &[T], p: T) -> Result<VectorSlacks<T>> {
    if !(p > T::one()) {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), got: y.len() });
    }
    let two = T::lit(2.0);
    let sq = |v: &[T]| v.iter().fold(T::zero(), |s, a| s + *a * *a);
    let (nx, ny) = (sq(x), sq(y));
    let weight = |s: T| if s == T::zero() { T::zero() } else { s.powf((p - two) / two) };
    let (wx, wy) = (weight(nx), weight(ny));
    let mut pairing = T::zero();
    let mut diff = T::zero();
    for (a, b) in x.iter().zip(y) {
        pairing += (wx * *a - wy * *b) * (*a - *b);
        diff += (*a - *b) * (*a - *b);
    }
    let large_p = (p >= two).then(|| Slack::of(pairing, diff.powf(p / two) / two.powf(p - T::one())));
    let small_p = (p <= two).then(|| {
        let factor = (T::one() + nx + ny).powf((two - p) / two);
        Slack::of(factor * pairing, (p - T::one()) * diff)
    });
    Ok(VectorSlacks { large_p, small_p })
}

/// Scalar kernels: `|a|^{p-2} a (a - b) >= (|a|^p - |b|^p) / p`, Young's
/// inequality `|a||b| <= |a|^p + |b|^q` with `1/p + 1/q = 1`, and
/// `(e^a - e^b)(a - b) >= 4 (e^{a/2} - e^{b/2})^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSlacks<T> {
    pub convexity: Slack<T>,
    pub young: Slack<T>,
    pub exponential: Slack<T>,
}

pub fn scalar_inequality_checks<T: Scalar>(a: T, b: T, p: T) -> Result<ScalarSlacks<T>> {
    if !(p > T::one()) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("scalar check needs p > 1 and finite inputs, got ({a}, {b}, {p})")));
    }
    let pw = |x: T| x.abs().powf(p);
    let lead = if a == T::zero() { T::zero() } else { a.abs().powf(p - T::lit(2.0)) * a };
    let convexity = Slack::of(lead * (a - b), (pw(a) - pw(b)) / p);
    let q = p / (p - T::one());
    let young = Slack::of(pw(a) + b.abs().powf(q), a.abs() * b.abs());
    let half = T::lit(0.5);
    let e = (a * half).exp() - (b * half).exp();
    let exponential = Slack::of((a.exp() - b.exp()) * (a - b), T::lit(4.0) * e * e);
    Ok(ScalarSlacks { convexity, young, exponential })
}

/// Outcome of a randomized sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSummary {
    pub cases: usize,
    pub violations: usize,
    /// Smallest `slack / scale` seen.
    pub worst_relative: f64,
}

impl SweepSummary {
    fn new() -> Self {
        Self { cases: 0, violations: 0, worst_relative: f64::INFINITY }
    }

    fn record(&mut self, s: Slack<f64>, rel: f64) {
        self.cases += 1;
        if s.scale > 0.0 {
            self.worst_relative = self.worst_relative.min(s.slack / s.scale);
        }
        if !s.holds(rel) {
            self.violations += 1;
        }
    }
}

/// Relative tolerance of the inequality sweeps.
pub const INEQUALITY_TOL: f64 = 1e-12;

/// Random vector pairs in up to three dimensions, for each given `p`.
pub fn vector_inequality_sweep(cases: usize, ps: &[f64], seed: u64) -> SweepSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SweepSummary::new();
    for k in 0..cases {
        let p = ps[k % ps.len()];
        let dim = 1 + k % 3;
        let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
        let x: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..=1.0)).collect();
        let y: Vec<f64> = (0..dim).map(|_| scale * rng.gen_range(-1.0..=1.0)).collect();
        let s = vector_inequality_check(&x, &y, p).expect("p > 1");
        for slack in [s.large_p, s.small_p].into_iter().flatten() {
            out.record(slack, INEQUALITY_TOL);
        }
    }
    out
}

/// Random scalar pairs in `[-20, 20]`, one sweep per kernel.
pub fn scalar_inequality_sweep(cases: usize, ps: &[f64], seed: u64) -> [SweepSummary; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = [SweepSummary::new(); 3];
    for k in 0..cases {
        let p = ps[k % ps.len()];
        let a = rng.gen_range(-20.0..=20.0);
        let b = rng.gen_range(-20.0..=20.0);
        let s = scalar_inequality_checks(a, b, p).expect("finite inputs");
        out[0].record(s.convexity, INEQUALITY_TOL);
        out[1].record(s.young, INEQUALITY_TOL);
        out[2].record(s.exponential, INEQUALITY_TOL);
    }
    out
}

// ---- energy gradient ----

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck<T> {
    /// Central difference of the energy along `v`.
    pub finite_difference: T,
    /// `<-Delta_p u, v>`.
    pub pairing: T,
    pub relative_error: T,
    /// Some gradient reconstruction vanishes, where the energy is not smooth
    /// for `p < 2`.
    pub nonsmooth: bool,
}

/// Compares `<-Delta_p u, v>` with a central difference of `E(u)`.
pub fn energy_gradient_check<T: Scalar>(u: &NodeField<T>, p: T, v: &NodeField<T>, step: T) -> Result<GradientCheck<T>> {
    if !(step >= T::lit(1e-7) && step <= T::lit(1e-3)) {
        return Err(Error::InvalidParameter(format!("step {step} outside [1e-7, 1e-3]")));
    }
    v.ensure_grid(u.grid())?;
    let up = NodeField::new(u.grid().clone(), u.values().iter().zip(v.values()).map(|(a, b)| *a + step * *b).collect())?;
    let um = NodeField::new(u.grid().clone(), u.values().iter().zip(v.values()).map(|(a, b)| *a - step * *b).collect())?;
    let fd = (p_energy(&up, p)? - p_energy(&um, p)?) / (step + step);
    let lap = p_laplacian_apply(u, p)?;
    let pairing = -lap.inner(v)?;
    let scale = fd.abs().max(pairing.abs());
    let relative_error = if scale == T::zero() { T::zero() } else { (fd - pairing).abs() / scale };
    let g = u.grid();
    let grad = g.gradient_slice(u.values());
    let nonsmooth = p < T::lit(2.0)
        && g.corners().iter().any(|c| c.edges[..g.dim()].iter().all(|&k| grad[k] == T::zero()));
    Ok(GradientCheck { finite_difference: fd, pairing, relative_error, nonsmooth })
}

// ---- counterexample data ----

/// `f_j(s)`: `j` on `[0, 1/j)` and `[2/j, 1]`, linear down to `j - 2 j^2` at
/// `s = 3/(2j)` and back up in between.
pub fn fj_value(j: f64, s: f64) -> f64 {
    let a = 1.0 / j;
    let m = 1.5 / j;
    let b = 2.0 / j;
    if s < a || s >= b {
        j
    } else if s < m {
        j - 4.0 * j * j * j * (s - a)
    } else {
        -2.0 * j * j + j + 4.0 * j * j * j * (s - m)
    }
}

/// Samples `f_j` on a 1D grid over `(0, 1)`.
pub fn fj_generator<T: Scalar>(j: usize, grid: std::sync::Arc<Grid<T>>) -> Result<NodeField<T>> {
    if grid.dim() != 1 {
        return Err(Error::InvalidParameter("f_j is defined on one-dimensional grids only".into()));
    }
    if (grid.lengths()[0].as_f64() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter("f_j requires the unit interval".into()));
    }
    if j < 2 {
        return Err(Error::InvalidParameter(format!("j = {j} must be at least 2")));
    }
    let jf = j as f64;
    Ok(NodeField::from_fn(grid, |x| T::lit(fj_value(jf, x[0].as_f64()))))
}

/// Default seed of the verification routines.
pub const VERIFICATION_SEED: u64 = DEFAULT_SEED;

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn worked_vector_example() {
        let s = vector_inequality_check(&[1.0f64, 0.0], &[0.0, 0.0], 3.0).unwrap();
        assert!((s.large_p.unwrap().slack - 0.75).abs() < 1e-15);
        assert!(s.small_p.is_none());
    }

    #[test]
    fn quadratic_case_is_equality() {
        let s = vector_inequality_check(&[0.3f64, -1.2], &[2.0, 0.5], 2.0).unwrap();
        assert!(s.small_p.unwrap().slack.abs() < 1e-15);
    }

    #[test]
    fn exponential_example() {
        let s = scalar_inequality_checks(4f64.ln(), 0.0, 1.5).unwrap();
        assert!((s.exponential.slack - (3.0 * 4f64.ln() - 4.0)).abs() < 1e-14);
        let e = scalar_inequality_checks(0.7, 0.7, 1.5).unwrap();
        assert_eq!(e.exponential.slack, 0.0);
        assert_eq!(e.convexity.slack, 0.0);
    }

    #[test]
    fn fj_breakpoints() {
        assert_eq!(fj_value(10.0, 0.0), 10.0);
        assert!((fj_value(10.0, 0.15) + 190.0).abs() < 1e-9);
        for s in [0.5, 0.75] {
            let left = fj_value(2.0, s - 1e-12);
            let right = fj_value(2.0, s);
            assert!((left - right).abs() < 1e-9, "{s}: {left} vs {right}");
        }
        let g = Arc::new(Grid::<f64>::new(1, &[4], &[2.0]).unwrap());
        assert!(fj_generator(10, g).is_err());
    }

    #[test]
    fn oracle_zero_data() {
        let g = Arc::new(Grid::<f64>::new(1, &[3], &[1.0]).unwrap());
        let f = NodeField::zeros(g);
        let r = oracle_stationary_dense(&f, 1.5, 1.0, 0.5, 32, 1).unwrap();
        assert_eq!(r.distinct(), 1);
        assert!(r.solutions[0].u.iter().all(|x| x.abs() < 1e-12));
    }
}
