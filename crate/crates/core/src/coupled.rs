//! Newton–Krylov solver for the coupled fourth-order system in the height
//! `u` alone,
//!
//! ```text
//! R(u) = kappa (-Delta_h Phi(psi)) + tau_psi psi + a u - f + eps (tau_u |u|^{p-2} u - psi),
//! psi  = -Delta_p u + tau_u |u|^{p-2} u,
//! ```
//!
//! with `Phi = exp` for the crystal problems and `Phi = id` for the
//! linearized flow. The stationary problem, the implicit time step and the
//! linearized step are all instances.

use crate::elliptic::{IterationRecord, SolverOptions, Termination, EPS_REG_START, ROUNDOFF_STEP};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{gmres, BandedLu};
use crate::operators::{overshooting_shifted, p_laplacian_slice, zeroth_order, PLinearization};
use crate::scalar::Scalar;

/// Largest admissible `psi`; beyond it `exp` leaves the normal range.
const PSI_MAX: f64 = 700.0;
const ARMIJO: f64 = 1e-4;
const MIN_DAMPING: f64 = 1e-10;
const KRYLOV_RTOL: f64 = 1e-10;
const KRYLOV_RESTART: usize = 10;
const KRYLOV_MAX: usize = 40;
const P_CONTINUATION_STAGES: usize = 4;
/// Ulps of the iterate below which a mixed correction is rounding noise.
const MIXED_ROUNDOFF: f64 = 1024.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Coupled<'a, T> {
    pub grid: &'a Grid<T>,
    pub p: T,
    pub tau_u: T,
    pub kappa: T,
    pub tau_psi: T,
    pub a: T,
    pub eps_perturb: T,
    pub f: &'a [T],
    pub exponential: bool,
    /// The unknown is the height minus `shift`; only the zeroth-order term
    /// sees the shift, and `f` must already have `a * shift` removed.
    pub shift: T,
}

/// Everything derived from one iterate.
#[derive(Debug, Clone)]
pub(crate) struct Evaluation<T> {
    pub psi: Vec<T>,
    /// `Phi(psi)`; `exp(psi)` bitwise in the exponential case.
    pub phi: Vec<T>,
    pub residual: Vec<T>,
    pub norm: T,
    pub scale: T,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome<T> {
    pub u: Vec<T>,
    pub eval: Evaluation<T>,
    pub iterations: usize,
    pub termination: Termination,
    pub history: Vec<IterationRecord>,
}

struct Mixed<T> {
    r1: Vec<T>,
    r2: Vec<T>,
    norm: T,
    n1: T,
    n2: T,
    scale1: T,
    scale2: T,
}

/// Failure with the best iterate kept for reporting.
#[derive(Debug, Clone)]
pub(crate) struct Failure<T> {
    pub error: Error,
    pub best: Vec<T>,
    pub history: Vec<IterationRecord>,
}

impl<T: Scalar> Coupled<'_, T> {
    /// Gradient size the Jacobian regularization is measured against, so
    /// that the iteration commutes with the scaling `u -> lambda u`.
    fn gradient_scale(&self, u: &[T]) -> T {
        let m = crate::operators::p_gradient(self.grid, u, self.p)
            .iter()
            .fold(T::zero(), |m, d| m.max(d.abs()));
        if m > T::zero() {
            m
        } else {
            T::one()
        }
    }

    fn nodal(&self, u: &[T]) -> Vec<T> {
        if self.shift == T::zero() {
            u.to_vec()
        } else {
            u.iter().map(|x| *x + self.shift).collect()
        }
    }

    pub(crate) fn psi_of(&self, u: &[T]) -> Vec<T> {
        let mut psi = p_laplacian_slice(self.grid, u, self.p);
        let z = zeroth_order(&self.nodal(u), self.p, self.tau_u);
        psi.iter_mut().zip(&z).for_each(|(s, z)| *s = *z - *s);
        psi
    }

    fn phi_of(&self, psi: &[T]) -> Vec<T> {
        if self.exponential {
            psi.iter().map(|s| s.exp()).collect()
        } else {
            psi.to_vec()
        }
    }

    pub(crate) fn evaluate(&self, u: &[T]) -> Evaluation<T> {
        let g = self.grid;
        let psi = self.psi_of(u);
        let phi = self.phi_of(&psi);
        let lap = g.laplacian_slice(&phi);
        let z = zeroth_order(&self.nodal(u), self.p, self.tau_u);
        let mut residual = vec![T::zero(); u.len()];
        for i in 0..u.len() {
            residual[i] = -self.kappa * lap[i] + self.tau_psi * psi[i] + self.a * u[i] - self.f[i]
                + self.eps_perturb * (z[i] - psi[i]);
        }
        // magnitude of every contribution, including the rounding of psi
        // carried through the outer Laplacian
        let psi_mag = {
            let grad = crate::operators::p_gradient(g, u, self.p);
            let phi_p = crate::operators::p_weighted_flux(g, &grad, self.p);
            let mut m = g.divergence_magnitude(&phi_p);
            m.iter_mut().zip(&z).for_each(|(m, z)| *m += z.abs());
            m
        };
        let outer = |v: &[T]| {
            let w: Vec<T> = g
                .gradient_slice(v)
                .iter()
                .zip(g.edge_weights())
                .map(|(d, w)| *d * *w)
                .collect();
            g.divergence_magnitude(&w)
        };
        let direct = outer(&phi);
        let dphi: Vec<T> = if self.exponential {
            phi.iter().zip(&psi_mag).map(|(r, m)| *r * *m).collect()
        } else {
            psi_mag.clone()
        };
        let dmag: Vec<T> = {
            // |Delta| applied to a nonnegative field
            let mut out = vec![T::zero(); u.len()];
            for (e, w) in g.edges().iter().zip(g.edge_weights()) {
                let h = g.spacing()[e.axis];
                let q = (dphi[e.tail] + dphi[e.head]) * *w / (h * h);
                out[e.tail] += q;
                out[e.head] += q;
            }
            out.iter_mut().zip(g.node_weights()).for_each(|(o, w)| *o /= *w);
            out
        };
        let mut mag = vec![T::zero(); u.len()];
        for i in 0..u.len() {
            mag[i] = self.kappa * (direct[i] + dmag[i])
                + (self.tau_psi + self.eps_perturb) * (psi[i].abs() + psi_mag[i])
                + self.a * u[i].abs()
                + self.eps_perturb * z[i].abs();
        }
        let two = T::lit(2.0);
        let norm = g.norm_slice(&residual, two);
        let scale = g.norm_slice(self.f, two) + g.norm_slice(&mag, two);
        Evaluation { psi, phi, residual, norm, scale }
    }

    fn jacobian_apply(&self, lin: &PLinearization<T>, phi: &[T], v: &[T]) -> Vec<T> {
        let g = self.grid;
        let kv = lin.apply(g, v);
        let w: Vec<T> = if self.exponential {
            kv.iter().zip(phi).map(|(k, r)| *k * *r).collect()
        } else {
            kv.clone()
        };
        let lap = g.laplacian_slice(&w);
        let z = lin.zeroth();
        let mut out = vec![T::zero(); v.len()];
        for i in 0..v.len() {
            out[i] = -self.kappa * lap[i] + self.tau_psi * kv[i] + self.a * v[i]
                + self.eps_perturb * (z[i] * v[i] - kv[i]);
        }
        out
    }

    /// Newton direction from the regularized Jacobian at `u`.
    fn direction(&self, u: &[T], ev: &Evaluation<T>, eps: T) -> Result<Vec<T>> {
        let g = self.grid;
        let n = u.len();
        let bw = 2 * g.cell_bandwidth();
        let rhs: Vec<T> = ev.residual.iter().map(|r| -*r).collect();
        let solve = |lin: &PLinearization<T>| -> Result<Vec<T>> {
            let jac = |v: &[T]| self.jacobian_apply(lin, &ev.phi, v);
            let lu = BandedLu::preconditioner(n, bw, bw, jac)?;
            let x0 = lu.solve(&rhs);
            let target = T::lit(KRYLOV_RTOL) * crate::linalg::norm2(&rhs);
            let out = gmres(jac, |v| lu.solve(v), &rhs, &x0, target, KRYLOV_RESTART, KRYLOV_MAX);
            Ok(out.x)
        };
        let nodal = self.nodal(u);
        let eps = eps * self.gradient_scale(u);
        let lin = PLinearization::shifted(g, u, &nodal, self.p, self.tau_u, eps, None);
        let d = solve(&lin)?;
        match overshooting_shifted(g, u, &nodal, &d, self.p) {
            Some(lagged) => {
                let lin = PLinearization::shifted(g, u, &nodal, self.p, self.tau_u, eps, Some(&lagged));
                solve(&lin).or(Ok(d))
            }
            None => Ok(d),
        }
    }

    fn admissible(&self, ev: &Evaluation<T>) -> bool {
        ev.norm.is_finite()
            && (!self.exponential || ev.psi.iter().all(|s| *s <= T::lit(PSI_MAX)))
    }

    /// Damped Newton from `u0` with decade continuation of the Jacobian
    /// regularization down to `eps_floor`.
    pub(crate) fn solve(
        &self,
        u0: Vec<T>,
        opts: &SolverOptions<T>,
        eps_floor: T,
    ) -> std::result::Result<Outcome<T>, Failure<T>> {
        let mut u = u0;
        let mut ev = self.evaluate(&u);
        let eps_start = T::lit(EPS_REG_START).max(eps_floor);
        let mut eps = eps_start;
        let mut history = Vec::new();
        let tol = opts.tol;
        if !self.admissible(&ev) {
            let error = Error::NonFinite("initial residual");
            return Err(Failure { error, best: u, history });
        }
        for it in 0..opts.max_iterations {
            if ev.norm <= tol * ev.scale {
                // one polishing step; kept only if it lowers the residual
                if let Ok(d) = self.direction(&u, &ev, eps) {
                    let trial: Vec<T> = u.iter().zip(&d).map(|(x, s)| *x + *s).collect();
                    let tev = self.evaluate(&trial);
                    if self.admissible(&tev) && tev.norm < ev.norm {
                        u = trial;
                        ev = tev;
                    }
                }
                return Ok(Outcome { u, eval: ev, iterations: it, termination: Termination::Residual, history });
            }
            let d = match self.direction(&u, &ev, eps) {
                Ok(d) => d,
                Err(_) if eps < eps_start => {
                    eps = (eps * T::lit(100.0)).min(eps_start);
                    continue;
                }
                Err(error) => return Err(Failure { error, best: u, history }),
            };
            let umax = u.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            let dmax = d.iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if dmax <= T::lit(ROUNDOFF_STEP) * T::eps() * umax {
                return Ok(Outcome { u, eval: ev, iterations: it, termination: Termination::RoundoffStep, history });
            }
            let mut alpha = opts.damping_initial;
            let mut accepted = None;
            while alpha >= T::lit(MIN_DAMPING) {
                let trial: Vec<T> = u.iter().zip(&d).map(|(x, s)| *x + alpha * *s).collect();
                let tev = self.evaluate(&trial);
                if self.admissible(&tev) && tev.norm <= (T::one() - T::lit(ARMIJO) * alpha) * ev.norm {
                    accepted = Some((trial, tev));
                    break;
                }
                alpha *= opts.backtrack;
            }
            let step = accepted.as_ref().map_or(0.0, |_| alpha.as_f64());
            history.push(IterationRecord {
                iteration: it,
                residual: ev.norm.as_f64(),
                step,
                merit: accepted.as_ref().map_or(ev.norm, |a| a.1.norm).as_f64(),
                eps_reg: eps.as_f64(),
            });
            match accepted {
                Some((trial, tev)) => {
                    u = trial;
                    ev = tev;
                    eps = (eps * T::lit(0.1)).max(eps_floor);
                }
                None if eps < eps_start => eps = (eps * T::lit(100.0)).min(eps_start),
                None => {
                    let error = Error::LineSearchFailed {
                        solver: "coupled Newton",
                        iteration: it,
                        residual: ev.norm.as_f64(),
                    };
                    return Err(Failure { error, best: u, history });
                }
            }
        }
        if ev.norm <= tol * ev.scale {
            let iterations = opts.max_iterations;
            return Ok(Outcome { u, eval: ev, iterations, termination: Termination::Residual, history });
        }
        let error = Error::NotConverged {
            solver: "coupled Newton",
            iterations: opts.max_iterations,
            residual: ev.norm.as_f64(),
        };
        Err(Failure { error, best: u, history })
    }

    /// Residuals of the mixed form in `(u, psi)`: the first equation with
    /// `psi` independent, and `psi - psi(u)`. Returns both W-norms and the
    /// magnitude each is measured against.
    fn mixed_residual(&self, u: &[T], psi: &[T]) -> Mixed<T> {
        let g = self.grid;
        let n = u.len();
        let phi = self.phi_of(psi);
        let lap = g.laplacian_slice(&phi);
        let z = zeroth_order(&self.nodal(u), self.p, self.tau_u);
        let psi_u = self.psi_of(u);
        let mut r1 = vec![T::zero(); n];
        let mut r2 = vec![T::zero(); n];
        for i in 0..n {
            r1[i] = -self.kappa * lap[i] + self.tau_psi * psi[i] + self.a * u[i] - self.f[i]
                + self.eps_perturb * (z[i] - psi[i]);
            r2[i] = psi[i] - psi_u[i];
        }
        let two = T::lit(2.0);
        let abs = |v: &[T]| -> Vec<T> { v.iter().map(|x| x.abs()).collect() };
        let outer = {
            let w: Vec<T> = g.gradient_slice(&phi).iter().zip(g.edge_weights()).map(|(d, w)| *d * *w).collect();
            g.divergence_magnitude(&w)
        };
        let mag1: Vec<T> = (0..n)
            .map(|i| {
                self.kappa * outer[i]
                    + (self.tau_psi + self.eps_perturb) * psi[i].abs()
                    + self.a * u[i].abs()
                    + self.eps_perturb * z[i].abs()
            })
            .collect();
        let mag2 = {
            let grad = crate::operators::p_gradient(g, u, self.p);
            let flux = crate::operators::p_weighted_flux(g, &grad, self.p);
            let mut m = g.divergence_magnitude(&flux);
            m.iter_mut().zip(psi).zip(&z).for_each(|((m, s), z)| *m += s.abs() + z.abs());
            m
        };
        let n1 = g.norm_slice(&r1, two);
        let n2 = g.norm_slice(&r2, two);
        Mixed {
            r1,
            r2,
            norm: (n1 * n1 + n2 * n2).sqrt(),
            n1,
            n2,
            scale1: g.norm_slice(self.f, two) + g.norm_slice(&abs(&mag1), two),
            scale2: g.norm_slice(&mag2, two),
        }
    }

    /// Newton on the mixed form, unknowns interleaved as `(u_i, psi_i)`.
    /// Used when the height-only iteration fails: for `p` near 1 solutions
    /// can carry gradients of a few hundred ulps, where `psi(u)` is too
    /// steep for a residual in `u` alone to make progress. The returned
    /// potential is the mixed unknown, not `psi(u)`.
    pub(crate) fn solve_mixed(
        &self,
        u0: Vec<T>,
        opts: &SolverOptions<T>,
    ) -> std::result::Result<Outcome<T>, Failure<T>> {
        let g = self.grid;
        let n = u0.len();
        let mut u = u0;
        let mut psi = self.psi_of(&u);
        let mut m = self.mixed_residual(&u, &psi);
        let mut eps = T::lit(EPS_REG_START);
        let mut exact_tried = false;
        let mut history = Vec::new();
        let tol = opts.tol;
        let bw = 2 * g.cell_bandwidth() + 1;
        let finished = |m: &Mixed<T>| m.n1 <= tol * m.scale1 && m.n2 <= tol * m.scale2;
        let done = |u: Vec<T>, psi: Vec<T>, m: &Mixed<T>, it, termination, history| {
            let mut eval = self.evaluate(&u);
            eval.residual = m.r1.clone();
            eval.norm = m.n1;
            eval.scale = m.scale1;
            eval.phi = self.phi_of(&psi);
            eval.psi = psi;
            Ok(Outcome { u, eval, iterations: it, termination, history })
        };
        for it in 0..opts.max_iterations {
            if !m.norm.is_finite() {
                break;
            }
            if finished(&m) {
                return done(u, psi, &m, it, Termination::Residual, history);
            }
            let dphi: Vec<T> = if self.exponential { self.phi_of(&psi) } else { vec![T::one(); n] };
            let rhs: Vec<T> = (0..2 * n).map(|k| if k % 2 == 0 { -m.r1[k / 2] } else { -m.r2[k / 2] }).collect();
            let step = |lin: &PLinearization<T>| -> Result<Vec<T>> {
                let jac = |v: &[T]| {
                    let vu: Vec<T> = v.iter().step_by(2).copied().collect();
                    let vs: Vec<T> = v.iter().skip(1).step_by(2).copied().collect();
                    let w: Vec<T> = vs.iter().zip(&dphi).map(|(a, b)| *a * *b).collect();
                    let lap = g.laplacian_slice(&w);
                    let kv = lin.apply(g, &vu);
                    let z = lin.zeroth();
                    let mut out = vec![T::zero(); 2 * n];
                    for i in 0..n {
                        out[2 * i] = -self.kappa * lap[i] + self.tau_psi * vs[i] + self.a * vu[i]
                            + self.eps_perturb * (z[i] * vu[i] - vs[i]);
                        out[2 * i + 1] = vs[i] - kv[i];
                    }
                    out
                };
                let lu = BandedLu::preconditioner(2 * n, bw, bw, jac)?;
                let x0 = lu.solve(&rhs);
                let target = T::lit(KRYLOV_RTOL) * crate::linalg::norm2(&rhs);
                Ok(gmres(jac, |v| lu.solve(v), &rhs, &x0, target, KRYLOV_RESTART, KRYLOV_MAX).x)
            };
            let nodal = self.nodal(&u);
            let eps_abs = eps * self.gradient_scale(&u);
            let lin = PLinearization::shifted(g, &u, &nodal, self.p, self.tau_u, eps_abs, None);
            let mut d = match step(&lin) {
                Ok(d) => d,
                Err(error) => return Err(Failure { error, best: u, history }),
            };
            let du: Vec<T> = d.iter().step_by(2).copied().collect();
            if let Some(lagged) = overshooting_shifted(g, &u, &nodal, &du, self.p) {
                let lin = PLinearization::shifted(g, &u, &nodal, self.p, self.tau_u, eps_abs, Some(&lagged));
                if let Ok(e) = step(&lin) {
                    d = e;
                }
            }
            let mut alpha = opts.damping_initial;
            let mut accepted = None;
            while alpha >= T::lit(MIN_DAMPING) {
                let tu: Vec<T> = (0..n).map(|i| u[i] + alpha * d[2 * i]).collect();
                let ts: Vec<T> = (0..n).map(|i| psi[i] + alpha * d[2 * i + 1]).collect();
                let tm = self.mixed_residual(&tu, &ts);
                let admissible = !self.exponential || ts.iter().all(|s| *s <= T::lit(PSI_MAX));
                if admissible && tm.norm <= (T::one() - T::lit(ARMIJO) * alpha) * m.norm {
                    accepted = Some((tu, ts, tm));
                    break;
                }
                alpha *= opts.backtrack;
            }
            history.push(IterationRecord {
                iteration: it,
                residual: m.norm.as_f64(),
                step: accepted.as_ref().map_or(0.0, |_| alpha.as_f64()),
                merit: accepted.as_ref().map_or(m.norm, |a| a.2.norm).as_f64(),
                eps_reg: eps.as_f64(),
            });
            match accepted {
                Some((tu, ts, tm)) => {
                    (u, psi, m) = (tu, ts, tm);
                    eps *= T::lit(0.1);
                }
                None => {
                    // the correction is below the resolution of the iterate:
                    // the residual sits at its rounding floor
                    let xmax = u.iter().chain(&psi).fold(T::zero(), |a, x| a.max(x.abs()));
                    let dmax = d.iter().fold(T::zero(), |a, x| a.max(x.abs()));
                    if dmax <= T::lit(MIXED_ROUNDOFF) * T::eps() * (T::one() + xmax) {
                        return done(u, psi, &m, it, Termination::RoundoffStep, history);
                    }
                    if eps < T::lit(EPS_REG_START) && eps > T::zero() {
                        eps = (eps * T::lit(100.0)).min(T::lit(EPS_REG_START));
                        continue;
                    }
                    if !exact_tried {
                        // last resort: the unregularized Jacobian
                        exact_tried = true;
                        eps = T::zero();
                        continue;
                    }
                    let error = Error::LineSearchFailed { solver: "mixed Newton", iteration: it, residual: m.norm.as_f64() };
                    return Err(Failure { error, best: u, history });
                }
            }
        }
        if m.norm.is_finite() && finished(&m) {
            return done(u, psi, &m, opts.max_iterations, Termination::Residual, history);
        }
        let error = Error::NotConverged { solver: "mixed Newton", iterations: opts.max_iterations, residual: m.norm.as_f64() };
        Err(Failure { error, best: u, history })
    }

    /// Height-only Newton from `u0` (or from the constant state), falling
    /// back to the mixed form from the best iterate.
    pub(crate) fn solve_robust(
        &self,
        u0: Option<Vec<T>>,
        opts: &SolverOptions<T>,
        eps_floor: T,
    ) -> std::result::Result<Outcome<T>, Failure<T>> {
        let first = match u0 {
            Some(u0) => self.solve(u0, opts, eps_floor),
            None => self.solve_from_constant(opts, eps_floor),
        };
        let mut first = match first {
            Ok(out) => return Ok(out),
            Err(fail) => fail,
        };
        match self.solve_mixed(first.best.clone(), opts) {
            Ok(mut out) => {
                first.history.append(&mut out.history);
                out.history = first.history;
                Ok(out)
            }
            Err(mut fail) => {
                first.history.append(&mut fail.history);
                Err(first)
            }
        }
    }

    /// Solves from the constant state of the averaged equation. For `p < 2`
    /// the constant state has vanishing gradients, where the singular flux
    /// is not linearizable, so the smooth `p = 2` solution is computed first
    /// and continued in `p` when a direct start fails.
    pub(crate) fn solve_from_constant(
        &self,
        opts: &SolverOptions<T>,
        eps_floor: T,
    ) -> std::result::Result<Outcome<T>, Failure<T>> {
        let n = self.grid.node_count();
        let u0 = vec![self.constant_guess(); n];
        let two = T::lit(2.0);
        if self.p == two {
            return self.solve(u0, opts, eps_floor);
        }
        let smooth = Self { p: two, ..*self };
        let start = match smooth.solve(u0.clone(), opts, eps_floor) {
            Ok(out) => out.u,
            Err(_) => u0,
        };
        let first = match self.solve(start.clone(), opts, eps_floor) {
            Ok(out) => return Ok(out),
            Err(fail) => fail,
        };
        let mut u = start;
        let mut history = Vec::new();
        for k in 1..=P_CONTINUATION_STAGES {
            let frac = T::from_usize_lossy(k) / T::from_usize_lossy(P_CONTINUATION_STAGES);
            let stage = Self { p: two - (two - self.p) * frac, ..*self };
            match stage.solve(u, opts, eps_floor) {
                Ok(out) if k == P_CONTINUATION_STAGES => {
                    let mut out = out;
                    history.append(&mut out.history);
                    out.history = history;
                    return Ok(out);
                }
                Ok(mut out) => {
                    history.append(&mut out.history);
                    u = out.u;
                }
                Err(_) => return Err(first),
            }
        }
        Err(first)
    }

    /// Constant state solving the spatially averaged equation; exact when
    /// `f` is constant.
    pub(crate) fn constant_guess(&self) -> T {
        let g = self.grid;
        // root in the unshifted height, returned relative to the shift
        let fbar = g.integrate_slice(self.f) / g.measure() + self.a * self.shift;
        let c = self.tau_psi * self.tau_u;
        let h = |m: T| c * crate::scalar::signed_pow(m, self.p) + self.a * m - fbar;
        if fbar == T::zero() {
            return -self.shift;
        }
        if c == T::zero() {
            return fbar / self.a - self.shift;
        }
        // h is increasing and its root lies between 0 and fbar / a
        let (mut lo, mut hi) = if fbar > T::zero() { (T::zero(), fbar / self.a) } else { (fbar / self.a, T::zero()) };
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if h(mid) > T::zero() {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = if h(lo).abs() <= h(hi).abs() { lo } else { hi };
        root - self.shift
    }
}
