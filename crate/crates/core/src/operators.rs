//! Discrete p-Laplacian, exponential divided-difference Laplacian and the
//! associated energies.
//!
//! The p-Laplacian is the exact negative gradient of the discrete energy
//!
//! ```text
//! E(u) = (1/p) sum_k mu |G_k(u)|^p
//! ```
//!
//! where `k` runs over gradient reconstruction corners (edges in 1D; the four
//! vertices of every cell in 2D, each combining the two cell edges meeting
//! there) and `mu` is the corner quadrature weight. At `p = 2` the operator is
//! exactly the plain Laplacian `div(grad u)`.

use crate::error::{Error, Result};
use crate::grid::{Grid, NodeField};
use crate::scalar::{signed_pow, Scalar};

/// Model constants plus the Jacobian regularization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    pub p: T,
    pub a: T,
    pub tau: T,
    /// Coefficient of the lower order perturbation; 0 disables it.
    pub eps_perturb: T,
    /// Floor of the regularization used inside linearizations only.
    pub eps_reg: T,
    /// Allows `p > 2`.
    pub experimental: bool,
}

impl<T: Scalar> Params<T> {
    pub fn new(p: T, a: T, tau: T) -> Self {
        Self { p, a, tau, eps_perturb: T::zero(), eps_reg: T::lit(1e-10), experimental: false }
    }

    pub fn with_perturbation(mut self, eps: T) -> Self {
        self.eps_perturb = eps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p, self.experimental)?;
        if !(self.a > T::zero()) || !self.a.is_finite() {
            return Err(Error::InvalidParameter(format!("a = {} must be positive", self.a)));
        }
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return Err(Error::InvalidParameter(format!("tau = {} must be positive", self.tau)));
        }
        if !(self.eps_perturb >= T::zero()) || !(self.eps_reg >= T::zero()) {
            return Err(Error::InvalidParameter("epsilons must be nonnegative".into()));
        }
        Ok(())
    }
}

pub(crate) fn check_p<T: Scalar>(p: T, experimental: bool) -> Result<()> {
    if !(p > T::one()) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    if p > T::lit(2.0) && !experimental {
        return Err(Error::InvalidParameter(format!("p = {p} > 2 requires the experimental flag")));
    }
    Ok(())
}

#[inline]
fn corner_vector<T: Scalar>(grid: &Grid<T>, grad: &[T], k: usize) -> (T, T) {
    let c = grid.corners()[k];
    let gx = grad[c.edges[0]];
    let gy = if grid.dim() == 2 { grad[c.edges[1]] } else { T::zero() };
    (gx, gy)
}

/// `|G|^{p-2}`, with 0 where `G = 0` (the product with `G` vanishes there).
#[inline]
fn flux_weight<T: Scalar>(sq: T, p: T) -> T {
    if sq == T::zero() {
        if p == T::lit(2.0) {
            T::one()
        } else {
            T::zero()
        }
    } else {
        sq.powf((p - T::lit(2.0)) * T::lit(0.5))
    }
}

/// Edge fluxes of the p-Laplacian already multiplied by their edge weights.
pub(crate) fn p_weighted_flux<T: Scalar>(grid: &Grid<T>, grad: &[T], p: T) -> Vec<T> {
    let mu = grid.corner_weight();
    let mut phi = vec![T::zero(); grid.edge_count()];
    for (k, c) in grid.corners().iter().enumerate() {
        let (gx, gy) = corner_vector(grid, grad, k);
        let w = mu * flux_weight(gx * gx + gy * gy, p);
        phi[c.edges[0]] += w * gx;
        if grid.dim() == 2 {
            phi[c.edges[1]] += w * gy;
        }
    }
    phi
}

/// Relative size, in units of machine epsilon, below which differences and
/// nodal values count as exact zeros in the singular (`p < 2`) terms.
const SNAP_ULPS: f64 = 4.0;

/// Gradient seen by the p-dependent terms. For `p < 2` a difference at the
/// roundoff level of its endpoints is replaced by 0, since `|G|^{p-1}` would
/// otherwise turn a few ulps of noise into an O(eps^{p-1}) flux. Pairings
/// with the unsnapped gradient are unaffected: a snapped component carries
/// zero flux.
pub(crate) fn p_gradient<T: Scalar>(grid: &Grid<T>, u: &[T], p: T) -> Vec<T> {
    if p >= T::lit(2.0) {
        return grid.gradient_slice(u);
    }
    let cut = T::lit(SNAP_ULPS) * T::eps();
    grid.edges()
        .iter()
        .map(|e| {
            let (a, b) = (u[e.tail], u[e.head]);
            let d = b - a;
            if d.abs() <= cut * a.abs().max(b.abs()) {
                T::zero()
            } else {
                d / grid.spacing()[e.axis]
            }
        })
        .collect()
}

/// Nodal values seen by the zeroth-order singular term; for `p < 2` entries
/// at the roundoff level of the field are exact zeros.
pub(crate) fn p_nodal<T: Scalar>(u: &[T], p: T) -> Vec<T> {
    if p >= T::lit(2.0) {
        return u.to_vec();
    }
    let scale = u.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cut = T::lit(SNAP_ULPS) * T::eps() * scale;
    u.iter().map(|&v| if v.abs() <= cut { T::zero() } else { v }).collect()
}

/// `Delta_p u` as a slice kernel.
pub(crate) fn p_laplacian_slice<T: Scalar>(grid: &Grid<T>, u: &[T], p: T) -> Vec<T> {
    let grad = p_gradient(grid, u, p);
    let phi = p_weighted_flux(grid, &grad, p);
    let mut out = vec![T::zero(); grid.node_count()];
    grid.divergence_weighted_into(&phi, &mut out);
    out
}

pub(crate) fn p_energy_slice<T: Scalar>(grid: &Grid<T>, u: &[T], p: T) -> T {
    let grad = p_gradient(grid, u, p);
    let mu = grid.corner_weight();
    let mut s = T::zero();
    for k in 0..grid.corners().len() {
        let (gx, gy) = corner_vector(grid, &grad, k);
        let sq = gx * gx + gy * gy;
        if sq > T::zero() {
            s += sq.powf(p * T::lit(0.5));
        }
    }
    s * mu / p
}

/// `sum_i W_i |u_i|^p`.
pub(crate) fn lp_power_sum<T: Scalar>(grid: &Grid<T>, u: &[T], p: T) -> T {
    p_nodal(u, p)
        .iter()
        .zip(grid.node_weights())
        .fold(T::zero(), |acc, (v, w)| acc + v.abs().powf(p) * *w)
}

/// `Delta_p u = div(|grad u|^{p-2} grad u)`.
pub fn p_laplacian_apply<T: Scalar>(u: &NodeField<T>, p: T) -> Result<NodeField<T>> {
    check_p(p, true)?;
    let grid = u.grid();
    Ok(NodeField::from_vec_unchecked(grid.clone(), p_laplacian_slice(grid, u.values(), p)))
}

/// Discrete surface energy `(1/p) int |grad u|^p`.
pub fn p_energy<T: Scalar>(u: &NodeField<T>, p: T) -> Result<T> {
    check_p(p, true)?;
    Ok(p_energy_slice(u.grid(), u.values(), p))
}

/// `sum_k mu |G_k|^p`, the quadrature of `|grad u|^p` (equals `p * p_energy`).
pub fn gradient_power_quadrature<T: Scalar>(u: &NodeField<T>, p: T) -> Result<T> {
    Ok(p_energy(u, p)? * p)
}

/// Linearization of `u -> -Delta_p u + tau |u|^{p-2} u` at a fixed state,
/// regularized by `eps` so that it stays finite and positive definite for
/// `p < 2`.
#[derive(Debug, Clone)]
pub(crate) struct PLinearization<T> {
    /// Symmetric 2x2 corner blocks `[a00, a01, a11]`, premultiplied by `mu`.
    blocks: Vec<[T; 3]>,
    /// Diagonal of the zeroth-order term.
    zeroth: Vec<T>,
}

impl<T: Scalar> PLinearization<T> {
    pub(crate) fn new(grid: &Grid<T>, u: &[T], p: T, tau: T, eps: T) -> Self {
        Self::with_lagged(grid, u, p, tau, eps, None)
    }

    /// As `new`, but flagged corners and nodes use the lagged coefficient
    /// `|G|^{p-2} I` (resp. `tau |u|^{p-2}`) in place of the exact Hessian.
    /// For `p < 2` the lagged coefficient majorizes the Hessian, so the
    /// step cannot overshoot through zero there.
    pub(crate) fn with_lagged(
        grid: &Grid<T>,
        u: &[T],
        p: T,
        tau: T,
        eps: T,
        lagged: Option<&Lagged>,
    ) -> Self {
        Self::shifted(grid, u, u, p, tau, eps, lagged)
    }

    /// As `with_lagged`, with the zeroth-order term evaluated at `nodal`
    /// (the height) and the gradient terms at `u` (the height minus a
    /// constant).
    pub(crate) fn shifted(
        grid: &Grid<T>,
        u: &[T],
        nodal: &[T],
        p: T,
        tau: T,
        eps: T,
        lagged: Option<&Lagged>,
    ) -> Self {
        let grad = p_gradient(grid, u, p);
        let mu = grid.corner_weight();
        let two = T::lit(2.0);
        let e2 = eps * eps;
        let is_quadratic = p == two;
        let blocks = (0..grid.corners().len())
            .map(|k| {
                if is_quadratic {
                    return [mu, T::zero(), mu];
                }
                let (gx, gy) = corner_vector(grid, &grad, k);
                let s = gx * gx + gy * gy + e2;
                if s == T::zero() {
                    return [T::zero(); 3];
                }
                let w = s.powf((p - two) * T::lit(0.5));
                let c = if lagged.is_some_and(|l| l.corners[k]) { T::zero() } else { (p - two) / s };
                [
                    mu * w * (T::one() + c * gx * gx),
                    mu * w * c * gx * gy,
                    mu * w * (T::one() + c * gy * gy),
                ]
            })
            .collect();
        let zeroth = p_nodal(nodal, p)
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                if tau == T::zero() {
                    return T::zero();
                }
                if is_quadratic {
                    return tau;
                }
                let s = x * x + e2;
                if s == T::zero() {
                    return T::zero();
                }
                let w = tau * s.powf((p - two) * T::lit(0.5));
                if lagged.is_some_and(|l| l.nodes[i]) {
                    w
                } else {
                    w * (T::one() + (p - two) * x * x / s)
                }
            })
            .collect();
        Self { blocks, zeroth }
    }

    /// Diagonal of the zeroth-order part.
    pub(crate) fn zeroth(&self) -> &[T] {
        &self.zeroth
    }

    pub(crate) fn apply(&self, grid: &Grid<T>, v: &[T]) -> Vec<T> {
        let grad = grid.gradient_slice(v);
        let mut phi = vec![T::zero(); grid.edge_count()];
        for (k, c) in grid.corners().iter().enumerate() {
            let (gx, gy) = corner_vector(grid, &grad, k);
            let b = self.blocks[k];
            phi[c.edges[0]] += b[0] * gx + b[1] * gy;
            if grid.dim() == 2 {
                phi[c.edges[1]] += b[1] * gx + b[2] * gy;
            }
        }
        let mut out = vec![T::zero(); grid.node_count()];
        grid.divergence_weighted_into(&phi, &mut out);
        out.iter_mut()
            .zip(v)
            .zip(&self.zeroth)
            .for_each(|((o, x), z)| *o = *z * *x - *o);
        out
    }
}

/// Corners and nodes where a Newton correction overshoots.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Lagged {
    pub(crate) corners: Vec<bool>,
    pub(crate) nodes: Vec<bool>,
}

/// Flags the corners and nodes whose predicted change under the correction
/// `d` exceeds their current size. `None` when nothing overshoots or the
/// terms are smooth (`p >= 2`).
pub(crate) fn overshooting<T: Scalar>(grid: &Grid<T>, u: &[T], d: &[T], p: T) -> Option<Lagged> {
    overshooting_shifted(grid, u, u, d, p)
}

/// As `overshooting`, with nodal sizes taken from `nodal`.
pub(crate) fn overshooting_shifted<T: Scalar>(grid: &Grid<T>, u: &[T], nodal: &[T], d: &[T], p: T) -> Option<Lagged> {
    if p >= T::lit(2.0) {
        return None;
    }
    let g = p_gradient(grid, u, p);
    let dg = grid.gradient_slice(d);
    let corners: Vec<bool> = (0..grid.corners().len())
        .map(|k| {
            let (gx, gy) = corner_vector(grid, &g, k);
            let (dx, dy) = corner_vector(grid, &dg, k);
            dx * dx + dy * dy > gx * gx + gy * gy
        })
        .collect();
    let nodes: Vec<bool> = p_nodal(nodal, p).iter().zip(d).map(|(x, s)| s.abs() > x.abs()).collect();
    if corners.iter().chain(&nodes).any(|b| *b) {
        Some(Lagged { corners, nodes })
    } else {
        None
    }
}

/// `tau |u|^{p-2} u` nodewise.
pub(crate) fn zeroth_order<T: Scalar>(u: &[T], p: T, tau: T) -> Vec<T> {
    p_nodal(u, p).iter().map(|&x| tau * signed_pow(x, p)).collect()
}

/// `(e^b - e^a) / (b - a)`, or `e^a` when `a == b`. Always positive.
#[inline]
pub fn exp_divided_difference<T: Scalar>(a: T, b: T) -> T {
    let d = b - a;
    if d == T::zero() {
        return a.exp();
    }
    // e^max (1 - e^{-|d|}) / |d|: no intermediate exceeds e^max
    let (hi, s) = if d > T::zero() { (b, d) } else { (a, -d) };
    hi.exp() * (-(-s).exp_m1()) / s
}

pub(crate) fn divided_difference_coefficients<T: Scalar>(grid: &Grid<T>, g: &[T]) -> Vec<T> {
    grid.edges()
        .iter()
        .map(|e| exp_divided_difference(g[e.tail], g[e.head]))
        .collect()
}

/// `div(c grad psi)` for given positive edge coefficients.
pub(crate) fn coefficient_laplacian_slice<T: Scalar>(grid: &Grid<T>, coeff: &[T], psi: &[T]) -> Vec<T> {
    let grad = grid.gradient_slice(psi);
    let phi: Vec<T> = grad
        .iter()
        .zip(coeff)
        .zip(grid.edge_weights())
        .map(|((g, c), w)| *g * *c * *w)
        .collect();
    let mut out = vec![T::zero(); grid.node_count()];
    grid.divergence_weighted_into(&phi, &mut out);
    out
}

/// `div(c(g) grad psi)` with the exponential divided-difference coefficient
/// `c_ij = (e^{g_j} - e^{g_i}) / (g_j - g_i)`. When `psi == g` the result is
/// the plain Laplacian of `e^g`.
pub fn weighted_laplacian_apply<T: Scalar>(g: &NodeField<T>, psi: &NodeField<T>) -> Result<NodeField<T>> {
    psi.ensure_grid(g.grid())?;
    if !g.is_finite() || !psi.is_finite() {
        return Err(Error::NonFinite("weighted Laplacian input"));
    }
    let grid = g.grid();
    let coeff = divided_difference_coefficients(grid, g.values());
    Ok(NodeField::from_vec_unchecked(
        grid.clone(),
        coefficient_laplacian_slice(grid, &coeff, psi.values()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{divergence, gradient, integrate, laplacian, EdgeField};
    use std::sync::Arc;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn grids() -> Vec<Arc<Grid<f64>>> {
        vec![
            Arc::new(Grid::new(1, &[7], &[1.3]).unwrap()),
            Arc::new(Grid::new(2, &[5, 4], &[1.0, 0.8]).unwrap()),
        ]
    }

    #[test]
    fn constant_field_has_zero_p_laplacian() {
        for g in grids() {
            let u = NodeField::constant(g, 2.5);
            for p in [1.2, 1.5, 2.0] {
                assert!(p_laplacian_apply(&u, p).unwrap().values().iter().all(|v| *v == 0.0));
                assert_eq!(p_energy(&u, p).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn p_two_is_plain_laplacian() {
        let mut s = 7u64;
        for g in grids() {
            let u = NodeField::new(g.clone(), (0..g.node_count()).map(|_| lcg(&mut s)).collect()).unwrap();
            let a = p_laplacian_apply(&u, 2.0).unwrap();
            let b = laplacian(&u);
            let scale = b.norm(f64::INFINITY);
            assert!(a.max_abs_diff(&b) <= 1e-13 * scale);
        }
    }

    #[test]
    fn three_node_hand_computation() {
        // h = 1, node weights (1/2, 1, 1/2); g = (1, -1); |g|^{-1/2} g = (1, -1)
        // div: node0 = 1/(1/2), node1 = (-1 - 1)/1, node2 = -(-1)/(1/2)
        let g = Arc::new(Grid::new(1, &[2], &[2.0]).unwrap());
        let u = NodeField::new(g, vec![0.0, 1.0, 0.0]).unwrap();
        let lap = p_laplacian_apply(&u, 1.5).unwrap();
        assert_eq!(lap.values(), &[2.0, -2.0, 2.0]);
    }

    #[test]
    fn p_energy_of_linear_profile() {
        // sum over edges of h * 1^2 = 1, times 1/2
        let g = Arc::new(Grid::<f64>::new(1, &[16], &[1.0]).unwrap());
        let u = NodeField::from_fn(g, |x| x[0]);
        assert!((p_energy(&u, 2.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_p_at_most_one() {
        let g = grids().remove(0);
        let u = NodeField::zeros(g);
        assert!(p_laplacian_apply(&u, 1.0).is_err());
        assert!(p_energy(&u, 0.5).is_err());
    }

    #[test]
    fn pairing_identity_and_homogeneity() {
        let mut s = 11u64;
        for g in grids() {
            for p in [1.2, 1.5, 2.0] {
                let u = NodeField::new(g.clone(), (0..g.node_count()).map(|_| lcg(&mut s)).collect()).unwrap();
                let v = NodeField::new(g.clone(), (0..g.node_count()).map(|_| lcg(&mut s)).collect()).unwrap();
                let lap = p_laplacian_apply(&u, p).unwrap();
                // <Delta_p u, v> = - sum_e w_e F_e grad(v)_e with F_e = phi_e / w_e
                let phi = p_weighted_flux(&g, &g.gradient_slice(u.values()), p);
                let flux = EdgeField::new(
                    g.clone(),
                    phi.iter().zip(g.edge_weights()).map(|(a, w)| a / w).collect(),
                )
                .unwrap();
                let lhs = lap.inner(&v).unwrap();
                let rhs = -flux.inner(&gradient(&v)).unwrap();
                assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
                let div = divergence(&flux);
                assert!(div.max_abs_diff(&lap) <= 1e-12 * lap.norm(f64::INFINITY));

                let pair = -lap.inner(&u).unwrap();
                let e = p_energy(&u, p).unwrap();
                assert!((pair - p * e).abs() <= 1e-13 * pair.abs());
                assert!(integrate(&lap).abs() <= 1e-13 * lap.norm(1.0));
            }
        }
    }

    #[test]
    fn divided_difference_examples() {
        let c = exp_divided_difference(0.0f64, 4f64.ln());
        assert!((c - 3.0 / 4f64.ln()).abs() < 1e-14);
        assert!((c - 2.16404).abs() < 1e-5);
        assert_eq!(exp_divided_difference(0.3f64, 0.3), 0.3f64.exp());
        let near = exp_divided_difference(1.0f64, 1.0 + 1e-9);
        assert!((near - 1f64.exp() * (1.0 + 5e-10)).abs() < 1e-15);
    }

    #[test]
    fn weighted_laplacian_reductions() {
        let mut s = 3u64;
        for g in grids() {
            let zero = NodeField::zeros(g.clone());
            let psi = NodeField::new(g.clone(), (0..g.node_count()).map(|_| lcg(&mut s)).collect()).unwrap();
            let a = weighted_laplacian_apply(&zero, &psi).unwrap();
            assert!(a.max_abs_diff(&laplacian(&psi)) <= 1e-13 * a.norm(f64::INFINITY));

            let gg = psi.scaled(3.0);
            let b = weighted_laplacian_apply(&gg, &gg).unwrap();
            let c = laplacian(&gg.map(f64::exp));
            assert!(b.max_abs_diff(&c) <= 1e-13 * c.norm(f64::INFINITY));
        }
    }

    #[test]
    fn linearization_matches_finite_differences() {
        let mut s = 5u64;
        for g in grids() {
            for p in [1.5, 2.0] {
                let u: Vec<f64> = (0..g.node_count()).map(|_| lcg(&mut s)).collect();
                let v: Vec<f64> = (0..g.node_count()).map(|_| lcg(&mut s)).collect();
                let tau = 0.3;
                let lin = PLinearization::new(&g, &u, p, tau, 0.0);
                let jv = lin.apply(&g, &v);
                let f = |x: &[f64]| -> Vec<f64> {
                    let lap = p_laplacian_slice(&g, x, p);
                    let z = zeroth_order(x, p, tau);
                    lap.iter().zip(z).map(|(l, z)| z - l).collect()
                };
                let h = 1e-6;
                let up: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + h * b).collect();
                let um: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - h * b).collect();
                let (fp, fm) = (f(&up), f(&um));
                for i in 0..u.len() {
                    let fd = (fp[i] - fm[i]) / (2.0 * h);
                    assert!((fd - jv[i]).abs() <= 1e-5 * (1.0 + jv[i].abs()), "{fd} vs {}", jv[i]);
                }
            }
        }
    }
}
