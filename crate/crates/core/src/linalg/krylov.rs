use crate::linalg::{axpy, dot, norm2};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct KrylovOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// Final residual norm `||b - A x||_2` (unweighted Euclidean).
    pub residual: T,
    pub converged: bool,
}

/// Preconditioned conjugate gradients for a symmetric positive definite
/// operator with a diagonal (Jacobi) preconditioner.
pub fn conjugate_gradient<T: Scalar>(
    op: impl Fn(&[T]) -> Vec<T>,
    diag: Option<&[T]>,
    b: &[T],
    x0: &[T],
    tol: T,
    max_iterations: usize,
) -> KrylovOutcome<T> {
    let mut x = x0.to_vec();
    let ax = op(&x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(b, a)| *b - *a).collect();
    let precond = |r: &[T]| -> Vec<T> {
        match diag {
            Some(d) => r.iter().zip(d).map(|(r, d)| *r / *d).collect(),
            None => r.to_vec(),
        }
    };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rnorm = norm2(&r);
    let mut it = 0;
    while rnorm > tol && it < max_iterations {
        let ap = op(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            break;
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        it += 1;
        rnorm = norm2(&r);
        if rnorm <= tol {
            break;
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = *z + beta * *p);
    }
    // recompute the true residual; the recurrence drifts
    let ax = op(&x);
    let residual = norm2(&b.iter().zip(&ax).map(|(b, a)| *b - *a).collect::<Vec<_>>());
    KrylovOutcome { x, iterations: it, residual, converged: residual <= tol }
}

/// Restarted GMRES with right preconditioning `A M^{-1} y = b, x = M^{-1} y`.
pub fn gmres<T: Scalar>(
    op: impl Fn(&[T]) -> Vec<T>,
    precond: impl Fn(&[T]) -> Vec<T>,
    b: &[T],
    x0: &[T],
    tol: T,
    restart: usize,
    max_iterations: usize,
) -> KrylovOutcome<T> {
    let n = b.len();
    let m = restart.max(1);
    let mut x = x0.to_vec();
    let mut total = 0;
    let residual_of = |x: &[T]| -> Vec<T> {
        let ax = op(x);
        b.iter().zip(&ax).map(|(b, a)| *b - *a).collect()
    };
    let mut r = residual_of(&x);
    let mut beta = norm2(&r);
    while beta > tol && total < max_iterations {
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| *v / beta).collect());
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..m {
            if total >= max_iterations {
                break;
            }
            total += 1;
            let z = precond(&basis[k]);
            let mut w = op(&z);
            for (j, v) in basis.iter().enumerate() {
                let hj = dot(&w, v);
                h[j][k] = hj;
                axpy(-hj, v, &mut w);
            }
            let wn = norm2(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let denom = (h[k][k] * h[k][k] + h[k + 1][k] * h[k + 1][k]).sqrt();
            if denom == T::zero() {
                cs[k] = T::one();
                sn[k] = T::zero();
            } else {
                cs[k] = h[k][k] / denom;
                sn[k] = h[k + 1][k] / denom;
            }
            h[k][k] = cs[k] * h[k][k] + sn[k] * h[k + 1][k];
            h[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k_used = k + 1;
            if g[k + 1].abs() <= tol || wn == T::zero() {
                break;
            }
            basis.push(w.iter().map(|v| *v / wn).collect());
        }
        // back substitution for the least-squares coefficients
        let mut y = vec![T::zero(); k_used];
        for i in (0..k_used).rev() {
            let mut s = g[i];
            for j in i + 1..k_used {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut update = vec![T::zero(); n];
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &basis[j], &mut update);
        }
        let dx = precond(&update);
        axpy(T::one(), &dx, &mut x);
        r = residual_of(&x);
        let new_beta = norm2(&r);
        if !(new_beta < beta) && k_used < m {
            beta = new_beta;
            break;
        }
        beta = new_beta;
    }
    KrylovOutcome { x, iterations: total, residual: beta, converged: beta <= tol }
}
