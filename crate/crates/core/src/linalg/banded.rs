use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// LU factorization with partial pivoting of a banded matrix with `kl`
/// subdiagonals and `ku` superdiagonals. Row interchanges widen the upper
/// band to `kl + ku`, which the row windows reserve up front.
#[derive(Debug, Clone)]
pub struct BandedLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    rows: Vec<T>,
    lower: Vec<T>,
    pivots: Vec<usize>,
}

impl<T: Scalar> BandedLu<T> {
    /// Recovers the band of a matrix-free operator by probing with
    /// `kl + ku + 1` structured vectors, then factors it.
    pub fn from_operator(n: usize, kl: usize, ku: usize, op: impl Fn(&[T]) -> Vec<T>) -> Result<Self> {
        Self::probe(n, kl, ku, op, false)
    }

    /// As [`Self::from_operator`] for use as a preconditioner: pivots below
    /// the singularity threshold are raised to it instead of failing. Only
    /// non-finite entries are an error.
    pub fn preconditioner(n: usize, kl: usize, ku: usize, op: impl Fn(&[T]) -> Vec<T>) -> Result<Self> {
        Self::probe(n, kl, ku, op, true)
    }

    fn probe(n: usize, kl: usize, ku: usize, op: impl Fn(&[T]) -> Vec<T>, perturb: bool) -> Result<Self> {
        let width = 2 * kl + ku + 1;
        let mut rows = vec![T::zero(); n * width];
        let stride = kl + ku + 1;
        let mut probe = vec![T::zero(); n];
        for color in 0..stride.min(n) {
            probe.iter_mut().enumerate().for_each(|(j, v)| {
                *v = if j % stride == color { T::one() } else { T::zero() }
            });
            let image = op(&probe);
            for j in (color..n).step_by(stride) {
                let lo = j.saturating_sub(ku);
                let hi = (j + kl).min(n - 1);
                for i in lo..=hi {
                    rows[i * width + (j + kl - i)] = image[i];
                }
            }
        }
        let mut lu = Self { n, kl, ku, width, rows, lower: vec![T::zero(); n * kl.max(1)], pivots: vec![0; n] };
        if lu.rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("banded operator"));
        }
        lu.factor(perturb)?;
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    fn factor(&mut self, perturb: bool) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        // column magnitudes before elimination; rows may differ in scale by
        // many orders, so pivots are judged against their own column
        let mut colmax = vec![T::zero(); n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                colmax[j] = colmax[j].max(self.rows[self.idx(i, j)].abs());
            }
        }
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut piv = k;
            let mut pmax = self.rows[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.rows[self.idx(i, k)].abs();
                if v > pmax {
                    pmax = v;
                    piv = i;
                }
            }
            let floor = colmax[k] * T::eps() * T::lit(16.0);
            if !(pmax > floor) {
                if !perturb {
                    return Err(Error::Singular("banded LU"));
                }
                // an empty column gets a unit pivot
                let mag = if floor > T::zero() { floor } else { T::one() };
                let d = self.idx(k, k);
                self.rows[d] = if self.rows[d] < T::zero() { -mag } else { mag };
                piv = k;
            }
            self.pivots[k] = piv;
            let jmax = (k + kl + ku).min(n - 1);
            if piv != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = if j <= piv + kl + ku { Some(self.idx(piv, j)) } else { None };
                    if let Some(b) = b {
                        self.rows.swap(a, b);
                    }
                }
            }
            let d = self.rows[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.rows[ik] / d;
                self.rows[ik] = T::zero();
                self.lower[k * kl.max(1) + (i - k - 1)] = l;
                if l != T::zero() {
                    for j in k + 1..=jmax {
                        let kj = self.idx(k, j);
                        let ij = self.idx(i, j);
                        let v = self.rows[ij] - l * self.rows[kj];
                        self.rows[ij] = v;
                    }
                }
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut x = b.to_vec();
        for k in 0..n {
            let piv = self.pivots[k];
            if piv != k {
                x.swap(k, piv);
            }
            let xk = x[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                x[i] -= self.lower[k * kl.max(1) + (i - k - 1)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + kl + ku).min(n - 1) {
                s -= self.rows[self.idx(i, j)] * x[j];
            }
            x[i] = s / self.rows[self.idx(i, i)];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    fn banded_op(n: usize, kl: usize, ku: usize, seed: u64) -> DenseMatrix<f64> {
        let mut s = seed;
        let mut m = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let v = ((s >> 11) as f64) / ((1u64 << 53) as f64) - 0.5;
                // weak diagonal so that pivoting is exercised
                m.set(i, j, if i == j { 0.1 * v } else { v });
            }
        }
        m
    }

    #[test]
    fn matches_dense_solve() {
        for (n, kl, ku) in [(1, 0, 0), (7, 1, 1), (20, 3, 2), (33, 5, 7), (12, 0, 3)] {
            let m = banded_op(n, kl, ku, n as u64 + 1);
            let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
            let b = m.mul_vec(&x);
            let lu = BandedLu::from_operator(n, kl, ku, |v| m.mul_vec(v)).unwrap();
            let sol = lu.solve(&b);
            let dense = m.lu().unwrap().solve(&b);
            for i in 0..n {
                assert!((sol[i] - dense[i]).abs() < 1e-9 * (1.0 + dense[i].abs()), "n={n} i={i}");
            }
        }
    }
}
