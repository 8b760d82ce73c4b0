use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major dense square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    /// Assembles the matrix of a linear operator column by column.
    pub fn from_operator(n: usize, op: impl Fn(&[T]) -> Vec<T>) -> Self {
        let mut m = Self::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = op(&e);
            for i in 0..n {
                m.data[i * n + j] = col[i];
            }
            e[j] = T::zero();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
            })
            .collect()
    }

    pub fn lu(&self) -> Result<DenseLu<T>> {
        DenseLu::factor(self.clone())
    }
}

/// LU factorization with partial pivoting.
#[derive(Debug, Clone)]
pub struct DenseLu<T> {
    lu: DenseMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Scalar> DenseLu<T> {
    pub fn factor(mut a: DenseMatrix<T>) -> Result<Self> {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.data.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        for k in 0..n {
            let (piv, pmax) = (k..n)
                .map(|i| (i, a.get(i, k).abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= scale * T::eps() * T::from_usize_lossy(n) || pmax == T::zero() {
                return Err(Error::Singular("dense LU"));
            }
            if piv != k {
                for j in 0..n {
                    a.data.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            let d = a.get(k, k);
            for i in k + 1..n {
                let l = a.get(i, k) / d;
                a.set(i, k, l);
                if l != T::zero() {
                    for j in k + 1..n {
                        let v = a.get(i, j) - l * a.get(k, j);
                        a.set(i, j, v);
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let v = x[i] - self.lu.get(i, j) * x[j];
                x[i] = v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = x[i] - self.lu.get(i, j) * x[j];
                x[i] = v;
            }
            x[i] /= self.lu.get(i, i);
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system() {
        let mut m = DenseMatrix::<f64>::zeros(3);
        let rows = [[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 4.0]];
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                m.set(i, j, *v);
            }
        }
        let x = [1.0, -2.0, 0.5];
        let b = m.mul_vec(&x);
        let sol = m.lu().unwrap().solve(&b);
        for (a, b) in sol.iter().zip(x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn detects_singular() {
        let m = DenseMatrix::<f64>::from_operator(2, |v| vec![v[0] + v[1], v[0] + v[1]]);
        assert!(m.lu().is_err());
    }
}
