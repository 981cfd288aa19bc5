//! Dense Hermitian matrices and an unregularized Cholesky solver.
//!
//! Gram matrices of monomials have diagonals spanning many orders of
//! magnitude, so factorization runs on the Jacobi-scaled matrix
//! `D^{-1/2} A D^{-1/2}` and pivots are judged on that scale.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Smallest admissible pivot of the unit-diagonal scaled matrix.
pub const MIN_SCALED_PIVOT: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m.set(i, i, Complex64::new(v, 0.0));
        }
        m
    }

    /// Builds a matrix from row-major data, symmetrizing `(A + A^*)/2`.
    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), n * n);
        let mut m = HermitianMatrix { n, data };
        for i in 0..n {
            for j in i..n {
                let v = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
                m.set(i, j, v);
                m.set(j, i, v.conj());
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).re).collect()
    }

    /// Largest `|A_ij - conj(A_ji)| / sqrt(A_ii A_jj)`.
    pub fn hermitian_defect(&self) -> f64 {
        let d = self.diagonal();
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let scale = (d[i].abs() * d[j].abs()).sqrt().max(f64::MIN_POSITIVE);
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm() / scale);
            }
        }
        worst
    }

    /// Largest scaled off-diagonal magnitude.
    pub fn off_diagonal_max(&self) -> f64 {
        let d = self.diagonal();
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    let scale = (d[i].abs() * d[j].abs()).sqrt().max(f64::MIN_POSITIVE);
                    worst = worst.max(self.get(i, j).norm() / scale);
                }
            }
        }
        worst
    }

    pub fn is_diagonal(&self) -> bool {
        self.off_diagonal_max() == 0.0
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `x^* A x`, real for Hermitian `A`.
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        let ax = self.mul_vec(x);
        x.iter().zip(&ax).map(|(xi, yi)| (xi.conj() * yi).re).sum()
    }

    /// `y^* A x`.
    pub fn sesquilinear(&self, y: &[Complex64], x: &[Complex64]) -> Complex64 {
        let ax = self.mul_vec(x);
        y.iter().zip(&ax).map(|(yi, v)| yi.conj() * v).sum()
    }

    /// Principal submatrix on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> HermitianMatrix {
        let k = idx.len();
        let mut m = HermitianMatrix::zeros(k);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }

    pub fn add_assign(&mut self, other: &HermitianMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }
}

/// Cholesky factor `A = D^{1/2} L L^* D^{1/2}` of a Hermitian positive
/// definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    scale: Vec<f64>,
    lower: Vec<Complex64>,
    min_pivot: f64,
}

impl Cholesky {
    pub fn factor(a: &HermitianMatrix) -> Result<Self> {
        let n = a.dim();
        let mut scale = Vec::with_capacity(n);
        for (i, d) in a.diagonal().into_iter().enumerate() {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::Conditioning {
                    smallest_pivot: d,
                    index: i,
                });
            }
            scale.push(d.sqrt());
        }
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        let mut min_pivot = f64::INFINITY;
        for j in 0..n {
            let mut diag = a.get(j, j).re / (scale[j] * scale[j]);
            for k in 0..j {
                diag -= l[j * n + k].norm_sqr();
            }
            min_pivot = min_pivot.min(diag);
            if !(diag > MIN_SCALED_PIVOT) {
                return Err(Error::Conditioning {
                    smallest_pivot: diag,
                    index: j,
                });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = Complex64::new(ljj, 0.0);
            for i in (j + 1)..n {
                let mut v = a.get(i, j) / (scale[i] * scale[j]);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = v / ljj;
            }
        }
        Ok(Cholesky {
            n,
            scale,
            lower: l,
            min_pivot,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Smallest pivot of the scaled factorization.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut y: Vec<Complex64> = b.iter().zip(&self.scale).map(|(v, s)| v / s).collect();
        for i in 0..n {
            let mut v = y[i];
            for k in 0..i {
                v -= self.lower[i * n + k] * y[k];
            }
            y[i] = v / self.lower[i * n + i].re;
        }
        for i in (0..n).rev() {
            let mut v = y[i];
            for k in (i + 1)..n {
                v -= self.lower[k * n + i].conj() * y[k];
            }
            y[i] = v / self.lower[i * n + i].re;
        }
        y.iter().zip(&self.scale).map(|(v, s)| v / s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_small_hermitian_system() {
        let a = HermitianMatrix::from_rows(2, vec![c(4.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]);
        let ch = Cholesky::factor(&a).unwrap();
        let b = vec![c(1.0, 2.0), c(-1.0, 0.5)];
        let x = ch.solve(&b);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-14);
        }
    }

    #[test]
    fn badly_scaled_diagonal_is_accepted() {
        let a = HermitianMatrix::from_diagonal(&[1e-60, 1.0, 1e40]);
        let ch = Cholesky::factor(&a).unwrap();
        let x = ch.solve(&[c(1e-60, 0.0), c(2.0, 0.0), c(1e40, 0.0)]);
        assert!((x[0].re - 1.0).abs() < 1e-14);
        assert!((x[1].re - 2.0).abs() < 1e-14);
        assert!((x[2].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = HermitianMatrix::from_rows(2, vec![c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]);
        match Cholesky::factor(&a) {
            Err(Error::Conditioning { index, smallest_pivot }) => {
                assert_eq!(index, 1);
                assert!(smallest_pivot.abs() < 1e-15);
            }
            other => panic!("expected conditioning error, got {other:?}"),
        }
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let a = HermitianMatrix::from_rows(2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]);
        assert!(Cholesky::factor(&a).is_err());
    }
}
