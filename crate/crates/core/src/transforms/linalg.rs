//! Small dense complex solver used as the reference path for operator inverses.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T> {
    n: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex::new(T::one(), T::zero());
        }
        m
    }

    /// Builds the matrix column by column from the images of unit vectors.
    pub fn from_columns(n: usize, mut column: impl FnMut(usize) -> Vec<Complex<T>>) -> Self {
        let mut m = Self::zeros(n);
        for col in 0..n {
            let c = column(col);
            assert_eq!(c.len(), n, "column {col} has wrong length");
            for (row, v) in c.into_iter().enumerate() {
                m.data[row * n + col] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.data[row * self.n + col]
    }

    pub fn add_identity(&mut self) {
        for i in 0..self.n {
            self.data[i * self.n + i] = self.data[i * self.n + i] + T::one();
        }
    }

    pub fn mul_vec(&self, x: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|r| {
                self.data[r * self.n..(r + 1) * self.n]
                    .iter()
                    .zip(x)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::Parameter(format!("rhs has length {}, expected {n}", rhs.len())));
        }
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        let scale = a.iter().map(|c| c.norm()).fold(T::zero(), T::max);
        let tiny = scale * T::epsilon() * T::from_int(n.max(1) as i64);
        for col in 0..n {
            let (pivot, pmag) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -T::one()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmag > tiny) {
                return Err(Error::Numerical(format!("singular matrix at column {col}")));
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(col * n + k, pivot * n + k);
                }
                b.swap(col, pivot);
            }
            let inv = Complex::new(T::one(), T::zero()) / a[col * n + col];
            for r in col + 1..n {
                let factor = a[r * n + col] * inv;
                if factor.is_zero() {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] = a[r * n + k] - factor * v;
                }
                let bc = b[col];
                b[r] = b[r] - factor * bc;
            }
        }
        for col in (0..n).rev() {
            let mut acc = b[col];
            for k in col + 1..n {
                acc = acc - a[col * n + k] * b[k];
            }
            b[col] = acc / a[col * n + col];
        }
        Ok(b)
    }
}
