//! Small dense matrices with an LU factorization, enough for the Nyström
//! systems of a few hundred unknowns used throughout the crate.

use std::ops::{Index, IndexMut};

use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<R: Scalar>(&self, f: impl Fn(S) -> R) -> Matrix<R> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `x^T A`, i.e. the row vector obtained by contracting the first index.
    pub fn vec_mul(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.rows, "dimension mismatch in vec_mul");
        let mut out = vec![S::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == S::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other[(k, j)];
                    out[(i, j)] += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, s: S) -> Matrix<S> {
        self.map(|x| x * s)
    }

    pub fn add(&self, other: &Matrix<S>) -> Matrix<S> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    /// Maximum absolute column sum.
    pub fn norm_1(&self) -> S::Real {
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self[(i, j)].modulus())
                    .fold(S::Real::zero(), |a, b| a + b)
            })
            .fold(S::Real::zero(), |a, b| a.max(b))
    }

    pub fn lu(&self) -> Result<Lu<S>> {
        Lu::new(self.clone())
    }

    pub fn inverse(&self) -> Result<Matrix<S>> {
        self.lu()?.inverse()
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu<S> {
    lu: Matrix<S>,
    perm: Vec<usize>,
}

impl<S: Scalar> Lu<S> {
    fn new(mut a: Matrix<S>) -> Result<Self> {
        assert_eq!(a.rows, a.cols, "LU of a non-square matrix");
        let n = a.rows;
        let scale = a.norm_1();
        let tiny = scale * S::Real::epsilon() * S::Real::from_usize_lossy(n.max(1));
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a[(i, k)].modulus()))
                .fold((k, S::Real::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny || pmax == S::Real::zero() {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let f = a[(i, k)] / pivot;
                a[(i, k)] = f;
                if f == S::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= f * akj;
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.lu.rows
    }

    pub fn solve(&self, b: &[S]) -> Vec<S> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    pub fn inverse(&self) -> Result<Matrix<S>> {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|x| *x = S::zero());
            e[j] = S::one();
            let col = self.solve(&e);
            for (i, c) in col.into_iter().enumerate() {
                if !c.modulus().is_finite() {
                    return Err(Error::SingularMatrix);
                }
                inv[(i, j)] = c;
            }
        }
        Ok(inv)
    }
}

/// 1-norm condition number `‖A‖₁‖A⁻¹‖₁`.
pub fn condition_number<S: Scalar>(a: &Matrix<S>, inverse: &Matrix<S>) -> S::Real {
    a.norm_1() * inverse.norm_1()
}

/// Weighted inner product `Σ w_i x_i y_i` (no conjugation).
pub fn weighted_dot<S: Scalar>(w: &[S::Real], x: &[S], y: &[S]) -> S {
    w.iter()
        .zip(x.iter().zip(y))
        .fold(S::zero(), |acc, (&wi, (&xi, &yi))| acc + S::from_real(wi) * xi * yi)
}
