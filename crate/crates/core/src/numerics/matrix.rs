//! Dense complex vectors and matrices.
//!
//! Sizes in this crate are tiny (a handful of antennas), so everything is a
//! flat row-major `Vec` with straightforward loops.

use std::ops::{Deref, DerefMut, Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Column vector of complex entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CVector<T>(Vec<Complex<T>>);

impl<T: Real> CVector<T> {
    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex::zero(); n])
    }

    /// Unit vector with a one at `k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[k] = Complex::one();
        v
    }

    /// Builds a vector, rejecting non-finite entries.
    pub fn try_from_vec(data: Vec<Complex<T>>) -> Result<Self> {
        if data.iter().any(|z| !crate::scalar::is_finite(z)) {
            return Err(invalid("vector has non-finite entries"));
        }
        Ok(Self(data))
    }

    /// Unchecked constructor for values produced by finite arithmetic.
    pub(crate) fn from_vec(data: Vec<Complex<T>>) -> Self {
        Self(data)
    }

    pub fn into_inner(self) -> Vec<Complex<T>> {
        self.0
    }

    /// Inner product `self^H other`.
    pub fn dot(&self, other: &Self) -> Complex<T> {
        debug_assert_eq!(self.len(), other.len());
        self.iter()
            .zip(other.iter())
            .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn norm_sqr(&self) -> T {
        self.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        Self(self.iter().map(|z| z * k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.iter().zip(other.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.iter().zip(other.iter()).map(|(a, b)| a - b).collect())
    }

    /// `self += k * other`
    pub fn axpy(&mut self, k: Complex<T>, other: &Self) {
        for (a, b) in self.0.iter_mut().zip(other.iter()) {
            *a += k * b;
        }
    }

    /// Euclidean distance squared.
    pub fn dist_sqr(&self, other: &Self) -> T {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum()
    }

    pub fn to_c64(&self) -> Vec<num_complex::Complex64> {
        self.iter()
            .map(|z| num_complex::Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy()))
            .collect()
    }
}

impl<T> Deref for CVector<T> {
    type Target = [Complex<T>];
    fn deref(&self) -> &[Complex<T>] {
        &self.0
    }
}

impl<T> DerefMut for CVector<T> {
    fn deref_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.0
    }
}

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Real diagonal matrix.
    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex::new(d, T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data, rejecting non-finite entries.
    pub fn try_from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !crate::scalar::is_finite(z)) {
            return Err(invalid("matrix has non-finite entries"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Convenience constructor from nested rows of `(re, im)` pairs.
    pub fn from_rows(rows: &[&[(f64, f64)]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(invalid("ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&(re, im)| Complex::new(T::lit(re), T::lit(im))))
            .collect();
        Self::try_from_vec(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> CVector<T> {
        CVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn from_columns(cols: &[CVector<T>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        Self::from_fn(rows, cols.len(), |i, j| cols[j][i])
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// `self * rhs^H`, used for Gram matrices like `H H^H`.
    pub fn matmul_adjoint(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "matmul_adjoint dimension mismatch");
        Self::from_fn(self.rows, rhs.rows, |i, j| {
            self.row(i)
                .iter()
                .zip(rhs.row(j))
                .fold(Complex::zero(), |acc, (a, b)| acc + a * b.conj())
        })
    }

    pub fn matvec(&self, x: &CVector<T>) -> CVector<T> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        CVector(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(x.iter())
                        .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        )
    }

    /// `self^H x` without materializing the adjoint.
    pub fn adjoint_matvec(&self, x: &CVector<T>) -> CVector<T> {
        assert_eq!(self.rows, x.len(), "adjoint_matvec dimension mismatch");
        let mut out = CVector::zeros(self.cols);
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, k: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    /// Adds `k` to every diagonal entry.
    pub fn add_diag(&self, k: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += Complex::new(k, T::zero());
        }
        m
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Elementwise Hermitian check with tolerance `tol * max(1, max|a_ij|)`.
    pub fn is_hermitian(&self, tol: T) -> bool {
        if !self.is_square() {
            return false;
        }
        let bound = tol * self.max_abs().max(T::one());
        (0..self.rows).all(|i| (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= bound))
    }

    /// Permutes columns: column `c` of `self` lands at column `perm[c]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.cols);
        let mut out = Self::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (c, &dst) in perm.iter().enumerate() {
                out[(i, dst)] = self[(i, c)];
            }
        }
        out
    }

    /// Drops the listed columns, keeping the rest in order.
    pub fn select_columns(&self, keep: &[usize]) -> Self {
        Self::from_fn(self.rows, keep.len(), |i, j| self[(i, keep[j])])
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}
