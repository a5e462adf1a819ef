use num_complex::Complex;
use num_traits::Zero;

use super::matrix::{CMatrix, CVector};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Cholesky factor `A = L L^H` of a Hermitian positive-definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    lower: CMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factorizes `a`. Pivots below `PIVOT_TOL * trace/n` are reported as
    /// singular.
    pub fn factor(a: &CMatrix<T>) -> Result<Self> {
        if !a.is_square() || a.rows() == 0 {
            return Err(invalid(format!(
                "expected a non-empty square matrix, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if !a.is_hermitian(T::lit(T::HERMITIAN_TOL)) {
            return Err(invalid("matrix is not Hermitian"));
        }
        let n = a.rows();
        let threshold = T::lit(T::PIVOT_TOL) * a.trace().re.abs() / T::lit(n as f64);
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d -= l[(j, k)].norm_sqr();
            }
            if !(d > threshold) {
                return Err(Error::SingularMatrix {
                    pivot: d.to_f64_lossy(),
                    threshold: threshold.to_f64_lossy(),
                });
            }
            let ljj = d.sqrt();
            l[(j, j)] = Complex::new(ljj, T::zero());
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { lower: l })
    }

    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn solve_vec(&self, b: &CVector<T>) -> CVector<T> {
        let n = self.dim();
        assert_eq!(b.len(), n, "rhs length mismatch");
        let l = &self.lower;
        let mut y = b.clone();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[(i, k)] * y[k];
            }
            y[i] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= l[(k, i)].conj() * y[k];
            }
            y[i] = s / l[(i, i)].re;
        }
        y
    }

    pub fn solve_mat(&self, b: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(b.rows(), self.dim(), "rhs row mismatch");
        let cols: Vec<CVector<T>> = (0..b.cols()).map(|j| self.solve_vec(&b.column(j))).collect();
        CMatrix::from_columns(&cols)
    }

    /// Diagonal of `A^{-1}`, real for a Hermitian `A`.
    pub fn inverse_diag(&self) -> Vec<T> {
        let n = self.dim();
        (0..n).map(|k| self.solve_vec(&CVector::unit(n, k))[k].re).collect()
    }
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn hermitian_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    if b.rows() != a.rows() {
        return Err(invalid(format!(
            "rhs has {} rows, matrix is {}x{}",
            b.rows(),
            a.rows(),
            a.cols()
        )));
    }
    Ok(Cholesky::factor(a)?.solve_mat(b))
}

/// Orthonormal basis of the span of `vectors` via twice-applied modified
/// Gram-Schmidt. Directions whose residual norm falls under
/// `RANK_TOL * max(1, ‖v‖)` are dropped.
pub fn orthonormal_basis<T: Real>(vectors: &[CVector<T>]) -> Vec<CVector<T>> {
    let tol = T::lit(T::RANK_TOL);
    let mut basis: Vec<CVector<T>> = Vec::new();
    for v in vectors {
        let scale = v.norm().max(T::one());
        let mut u = v.clone();
        for _ in 0..2 {
            for q in &basis {
                let c = q.dot(&u);
                u.axpy(-c, q);
            }
        }
        let n = u.norm();
        if n > tol * scale {
            basis.push(u.scale(Complex::new(T::one() / n, T::zero())));
        }
    }
    basis
}

/// Least-squares coefficients `argmin ‖rhs - Σ c_k cols_k‖`.
///
/// Columns that are numerically dependent on earlier ones get coefficient
/// zero.
pub fn least_squares<T: Real>(cols: &[CVector<T>], rhs: &CVector<T>) -> Vec<Complex<T>> {
    let m = cols.len();
    let tol = T::lit(T::RANK_TOL);
    // Modified Gram-Schmidt QR, tracking which columns survived.
    let mut q: Vec<Option<CVector<T>>> = Vec::with_capacity(m);
    let mut r = vec![vec![Complex::<T>::zero(); m]; m];
    for (j, col) in cols.iter().enumerate() {
        let scale = col.norm();
        let mut u = col.clone();
        for (i, qi) in q.iter().enumerate() {
            if let Some(qi) = qi {
                let c = qi.dot(&u);
                r[i][j] = c;
                u.axpy(-c, qi);
            }
        }
        let n = u.norm();
        if n > tol * scale && n > T::zero() {
            r[j][j] = Complex::new(n, T::zero());
            q.push(Some(u.scale(Complex::new(T::one() / n, T::zero()))));
        } else {
            q.push(None);
        }
    }
    let qtb: Vec<Complex<T>> = q
        .iter()
        .map(|qi| qi.as_ref().map_or(Complex::zero(), |qi| qi.dot(rhs)))
        .collect();
    let mut coef = vec![Complex::zero(); m];
    for i in (0..m).rev() {
        if q[i].is_none() {
            continue;
        }
        let mut s = qtb[i];
        for k in i + 1..m {
            s -= r[i][k] * coef[k];
        }
        coef[i] = s / r[i][i].re;
    }
    coef
}
