//! Independent reference computations for the integration tests. Nothing
//! here goes through the library's factorizations or detectors.

#![allow(dead_code)]

use mbdf::model::{random_channel, Constellation};
use mbdf::numerics::{rng_for_trial, CMatrix, CVector, RngStream};
use num_complex::Complex64;

pub type Dense = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn dense(m: &CMatrix<f64>) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn to_matrix(d: &Dense) -> CMatrix<f64> {
    let rows = d.len();
    let cols = if rows == 0 { 0 } else { d[0].len() };
    CMatrix::try_from_vec(rows, cols, d.iter().flatten().copied().collect()).unwrap()
}

pub fn vector(v: &[Complex64]) -> CVector<f64> {
    CVector::try_from_vec(v.to_vec()).unwrap()
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum()).collect())
        .collect()
}

pub fn mul_vec(a: &Dense, x: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn adjoint(a: &Dense) -> Dense {
    let (n, m) = (a.len(), a[0].len());
    (0..m).map(|j| (0..n).map(|i| a[i][j].conj()).collect()).collect()
}

pub fn eye(n: usize) -> Dense {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect())
        .collect()
}

pub fn add_diag(a: &Dense, k: f64) -> Dense {
    let mut out = a.clone();
    for (i, row) in out.iter_mut().enumerate() {
        row[i] += k;
    }
    out
}

pub fn sub(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect())
        .collect()
}

pub fn scale(a: &Dense, k: f64) -> Dense {
    a.iter().map(|r| r.iter().map(|x| x * k).collect()).collect()
}

/// Gauss-Jordan with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a.iter().zip(eye(n)).map(|(r, e)| r.iter().copied().chain(e).collect()).collect();
    for col in 0..n {
        let p = (col..n).max_by(|&x, &y| m[x][col].norm().total_cmp(&m[y][col].norm())).unwrap();
        m.swap(col, p);
        let d = m[col][col];
        for x in m[col].iter_mut() {
            *x /= d;
        }
        for row in 0..n {
            if row != col {
                let k = m[row][col];
                let pivot = m[col].clone();
                for (x, y) in m[row].iter_mut().zip(pivot) {
                    *x -= k * y;
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn frob(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn channel(seed: u64, index: u64, nt: usize, nr: usize) -> CMatrix<f64> {
    random_channel(nt, nr, &mut rng_for_trial(seed, index)).unwrap()
}

pub fn random_symbols(nt: usize, cst: &Constellation<f64>, rng: &mut RngStream) -> Vec<usize> {
    (0..nt).map(|_| (rng.bit() as usize) << 1 | rng.bit() as usize).map(|k| k % cst.len()).collect()
}

pub fn symbols(indices: &[usize], cst: &Constellation<f64>) -> Vec<Complex64> {
    indices.iter().map(|&k| cst.point(k)).collect()
}

/// Brute force `arg min ‖r - H s‖²`, enumerating with the last stream
/// varying slowest (the opposite of the library's search).
pub fn ml_oracle(h: &Dense, r: &[Complex64], cst: &Constellation<f64>) -> Vec<usize> {
    let nt = h[0].len();
    let n = cst.len();
    let total = n.pow(nt as u32);
    let mut best = (f64::INFINITY, vec![0; nt]);
    for code in 0..total {
        let idx: Vec<usize> = (0..nt).map(|k| code / n.pow(k as u32) % n).collect();
        let s = symbols(&idx, cst);
        let m = diff(&mul_vec(h, &s), r).powi(2);
        if m < best.0 {
            best = (m, idx);
        }
    }
    best.1
}

pub fn slice(z: Complex64, cst: &Constellation<f64>) -> usize {
    (0..cst.len())
        .min_by(|&a, &b| (z - cst.point(a)).norm().total_cmp(&(z - cst.point(b)).norm()))
        .unwrap()
}

/// Nulling, slicing, cancellation and deflation in a fixed ordering, with
/// MMSE nulling vectors of the deflated channel.
pub fn sic_oracle(h: &Dense, r: &[Complex64], order: &[usize], rho: f64, cst: &Constellation<f64>) -> Vec<usize> {
    let nr = h.len();
    let mut residual = r.to_vec();
    let mut remaining: Vec<usize> = order.to_vec();
    let mut out = vec![0; order.len()];
    while let Some(&k) = remaining.first() {
        let hd: Dense = (0..nr).map(|i| remaining.iter().map(|&j| h[i][j]).collect()).collect();
        let g = inverse(&add_diag(&mul(&hd, &adjoint(&hd)), rho));
        let col: Vec<Complex64> = (0..nr).map(|i| h[i][k]).collect();
        let w = mul_vec(&g, &col);
        let z: Complex64 = w.iter().zip(&residual).map(|(a, b)| a.conj() * b).sum();
        let d = slice(z, cst);
        out[k] = d;
        for i in 0..nr {
            residual[i] -= h[i][k] * cst.point(d);
        }
        remaining.remove(0);
    }
    out
}
