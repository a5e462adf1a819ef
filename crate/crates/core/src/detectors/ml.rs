use super::{DetectionResult, Detector};
use crate::error::{Error, Result};
use crate::model::Constellation;
use crate::numerics::{CMatrix, CVector};
use crate::scalar::Real;
use num_complex::Complex;

/// Largest candidate set the exhaustive search accepts.
pub const ML_SEARCH_LIMIT: u128 = 1_000_000;

/// Exhaustive maximum-likelihood search over `A^{N_T}`.
///
/// Enumeration is depth-first over streams with the partial residual carried
/// down the tree, using precomputed `h_k a_n` products.
#[derive(Debug, Clone)]
pub struct MlExhaustive<T> {
    /// `columns[k][n] = h_k * a_n`
    columns: Vec<Vec<CVector<T>>>,
    constellation: Constellation<T>,
}

impl<T: Real> MlExhaustive<T> {
    pub fn new(h: &CMatrix<T>, c: &Constellation<T>) -> Result<Self> {
        let size = (c.len() as u128).checked_pow(h.cols() as u32).unwrap_or(u128::MAX);
        if size > ML_SEARCH_LIMIT {
            return Err(Error::UnsupportedSize {
                size,
                limit: ML_SEARCH_LIMIT,
            });
        }
        let columns = (0..h.cols())
            .map(|k| {
                let col = h.column(k);
                c.points().iter().map(|&a| col.scale(a)).collect()
            })
            .collect();
        Ok(Self {
            columns,
            constellation: c.clone(),
        })
    }

    fn search(&self, depth: usize, residual: &mut [Complex<T>], current: &mut [usize], best: &mut (T, Vec<usize>)) {
        if depth == self.columns.len() {
            let metric: T = residual.iter().map(|z| z.norm_sqr()).sum();
            if metric < best.0 {
                best.0 = metric;
                best.1.copy_from_slice(current);
            }
            return;
        }
        for (n, contribution) in self.columns[depth].iter().enumerate() {
            for (r, c) in residual.iter_mut().zip(contribution.iter()) {
                *r -= c;
            }
            current[depth] = n;
            self.search(depth + 1, residual, current, best);
            for (r, c) in residual.iter_mut().zip(contribution.iter()) {
                *r += c;
            }
        }
    }
}

impl<T: Real> Detector<T> for MlExhaustive<T> {
    fn detect(&self, r: &CVector<T>) -> DetectionResult<T> {
        let nt = self.columns.len();
        let mut residual = r.to_vec();
        let mut current = vec![0; nt];
        let mut best = (T::infinity(), vec![0; nt]);
        self.search(0, &mut residual, &mut current, &mut best);
        let mut out = DetectionResult::single(best.1, &self.constellation);
        out.metrics = vec![best.0];
        out
    }
}

pub fn detect_ml_exhaustive<T: Real>(h: &CMatrix<T>, r: &CVector<T>, c: &Constellation<T>) -> Result<DetectionResult<T>> {
    Ok(MlExhaustive::new(h, c)?.detect(r))
}
