use super::{inner, DetectionResult, Detector};
use crate::constraints::deflated_mmse;
use crate::error::Result;
use crate::model::Constellation;
use crate::numerics::{CMatrix, CVector, Cholesky};
use crate::scalar::Real;

#[derive(Debug, Clone)]
struct Step<T> {
    stream: usize,
    nulling: CVector<T>,
    column: CVector<T>,
}

/// MMSE V-BLAST: null, slice, cancel, deflate.
///
/// At each step the undetected stream with the smallest post-detection MMSE
/// on the deflated channel is nulled with the MMSE filter of that deflated
/// channel; its reconstructed contribution `h_k ŝ_k` is then subtracted from
/// the received vector.
#[derive(Debug, Clone)]
pub struct OsicVblast<T> {
    steps: Vec<Step<T>>,
    constellation: Constellation<T>,
}

impl<T: Real> OsicVblast<T> {
    pub fn new(h: &CMatrix<T>, sigma_s2: T, sigma_n2: T, c: &Constellation<T>) -> Result<Self> {
        let nt = h.cols();
        let mut remaining: Vec<usize> = (0..nt).collect();
        let mut steps = Vec::with_capacity(nt);
        let tie = T::lit(1e-12);
        while !remaining.is_empty() {
            let mse = deflated_mmse(h, &remaining, sigma_s2, sigma_n2)?;
            let mut best = 0;
            for k in 1..remaining.len() {
                if mse[k] < mse[best] * (T::one() - tie) {
                    best = k;
                }
            }
            // nulling vector: H_d (H_d^H H_d + ρ I)^{-1} e_best
            let hd = h.select_columns(&remaining);
            let gram = hd.adjoint().matmul(&hd).add_diag(sigma_n2 / sigma_s2);
            let x = Cholesky::factor(&gram)?.solve_vec(&CVector::unit(remaining.len(), best));
            let stream = remaining.remove(best);
            steps.push(Step {
                stream,
                nulling: hd.matvec(&x),
                column: h.column(stream),
            });
        }
        Ok(Self {
            steps,
            constellation: c.clone(),
        })
    }

    pub fn ordering(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.stream).collect()
    }
}

impl<T: Real> Detector<T> for OsicVblast<T> {
    fn detect(&self, r: &CVector<T>) -> DetectionResult<T> {
        let mut residual = r.clone();
        let mut indices = vec![0; self.steps.len()];
        for step in &self.steps {
            let k = self.constellation.slice_index(inner(&step.nulling, &residual));
            indices[step.stream] = k;
            residual.axpy(-self.constellation.point(k), &step.column);
        }
        DetectionResult::single(indices, &self.constellation)
    }
}

pub fn detect_osic_vblast<T: Real>(
    h: &CMatrix<T>,
    r: &CVector<T>,
    sigma_s2: T,
    sigma_n2: T,
    c: &Constellation<T>,
) -> Result<DetectionResult<T>> {
    Ok(OsicVblast::new(h, sigma_s2, sigma_n2, c)?.detect(r))
}
