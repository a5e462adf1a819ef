use super::{inner, DetectionResult, Detector};
use crate::error::Result;
use crate::filters::FixedPointDesigner;
use crate::model::Constellation;
use crate::numerics::{CMatrix, CVector};
use crate::scalar::Real;

/// Linear MMSE detector: `ŝ_j = Q(w_j^H r)` with `w_j = R^{-1} p_j`.
#[derive(Debug, Clone)]
pub struct LinearMmse<T> {
    filters: Vec<CVector<T>>,
    constellation: Constellation<T>,
}

impl<T: Real> LinearMmse<T> {
    pub fn new(h: &CMatrix<T>, sigma_s2: T, sigma_n2: T, c: &Constellation<T>) -> Result<Self> {
        let designer = FixedPointDesigner::new(h, sigma_s2, sigma_n2)?;
        let filters = (0..h.cols()).map(|j| designer.linear(j).w).collect();
        Ok(Self {
            filters,
            constellation: c.clone(),
        })
    }

    pub fn filters(&self) -> &[CVector<T>] {
        &self.filters
    }
}

impl<T: Real> Detector<T> for LinearMmse<T> {
    fn detect(&self, r: &CVector<T>) -> DetectionResult<T> {
        let indices = self
            .filters
            .iter()
            .map(|w| self.constellation.slice_index(inner(w, r)))
            .collect();
        DetectionResult::single(indices, &self.constellation)
    }
}

pub fn detect_linear<T: Real>(
    h: &CMatrix<T>,
    r: &CVector<T>,
    sigma_s2: T,
    sigma_n2: T,
    c: &Constellation<T>,
) -> Result<DetectionResult<T>> {
    Ok(LinearMmse::new(h, sigma_s2, sigma_n2, c)?.detect(r))
}
