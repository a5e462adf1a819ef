//! MIMO detectors.
//!
//! Each detector is split into a per-channel preparation step (filters,
//! orderings, plans) and a cheap per-vector `detect`, so a packet of symbol
//! vectors sharing one channel realization only pays for preparation once.
//! The free functions (`detect_linear`, `detect_mb_mmse_df`, ...) do both in
//! one call.

mod linear;
mod mbdf;
mod ml;
mod osic;

pub use linear::{detect_linear, LinearMmse};
pub use mbdf::{
    detect_mb_mmse_df, detect_multistage, detect_sdf, run_branch, select_branch, MbMmseDf, MbOptions, Multistage,
};
pub use ml::{detect_ml_exhaustive, MlExhaustive, ML_SEARCH_LIMIT};
pub use osic::{detect_osic_vblast, OsicVblast};

use num_complex::Complex;

use crate::model::Constellation;
use crate::numerics::CVector;
use crate::scalar::Real;

/// Branch selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionMetric {
    /// `‖r - H ŝ_l‖²` per received vector.
    #[default]
    Likelihood,
    /// `Σ_j MMSE_{j,l}` from the filter bank (fixed per channel).
    SumMmse,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult<T> {
    /// Constellation index per stream.
    pub indices: Vec<usize>,
    pub symbols: CVector<T>,
    /// Per-branch candidate indices (multi-branch detectors only).
    pub candidates: Vec<Vec<usize>>,
    pub selected: usize,
    pub metrics: Vec<T>,
}

impl<T: Real> DetectionResult<T> {
    pub(crate) fn single(indices: Vec<usize>, c: &Constellation<T>) -> Self {
        let symbols = symbols_of(&indices, c);
        Self {
            indices,
            symbols,
            candidates: Vec::new(),
            selected: 0,
            metrics: Vec::new(),
        }
    }

    pub fn bits<'a>(&'a self, c: &'a Constellation<T>) -> impl Iterator<Item = bool> + 'a {
        self.indices.iter().flat_map(move |&k| c.bits_of(k))
    }
}

pub(crate) fn symbols_of<T: Real>(indices: &[usize], c: &Constellation<T>) -> CVector<T> {
    CVector::from_vec(indices.iter().map(|&k| c.point(k)).collect())
}

/// A detector prepared for one channel realization.
pub trait Detector<T: Real>: Send + Sync {
    fn detect(&self, r: &CVector<T>) -> DetectionResult<T>;
}

#[inline]
pub(crate) fn inner<T: Real>(w: &[Complex<T>], r: &[Complex<T>]) -> Complex<T> {
    w.iter()
        .zip(r)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
}
