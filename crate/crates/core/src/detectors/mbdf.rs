//! Multi-branch MMSE decision feedback and its multistage extension.

use num_complex::Complex;

use super::{inner, symbols_of, DetectionResult, Detector, SelectionMetric};
use crate::constraints::{build_branch_plans, pic_shape, BranchKind, BranchPlan};
use crate::error::{invalid, Result};
use crate::filters::{build_filter_bank, FilterBank, FilterPair, FixedPointDesigner, FixedPointScheme};
use crate::model::Constellation;
use crate::numerics::{CMatrix, CVector};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MbOptions<T> {
    pub branches: usize,
    pub beta: T,
    pub metric: SelectionMetric,
}

impl<T: Real> MbOptions<T> {
    pub fn new(branches: usize) -> Self {
        Self {
            branches,
            beta: T::one(),
            metric: SelectionMetric::Likelihood,
        }
    }
}

/// Runs one branch: `z_{j,l} = w^H r - f^H ŝ^o` followed by slicing.
///
/// SIC branches visit streams in the plan ordering and feed back the
/// decisions made so far. PIC branches start from linear MMSE decisions for
/// every stream and then cancel all streams but `j` in parallel.
pub fn run_branch<T: Real>(r: &CVector<T>, plan: &BranchPlan<T>, bank: &FilterBank<T>, c: &Constellation<T>) -> Vec<usize> {
    let nt = plan.nt();
    let pairs = &bank.pairs[plan.index];
    let mut indices = vec![0; nt];
    match plan.kind {
        BranchKind::Sic => {
            let mut decided = vec![Complex::new(T::zero(), T::zero()); nt];
            for &j in &plan.ordering {
                let k = c.slice_index(pairs[j].output(r, &decided));
                indices[j] = k;
                decided[j] = c.point(k);
            }
        }
        BranchKind::Pic => {
            let initial: Vec<Complex<T>> = bank.linear.iter().map(|p| c.slice(inner(&p.w, r))).collect();
            for j in 0..nt {
                indices[j] = c.slice_index(pairs[j].output(r, &initial));
            }
        }
    }
    indices
}

/// Likelihood metrics `‖r - H ŝ_l‖²` and the arg min (lowest index on ties).
pub fn select_branch<T: Real>(candidates: &[CVector<T>], h: &CMatrix<T>, r: &CVector<T>) -> Result<(usize, Vec<T>)> {
    if candidates.is_empty() {
        return Err(invalid("no candidates to select from"));
    }
    let metrics: Vec<T> = candidates.iter().map(|s| h.matvec(s).dist_sqr(r)).collect();
    Ok((arg_min(&metrics), metrics))
}

fn arg_min<T: Real>(values: &[T]) -> usize {
    let mut best = 0;
    for (l, v) in values.iter().enumerate().skip(1) {
        if *v < values[best] {
            best = l;
        }
    }
    best
}

/// MB-MMSE-DF detector prepared for one channel realization.
#[derive(Debug, Clone)]
pub struct MbMmseDf<T> {
    h: CMatrix<T>,
    plans: Vec<BranchPlan<T>>,
    bank: FilterBank<T>,
    metric: SelectionMetric,
    constellation: Constellation<T>,
}

impl<T: Real> MbMmseDf<T> {
    pub fn new(h: &CMatrix<T>, sigma_s2: T, sigma_n2: T, options: MbOptions<T>, c: &Constellation<T>) -> Result<Self> {
        let plans = build_branch_plans(h.cols(), options.branches, h, sigma_s2, sigma_n2, options.beta)?;
        let bank = build_filter_bank(h, &plans, sigma_s2, sigma_n2)?;
        Ok(Self {
            h: h.clone(),
            plans,
            bank,
            metric: options.metric,
            constellation: c.clone(),
        })
    }

    pub fn plans(&self) -> &[BranchPlan<T>] {
        &self.plans
    }

    pub fn bank(&self) -> &FilterBank<T> {
        &self.bank
    }

    fn select(&self, candidates: Vec<Vec<usize>>, r: &CVector<T>) -> DetectionResult<T> {
        let (selected, metrics) = match self.metric {
            SelectionMetric::Likelihood => {
                let symbols: Vec<CVector<T>> = candidates.iter().map(|k| symbols_of(k, &self.constellation)).collect();
                select_branch(&symbols, &self.h, r).expect("at least one branch")
            }
            SelectionMetric::SumMmse => {
                let m: Vec<T> = (0..candidates.len()).map(|l| self.bank.branch_mmse(l)).collect();
                (arg_min(&m), m)
            }
        };
        let indices = candidates[selected].clone();
        DetectionResult {
            symbols: symbols_of(&indices, &self.constellation),
            indices,
            candidates,
            selected,
            metrics,
        }
    }
}

impl<T: Real> Detector<T> for MbMmseDf<T> {
    fn detect(&self, r: &CVector<T>) -> DetectionResult<T> {
        let candidates = self
            .plans
            .iter()
            .map(|plan| run_branch(r, plan, &self.bank, &self.constellation))
            .collect();
        self.select(candidates, r)
    }
}

pub fn detect_mb_mmse_df<T: Real>(
    h: &CMatrix<T>,
    r: &CVector<T>,
    sigma_s2: T,
    sigma_n2: T,
    options: MbOptions<T>,
    c: &Constellation<T>,
) -> Result<DetectionResult<T>> {
    Ok(MbMmseDf::new(h, sigma_s2, sigma_n2, options, c)?.detect(r))
}

/// Successive decision feedback with MMSE filters: the single-branch case.
pub fn detect_sdf<T: Real>(
    h: &CMatrix<T>,
    r: &CVector<T>,
    sigma_s2: T,
    sigma_n2: T,
    c: &Constellation<T>,
) -> Result<DetectionResult<T>> {
    detect_mb_mmse_df(h, r, sigma_s2, sigma_n2, MbOptions::new(1), c)
}

/// Multistage MB-MMSE-DF.
///
/// Stage 1 is the plain multi-branch detector. Every later stage re-runs all
/// branches with full-cancellation filters (all taps but the stream's own)
/// fed by the previous stage's final decisions. Within a stage a branch
/// revisits the streams one at a time, overwriting each decision as it goes,
/// in the reverse of the branch's stage-1 ordering on even stages and in the
/// original ordering on odd ones.
#[derive(Debug, Clone)]
pub struct Multistage<T> {
    first: MbMmseDf<T>,
    stages: usize,
    full_cancellation: Vec<FilterPair<T>>,
}

impl<T: Real> Multistage<T> {
    pub fn new(
        h: &CMatrix<T>,
        sigma_s2: T,
        sigma_n2: T,
        options: MbOptions<T>,
        stages: usize,
        c: &Constellation<T>,
    ) -> Result<Self> {
        if stages < 1 {
            return Err(invalid("at least one stage required"));
        }
        let first = MbMmseDf::new(h, sigma_s2, sigma_n2, options, c)?;
        let full_cancellation = if stages > 1 {
            let designer = FixedPointDesigner::new(h, sigma_s2, sigma_n2)?;
            (0..h.cols())
                .map(|j| {
                    let shape = pic_shape(h.cols(), j)?;
                    designer.design(&shape.projection, options.beta, j, FixedPointScheme::default())
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(Self {
            first,
            stages,
            full_cancellation,
        })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    /// Stage ordering for branch `l` at stage `m` (1-based).
    pub fn stage_ordering(&self, branch: usize, stage: usize) -> Vec<usize> {
        let o = &self.first.plans[branch].ordering;
        if stage % 2 == 0 {
            o.iter().rev().copied().collect()
        } else {
            o.clone()
        }
    }
}

impl<T: Real> Detector<T> for Multistage<T> {
    fn detect(&self, r: &CVector<T>) -> DetectionResult<T> {
        let c = &self.first.constellation;
        let mut result = self.first.detect(r);
        for stage in 2..=self.stages {
            let previous = symbols_of(&result.indices, c);
            let candidates = (0..self.first.plans.len())
                .map(|l| {
                    let mut current = previous.to_vec();
                    let mut indices = result.indices.clone();
                    for j in self.stage_ordering(l, stage) {
                        let k = c.slice_index(self.full_cancellation[j].output(r, &current));
                        indices[j] = k;
                        current[j] = c.point(k);
                    }
                    indices
                })
                .collect();
            result = self.first.select(candidates, r);
        }
        result
    }
}

#[allow(clippy::too_many_arguments)]
pub fn detect_multistage<T: Real>(
    h: &CMatrix<T>,
    r: &CVector<T>,
    sigma_s2: T,
    sigma_n2: T,
    options: MbOptions<T>,
    stages: usize,
    c: &Constellation<T>,
) -> Result<DetectionResult<T>> {
    Ok(Multistage::new(h, sigma_s2, sigma_n2, options, stages, c)?.detect(r))
}
