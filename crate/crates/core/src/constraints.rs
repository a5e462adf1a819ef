//! Feedback shape constraints, detection orderings and branch plans.
//!
//! Stream and step indices are zero-based throughout. A shape constraint
//! `S f = 0` restricts which feedback taps may be nonzero; the cached
//! projector `Π` maps any vector onto the feasible set.

use std::collections::HashSet;

use num_complex::Complex;
use num_traits::One;

use crate::error::{invalid, Result};
use crate::numerics::{projection_from_shape, CMatrix, CVector, Cholesky};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeConstraint<T> {
    pub s: CMatrix<T>,
    /// Right-hand side of `S f = v`; always zero here.
    pub v: CVector<T>,
    pub projection: CMatrix<T>,
}

impl<T: Real> ShapeConstraint<T> {
    pub fn from_shape(s: CMatrix<T>) -> Result<Self> {
        let projection = projection_from_shape(&s)?;
        let v = CVector::zeros(s.rows());
        Ok(Self { s, v, projection })
    }

    /// Streams whose feedback tap is left free by the constraint.
    pub fn allowed_taps(&self) -> Vec<usize> {
        let half = T::lit(0.5);
        (0..self.projection.rows())
            .filter(|&k| self.projection[(k, k)].re > half)
            .collect()
    }
}

fn check_index(nt: usize, j: usize) -> Result<()> {
    if j >= nt {
        return Err(invalid(format!("index {j} out of range for N_T = {nt}")));
    }
    Ok(())
}

/// Canonical SIC shape for step `j`: zero upper-left `j x j` block and an
/// identity on the remaining `N_T - j` coordinates, so only taps `0..j`
/// (the streams already detected) are free.
pub fn sic_shape<T: Real>(nt: usize, j: usize) -> Result<ShapeConstraint<T>> {
    check_index(nt, j)?;
    let d: Vec<T> = (0..nt).map(|k| if k >= j { T::one() } else { T::zero() }).collect();
    ShapeConstraint::from_shape(CMatrix::from_diag(&d))
}

pub fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    perm.iter().all(|&p| p < n && !std::mem::replace(&mut seen[p], true))
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (c, &p) in perm.iter().enumerate() {
        inv[p] = c;
    }
    inv
}

/// SIC shape for step `j` of a branch that detects streams in the order
/// `perm`: column `c` of the canonical shape is moved to column `perm[c]`.
/// The free taps are then exactly `perm[0..j]`.
pub fn permuted_sic_shape<T: Real>(nt: usize, j: usize, perm: &[usize]) -> Result<ShapeConstraint<T>> {
    check_index(nt, j)?;
    if !is_permutation(perm, nt) {
        return Err(invalid(format!("{perm:?} is not a permutation of 0..{nt}")));
    }
    let canonical = sic_shape::<T>(nt, j)?;
    ShapeConstraint::from_shape(canonical.s.permute_columns(perm))
}

/// PIC shape: only the self tap `j` is constrained.
pub fn pic_shape<T: Real>(nt: usize, j: usize) -> Result<ShapeConstraint<T>> {
    check_index(nt, j)?;
    let d: Vec<T> = (0..nt).map(|k| if k == j { T::one() } else { T::zero() }).collect();
    ShapeConstraint::from_shape(CMatrix::from_diag(&d))
}

/// Per-stream MMSE `sigma_n2 [(H_d^H H_d + (sigma_n2/sigma_s2) I)^{-1}]_kk`
/// for the streams in `active`, all others assumed perfectly cancelled.
pub(crate) fn deflated_mmse<T: Real>(h: &CMatrix<T>, active: &[usize], sigma_s2: T, sigma_n2: T) -> Result<Vec<T>> {
    let hd = h.select_columns(active);
    let gram = hd.adjoint().matmul(&hd).add_diag(sigma_n2 / sigma_s2);
    let diag = Cholesky::factor(&gram)?.inverse_diag();
    Ok(diag.into_iter().map(|d| d * sigma_n2).collect())
}

/// Greedy V-BLAST ordering: repeatedly pick the undetected stream with the
/// smallest MMSE given perfect cancellation of the streams picked so far.
/// Near-ties (relative 1e-12) go to the lowest stream index.
pub fn vblast_ordering<T: Real>(h: &CMatrix<T>, sigma_s2: T, sigma_n2: T) -> Result<Vec<usize>> {
    let nt = h.cols();
    let mut remaining: Vec<usize> = (0..nt).collect();
    let mut order = Vec::with_capacity(nt);
    let tie = T::lit(1e-12);
    while !remaining.is_empty() {
        let mse = deflated_mmse(h, &remaining, sigma_s2, sigma_n2)?;
        let mut best = 0;
        for k in 1..remaining.len() {
            if mse[k] < mse[best] * (T::one() - tie) {
                best = k;
            }
        }
        order.push(remaining.remove(best));
    }
    Ok(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchKind {
    Sic,
    Pic,
}

/// One detection branch: ordering, cancellation pattern and magnitude factor.
#[derive(Debug, Clone)]
pub struct BranchPlan<T> {
    pub index: usize,
    /// `ordering[k]` is the stream detected at step `k`.
    pub ordering: Vec<usize>,
    pub kind: BranchKind,
    /// Constraint per stream (indexed by stream, not by step).
    pub shapes: Vec<ShapeConstraint<T>>,
    pub beta: T,
}

impl<T: Real> BranchPlan<T> {
    pub fn sic(index: usize, ordering: Vec<usize>, beta: T) -> Result<Self> {
        let nt = ordering.len();
        let mut shapes = vec![None; nt];
        for (step, &stream) in ordering.iter().enumerate() {
            shapes[stream] = Some(permuted_sic_shape(nt, step, &ordering)?);
        }
        Ok(Self {
            index,
            ordering,
            kind: BranchKind::Sic,
            shapes: shapes.into_iter().map(|s| s.expect("ordering is a permutation")).collect(),
            beta,
        })
    }

    pub fn pic(index: usize, nt: usize, beta: T) -> Result<Self> {
        Ok(Self {
            index,
            ordering: (0..nt).collect(),
            kind: BranchKind::Pic,
            shapes: (0..nt).map(|j| pic_shape(nt, j)).collect::<Result<_>>()?,
            beta,
        })
    }

    pub fn nt(&self) -> usize {
        self.ordering.len()
    }

    /// Same branch with the detection order reversed (ordering composed with
    /// the reverse-diagonal permutation).
    pub fn reversed(&self) -> Result<Self> {
        let ordering: Vec<usize> = self.ordering.iter().rev().copied().collect();
        match self.kind {
            BranchKind::Sic => Self::sic(self.index, ordering, self.beta),
            BranchKind::Pic => Ok(Self {
                ordering,
                ..self.clone()
            }),
        }
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lexicographic successor in place; false once the last permutation is
/// reached.
pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// SIC orderings for a plan set: `base`, its cyclic left shifts, then the
/// remaining permutations in lexicographic order.
pub(crate) fn sic_orderings(base: &[usize], count: usize) -> Vec<Vec<usize>> {
    let nt = base.len();
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(count);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut push = |o: Vec<usize>, out: &mut Vec<Vec<usize>>| {
        if out.len() < count && seen.insert(o.clone()) {
            out.push(o);
        }
    };
    for shift in 0..nt {
        let mut o = base.to_vec();
        o.rotate_left(shift);
        push(o, &mut out);
    }
    let mut p: Vec<usize> = (0..nt).collect();
    loop {
        push(p.clone(), &mut out);
        if out.len() >= count || !next_permutation(&mut p) {
            break;
        }
    }
    out
}

/// Branch set for `L` branches: branch 0 is V-BLAST-ordered SIC, the last
/// branch is PIC when `L >= 2`, and the branches in between are SIC with
/// shifted (then enumerated) orderings. `L = N_T! + 1` covers every SIC
/// ordering plus PIC.
pub fn build_branch_plans<T: Real>(
    nt: usize,
    branches: usize,
    h: &CMatrix<T>,
    sigma_s2: T,
    sigma_n2: T,
    beta: T,
) -> Result<Vec<BranchPlan<T>>> {
    if h.cols() != nt {
        return Err(invalid(format!("channel has {} inputs, N_T = {nt}", h.cols())));
    }
    let max = factorial(nt) + 1;
    if branches < 1 || branches > max {
        return Err(invalid(format!("L = {branches} outside 1..={max}")));
    }
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(invalid(format!("beta = {beta} outside [0, 1]")));
    }
    let base = vblast_ordering(h, sigma_s2, sigma_n2)?;
    let n_sic = if branches == 1 { 1 } else { branches - 1 };
    let mut plans = sic_orderings(&base, n_sic)
        .into_iter()
        .enumerate()
        .map(|(l, o)| BranchPlan::sic(l, o, beta))
        .collect::<Result<Vec<_>>>()?;
    if branches >= 2 {
        plans.push(BranchPlan::pic(branches - 1, nt, beta)?);
    }
    Ok(plans)
}

/// Reverse-diagonal permutation matrix `T` (`T^2 = I`).
pub fn reversal_matrix<T: Real>(n: usize) -> CMatrix<T> {
    CMatrix::from_fn(n, n, |i, j| {
        if i + j + 1 == n {
            Complex::one()
        } else {
            Complex::new(T::zero(), T::zero())
        }
    })
}
