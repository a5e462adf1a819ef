//! Constrained MMSE feedforward/feedback filter design.
//!
//! For stream `j` and branch `l` the pair `(w, f)` solves the coupled
//! first-order conditions
//!
//! ```text
//! w = R^{-1} (p_j + Q f)
//! f = β Π (Q^H w - t_j)
//! ```
//!
//! where `Π` projects onto the feedback taps the branch allows. Two routes
//! are provided: the closed form `w = (R - β Q Π Q^H)^{-1} (p_j - β Q Π t_j)`,
//! which needs one factorization per pair, and a fixed-point iteration on
//! the perfect-feedback form that reuses a single factorization of
//! `H^H H + (σ_n²/σ_s²) I` for every stream and branch.

use num_complex::Complex;
use num_traits::Zero;

use crate::constraints::BranchPlan;
use crate::error::{invalid, Error, Result};
use crate::numerics::{least_squares, orthonormal_basis, CMatrix, CVector, Cholesky};
use crate::scalar::Real;

pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const FIXED_POINT_MAX_ITER: usize = 100;

/// Second-order statistics the filters are built from.
#[derive(Debug, Clone)]
pub struct SecondOrderStats<T> {
    /// `E[r r^H]`
    pub r: CMatrix<T>,
    /// `E[r ŝ^H]`
    pub q: CMatrix<T>,
    /// `E[r s_j^*]` per stream
    pub p: Vec<CVector<T>>,
    /// `E[ŝ s_j^*]` per stream
    pub t: Vec<CVector<T>>,
    pub sigma_s2: T,
}

/// Statistics under perfect feedback: `R = σ_s² H H^H + σ_n² I`,
/// `Q = σ_s² H`, `p_j = σ_s² h_j`, `t_j = 0`.
pub fn perfect_feedback_stats<T: Real>(h: &CMatrix<T>, sigma_s2: T, sigma_n2: T) -> SecondOrderStats<T> {
    let nt = h.cols();
    let r = h.matmul_adjoint(h).scale(sigma_s2).add_diag(sigma_n2);
    let q = h.scale(sigma_s2);
    let p = (0..nt).map(|j| q.column(j)).collect();
    let t = (0..nt).map(|_| CVector::zeros(nt)).collect();
    SecondOrderStats { r, q, p, t, sigma_s2 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterPair<T> {
    pub w: CVector<T>,
    pub f: CVector<T>,
    pub mmse: T,
    pub beta: T,
    pub stream: usize,
    pub branch: usize,
    /// Fixed-point iterations used; zero for the closed form.
    pub iterations: usize,
}

impl<T: Real> FilterPair<T> {
    /// Filter output `w^H r - f^H ŝ`.
    #[inline]
    pub fn output(&self, r: &[Complex<T>], decisions: &[Complex<T>]) -> Complex<T> {
        let mut z = Complex::zero();
        for (w, x) in self.w.iter().zip(r) {
            z += w.conj() * x;
        }
        for (f, s) in self.f.iter().zip(decisions) {
            z -= f.conj() * s;
        }
        z
    }
}

/// `σ_s² - w^H R w + f^H f`.
pub fn mmse_value<T: Real>(w: &CVector<T>, f: &CVector<T>, stats: &SecondOrderStats<T>) -> T {
    let rw = stats.r.matvec(w);
    stats.sigma_s2 - w.dot(&rw).re + f.norm_sqr()
}

fn project_scaled<T: Real>(projection: &CMatrix<T>, beta: T, x: &CVector<T>) -> CVector<T> {
    projection.matvec(x).scale(Complex::new(beta, T::zero()))
}

/// Closed-form pair for a zero constraint vector.
pub fn design_filters_closed_form<T: Real>(
    stats: &SecondOrderStats<T>,
    projection: &CMatrix<T>,
    beta: T,
    j: usize,
) -> Result<FilterPair<T>> {
    let nt = stats.q.cols();
    if j >= nt {
        return Err(invalid(format!("stream {j} out of range for N_T = {nt}")));
    }
    if projection.rows() != nt || !projection.is_square() {
        return Err(invalid("projection must be N_T x N_T"));
    }
    let qpq = stats.q.matmul(projection).matmul_adjoint(&stats.q);
    let a = stats.r.sub(&qpq.scale(beta));
    // (R - βQΠQ^H) w = p_j - βQΠ t_j
    let qpt = stats.q.matvec(&projection.matvec(&stats.t[j])).scale(Complex::new(beta, T::zero()));
    let rhs = stats.p[j].sub(&qpt);
    let w = Cholesky::factor(&a)?.solve_vec(&rhs);
    let f = project_scaled(projection, beta, &stats.q.adjoint_matvec(&w).sub(&stats.t[j]));
    let mmse = mmse_value(&w, &f, stats);
    Ok(FilterPair {
        w,
        f,
        mmse,
        beta,
        stream: j,
        branch: 0,
        iterations: 0,
    })
}

/// How the coupled `(w, f)` conditions are iterated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FixedPointScheme {
    /// Plain alternation `w <- w(f)`, `f <- f(w)`. Contracts only by
    /// `λ/(λ + σ_n²)` per step, so it stalls at high SNR.
    Picard,
    /// Alternation where each feedback update is the Newton step for the
    /// fixed-point residual on the allowed-tap subspace. The map is affine,
    /// so the first step lands on the solution and the second confirms it.
    #[default]
    Newton,
}

/// Perfect-feedback filter designer holding the shared factorization of
/// `K = H^H H + (σ_n²/σ_s²) I`.
///
/// By push-through, `(H H^H + ρ I)^{-1} H = H K^{-1}` and
/// `H^H (H H^H + ρ I)^{-1} H = I - ρ K^{-1}`, which lets the residual of the
/// feedback map be evaluated without cancelling two O(1) terms.
#[derive(Debug, Clone)]
pub struct FixedPointDesigner<T> {
    h: CMatrix<T>,
    chol: Cholesky<T>,
    rho: T,
    stats: SecondOrderStats<T>,
    sigma_s2: T,
}

impl<T: Real> FixedPointDesigner<T> {
    pub fn new(h: &CMatrix<T>, sigma_s2: T, sigma_n2: T) -> Result<Self> {
        if !(sigma_n2 > T::zero()) || !(sigma_s2 > T::zero()) {
            return Err(invalid("variances must be positive"));
        }
        let rho = sigma_n2 / sigma_s2;
        let k = h.adjoint().matmul(h).add_diag(rho);
        Ok(Self {
            h: h.clone(),
            chol: Cholesky::factor(&k)?,
            rho,
            stats: perfect_feedback_stats(h, sigma_s2, sigma_n2),
            sigma_s2,
        })
    }

    pub fn stats(&self) -> &SecondOrderStats<T> {
        &self.stats
    }

    fn delta_plus(j: usize, f: &CVector<T>) -> CVector<T> {
        let mut x = f.clone();
        x[j] += Complex::new(T::one(), T::zero());
        x
    }

    /// `w(f) = (H H^H + (σ_n²/σ_s²) I)^{-1} H (δ_j + f) = H K^{-1} (δ_j + f)`
    fn feedforward(&self, j: usize, f: &CVector<T>) -> CVector<T> {
        self.h.matvec(&self.chol.solve_vec(&Self::delta_plus(j, f)))
    }

    /// `f(w) = β Π σ_s² H^H w`
    fn feedback(&self, projection: &CMatrix<T>, beta: T, w: &CVector<T>) -> CVector<T> {
        project_scaled(projection, beta * self.sigma_s2, &self.h.adjoint_matvec(w))
    }

    /// Linear MMSE filter (`β = 0`), straight from the shared factorization.
    pub fn linear(&self, j: usize) -> FilterPair<T> {
        let nt = self.h.cols();
        let w = self.feedforward(j, &CVector::zeros(nt));
        let f = CVector::zeros(nt);
        let mmse = mmse_value(&w, &f, &self.stats);
        FilterPair {
            w,
            f,
            mmse,
            beta: T::zero(),
            stream: j,
            branch: 0,
            iterations: 1,
        }
    }

    pub fn design(&self, projection: &CMatrix<T>, beta: T, j: usize, scheme: FixedPointScheme) -> Result<FilterPair<T>> {
        let nt = self.h.cols();
        if j >= nt {
            return Err(invalid(format!("stream {j} out of range for N_T = {nt}")));
        }
        if projection.rows() != nt || !projection.is_square() {
            return Err(invalid("projection must be N_T x N_T"));
        }
        let tol = T::lit(FIXED_POINT_TOL).max(T::epsilon() * T::lit(100.0));
        let newton = match scheme {
            FixedPointScheme::Picard => None,
            FixedPointScheme::Newton => Some(NewtonStep::new(self, projection, beta)?),
        };
        let mut f = CVector::zeros(nt);
        let mut w = self.feedforward(j, &f);
        let mut last_step = T::infinity();
        for iteration in 1..=FIXED_POINT_MAX_ITER {
            f = match &newton {
                None => self.feedback(projection, beta, &w),
                Some(step) => step.apply(self, projection, j, &f),
            };
            let w_next = self.feedforward(j, &f);
            last_step = w_next.sub(&w).norm();
            let scale = w_next.norm().max(T::one());
            w = w_next;
            if last_step <= tol * scale {
                let mmse = mmse_value(&w, &f, &self.stats);
                return Ok(FilterPair {
                    w,
                    f,
                    mmse,
                    beta,
                    stream: j,
                    branch: 0,
                    iterations: iteration,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations: FIXED_POINT_MAX_ITER,
            last_step: last_step.to_f64_lossy(),
            last_w: w.to_c64(),
            last_f: f.to_c64(),
        })
    }
}

/// Newton correction for `f = c Π (I - ρ K^{-1}) (δ_j + f)`, `c = β σ_s²`,
/// in coordinates `f = U y` with `U` an orthonormal basis of the range of
/// `Π`. The Jacobian of the residual there is `(c - 1) I - c ρ U^H K^{-1} U`.
struct NewtonStep<T> {
    basis: Vec<CVector<T>>,
    /// Columns of the reduced Jacobian.
    jacobian: Vec<CVector<T>>,
    c: T,
}

impl<T: Real> NewtonStep<T> {
    fn new(d: &FixedPointDesigner<T>, projection: &CMatrix<T>, beta: T) -> Result<Self> {
        let nt = projection.rows();
        let columns: Vec<CVector<T>> = (0..nt).map(|k| projection.column(k)).collect();
        let basis = orthonormal_basis(&columns);
        let c = beta * d.sigma_s2;
        let k_inv_u: Vec<CVector<T>> = basis.iter().map(|u| d.chol.solve_vec(u)).collect();
        let jacobian = k_inv_u
            .iter()
            .enumerate()
            .map(|(b, kiu)| {
                let col: Vec<Complex<T>> = basis
                    .iter()
                    .enumerate()
                    .map(|(a, u)| {
                        let diag = if a == b { c - T::one() } else { T::zero() };
                        Complex::new(diag, T::zero()) - u.dot(kiu) * (c * d.rho)
                    })
                    .collect();
                CVector::from_vec(col)
            })
            .collect();
        Ok(Self { basis, jacobian, c })
    }

    fn apply(&self, d: &FixedPointDesigner<T>, projection: &CMatrix<T>, j: usize, f: &CVector<T>) -> CVector<T> {
        if self.basis.is_empty() {
            return CVector::zeros(f.len());
        }
        // residual c Π δ_j + (c - 1) f - c ρ Π K^{-1} (δ_j + f), f in range(Π)
        let x = FixedPointDesigner::delta_plus(j, f);
        let mut res = projection.matvec(&d.chol.solve_vec(&x)).scale(Complex::new(-self.c * d.rho, T::zero()));
        res.axpy(Complex::new(self.c - T::one(), T::zero()), f);
        res.axpy(Complex::new(self.c, T::zero()), &projection.column(j));
        let rhs = CVector::from_vec(self.basis.iter().map(|u| -u.dot(&res)).collect());
        let dy = least_squares(&self.jacobian, &rhs);
        let mut next = f.clone();
        for (u, c) in self.basis.iter().zip(dy) {
            next.axpy(c, u);
        }
        next
    }
}

/// Perfect-feedback pair by fixed-point iteration (Newton-corrected).
pub fn design_filters_fixed_point<T: Real>(
    h: &CMatrix<T>,
    projection: &CMatrix<T>,
    beta: T,
    j: usize,
    sigma_s2: T,
    sigma_n2: T,
) -> Result<FilterPair<T>> {
    FixedPointDesigner::new(h, sigma_s2, sigma_n2)?.design(projection, beta, j, FixedPointScheme::default())
}

/// Every `(branch, stream)` filter pair for a plan set, plus the linear
/// filters used for PIC initial decisions.
#[derive(Debug, Clone)]
pub struct FilterBank<T> {
    /// `pairs[l][j]`
    pub pairs: Vec<Vec<FilterPair<T>>>,
    /// `β = 0` filter per stream.
    pub linear: Vec<FilterPair<T>>,
    /// Matrix factorizations performed while building the bank.
    pub factorizations: usize,
}

impl<T: Real> FilterBank<T> {
    pub fn branches(&self) -> usize {
        self.pairs.len()
    }

    pub fn len(&self) -> usize {
        self.pairs.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pair(&self, branch: usize, stream: usize) -> &FilterPair<T> {
        &self.pairs[branch][stream]
    }

    /// `Σ_j MMSE_{j,l}` for branch `l`.
    pub fn branch_mmse(&self, branch: usize) -> T {
        self.pairs[branch].iter().map(|p| p.mmse).sum()
    }
}

fn check_plans<T: Real>(h: &CMatrix<T>, plans: &[BranchPlan<T>]) -> Result<()> {
    if plans.is_empty() {
        return Err(invalid("at least one branch plan required"));
    }
    if plans.iter().any(|p| p.nt() != h.cols() || p.shapes.len() != h.cols()) {
        return Err(invalid("plan dimensions do not match the channel"));
    }
    Ok(())
}

/// Builds the bank from one shared factorization.
pub fn build_filter_bank<T: Real>(
    h: &CMatrix<T>,
    plans: &[BranchPlan<T>],
    sigma_s2: T,
    sigma_n2: T,
) -> Result<FilterBank<T>> {
    check_plans(h, plans)?;
    let designer = FixedPointDesigner::new(h, sigma_s2, sigma_n2)?;
    let nt = h.cols();
    let linear = (0..nt).map(|j| designer.linear(j)).collect();
    let pairs = plans
        .iter()
        .enumerate()
        .map(|(l, plan)| {
            (0..nt)
                .map(|j| {
                    let mut pair = designer.design(&plan.shapes[j].projection, plan.beta, j, FixedPointScheme::default())?;
                    pair.branch = l;
                    Ok(pair)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterBank {
        pairs,
        linear,
        factorizations: 1,
    })
}

/// Reference bank from the closed form, one factorization per pair.
pub fn build_filter_bank_closed_form<T: Real>(
    h: &CMatrix<T>,
    plans: &[BranchPlan<T>],
    sigma_s2: T,
    sigma_n2: T,
) -> Result<FilterBank<T>> {
    check_plans(h, plans)?;
    let nt = h.cols();
    let stats = perfect_feedback_stats(h, sigma_s2, sigma_n2);
    let zero = CMatrix::zeros(nt, nt);
    let linear = (0..nt)
        .map(|j| design_filters_closed_form(&stats, &zero, T::zero(), j))
        .collect::<Result<Vec<_>>>()?;
    let pairs = plans
        .iter()
        .enumerate()
        .map(|(l, plan)| {
            (0..nt)
                .map(|j| {
                    let mut pair = design_filters_closed_form(&stats, &plan.shapes[j].projection, plan.beta, j)?;
                    pair.branch = l;
                    Ok(pair)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FilterBank {
        pairs,
        linear,
        factorizations: nt * (plans.len() + 1),
    })
}
