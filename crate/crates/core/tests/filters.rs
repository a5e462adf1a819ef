mod common;

use common::*;
use mbdf::constraints::{build_branch_plans, pic_shape, sic_shape};
use mbdf::filters::{
    build_filter_bank, build_filter_bank_closed_form, design_filters_closed_form, design_filters_fixed_point,
    mmse_value, perfect_feedback_stats, FixedPointDesigner,
};
use mbdf::model::{transmit, Constellation};
use mbdf::numerics::{rng_for_trial, CMatrix, CVector};
use num_complex::Complex64;

#[test]
fn perfect_feedback_stats_identity_example() {
    let s = perfect_feedback_stats(&CMatrix::<f64>::identity(2), 1.0, 0.5);
    assert_eq!(s.r, CMatrix::identity(2).scale(1.5));
    assert_eq!(s.q, CMatrix::identity(2));
    assert_eq!(s.p[0], CVector::unit(2, 0));
    assert_eq!(s.t[0], CVector::zeros(2));
}

#[test]
fn sample_covariance_matches_r() {
    let h = channel(40, 0, 4, 4);
    let n2 = 0.4;
    let stats = perfect_feedback_stats(&h, 1.0, n2);
    let cst = Constellation::qpsk();
    let mut rng = rng_for_trial(41, 0);
    let n = 100_000;
    let mut acc = vec![vec![c(0.0, 0.0); 4]; 4];
    for _ in 0..n {
        let s = vector(&symbols(&random_symbols(4, &cst, &mut rng), &cst));
        let r = transmit(&h, &s, n2, &mut rng).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                acc[i][j] += r[i] * r[j].conj();
            }
        }
    }
    let sample = scale(&acc, 1.0 / n as f64);
    let exact = dense(&stats.r);
    let rel = frob(&sub(&sample, &exact)) / frob(&exact);
    assert!(rel < 0.02, "relative Frobenius error {rel}");
}

#[test]
fn orthogonal_channel_needs_no_feedback() {
    let rho = 0.25;
    let h = CMatrix::<f64>::identity(2);
    let pi = sic_shape::<f64>(2, 1).unwrap().projection;
    let stats = perfect_feedback_stats(&h, 1.0, rho);
    let expected = [c(0.0, 0.0), c(1.0 / (1.0 + rho), 0.0)];
    let a = design_filters_closed_form(&stats, &pi, 1.0, 1).unwrap();
    let b = design_filters_fixed_point(&h, &pi, 1.0, 1, 1.0, rho).unwrap();
    for p in [a, b] {
        assert!(norm(&p.f) < 1e-14);
        assert!(diff(&p.w, &expected) < 1e-14);
    }
}

#[test]
fn fixed_point_matches_closed_form_on_random_channels() {
    let mut agree = 0;
    for t in 0..100 {
        let h = channel(42, t, 4, 4);
        let stats = perfect_feedback_stats(&h, 1.0, 0.4);
        let d = FixedPointDesigner::new(&h, 1.0, 0.4).unwrap();
        let plans = build_branch_plans(4, 4, &h, 1.0, 0.4, 1.0).unwrap();
        let ok = plans.iter().all(|p| {
            (0..4).all(|j| {
                let a = design_filters_closed_form(&stats, &p.shapes[j].projection, 1.0, j).unwrap();
                let b = d.design(&p.shapes[j].projection, 1.0, j, Default::default()).unwrap();
                diff(&a.w, &b.w) <= 1e-6 && diff(&a.f, &b.f) <= 1e-6
            })
        });
        agree += ok as u32;
    }
    assert!(agree >= 99, "{agree}/100");
}

/// `‖w - R^{-1}(p_j + Q f)‖` and `‖f - β Π Q^H w‖` with a naive inverse.
fn residuals(h: &CMatrix<f64>, n2: f64, pi: &CMatrix<f64>, beta: f64, j: usize, w: &[Complex64], f: &[Complex64]) -> (f64, f64) {
    let stats = perfect_feedback_stats(h, 1.0, n2);
    let r_inv = inverse(&dense(&stats.r));
    let q = dense(&stats.q);
    let qf = mul_vec(&q, f);
    let rhs: Vec<Complex64> = stats.p[j].iter().zip(&qf).map(|(a, b)| a + b).collect();
    let e6 = diff(w, &mul_vec(&r_inv, &rhs));
    let qhw = mul_vec(&adjoint(&q), w);
    let f_expected: Vec<Complex64> = mul_vec(&dense(pi), &qhw).iter().map(|x| x * beta).collect();
    (e6, diff(f, &f_expected))
}

#[test]
fn closed_form_satisfies_both_conditions() {
    for t in 0..50 {
        let h = channel(43, t, 4, 4);
        let stats = perfect_feedback_stats(&h, 1.0, 0.1);
        for p in build_branch_plans(4, 25, &h, 1.0, 0.1, 1.0).unwrap() {
            for j in 0..4 {
                let pi = &p.shapes[j].projection;
                let pair = design_filters_closed_form(&stats, pi, 1.0, j).unwrap();
                let (e6, e7) = residuals(&h, 0.1, pi, 1.0, j, &pair.w, &pair.f);
                assert!(e6 <= 1e-8 && e7 <= 1e-8, "{e6} {e7}");
            }
        }
    }
}

#[test]
fn beta_zero_is_linear_mmse_on_tall_channels() {
    for t in 0..50 {
        let h = channel(44, t, 3, 5);
        let stats = perfect_feedback_stats(&h, 1.0, 0.3);
        let r_inv = inverse(&dense(&stats.r));
        for j in 0..3 {
            let expected = mul_vec(&r_inv, &stats.p[j]);
            let pi = pic_shape::<f64>(3, j).unwrap().projection;
            let a = design_filters_closed_form(&stats, &pi, 0.0, j).unwrap();
            let b = design_filters_fixed_point(&h, &pi, 0.0, j, 1.0, 0.3).unwrap();
            for p in [a, b] {
                assert!(p.f.iter().all(|x| *x == c(0.0, 0.0)));
                assert!(diff(&p.w, &expected) <= 1e-10);
            }
            // σ_s² - p^H R^{-1} p
            let m = 1.0 - stats.p[j].iter().zip(&expected).map(|(a, b)| a.conj() * b).sum::<Complex64>().re;
            assert!((mmse_value(&CVector::try_from_vec(expected).unwrap(), &CVector::zeros(3), &stats) - m).abs() < 1e-12);
        }
    }
}

#[test]
fn feedback_lowers_mmse_and_stays_in_range() {
    for t in 0..100 {
        let h = channel(45, t, 4, 4);
        let n2 = [0.1, 0.4, 1.0][t as usize % 3];
        let d = FixedPointDesigner::new(&h, 1.0, n2).unwrap();
        for p in build_branch_plans(4, 8, &h, 1.0, n2, 1.0).unwrap() {
            for j in 0..4 {
                let pi = &p.shapes[j].projection;
                let full = d.design(pi, 1.0, j, Default::default()).unwrap();
                let none = d.design(pi, 0.0, j, Default::default()).unwrap();
                assert!(full.mmse <= none.mmse + 1e-9);
                assert!(full.mmse > 0.0 && full.mmse <= 1.0 + 1e-12);
            }
        }
    }
}

#[test]
fn shared_factorization_bank_matches_naive_bank() {
    for t in 0..20 {
        let h = channel(46, t, 4, 6);
        let plans = build_branch_plans(4, 10, &h, 1.0, 0.25, 1.0).unwrap();
        let a = build_filter_bank(&h, &plans, 1.0, 0.25).unwrap();
        let b = build_filter_bank_closed_form(&h, &plans, 1.0, 0.25).unwrap();
        assert_eq!(a.len(), 40);
        assert_eq!(a.factorizations, 1);
        for (pa, pb) in a.pairs.iter().flatten().zip(b.pairs.iter().flatten()) {
            assert!(diff(&pa.w, &pb.w) <= 1e-10 && diff(&pa.f, &pb.f) <= 1e-10);
        }
    }
}

#[test]
fn fixed_point_survives_near_noiseless_statistics() {
    for t in 0..50 {
        let h = channel(47, t, 4, 4);
        let d = FixedPointDesigner::new(&h, 1.0, 1e-12).unwrap();
        for p in build_branch_plans(4, 25, &h, 1.0, 1e-12, 1.0).unwrap() {
            for j in 0..4 {
                let pair = d.design(&p.shapes[j].projection, 1.0, j, Default::default()).unwrap();
                assert!(pair.iterations <= 3);
            }
        }
    }
}

#[test]
fn single_precision_tracks_double() {
    let h64 = channel(48, 0, 4, 4);
    let h32 = CMatrix::<f32>::from_fn(4, 4, |i, j| {
        let z = h64[(i, j)];
        num_complex::Complex32::new(z.re as f32, z.im as f32)
    });
    let pi64 = sic_shape::<f64>(4, 2).unwrap().projection;
    let pi32 = sic_shape::<f32>(4, 2).unwrap().projection;
    let a = design_filters_fixed_point(&h64, &pi64, 1.0, 2, 1.0, 0.4).unwrap();
    let b = design_filters_fixed_point(&h32, &pi32, 1.0f32, 2, 1.0, 0.4).unwrap();
    for (x, y) in a.w.iter().zip(b.w.iter()) {
        assert!((x.re - y.re as f64).abs() < 1e-4 && (x.im - y.im as f64).abs() < 1e-4);
    }
}
