//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion fails.

mod common;

use common::*;
use mbdf::constraints::build_branch_plans;
use mbdf::filters::{design_filters_closed_form, mmse_value, perfect_feedback_stats, FixedPointDesigner};
use mbdf::harness::{
    run_sweep_with, simulate_cell, worker_pool, workers_from_env, write_csv, DetectorKind, PacketCounts, SimConfig,
};
use mbdf::model::{transmit, Constellation};
use mbdf::numerics::{rng_for_trial, CVector};
use num_complex::Complex64;

struct Report {
    failed: Vec<usize>,
}

impl Report {
    fn record(&mut self, id: usize, ok: bool, detail: String) {
        println!("{} criterion {id}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id);
        }
    }
}

fn config(kind: DetectorKind, branches: usize, stages: usize, packets: u64) -> SimConfig {
    SimConfig {
        detectors: vec![kind],
        branches,
        stages,
        packets,
        timing: false,
        ..SimConfig::default()
    }
}

struct Cell {
    counts: PacketCounts,
}

impl Cell {
    fn ber(&self) -> f64 {
        self.counts.ber()
    }
    fn se(&self) -> f64 {
        self.counts.stderr()
    }
    fn spread(&self) -> f64 {
        let b = self.counts.stream_ber();
        b.iter().cloned().fold(f64::MIN, f64::max) - b.iter().cloned().fold(f64::MAX, f64::min)
    }
    /// Standard error of the per-stream spread, from the two extreme streams.
    fn spread_se(&self) -> f64 {
        let b = self.counts.stream_ber();
        let n = (self.counts.bits / b.len() as u64) as f64;
        let (hi, lo) = (
            b.iter().cloned().fold(f64::MIN, f64::max),
            b.iter().cloned().fold(f64::MAX, f64::min),
        );
        (hi * (1.0 - hi) / n).sqrt() + (lo * (1.0 - lo) / n).sqrt()
    }
}

struct Runner {
    pool: rayon::ThreadPool,
}

impl Runner {
    fn cell(&self, kind: DetectorKind, branches: usize, stages: usize, packets: u64, snr: f64) -> Cell {
        let cfg = config(kind, branches, stages, packets);
        Cell {
            counts: simulate_cell(&cfg, kind, snr, &self.pool).unwrap(),
        }
    }
}

fn fmt(c: &Cell) -> String {
    format!("{:.4e}±{:.1e}", c.ber(), c.se())
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ")
}

/// SNR at which a sampled BER curve crosses `target`, interpolating
/// log10(BER) linearly in dB.
fn crossing(snr: &[f64], ber: &[f64], target: f64) -> Option<f64> {
    for k in 1..snr.len() {
        let (a, b) = (ber[k - 1], ber[k]);
        if a >= target && b <= target && b > 0.0 {
            let (la, lb, lt) = (a.log10(), b.log10(), target.log10());
            let t = if la == lb { 0.0 } else { (la - lt) / (la - lb) };
            return Some(snr[k - 1] + t * (snr[k] - snr[k - 1]));
        }
    }
    None
}

fn ml_match(run: &Runner, report: &mut Report) -> Cell {
    let mb = run.cell(DetectorKind::Mbdf, 25, 1, 20_000, 12.0);
    let ml = run.cell(DetectorKind::Ml, 0, 0, 20_000, 12.0);
    let gap = (mb.ber() - ml.ber()).abs();
    let tol = 3.0 * (mb.se() + ml.se());
    report.record(1, gap <= tol, format!("L=25 {} vs ML {}, |gap| {gap:.2e} <= {tol:.2e}", fmt(&mb), fmt(&ml)));
    ml
}

fn near_ml(run: &Runner, report: &mut Report) {
    let snr: Vec<f64> = (0..=8).map(|k| 2.0 * k as f64).collect();
    let curve = |kind, l| -> Vec<f64> { snr.iter().map(|&s| run.cell(kind, l, 1, 5_000, s).ber()).collect() };
    let mb = curve(DetectorKind::Mbdf, 8);
    let ml = curve(DetectorKind::Ml, 0);
    let detail = format!("BER L=8 [{}], ML [{}]", list(&mb), list(&ml));
    match (crossing(&snr, &mb, 1e-3), crossing(&snr, &ml, 1e-3)) {
        (Some(a), Some(b)) => report.record(2, a - b <= 2.0, format!("gap at 1e-3 {:.2} dB <= 2.0 dB; {detail}", a - b)),
        _ => report.record(2, false, format!("a curve does not reach 1e-3 in 0-16 dB; {detail}")),
    }
}

fn single_branch_vs_vblast(run: &Runner, report: &mut Report) {
    let mut ok = true;
    let mut detail = Vec::new();
    for snr in [4.0, 8.0, 12.0] {
        let mb = run.cell(DetectorKind::Mbdf, 1, 1, 5_000, snr);
        let os = run.cell(DetectorKind::Osic, 0, 0, 5_000, snr);
        let ratio = mb.ber() / os.ber();
        let close = (1.0 / 1.5..=1.5).contains(&ratio) || (mb.ber() - os.ber()).abs() <= 3.0 * (mb.se() + os.se());
        ok &= close;
        detail.push(format!("{snr} dB L=1 {} OSIC {} ratio {ratio:.3}", fmt(&mb), fmt(&os)));
    }
    report.record(3, ok, detail.join("; "));
}

fn branch_monotonicity(run: &Runner, report: &mut Report) {
    let mut ok = true;
    let mut detail = Vec::new();
    for snr in [8.0, 12.0] {
        let cells: Vec<Cell> = [1, 2, 4, 8].iter().map(|&l| run.cell(DetectorKind::Mbdf, l, 1, 10_000, snr)).collect();
        for w in cells.windows(2) {
            ok &= w[1].ber() <= w[0].ber() + 3.0 * (w[0].se() + w[1].se());
        }
        detail.push(format!("{snr} dB L=1,2,4,8: {}", cells.iter().map(fmt).collect::<Vec<_>>().join(" ")));
    }
    report.record(4, ok, detail.join("; "));
}

fn detector_ordering(run: &Runner, report: &mut Report, ml: &Cell) {
    let lin = run.cell(DetectorKind::Linear, 0, 0, 20_000, 12.0);
    let os = run.cell(DetectorKind::Osic, 0, 0, 20_000, 12.0);
    let mb = run.cell(DetectorKind::Mbdf, 4, 1, 20_000, 12.0);
    let ratio = lin.ber() / mb.ber();
    let ok = lin.ber() > os.ber() && os.ber() > mb.ber() && mb.ber() > ml.ber() && ratio >= 3.0;
    report.record(
        5,
        ok,
        format!("linear {} > OSIC {} > L=4 {} > ML {}, linear/L=4 = {ratio:.2} >= 3", fmt(&lin), fmt(&os), fmt(&mb), fmt(ml)),
    );
}

fn filter_oracles(report: &mut Report) {
    let (mut agree, mut resid, mut shape, mut lin) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n2 in [0.1, 0.4, 1.0] {
        for t in 0..1000 {
            let h = channel(70, t, 4, 4);
            let hd = dense(&h);
            let stats = perfect_feedback_stats(&h, 1.0, n2);
            let r_inv = inverse(&dense(&stats.r));
            let q = dense(&stats.q);
            let designer = FixedPointDesigner::new(&h, 1.0, n2).unwrap();
            for plan in build_branch_plans(4, 25, &h, 1.0, n2, 1.0).unwrap() {
                for j in 0..4 {
                    let sc = &plan.shapes[j];
                    let cf = design_filters_closed_form(&stats, &sc.projection, 1.0, j).unwrap();
                    let fp = designer.design(&sc.projection, 1.0, j, Default::default()).unwrap();
                    agree = agree.max(diff(&cf.w, &fp.w)).max(diff(&cf.f, &fp.f));
                    for p in [&cf, &fp] {
                        let qf = mul_vec(&q, &p.f);
                        let rhs: Vec<Complex64> = stats.p[j].iter().zip(&qf).map(|(a, b)| a + b).collect();
                        let e6 = diff(&p.w, &mul_vec(&r_inv, &rhs));
                        let e7 = diff(&p.f, &mul_vec(&dense(&sc.projection), &mul_vec(&adjoint(&q), &p.w)));
                        resid = resid.max(e6).max(e7);
                        shape = shape.max(sc.s.matvec(&p.f).norm());
                    }
                }
            }
            for j in 0..4 {
                let col: Vec<Complex64> = (0..4).map(|i| hd[i][j]).collect();
                let expected = mul_vec(&r_inv, &col);
                let zero = mbdf::numerics::CMatrix::zeros(4, 4);
                let cf = design_filters_closed_form(&stats, &zero, 0.0, j).unwrap();
                let fp = designer.design(&zero, 0.0, j, Default::default()).unwrap();
                lin = lin.max(diff(&cf.w, &expected)).max(diff(&fp.w, &expected));
                lin = lin.max(cf.f.norm()).max(fp.f.norm());
            }
        }
    }
    let ok = agree <= 1e-6 && resid <= 1e-8 && shape <= 1e-8 && lin <= 1e-10;
    report.record(
        6,
        ok,
        format!("closed vs fixed {agree:.1e} <= 1e-6, residuals {resid:.1e} <= 1e-8, S f {shape:.1e} <= 1e-8, beta=0 vs linear {lin:.1e} <= 1e-10"),
    );
}

fn mmse_monte_carlo(report: &mut Report) {
    let cst = Constellation::<f64>::qpsk();
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let n2 = [0.1, 0.4, 1.0][k as usize % 3];
        let h = channel(71, k, 4, 4);
        let plans = build_branch_plans(4, 25, &h, 1.0, n2, 1.0).unwrap();
        let l = (k as usize * 7) % plans.len();
        let j = k as usize % 4;
        let designer = FixedPointDesigner::new(&h, 1.0, n2).unwrap();
        let pair = designer.design(&plans[l].shapes[j].projection, 1.0, j, Default::default()).unwrap();
        let analytic = mmse_value(&pair.w, &pair.f, designer.stats());
        let mut rng = rng_for_trial(72, k);
        let draws = 100_000;
        let mut acc = 0.0;
        for _ in 0..draws {
            let s: CVector<f64> = vector(&symbols(&random_symbols(4, &cst, &mut rng), &cst));
            let r = transmit(&h, &s, n2, &mut rng).unwrap();
            // perfect feedback: the decisions are the transmitted symbols
            acc += (s[j] - pair.output(&r, &s)).norm_sqr();
        }
        let empirical = acc / draws as f64;
        worst = worst.max((empirical - analytic).abs() / analytic);
    }
    report.record(7, worst <= 0.03, format!("worst relative MSE mismatch over 20 configurations {:.2}% <= 3%", 100.0 * worst));
}

fn multistage(run: &Runner, report: &mut Report) {
    let m1 = run.cell(DetectorKind::MbdfMs, 4, 1, 20_000, 12.0);
    let m2 = run.cell(DetectorKind::MbdfMs, 4, 2, 20_000, 12.0);
    let agg = m2.ber() <= m1.ber() + 3.0 * (m1.se() + m2.se());
    let spread = m2.spread() <= m1.spread() + 3.0 * (m1.spread_se() + m2.spread_se());
    report.record(
        8,
        agg && spread,
        format!(
            "BER M=2 {} vs M=1 {}; spread M=2 {:.3e} vs M=1 {:.3e} (tol {:.1e}); streams M=1 [{}] M=2 [{}]",
            fmt(&m2),
            fmt(&m1),
            m2.spread(),
            m1.spread(),
            3.0 * (m1.spread_se() + m2.spread_se()),
            list(&m1.counts.stream_ber()),
            list(&m2.counts.stream_ber())
        ),
    );
}

fn determinism(report: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SimConfig {
        detectors: vec![
            DetectorKind::Linear,
            DetectorKind::Osic,
            DetectorKind::Sdf,
            DetectorKind::Mbdf,
            DetectorKind::MbdfMs,
            DetectorKind::Ml,
        ],
        stages: 2,
        packets: 40,
        timing: false,
        ..SimConfig::default()
    };
    let mut files = Vec::new();
    for workers in [1, 8] {
        let path = dir.path().join(format!("w{workers}.csv"));
        let records = run_sweep_with(&cfg, workers, |_| Ok(())).unwrap();
        write_csv(&records, &path).unwrap();
        files.push(std::fs::read(&path).unwrap());
    }
    report.record(
        9,
        files[0] == files[1],
        format!("{} detectors x {} SNRs, 1 vs 8 workers, {} CSV bytes identical", cfg.detectors.len(), cfg.snr_db.len(), files[0].len()),
    );
}

#[test]
fn acceptance() {
    let run = Runner {
        pool: worker_pool(workers_from_env()).unwrap(),
    };
    let mut report = Report { failed: Vec::new() };
    let ml = ml_match(&run, &mut report);
    near_ml(&run, &mut report);
    single_branch_vs_vblast(&run, &mut report);
    branch_monotonicity(&run, &mut report);
    detector_ordering(&run, &mut report, &ml);
    filter_oracles(&mut report);
    mmse_monte_carlo(&mut report);
    multistage(&run, &mut report);
    determinism(&mut report);
    assert!(report.failed.is_empty(), "failed criteria: {:?}", report.failed);
}
