use std::time::Instant;

use rayon::prelude::*;

use super::{BerRecord, DetectorKind, SimConfig, WORKERS_ENV};
use crate::detectors::{Detector, LinearMmse, MbMmseDf, MbOptions, MlExhaustive, Multistage, OsicVblast};
use crate::error::{Error, Result};
use crate::model::{noise_variance_from_snr, random_channel, transmit, Constellation};
use crate::numerics::{rng_for_trial, CMatrix, CVector};

/// Bit and error counts for one or more packets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PacketCounts {
    pub bits: u64,
    pub errors: u64,
    /// Bit errors per transmit stream.
    pub stream_errors: Vec<u64>,
}

impl PacketCounts {
    pub fn merge(mut self, other: Self) -> Self {
        self.bits += other.bits;
        self.errors += other.errors;
        if self.stream_errors.len() < other.stream_errors.len() {
            self.stream_errors.resize(other.stream_errors.len(), 0);
        }
        for (a, b) in self.stream_errors.iter_mut().zip(other.stream_errors) {
            *a += b;
        }
        self
    }

    pub fn ber(&self) -> f64 {
        super::ber_and_stderr(self.errors, self.bits).0
    }

    pub fn stderr(&self) -> f64 {
        super::ber_and_stderr(self.errors, self.bits).1
    }

    /// BER of each stream (bits split evenly across streams).
    pub fn stream_ber(&self) -> Vec<f64> {
        let per_stream = self.bits / self.stream_errors.len().max(1) as u64;
        self.stream_errors
            .iter()
            .map(|&e| super::ber_and_stderr(e, per_stream).0)
            .collect()
    }
}

/// Builds the detector for one channel realization.
pub fn prepare_detector(
    cfg: &SimConfig,
    kind: DetectorKind,
    h: &CMatrix<f64>,
    sigma_s2: f64,
    sigma_n2: f64,
    c: &Constellation<f64>,
) -> Result<Box<dyn Detector<f64>>> {
    let options = MbOptions {
        branches: cfg.branches,
        beta: cfg.beta,
        metric: cfg.metric,
    };
    Ok(match kind {
        DetectorKind::Linear => Box::new(LinearMmse::new(h, sigma_s2, sigma_n2, c)?),
        DetectorKind::Osic => Box::new(OsicVblast::new(h, sigma_s2, sigma_n2, c)?),
        DetectorKind::Sdf => Box::new(MbMmseDf::new(h, sigma_s2, sigma_n2, MbOptions::new(1), c)?),
        DetectorKind::Mbdf => Box::new(MbMmseDf::new(h, sigma_s2, sigma_n2, options, c)?),
        DetectorKind::MbdfMs => Box::new(Multistage::new(h, sigma_s2, sigma_n2, options, cfg.stages, c)?),
        DetectorKind::Ml => Box::new(MlExhaustive::new(h, c)?),
    })
}

/// Simulates one packet at a given noise variance.
///
/// Draw order from the trial stream is fixed (channel, then bits and noise
/// per symbol vector) and independent of the detector, so every detector and
/// SNR point sees the same channel, bits and unit-variance noise shape.
pub fn run_packet_with_noise(cfg: &SimConfig, kind: DetectorKind, sigma_n2: f64, trial: u64) -> Result<PacketCounts> {
    let c = Constellation::<f64>::qpsk();
    let sigma_s2 = 1.0;
    let mut rng = rng_for_trial(cfg.seed, trial);
    let h = random_channel::<f64>(cfg.nt, cfg.nr, &mut rng)?;
    let detector = prepare_detector(cfg, kind, &h, sigma_s2, sigma_n2, &c)?;
    let bps = c.bits_per_symbol();
    let mut counts = PacketCounts {
        bits: 0,
        errors: 0,
        stream_errors: vec![0; cfg.nt],
    };
    let mut bits = vec![false; cfg.nt * bps];
    for _ in 0..cfg.packet_len {
        bits.iter_mut().for_each(|b| *b = rng.bit());
        let s: CVector<f64> = c.modulate(&bits)?;
        let r = transmit(&h, &s, sigma_n2, &mut rng)?;
        let decided = detector.detect(&r);
        for (j, &k) in decided.indices.iter().enumerate() {
            let errs = c
                .bits_of(k)
                .zip(&bits[j * bps..(j + 1) * bps])
                .filter(|(a, b)| a != *b)
                .count() as u64;
            counts.stream_errors[j] += errs;
            counts.errors += errs;
        }
        counts.bits += bits.len() as u64;
    }
    Ok(counts)
}

pub fn run_packet(cfg: &SimConfig, kind: DetectorKind, snr_db: f64, trial: u64) -> Result<PacketCounts> {
    run_packet_with_noise(cfg, kind, noise_variance_from_snr(snr_db, cfg.nt, 1.0), trial)
}

pub fn workers_from_env() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Aggregates `cfg.packets` trials for one (detector, SNR) cell.
pub fn simulate_cell(cfg: &SimConfig, kind: DetectorKind, snr_db: f64, pool: &rayon::ThreadPool) -> Result<PacketCounts> {
    pool.install(|| {
        (0..cfg.packets)
            .into_par_iter()
            .map(|trial| run_packet(cfg, kind, snr_db, trial))
            .try_reduce(PacketCounts::default, |a, b| Ok(a.merge(b)))
    })
}

/// Full sweep with an explicit worker count; `on_record` sees each cell as
/// soon as it finishes.
pub fn run_sweep_with(
    cfg: &SimConfig,
    workers: usize,
    mut on_record: impl FnMut(&BerRecord) -> Result<()>,
) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let pool = worker_pool(workers)?;
    let mut records = Vec::with_capacity(cfg.detectors.len() * cfg.snr_db.len());
    for &kind in &cfg.detectors {
        let (l, m) = cfg.branches_and_stages(kind);
        for &snr in &cfg.snr_db {
            let start = Instant::now();
            let counts = simulate_cell(cfg, kind, snr, &pool)?;
            let wall = if cfg.timing {
                (start.elapsed().as_secs_f64() * 1e3).round() / 1e3
            } else {
                0.0
            };
            let record = BerRecord::from_counts(kind, l, m, snr, counts.bits, counts.errors, wall);
            on_record(&record)?;
            records.push(record);
        }
    }
    Ok(records)
}

pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    run_sweep_with(cfg, workers_from_env(), |_| Ok(()))
}
