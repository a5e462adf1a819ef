//! Monte Carlo BER harness: configuration, packet simulation, sweeps and CSV
//! output.

mod config;
mod csv;
mod sim;

pub use config::{parse_snr_list, DetectorKind, SimConfig, WORKERS_ENV};
pub use csv::{read_csv, write_csv, CsvWriter, CSV_HEADER};
pub use sim::{
    prepare_detector, run_packet, run_packet_with_noise, run_sweep, run_sweep_with, simulate_cell, worker_pool,
    workers_from_env, PacketCounts,
};

/// One (detector, SNR) cell of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub detector: DetectorKind,
    pub branches: usize,
    pub stages: usize,
    pub snr_db: f64,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    /// Binomial standard error `sqrt(p (1 - p) / n)`.
    pub stderr: f64,
    pub wall_seconds: f64,
}

impl BerRecord {
    pub fn from_counts(
        detector: DetectorKind,
        branches: usize,
        stages: usize,
        snr_db: f64,
        total_bits: u64,
        bit_errors: u64,
        wall_seconds: f64,
    ) -> Self {
        let (ber, stderr) = ber_and_stderr(bit_errors, total_bits);
        Self {
            detector,
            branches,
            stages,
            snr_db,
            total_bits,
            bit_errors,
            ber,
            stderr,
            wall_seconds,
        }
    }
}

pub fn ber_and_stderr(errors: u64, bits: u64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 0.0);
    }
    let n = bits as f64;
    let p = errors as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}
