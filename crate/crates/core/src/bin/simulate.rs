//! BER sweep over SNR for the selected detectors, written as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mbdf::harness::{run_sweep_with, workers_from_env, CsvWriter, SimConfig};

#[derive(Debug, Parser)]
#[command(name = "simulate", about = "Monte Carlo BER sweep for MIMO detectors")]
struct Args {
    /// `key = value` config file; flags given on the command line override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    nr: Option<usize>,
    /// `start:step:stop` (inclusive) or a comma-separated list, in dB
    #[arg(long)]
    snr: Option<String>,
    /// comma-separated: linear, osic, sdf, mbdf, mbdf-ms, ml
    #[arg(long)]
    detectors: Option<String>,
    #[arg(long)]
    branches: Option<usize>,
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    packets: Option<u64>,
    #[arg(long)]
    packet_len: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// likelihood | sum-mmse
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// write 0 in the wall_seconds column so reruns are byte-identical
    #[arg(long)]
    no_timing: bool,
}

impl Args {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut kv = Vec::new();
        let mut put = |k: &'static str, v: Option<String>| {
            if let Some(v) = v {
                kv.push((k, v));
            }
        };
        put("nt", self.nt.map(|v| v.to_string()));
        put("nr", self.nr.map(|v| v.to_string()));
        put("snr", self.snr.clone());
        put("detectors", self.detectors.clone());
        put("branches", self.branches.map(|v| v.to_string()));
        put("stages", self.stages.map(|v| v.to_string()));
        put("beta", self.beta.map(|v| v.to_string()));
        put("packets", self.packets.map(|v| v.to_string()));
        put("packet-len", self.packet_len.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("metric", self.metric.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        if self.no_timing {
            put("timing", Some("false".into()));
        }
        kv
    }
}

fn run(args: &Args) -> mbdf::Result<()> {
    let mut cfg = SimConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_file(path)?;
    }
    for (k, v) in args.overrides() {
        cfg.set(k, &v)?;
    }
    cfg.validate()?;
    let mut writer = CsvWriter::create(&cfg.out)?;
    run_sweep_with(&cfg, workers_from_env(), |record| {
        eprintln!(
            "{:>8} L={:<2} M={} snr={:>5.1} dB  ber={:.3e} ± {:.1e}",
            record.detector, record.branches, record.stages, record.snr_db, record.ber, record.stderr
        );
        writer.append(record)
    })?;
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
