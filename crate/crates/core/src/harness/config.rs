use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::constraints::factorial;
use crate::detectors::SelectionMetric;
use crate::error::{Error, Result};

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "MBDF_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Linear,
    Osic,
    Sdf,
    Mbdf,
    MbdfMs,
    Ml,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 6] = [
        DetectorKind::Linear,
        DetectorKind::Osic,
        DetectorKind::Sdf,
        DetectorKind::Mbdf,
        DetectorKind::MbdfMs,
        DetectorKind::Ml,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DetectorKind::Linear => "linear",
            DetectorKind::Osic => "osic",
            DetectorKind::Sdf => "sdf",
            DetectorKind::Mbdf => "mbdf",
            DetectorKind::MbdfMs => "mbdf-ms",
            DetectorKind::Ml => "ml",
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DetectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DetectorKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown detector '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub nt: usize,
    pub nr: usize,
    /// Ascending SNR points in dB.
    pub snr_db: Vec<f64>,
    pub detectors: Vec<DetectorKind>,
    pub branches: usize,
    pub stages: usize,
    pub beta: f64,
    pub packets: u64,
    pub packet_len: usize,
    pub seed: u64,
    pub metric: SelectionMetric,
    pub out: PathBuf,
    /// Record wall-clock time per cell; off gives byte-reproducible CSV.
    pub timing: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            nt: 4,
            nr: 4,
            snr_db: (0..=8).map(|k| 2.0 * k as f64).collect(),
            detectors: vec![
                DetectorKind::Linear,
                DetectorKind::Osic,
                DetectorKind::Sdf,
                DetectorKind::Mbdf,
                DetectorKind::Ml,
            ],
            branches: 4,
            stages: 1,
            beta: 1.0,
            packets: 10_000,
            packet_len: 200,
            seed: 42,
            metric: SelectionMetric::Likelihood,
            out: PathBuf::from("results.csv"),
            timing: true,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

fn round_decimal(x: f64) -> f64 {
    (x * 1e9).round() / 1e9
}

/// `start:step:stop` (inclusive) or a comma-separated list; result sorted
/// ascending.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    let mut out: Vec<f64> = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| parse::<f64>("snr", p))
            .collect::<Result<_>>()?;
        let [start, step, stop] = parts[..] else {
            return Err(Error::Config(format!("SNR range '{text}' must be start:step:stop")));
        };
        if !(step > 0.0) || stop < start {
            return Err(Error::Config(format!("SNR range '{text}' needs step > 0 and stop >= start")));
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=count).map(|k| round_decimal(start + k as f64 * step)).collect()
    } else {
        text.split(',').map(|p| parse::<f64>("snr", p)).collect::<Result<_>>()?
    };
    if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!("bad SNR list '{text}'")));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

impl SimConfig {
    /// Applies one `key = value` setting. Keys match the long CLI flags.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key.replace('_', "-").as_str() {
            "nt" => self.nt = parse(key, value)?,
            "nr" => self.nr = parse(key, value)?,
            "snr" | "snr-db" => self.snr_db = parse_snr_list(value)?,
            "detectors" => {
                self.detectors = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(DetectorKind::from_str)
                    .collect::<Result<_>>()?
            }
            "branches" | "l" => self.branches = parse(key, value)?,
            "stages" | "m" => self.stages = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "packets" => self.packets = parse(key, value)?,
            "packet-len" => self.packet_len = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "metric" => {
                self.metric = match value.trim() {
                    "likelihood" => SelectionMetric::Likelihood,
                    "sum-mmse" => SelectionMetric::SumMmse,
                    other => return Err(Error::Config(format!("unknown metric '{other}'"))),
                }
            }
            "out" => self.out = PathBuf::from(value.trim()),
            "timing" => self.timing = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key = value` per line text; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.nt < 1 || self.nr < self.nt {
            return fail(format!("need nr >= nt >= 1, got nt={}, nr={}", self.nt, self.nr));
        }
        if self.packets < 1 || self.packet_len < 1 {
            return fail("packets and packet-len must be at least 1".into());
        }
        if self.snr_db.is_empty() {
            return fail("empty SNR list".into());
        }
        if self.detectors.is_empty() {
            return fail("no detectors selected".into());
        }
        let uses_branches = self
            .detectors
            .iter()
            .any(|d| matches!(d, DetectorKind::Mbdf | DetectorKind::MbdfMs));
        if uses_branches {
            // N_T! overflows quickly; any L >= 2 is fine once N_T >= 20
            let max = if self.nt < 20 { factorial(self.nt) + 1 } else { usize::MAX };
            if self.branches < 1 || self.branches > max {
                return fail(format!("branches must be in 1..={max}, got {}", self.branches));
            }
        }
        if self.stages < 1 {
            return fail("stages must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return fail(format!("beta must be in [0, 1], got {}", self.beta));
        }
        Ok(())
    }

    /// (L, M) columns reported for a detector.
    pub fn branches_and_stages(&self, kind: DetectorKind) -> (usize, usize) {
        match kind {
            DetectorKind::Linear | DetectorKind::Osic | DetectorKind::Ml => (0, 0),
            DetectorKind::Sdf => (1, 1),
            DetectorKind::Mbdf => (self.branches, 1),
            DetectorKind::MbdfMs => (self.branches, self.stages),
        }
    }
}
