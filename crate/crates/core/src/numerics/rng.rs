//! Per-trial random streams.
//!
//! Every Monte Carlo trial owns a ChaCha12 stream keyed by the master seed
//! and selected by the trial index through the cipher's 64-bit stream id, so
//! trial `i` sees the same numbers no matter which worker runs it or in
//! which order.

use num_complex::Complex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use super::matrix::CVector;
use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    index: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { seed, index, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn bit(&mut self) -> bool {
        self.rng.next_u32() & 1 == 1
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

pub fn rng_for_trial(master_seed: u64, trial_index: u64) -> RngStream {
    RngStream::new(master_seed, trial_index)
}

/// `n` i.i.d. circularly symmetric complex Gaussians with `E|x|^2 = variance`.
pub fn complex_gaussian<T: Real>(n: usize, variance: T, rng: &mut RngStream) -> Result<CVector<T>> {
    if !(variance > T::zero()) {
        return Err(invalid(format!("variance must be positive, got {variance}")));
    }
    let sd = (variance / T::lit(2.0)).sqrt();
    let data = (0..n)
        .map(|_| {
            let re = T::lit(rng.standard_normal());
            let im = T::lit(rng.standard_normal());
            Complex::new(re * sd, im * sd)
        })
        .collect();
    Ok(CVector::from_vec(data))
}
