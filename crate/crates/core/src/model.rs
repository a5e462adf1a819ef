//! Flat-fading MIMO link: constellation, channel draw, transmission `r = Hs + n`
//! and SNR bookkeeping.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::numerics::{complex_gaussian, CMatrix, CVector, RngStream};
use crate::scalar::Real;

/// Finite symbol alphabet with unit average power and a bit label per point.
///
/// Labels are read most significant bit first, so label `0b01` of a
/// two-bit constellation maps to the bit pair `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation<T> {
    points: Vec<Complex<T>>,
    labels: Vec<u32>,
    bits_per_symbol: usize,
    /// point index for each label value
    by_label: Vec<usize>,
}

impl<T: Real> Constellation<T> {
    pub fn new(points: Vec<Complex<T>>, labels: Vec<u32>) -> Result<Self> {
        let n = points.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid(format!("constellation size {n} is not a power of two >= 2")));
        }
        if labels.len() != n {
            return Err(invalid("one label per point required"));
        }
        if points.iter().any(|z| !crate::scalar::is_finite(z)) {
            return Err(invalid("constellation points must be finite"));
        }
        let bits_per_symbol = n.trailing_zeros() as usize;
        let mut by_label = vec![usize::MAX; n];
        for (k, &label) in labels.iter().enumerate() {
            let slot = by_label
                .get_mut(label as usize)
                .ok_or_else(|| invalid(format!("label {label} needs more than {bits_per_symbol} bits")))?;
            if *slot != usize::MAX {
                return Err(invalid(format!("duplicate label {label}")));
            }
            *slot = k;
        }
        let power = points.iter().map(|z| z.norm_sqr()).sum::<T>() / T::lit(n as f64);
        let tol = if T::HERMITIAN_TOL < 1e-6 { 1e-12 } else { 1e-6 };
        if (power - T::one()).abs() > T::lit(tol) {
            return Err(invalid(format!("average power {power} is not 1")));
        }
        Ok(Self {
            points,
            labels,
            bits_per_symbol,
            by_label,
        })
    }

    /// Gray-labelled QPSK: 00 -> (1+i)/√2, 01 -> (-1+i)/√2, 11 -> (-1-i)/√2,
    /// 10 -> (1-i)/√2.
    pub fn qpsk() -> Self {
        let a = T::FRAC_1_SQRT_2();
        let points = vec![
            Complex::new(a, a),
            Complex::new(-a, a),
            Complex::new(-a, -a),
            Complex::new(a, -a),
        ];
        Self::new(points, vec![0b00, 0b01, 0b11, 0b10]).expect("QPSK is a valid constellation")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn point(&self, k: usize) -> Complex<T> {
        self.points[k]
    }

    pub fn label(&self, k: usize) -> u32 {
        self.labels[k]
    }

    pub fn average_power(&self) -> T {
        self.points.iter().map(|z| z.norm_sqr()).sum::<T>() / T::lit(self.len() as f64)
    }

    /// Point index carrying the given bit group (MSB first).
    pub fn index_of_bits(&self, bits: &[bool]) -> Result<usize> {
        if bits.len() != self.bits_per_symbol {
            return Err(invalid(format!(
                "expected {} bits, got {}",
                self.bits_per_symbol,
                bits.len()
            )));
        }
        let label = bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
        Ok(self.by_label[label as usize])
    }

    /// Bits carried by point `k`, MSB first.
    pub fn bits_of(&self, k: usize) -> impl Iterator<Item = bool> + '_ {
        let label = self.labels[k];
        (0..self.bits_per_symbol).rev().map(move |b| (label >> b) & 1 == 1)
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn slice_index(&self, z: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = (z - self.points[0]).norm_sqr();
        for (k, p) in self.points.iter().enumerate().skip(1) {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    pub fn slice(&self, z: Complex<T>) -> Complex<T> {
        self.points[self.slice_index(z)]
    }

    /// Maps a bit sequence to symbols, `bits_per_symbol` bits at a time.
    pub fn modulate(&self, bits: &[bool]) -> Result<CVector<T>> {
        if bits.len() % self.bits_per_symbol != 0 {
            return Err(invalid(format!(
                "{} bits is not a multiple of {} bits per symbol",
                bits.len(),
                self.bits_per_symbol
            )));
        }
        let symbols = bits
            .chunks(self.bits_per_symbol)
            .map(|group| self.index_of_bits(group).map(|k| self.points[k]))
            .collect::<Result<Vec<_>>>()?;
        Ok(CVector::from_vec(symbols))
    }

    /// Hard decision on each entry followed by bit demapping.
    pub fn demodulate(&self, z: &[Complex<T>]) -> Vec<bool> {
        z.iter().flat_map(|&x| self.bits_of(self.slice_index(x))).collect()
    }
}

/// One channel use: gains plus symbol and noise variances.
#[derive(Debug, Clone)]
pub struct ChannelRealization<T> {
    pub h: CMatrix<T>,
    pub sigma_s2: T,
    pub sigma_n2: T,
}

impl<T: Real> ChannelRealization<T> {
    pub fn new(h: CMatrix<T>, sigma_s2: T, sigma_n2: T) -> Result<Self> {
        let (nr, nt) = (h.rows(), h.cols());
        if nt < 1 || nr < nt {
            return Err(invalid(format!("need N_R >= N_T >= 1, got N_R={nr}, N_T={nt}")));
        }
        if !(sigma_s2 > T::zero()) || !(sigma_n2 > T::zero()) {
            return Err(invalid("symbol and noise variances must be positive"));
        }
        if h.as_slice().iter().any(|z| !crate::scalar::is_finite(z)) {
            return Err(invalid("channel has non-finite entries"));
        }
        Ok(Self { h, sigma_s2, sigma_n2 })
    }

    pub fn nt(&self) -> usize {
        self.h.cols()
    }

    pub fn nr(&self) -> usize {
        self.h.rows()
    }
}

/// I.i.d. CN(0, 1) channel gains, drawn row by row.
pub fn random_channel<T: Real>(nt: usize, nr: usize, rng: &mut RngStream) -> Result<CMatrix<T>> {
    if nt < 1 || nr < nt {
        return Err(invalid(format!("need N_R >= N_T >= 1, got N_R={nr}, N_T={nt}")));
    }
    let g = complex_gaussian(nr * nt, T::one(), rng)?;
    CMatrix::try_from_vec(nr, nt, g.into_inner())
}

/// `r = H s + n` with `n ~ CN(0, sigma_n2 I)`.
pub fn transmit<T: Real>(h: &CMatrix<T>, s: &CVector<T>, sigma_n2: T, rng: &mut RngStream) -> Result<CVector<T>> {
    if s.len() != h.cols() {
        return Err(invalid(format!(
            "symbol vector has {} entries, channel has {} inputs",
            s.len(),
            h.cols()
        )));
    }
    let noise = complex_gaussian(h.rows(), sigma_n2, rng)?;
    Ok(h.matvec(s).add(&noise))
}

/// `sigma_n2 = N_T sigma_s2 / 10^(snr/10)`.
pub fn noise_variance_from_snr<T: Real>(snr_db: T, nt: usize, sigma_s2: T) -> T {
    T::lit(nt as f64) * sigma_s2 / T::lit(10.0).powf(snr_db / T::lit(10.0))
}

pub fn snr_from_noise_variance<T: Real>(sigma_n2: T, nt: usize, sigma_s2: T) -> T {
    T::lit(10.0) * (T::lit(nt as f64) * sigma_s2 / sigma_n2).log10()
}
