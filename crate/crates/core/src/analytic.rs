//! Discrete analytic signals, the discrete Hilbert transform and
//! instantaneous frequency.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dsp::{dft, idft, Signal, Spectrum};
use crate::error::{Error, Result};

/// A signal whose DFT vanishes above bin `⌊N/2⌋`, with real DC (and real
/// Nyquist bin for even `N`). Keeps the time and frequency views together.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSignal {
    signal: Signal,
    spectrum: Spectrum,
}

impl AnalyticSignal {
    /// Wrap a spectrum after checking the analytic structure at `tol`.
    pub fn from_spectrum(spectrum: Spectrum, tol: f64) -> Result<Self> {
        let signal = idft(&spectrum);
        if !spectrum_is_analytic(&spectrum, tol) {
            return Err(Error::InvalidParameter("spectrum is not analytic".into()));
        }
        Ok(Self { signal, spectrum })
    }

    pub fn from_signal(signal: Signal, tol: f64) -> Result<Self> {
        Self::from_spectrum(dft(&signal), tol)
    }

    pub fn n(&self) -> usize {
        self.signal.n()
    }

    pub fn signal(&self) -> &Signal {
        &self.signal
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// The nonzero half `ẑ_0, …, ẑ_⌊N/2⌋`.
    pub fn half_spectrum(&self) -> &[Complex64] {
        &self.spectrum.as_slice()[..=self.n() / 2]
    }
}

/// Build `A(x)` from a real generator by keeping DC (and the Nyquist bin for
/// even `N`), doubling the positive bins and zeroing the negative ones.
pub fn analytic_from_real(x: &[f64]) -> Result<AnalyticSignal> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("analytic signal needs N >= 2, got {n}")));
    }
    let xhat = dft(&Signal::from_real(x)?);
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    coeffs[0] = xhat[0];
    if n.is_multiple_of(2) {
        for k in 1..n / 2 {
            coeffs[k] = 2.0 * xhat[k];
        }
        coeffs[n / 2] = xhat[n / 2];
    } else {
        for k in 1..=(n - 1) / 2 {
            coeffs[k] = 2.0 * xhat[k];
        }
    }
    // A real input has real DC and Nyquist bins; drop the rounding residue.
    coeffs[0].im = 0.0;
    if n.is_multiple_of(2) {
        coeffs[n / 2].im = 0.0;
    }
    let spectrum = Spectrum::new(coeffs)?;
    let signal = idft(&spectrum);
    Ok(AnalyticSignal { signal, spectrum })
}

/// Discrete Hilbert transform: the imaginary part of `A(x)`.
pub fn hilbert(x: &[f64]) -> Result<Vec<f64>> {
    Ok(analytic_from_real(x)?.signal.im())
}

/// Dense real matrix `H_e` with `H_e x = hilbert(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HilbertMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl HilbertMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: x.len() });
        }
        Ok(self
            .entries
            .chunks(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

/// Assemble `H_e` column by column from the transform of basis vectors.
pub fn hilbert_matrix(n: usize) -> Result<HilbertMatrix> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("Hilbert matrix needs n >= 2, got {n}")));
    }
    let mut entries = vec![0.0; n * n];
    let mut basis = vec![0.0; n];
    for col in 0..n {
        basis[col] = 1.0;
        for (row, v) in hilbert(&basis)?.into_iter().enumerate() {
            entries[row * n + col] = v;
        }
        basis[col] = 0.0;
    }
    Ok(HilbertMatrix { n, entries })
}

pub(crate) fn spectrum_is_analytic(s: &Spectrum, tol: f64) -> bool {
    let n = s.n();
    let bound = tol * s.norm();
    let half = n / 2;
    let tail_ok = (half + 1..n).all(|k| s[k].norm() <= bound);
    let dc_ok = s[0].im.abs() <= bound;
    let nyquist_ok = n % 2 == 1 || s[half].im.abs() <= bound;
    tail_ok && dc_ok && nyquist_ok
}

/// Test the analytic DFT structure with tolerance relative to `‖ẑ‖`.
pub fn is_analytic(z: &Signal, tol: f64) -> bool {
    spectrum_is_analytic(&dft(z), tol)
}

/// Draw a generic analytic signal: i.i.d. standard normal generator, seeded.
pub fn sample_generic(n: usize, seed: u64) -> Result<AnalyticSignal> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    analytic_from_real(&x)
}

/// Wrapped phase increments in `[0, 2π)`, radians per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct IfVector(pub Vec<f64>);

impl IfVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Largest circular distance to `other`, elementwise.
    pub fn max_circular_distance(&self, other: &IfVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| circular_distance(*a, *b))
            .fold(0.0, f64::max)
    }
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// `arg` folded into `[0, 2π)`.
pub fn arg_2pi(c: Complex64) -> f64 {
    let a = c.arg();
    let a = if a < 0.0 { a + TAU } else { a };
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Phase derivative `(arg z_k − arg z_{k−1}) mod 2π`, index `k−1` mod `N`.
///
/// Evaluated as `arg(z_k · conj z_{k−1})`, which is invariant bit-for-bit
/// under `z → −z`.
pub fn instantaneous_frequency(z: &Signal) -> Result<IfVector> {
    let n = z.n();
    let floor = 1e-12 * z.sup_norm();
    if let Some(index) = (0..n).find(|&k| z[k].norm() <= floor) {
        return Err(Error::ZeroSample { index });
    }
    Ok(IfVector(
        (0..n)
            .map(|k| arg_2pi(z[k] * z.at(k as i64 - 1).conj()))
            .collect(),
    ))
}
