//! Gauss–Newton polishing of a recovered half spectrum.
//!
//! The recursion solves one small system per frequency, so rounding error
//! made early is carried into every later step. Each magnitude is
//! `|ŷ_e| = |Σ_q c_{e,q} ẑ_q|` with `c_{e,q} = ŵ_{q−k} ω^{(q−k)m} / N`, so a
//! few Gauss–Newton steps on `|ŷ_e(ẑ)|² = y_e²` starting from the recursive
//! estimate bring it back to working precision. The real parameters are
//! `Re ẑ_0`, `ẑ_1 … ẑ_{K−1}` and `ẑ_K` (real when `N` is even), which removes
//! the continuous phase freedom and leaves only the global sign.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dsp::Spectrum;
use crate::error::Result;
use crate::stft::{MeasurementKey, MeasurementPlan, Measurements, StftParams};
use crate::windows::WindowSet;

/// Real parameters `(bin, is_imaginary)` for a full half spectrum:
/// `Re ẑ_0`, `ẑ_1 … ẑ_{K−1}` and `ẑ_K` (real when `N` is even).
pub fn full_parameters(n: usize) -> Vec<(usize, bool)> {
    let half = n / 2;
    let mut out = vec![(0, false)];
    for q in 1..=half {
        out.push((q, false));
        if !(q == half && n.is_multiple_of(2)) {
            out.push((q, true));
        }
    }
    out
}

fn sum_sq(r: &DVector<f64>) -> f64 {
    r.iter().map(|v| v * v).sum()
}

/// The squared-magnitude model of every plan entry, ready for least squares.
pub struct Refiner {
    half: usize,
    keys: Vec<MeasurementKey>,
    /// `c_{e,q}` for `q = 0..=K`.
    coeffs: Vec<Vec<Complex64>>,
    targets: Vec<f64>,
}

impl Refiner {
    pub fn new(meas: &impl Measurements, ws: &WindowSet, plan: &MeasurementPlan, params: &StftParams) -> Result<Self> {
        let n = ws.n();
        let half = n / 2;
        let keys = plan.entries().to_vec();
        let coeffs = keys
            .iter()
            .map(|key| {
                let w = ws.windows()[key.window].spectrum();
                (0..=half)
                    .map(|q| {
                        let l = (q + n - key.k) as i64;
                        w.at(l) * params.omega_pow(l * key.m as i64) / n as f64
                    })
                    .collect()
            })
            .collect();
        let targets = keys.iter().map(|key| meas.magnitude(*key).map(|y| y * y)).collect::<Result<_>>()?;
        Ok(Self { half, keys, coeffs, targets })
    }

    /// Row index of a plan entry.
    pub fn row_of(&self, key: MeasurementKey) -> Option<usize> {
        self.keys.iter().position(|k| *k == key)
    }

    pub fn all_rows(&self) -> Vec<usize> {
        (0..self.keys.len()).collect()
    }

    /// Gauss–Newton on the selected rows over the selected parameters; every
    /// other entry of `z` is held fixed. Steps that do not lower the misfit
    /// are rejected, so `z` never gets worse.
    pub fn polish(&self, z: &mut [Complex64], rows: &[usize], vars: &[(usize, bool)], iterations: usize) {
        if iterations == 0 || rows.is_empty() || vars.is_empty() {
            return;
        }
        let half = self.half;
        let get = |z: &[Complex64], (q, im): (usize, bool)| if im { z[q].im } else { z[q].re };
        let evaluate = |z: &[Complex64]| -> (Vec<Complex64>, DVector<f64>) {
            let ys: Vec<Complex64> = rows
                .iter()
                .map(|&e| self.coeffs[e].iter().zip(&z[..=half]).map(|(a, b)| a * b).sum())
                .collect();
            let r = DVector::from_iterator(
                rows.len(),
                ys.iter().zip(rows).map(|(y, &e)| y.norm_sqr() - self.targets[e]),
            );
            (ys, r)
        };

        let (mut ys, mut r) = evaluate(z);
        let mut cost = sum_sq(&r);
        let mut trial = z.to_vec();
        for _ in 0..iterations {
            let jac = DMatrix::from_fn(rows.len(), vars.len(), |row, p| {
                let (q, im) = vars[p];
                let c = self.coeffs[rows[row]][q];
                let dy = if im { c * Complex64::new(0.0, 1.0) } else { c };
                2.0 * (ys[row].conj() * dy).re
            });
            let Ok(step) = jac.svd(true, true).solve(&(-&r), 1e-14) else {
                break;
            };
            trial.copy_from_slice(z);
            for (&(q, im), d) in vars.iter().zip(step.iter()) {
                if im {
                    trial[q].im += d;
                } else {
                    trial[q].re += d;
                }
            }
            let (trial_ys, trial_r) = evaluate(&trial);
            let trial_cost = sum_sq(&trial_r);
            if !(trial_cost < cost) {
                break;
            }
            let size: f64 = vars.iter().map(|&v| get(z, v).powi(2)).sum::<f64>().sqrt();
            z.copy_from_slice(&trial);
            ys = trial_ys;
            r = trial_r;
            cost = trial_cost;
            if step.norm() <= 1e-15 * size {
                break;
            }
        }
    }
}

/// Polish a full estimate against every plan entry.
pub fn polish(
    estimate: &Spectrum,
    meas: &impl Measurements,
    ws: &WindowSet,
    plan: &MeasurementPlan,
    params: &StftParams,
    iterations: usize,
) -> Result<Spectrum> {
    let refiner = Refiner::new(meas, ws, plan, params)?;
    let mut z = estimate.as_slice().to_vec();
    refiner.polish(&mut z, &refiner.all_rows(), &full_parameters(ws.n()), iterations);
    Spectrum::new(z)
}
