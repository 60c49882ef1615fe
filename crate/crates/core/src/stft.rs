//! STFT magnitude measurements and the measurement plans each recovery
//! algorithm consumes.
//!
//! A measurement is `|ŷ_{k,m}| = |Σ_n z_n w_{mL−n} e^{−2πikn/N}|`. The
//! equivalent frequency-domain form `(1/N)|Σ_l ẑ_{k+l} ŵ_l ω^{lm}|` with
//! `ω = e^{2πiL/N}` is what the recovery algorithms reason with.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::circle::im_ratio;
use crate::dsp::{mod_index, root_of_unity, Signal, Spectrum};
use crate::error::{Error, Result};
use crate::windows::{Case, WindowSet};

/// Separation parameter `L` and the three modulation indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftParams {
    n: usize,
    separation: usize,
    m: [usize; 3],
}

/// Outcome of the distinct-modulation check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MTripleCheck {
    pub pass: bool,
    /// `Im((ω^{m₁}−ω^{m₂})/(ω^{m₁}−ω^{m₃}))`, when defined.
    pub im_ratio: Option<f64>,
}

/// Number of admissible modulation indices, `⌈N/L⌉`.
pub fn modulation_count(n: usize, separation: usize) -> usize {
    n.div_ceil(separation)
}

/// Check that `(m₁, m₂, m₃)` are distinct, in range and give non-collinear
/// points `ω^{m_j}`.
pub fn validate_m_triple(n: usize, separation: usize, m: [usize; 3]) -> MTripleCheck {
    let fail = MTripleCheck { pass: false, im_ratio: None };
    if separation == 0 || separation >= n {
        return fail;
    }
    let count = modulation_count(n, separation);
    if count < 3 || m.iter().any(|&v| v >= count) {
        return fail;
    }
    if m[0] == m[1] || m[0] == m[2] || m[1] == m[2] {
        return fail;
    }
    let w = m.map(|v| root_of_unity((v * separation) as i64, n, 1.0));
    match im_ratio(w[0], w[1], w[2]) {
        Ok(r) => MTripleCheck { pass: r.abs() > 1e-9, im_ratio: Some(r) },
        Err(_) => fail,
    }
}

impl StftParams {
    pub fn new(n: usize, separation: usize, m: [usize; 3]) -> Result<Self> {
        if separation == 0 || separation >= n {
            return Err(Error::InvalidParameter(format!(
                "separation L must satisfy 0 < L < N (L={separation}, N={n})"
            )));
        }
        if modulation_count(n, separation) < 3 {
            return Err(Error::InvalidParameter(format!(
                "need ceil(N/L) >= 3 (N={n}, L={separation})"
            )));
        }
        let check = validate_m_triple(n, separation, m);
        if !check.pass {
            return Err(Error::InvalidParameter(format!(
                "modulation indices {m:?} must be distinct values in [0, {}) with non-collinear ω^m",
                modulation_count(n, separation)
            )));
        }
        Ok(Self { n, separation, m })
    }

    /// `L = max(1, ⌊N/3⌋)` and `m = (0, 1, 2)`; spreads the three `ω^{m_j}`
    /// roughly evenly around the circle.
    pub fn default_for(n: usize) -> Result<Self> {
        Self::new(n, (n / 3).max(1), [0, 1, 2])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn separation(&self) -> usize {
        self.separation
    }

    pub fn m(&self) -> [usize; 3] {
        self.m
    }

    /// `ω^e`, with `e` reduced mod `N`.
    pub fn omega_pow(&self, e: i64) -> Complex64 {
        let n = self.n as i64;
        let reduced = (e.rem_euclid(n) * self.separation as i64) % n;
        root_of_unity(reduced, self.n, 1.0)
    }
}

/// One measurement location: window index (0-based), frequency index `k`
/// and modulation index `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementKey {
    pub window: usize,
    pub k: usize,
    pub m: usize,
}

impl MeasurementKey {
    pub fn new(window: usize, k: usize, m: usize) -> Self {
        Self { window, k, m }
    }
}

impl fmt::Display for MeasurementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(w{}, k={}, m={})", self.window, self.k, self.m)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementPlan {
    case: Case,
    entries: Vec<MeasurementKey>,
}

impl MeasurementPlan {
    /// A plan from explicit entries, e.g. read back from a file. Recovery
    /// only needs the entries it looks up to be present.
    pub fn from_entries(case: Case, entries: Vec<MeasurementKey>) -> Self {
        Self { case, entries }
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn entries(&self) -> &[MeasurementKey] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Expected plan size for each case.
pub fn plan_count(case: Case, n: usize) -> usize {
    match case {
        Case::Case1 | Case::Case2 => 3 * (n / 2) + 1,
        Case::Case3 => 3 * n / 2 - 1,
    }
}

/// Index sets of the three recovery cases, reduced mod `N`.
///
/// * Case 1: `(⌊N/2⌋−s, 0)` and `(k−s, m_j)` for `k < ⌊N/2⌋`, `s = i+N−B`.
/// * Case 2: `(1−i, 0)` on all four windows and `(k−s, m_j)` on window 0
///   for `1 ≤ k < ⌊N/2⌋`, `s = i+⌊N/2⌋−1`.
/// * Case 3: `(N/2, 0)` on both windows and `(k, m_j)` on window 0 for
///   `1 ≤ k < N/2`.
pub fn measurement_plan(
    case: Case,
    n: usize,
    bandlimit: usize,
    zero_run_start: usize,
    params: &StftParams,
) -> Result<MeasurementPlan> {
    if params.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: params.n() });
    }
    if zero_run_start >= n {
        return Err(Error::InvalidParameter(format!("zero-run start {zero_run_start} out of range")));
    }
    let half = n / 2;
    let (nn, i) = (n as i64, zero_run_start as i64);
    let m = params.m();
    let mut entries = Vec::with_capacity(plan_count(case, n));
    match case {
        Case::Case1 => {
            if bandlimit < 2 || bandlimit > n.div_ceil(2) {
                return Err(Error::InvalidParameter(format!(
                    "case 1 needs 2 <= B <= ceil(N/2), got B={bandlimit}"
                )));
            }
            let s = i + nn - bandlimit as i64;
            entries.push(MeasurementKey::new(0, mod_index(half as i64 - s, n), 0));
            for k in 0..half as i64 {
                for &mj in &m {
                    entries.push(MeasurementKey::new(0, mod_index(k - s, n), mj));
                }
            }
        }
        Case::Case2 => {
            if bandlimit != n.div_ceil(2) + 1 {
                return Err(Error::InvalidParameter(format!(
                    "case 2 needs B = ceil(N/2)+1, got B={bandlimit}"
                )));
            }
            let anchor = mod_index(1 - i + nn, n);
            for w in 0..4 {
                entries.push(MeasurementKey::new(w, anchor, 0));
            }
            let s = i + half as i64 - 1;
            for k in 1..half as i64 {
                for &mj in &m {
                    entries.push(MeasurementKey::new(0, mod_index(k - s, n), mj));
                }
            }
        }
        Case::Case3 => {
            if !n.is_multiple_of(2) || n < 4 {
                return Err(Error::InvalidParameter(format!("case 3 needs even N >= 4, got {n}")));
            }
            entries.push(MeasurementKey::new(0, half, 0));
            entries.push(MeasurementKey::new(1, half, 0));
            for k in 1..half {
                for &mj in &m {
                    entries.push(MeasurementKey::new(0, k, mj));
                }
            }
        }
    }
    Ok(MeasurementPlan { case, entries })
}

fn check_indices(n: usize, k: usize, m: usize, params: &StftParams) -> Result<()> {
    if params.n() != n {
        return Err(Error::LengthMismatch { expected: params.n(), got: n });
    }
    if k >= n {
        return Err(Error::InvalidParameter(format!("frequency index {k} out of range for N={n}")));
    }
    if m >= modulation_count(n, params.separation()) {
        return Err(Error::InvalidParameter(format!("modulation index {m} out of range")));
    }
    Ok(())
}

/// Time-domain STFT coefficient `Σ_n z_n w_{mL−n} e^{−2πikn/N}`.
pub fn stft_coefficient(z: &Signal, w: &Signal, k: usize, m: usize, params: &StftParams) -> Result<Complex64> {
    let n = z.n();
    if w.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: w.n() });
    }
    check_indices(n, k, m, params)?;
    let shift = (m * params.separation()) as i64;
    Ok((0..n)
        .map(|t| z[t] * w.at(shift - t as i64) * root_of_unity((k * t) as i64, n, -1.0))
        .sum())
}

/// `|ŷ_{k,m}|` evaluated in the time domain.
pub fn stft_magnitude(z: &Signal, w: &Signal, k: usize, m: usize, params: &StftParams) -> Result<f64> {
    Ok(stft_coefficient(z, w, k, m, params)?.norm())
}

/// `|ŷ_{k,m}|` evaluated from the spectra, `(1/N)|Σ_l ẑ_{k+l} ŵ_l ω^{lm}|`.
pub fn stft_magnitude_freq(
    zhat: &Spectrum,
    what: &Spectrum,
    k: usize,
    m: usize,
    params: &StftParams,
) -> Result<f64> {
    let n = zhat.n();
    if what.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: what.n() });
    }
    check_indices(n, k, m, params)?;
    let sum: Complex64 = (0..n)
        .map(|l| zhat.at((k + l) as i64) * what[l] * params.omega_pow((l * m) as i64))
        .sum();
    Ok(sum.norm() / n as f64)
}

/// Read access to magnitudes, keyed by plan entry.
pub trait Measurements {
    fn magnitude(&self, key: MeasurementKey) -> Result<f64>;
}

/// Magnitudes for every entry of a plan, stored in plan order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    plan: MeasurementPlan,
    magnitudes: Vec<f64>,
    lookup: HashMap<MeasurementKey, usize>,
}

impl MeasurementSet {
    pub fn new(plan: MeasurementPlan, magnitudes: Vec<f64>) -> Result<Self> {
        if magnitudes.len() != plan.len() {
            return Err(Error::LengthMismatch { expected: plan.len(), got: magnitudes.len() });
        }
        if let Some(bad) = magnitudes.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("magnitudes must be finite and nonnegative, got {bad}")));
        }
        let lookup = plan.entries.iter().enumerate().map(|(i, key)| (*key, i)).collect();
        Ok(Self { plan, magnitudes, lookup })
    }

    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn iter(&self) -> impl Iterator<Item = (MeasurementKey, f64)> + '_ {
        self.plan.entries.iter().copied().zip(self.magnitudes.iter().copied())
    }

    /// Add i.i.d. `N(0, σ²)` noise, clamping at zero. `σ = 0` is the identity.
    pub fn with_noise(&self, sigma: f64, seed: u64) -> Result<Self> {
        if sigma == 0.0 {
            return Ok(self.clone());
        }
        let normal = Normal::new(0.0, sigma)
            .map_err(|e| Error::InvalidParameter(format!("noise sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noisy = self
            .magnitudes
            .iter()
            .map(|v| (v + normal.sample(&mut rng)).max(0.0))
            .collect();
        Self::new(self.plan.clone(), noisy)
    }
}

impl Measurements for MeasurementSet {
    fn magnitude(&self, key: MeasurementKey) -> Result<f64> {
        self.lookup
            .get(&key)
            .map(|&i| self.magnitudes[i])
            .ok_or(Error::MissingMeasurement { window: key.window, k: key.k, m: key.m })
    }
}

/// Apply every plan entry to `z` with the time-domain formula.
pub fn measure(z: &Signal, ws: &WindowSet, plan: &MeasurementPlan, params: &StftParams) -> Result<MeasurementSet> {
    let magnitudes = plan
        .entries
        .iter()
        .map(|key| {
            let w = ws.windows().get(key.window).ok_or_else(|| {
                Error::InvalidParameter(format!("plan references window {} but the set has {}", key.window, ws.len()))
            })?;
            stft_magnitude(z, w.time(), key.k, key.m, params)
        })
        .collect::<Result<Vec<_>>>()?;
    MeasurementSet::new(plan.clone(), magnitudes)
}
