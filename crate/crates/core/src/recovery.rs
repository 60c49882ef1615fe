//! Constructive phase retrieval of analytic signals from STFT magnitudes.
//!
//! All three algorithms share one idea: once the top of the half spectrum
//! `ẑ_{k+1}, …, ẑ_{⌊N/2⌋}` is known, three magnitudes at modulations `m_j`
//! pin `ẑ_k` down as the common point of three circles. They differ in how the
//! recursion is started:
//!
//! * Case 1 reads `|ẑ_{⌊N/2⌋}|` off a single anchor magnitude.
//! * Case 2 solves a 4×4 linear system for the monomials of `(ẑ_0, ẑ_{⌊N/2⌋})`.
//! * Case 3 has two closed-form candidates for `(ẑ_0, ẑ_{N/2})` and keeps the
//!   one whose circles actually intersect.
//!
//! Every result is determined up to a global sign, which [`canonicalize`]
//! fixes by convention.

use num_complex::Complex64;

use crate::circle::{solve_three_circles, CircleError, CircleSystem, CircleTolerance};
use crate::dsp::{idft, mod_index, Signal, Spectrum};
use crate::error::{Error, Result};
use crate::refine::{full_parameters, Refiner};
use crate::stft::{measurement_plan, stft_magnitude_freq, MeasurementKey, Measurements, StftParams};
use crate::windows::{build_a0, validate_for_case, Case, Window, WindowSet, A0_CONDITION_LIMIT};

/// How Case 3 resolves the two sign branches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    /// Exactly one branch must reproduce the measurements.
    #[default]
    Strict,
    /// If both branches pass, keep the one with the smaller worst residual.
    PreferSmallest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    pub params: StftParams,
    /// Minimum `|Im((v₁−v₂)/(v₁−v₃))|` for a circle step.
    pub degenerate_tol: f64,
    /// Accepted circle residual of a single recursion step, relative to the
    /// step's scale. Looser than `residual_tol` because rounding error from
    /// earlier steps is only removed by the final polish.
    pub step_tol: f64,
    /// Accepted mismatch between the measurements and the re-measured final
    /// estimate, relative to the largest magnitude.
    pub residual_tol: f64,
    /// Relative threshold below which a quantity counts as zero.
    pub zero_tol: f64,
    pub branch_policy: BranchPolicy,
    /// Gauss–Newton steps applied to the recursive estimate; 0 disables.
    pub refine_iterations: usize,
}

impl RecoveryConfig {
    pub fn new(params: StftParams) -> Self {
        Self {
            params,
            degenerate_tol: 1e-9,
            step_tol: 1e-6,
            residual_tol: 1e-6,
            zero_tol: 1e-10,
            branch_policy: BranchPolicy::Strict,
            refine_iterations: 10,
        }
    }

    fn circle_tolerance(&self) -> CircleTolerance {
        CircleTolerance { degenerate: self.degenerate_tol, residual: self.step_tol }
    }
}

/// The recovered signals are only determined up to `z ↦ −z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ambiguity {
    GlobalSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    /// Canonicalized spectrum estimate.
    pub spectrum: Spectrum,
    pub signal: Signal,
    pub ambiguity: Ambiguity,
    /// Relative residual of each circle step, from `k = ⌊N/2⌋−1` downwards.
    pub step_residuals: Vec<f64>,
    pub case: Case,
}

impl RecoveryResult {
    fn new(spectrum: Spectrum, step_residuals: Vec<f64>, case: Case, zero_tol: f64) -> Self {
        let spectrum = canonicalize(&spectrum, zero_tol);
        let signal = idft(&spectrum);
        Self { spectrum, signal, ambiguity: Ambiguity::GlobalSign, step_residuals, case }
    }
}

/// Flip the global sign so that the first significant entry of
/// `(Re ẑ_0, Re ẑ_1, …, Im ẑ_0, Im ẑ_1, …)` is positive. Idempotent, and
/// `canonicalize(ẑ) = canonicalize(−ẑ)`.
pub fn canonicalize(estimate: &Spectrum, tol: f64) -> Spectrum {
    let cutoff = tol * estimate.norm();
    let parts = estimate.as_slice();
    let lead = parts.iter().map(|c| c.re).chain(parts.iter().map(|c| c.im)).find(|v| v.abs() > cutoff);
    match lead {
        Some(v) if v < 0.0 => -estimate,
        _ => estimate.clone(),
    }
}

/// `min(‖ẑ−z‖, ‖ẑ+z‖) / ‖z‖`.
pub fn up_to_sign_error(z_hat: &Signal, z_true: &Signal) -> Result<f64> {
    if z_hat.n() != z_true.n() {
        return Err(Error::LengthMismatch { expected: z_true.n(), got: z_hat.n() });
    }
    let norm = z_true.norm();
    if norm == 0.0 {
        return Err(Error::InvalidParameter("reference signal has zero norm".into()));
    }
    let (mut minus, mut plus) = (0.0, 0.0);
    for (a, b) in z_hat.as_slice().iter().zip(z_true.as_slice()) {
        minus += (a - b).norm_sqr();
        plus += (a + b).norm_sqr();
    }
    Ok(minus.min(plus).sqrt() / norm)
}

/// One recursion step: recover `ẑ_k`, `k = k0−1`, from the three magnitudes
/// `|ŷ_{k−s, m_j}|` given the known entries `ẑ_{k0}, …, ẑ_{⌊N/2⌋}` in `tail`.
///
/// With band start `s` the measurement reads
/// `N|ŷ_{k−s,m}| = |Σ_t ẑ_{k+t} ŵ_{s+t} ω^{tm}|`, so dividing by `|ŵ_s|` gives
/// `|ẑ_k + v_j| = N|ŷ|/|ŵ_s|` with `v_j = Σ_{t≥1} ẑ_{k+t} ŵ_{s+t} ω^{t m_j} / ŵ_s`.
/// Entries of `tail` above `⌊N/2⌋` must be zero. Returns `ẑ_k` and the
/// circle residual relative to the step's scale.
pub fn recursion_step(
    k0: usize,
    tail: &[Complex64],
    magnitudes: [f64; 3],
    w: &Window,
    cfg: &RecoveryConfig,
) -> Result<(Complex64, f64)> {
    let n = w.n();
    if tail.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: tail.len() });
    }
    if k0 == 0 || k0 > n / 2 {
        return Err(Error::InvalidParameter(format!("recursion index k0={k0} out of range")));
    }
    let k = k0 - 1;
    let s = w.band_start() as i64;
    let lead = w.coeff(s);
    if lead.norm() == 0.0 {
        return Err(Error::InvalidWindow("band start entry is zero".into()));
    }
    let params = &cfg.params;
    let centers = params.m().map(|mj| {
        let sum: Complex64 = (1..w.bandlimit())
            .filter(|t| k + t < n)
            .map(|t| tail[k + t] * w.coeff(s + t as i64) * params.omega_pow((t * mj) as i64))
            .sum();
        sum / lead
    });
    let radii = magnitudes.map(|y| n as f64 * y / lead.norm());
    let sys = CircleSystem::new(centers, radii);
    match solve_three_circles(&sys, &cfg.circle_tolerance()) {
        Ok(z) => Ok((z, crate::circle::residual(z, &sys) / sys.scale())),
        Err(CircleError::NoCommonPoint { residual }) => {
            Err(Error::NoCommonPoint { k, residual: residual / sys.scale() })
        }
        Err(CircleError::DegenerateGeometry { im_ratio }) => Err(Error::DegenerateSignal {
            k,
            reason: format!("circle centers are collinear or coincide (Im ratio {im_ratio:.3e})"),
        }),
        Err(CircleError::CoincidentCenters) => {
            Err(Error::DegenerateSignal { k, reason: "circle centers coincide".into() })
        }
    }
}

fn triple(meas: &impl Measurements, window: usize, k: usize, params: &StftParams) -> Result<[f64; 3]> {
    let m = params.m();
    Ok([
        meas.magnitude(MeasurementKey::new(window, k, m[0]))?,
        meas.magnitude(MeasurementKey::new(window, k, m[1]))?,
        meas.magnitude(MeasurementKey::new(window, k, m[2]))?,
    ])
}

/// Circle residual above which the partial estimate is polished before the
/// recursion continues.
const POLISH_TRIGGER: f64 = 1e-12;

/// Plan rows consumed so far and the parameters they determine, so the
/// partial estimate can be polished as the recursion proceeds.
struct Tracker {
    refiner: Refiner,
    rows: Vec<usize>,
    vars: Vec<(usize, bool)>,
}

impl Tracker {
    fn new(meas: &impl Measurements, ws: &WindowSet, cfg: &RecoveryConfig) -> Result<Self> {
        let plan = measurement_plan(ws.case(), ws.n(), ws.bandlimit(), ws.zero_run_start(), &cfg.params)?;
        Ok(Self { refiner: Refiner::new(meas, ws, &plan, &cfg.params)?, rows: Vec::new(), vars: Vec::new() })
    }

    fn add_row(&mut self, key: MeasurementKey) {
        if let Some(row) = self.refiner.row_of(key) {
            self.rows.push(row);
        }
    }
}

/// Run the recursion from `k0 = top` down to `k0 = stop+1`, filling
/// `ẑ_{top−1}, …, ẑ_stop` in `spectrum`. `ẑ_0` is treated as real when
/// `real_dc` is set.
#[allow(clippy::too_many_arguments)]
fn recurse(
    spectrum: &mut [Complex64],
    top: usize,
    stop: usize,
    meas: &impl Measurements,
    w: &Window,
    cfg: &RecoveryConfig,
    tracker: &mut Tracker,
    real_dc: bool,
    residuals: &mut Vec<f64>,
) -> Result<()> {
    let n = w.n();
    let s = w.band_start() as i64;
    for k0 in (stop + 1..=top).rev() {
        let k = k0 - 1;
        let kk = mod_index(k as i64 - s, n);
        let mags = triple(meas, 0, kk, &cfg.params)?;
        let (value, res) = recursion_step(k0, spectrum, mags, w, cfg)?;
        spectrum[k] = value;
        residuals.push(res);
        for m in cfg.params.m() {
            tracker.add_row(MeasurementKey::new(0, kk, m));
        }
        tracker.vars.push((k, false));
        if !(k == 0 && real_dc) {
            tracker.vars.push((k, true));
        }
        if res > POLISH_TRIGGER {
            tracker.refiner.polish(spectrum, &tracker.rows, &tracker.vars, cfg.refine_iterations);
        }
    }
    Ok(())
}

/// Polish the full estimate, then re-measure it on every plan entry and
/// compare with the data.
fn finish(estimate: Spectrum, tracker: &Tracker, meas: &impl Measurements, ws: &WindowSet, cfg: &RecoveryConfig) -> Result<Spectrum> {
    let mut z = estimate.into_vec();
    tracker.refiner.polish(&mut z, &tracker.refiner.all_rows(), &full_parameters(ws.n()), cfg.refine_iterations);
    let estimate = Spectrum::new(z)?;
    let plan = measurement_plan(ws.case(), ws.n(), ws.bandlimit(), ws.zero_run_start(), &cfg.params)?;
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for key in plan.entries() {
        let measured = meas.magnitude(*key)?;
        let w = ws.windows()[key.window].spectrum();
        let predicted = stft_magnitude_freq(&estimate, w, key.k, key.m, &cfg.params)?;
        worst = worst.max((measured - predicted).abs());
        scale = scale.max(measured);
    }
    if worst > cfg.residual_tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::ConsistencyFailure(format!(
            "estimate reproduces the measurements only to {:.3e} (relative)",
            worst / scale
        )));
    }
    Ok(estimate)
}

fn check_setup(ws: &WindowSet, case: Case, cfg: &RecoveryConfig) -> Result<()> {
    if cfg.params.n() != ws.n() {
        return Err(Error::LengthMismatch { expected: ws.n(), got: cfg.params.n() });
    }
    if !(cfg.degenerate_tol > 0.0 && cfg.step_tol > 0.0 && cfg.residual_tol > 0.0 && cfg.zero_tol > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    validate_for_case(ws, case, &cfg.params).into_result()
}

/// Case 1: one `B`-bandlimited window, `2 ≤ B ≤ ⌈N/2⌉`, `3⌊N/2⌋+1` magnitudes.
pub fn recover_case1(meas: &impl Measurements, w: &Window, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    let ws = WindowSet::single(w.clone());
    check_setup(&ws, Case::Case1, cfg)?;
    let n = w.n();
    let half = n / 2;
    let s = w.band_start() as i64;

    // |ŷ_{K−s,0}| = |ẑ_K ŵ_s| / N; ẑ_K is real for even N and its phase is
    // free for odd N, so take it positive either way.
    let anchor_key = MeasurementKey::new(0, mod_index(half as i64 - s, n), 0);
    let anchor = meas.magnitude(anchor_key)?;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    spectrum[half] = Complex64::new(n as f64 * anchor / w.coeff(s).norm(), 0.0);
    if spectrum[half].re == 0.0 {
        return Err(Error::DegenerateSignal { k: half, reason: "top spectral entry is zero".into() });
    }

    let mut tracker = Tracker::new(meas, &ws, cfg)?;
    tracker.add_row(anchor_key);
    tracker.vars.push((half, false));
    let mut residuals = Vec::with_capacity(half);
    recurse(&mut spectrum, half, 0, meas, w, cfg, &mut tracker, n.is_multiple_of(2), &mut residuals)?;

    let estimate = Spectrum::new(spectrum)?;
    let estimate = fix_dc_phase(estimate, n, cfg)?;
    let estimate = finish(estimate, &tracker, meas, &ws, cfg)?;
    Ok(RecoveryResult::new(estimate, residuals, Case::Case1, cfg.zero_tol))
}

/// Make `ẑ_0` real: rotate by its phase for odd `N`, drop the rounding residue
/// for even `N` (where `ẑ_0` comes out real up to rounding).
fn fix_dc_phase(mut estimate: Spectrum, n: usize, cfg: &RecoveryConfig) -> Result<Spectrum> {
    if n % 2 == 1 {
        let dc = estimate[0];
        if dc.norm() <= cfg.zero_tol * estimate.norm() {
            return Err(Error::DegenerateSignal { k: 0, reason: "zero DC entry leaves the phase undetermined".into() });
        }
        estimate = estimate.scale(dc.conj() / dc.norm());
    }
    estimate[0].im = 0.0;
    Ok(estimate)
}

/// The monomials `(|ẑ_K|², ẑ_K ẑ_0, conj(ẑ_K) ẑ_0, ẑ_0²)` from the four anchor
/// magnitudes of a Case-2 window set.
pub fn case2_monomials(meas: &impl Measurements, ws: &WindowSet) -> Result<[Complex64; 4]> {
    let n = ws.n();
    let a0 = build_a0(ws)?;
    if !(a0.condition() <= A0_CONDITION_LIMIT) {
        return Err(Error::SingularA0 { condition: a0.condition() });
    }
    let k = mod_index(1 - ws.zero_run_start() as i64, n);
    let mut rhs = [0.0; 4];
    for (s, r) in rhs.iter_mut().enumerate() {
        let y = meas.magnitude(MeasurementKey::new(s, k, 0))?;
        *r = (n as f64 * y).powi(2);
    }
    a0.solve(rhs).ok_or(Error::SingularA0 { condition: a0.condition() })
}

/// Case 2: four `(⌈N/2⌉+1)`-bandlimited windows, `3⌊N/2⌋+1` magnitudes.
pub fn recover_case2(meas: &impl Measurements, ws: &WindowSet, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    check_setup(ws, Case::Case2, cfg)?;
    let n = ws.n();
    let half = n / 2;
    let [m1, m2, m3, m4] = case2_monomials(meas, ws)?;

    let scale = [m1, m2, m3, m4].iter().map(|m| m.norm()).fold(0.0, f64::max);
    let tol = cfg.residual_tol * scale;
    if (m2 - m3.conj()).norm() > tol || m1.im.abs() > tol || m4.im.abs() > tol || m1.re < -tol || m4.re < -tol {
        return Err(Error::ConsistencyFailure("solved monomials lack the required symmetry".into()));
    }
    let cross = 0.5 * (m2 + m3.conj());
    if (cross.norm_sqr() - m1.re * m4.re).abs() > cfg.residual_tol * scale * scale {
        return Err(Error::ConsistencyFailure(format!(
            "|m2|^2 = {:.6e} but m1*m4 = {:.6e}",
            cross.norm_sqr(),
            m1.re * m4.re
        )));
    }
    let dc = m4.re.max(0.0).sqrt();
    if dc <= cfg.zero_tol * scale.sqrt() {
        return Err(Error::DegenerateSignal { k: 0, reason: "zero DC entry".into() });
    }
    let mut top = cross / dc;
    if n.is_multiple_of(2) {
        top.im = 0.0;
    }
    if top.norm() <= cfg.zero_tol * scale.sqrt() {
        return Err(Error::DegenerateSignal { k: half, reason: "top spectral entry is zero".into() });
    }

    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    spectrum[0] = Complex64::new(dc, 0.0);
    spectrum[half] = top;
    let mut tracker = Tracker::new(meas, ws, cfg)?;
    let anchor_k = mod_index(1 - ws.zero_run_start() as i64, n);
    for window in 0..4 {
        tracker.add_row(MeasurementKey::new(window, anchor_k, 0));
    }
    tracker.vars.extend(full_parameters(n).into_iter().filter(|&(q, _)| q == 0 || q == half));
    let mut residuals = Vec::with_capacity(half);
    recurse(&mut spectrum, half, 1, meas, ws.primary(), cfg, &mut tracker, true, &mut residuals)?;

    let estimate = Spectrum::new(spectrum)?;
    let estimate = finish(estimate, &tracker, meas, ws, cfg)?;
    Ok(RecoveryResult::new(estimate, residuals, Case::Case2, cfg.zero_tol))
}

/// The two candidate pairs `(ẑ_0, ẑ_{N/2})` consistent with the Case-3 anchor
/// magnitudes, one per relative sign of the two anchor measurements.
pub fn case3_candidates(meas: &impl Measurements, ws: &WindowSet) -> Result<[(f64, f64); 2]> {
    let n = ws.n();
    let h = n / 2;
    let w1 = ws.windows()[0].spectrum();
    let w2 = ws.windows()[1].spectrum();
    let c1 = n as f64 * meas.magnitude(MeasurementKey::new(0, h, 0))?;
    let c2 = n as f64 * meas.magnitude(MeasurementKey::new(1, h, 0))?;
    // N ŷ^(s) = ẑ_{N/2} ŵ^(s)_0 + ẑ_0 ŵ^(s)_{N/2}, all real
    let (a1, b1, a2, b2) = (w1[0].re, w1[h].re, w2[0].re, w2[h].re);
    let det = a1 * b2 - a2 * b1;
    Ok([1.0, -1.0].map(|sigma| {
        let top = (c1 * b2 - b1 * sigma * c2) / det;
        let dc = (a1 * sigma * c2 - a2 * c1) / det;
        (dc, top)
    }))
}

fn same_up_to_sign(a: &Spectrum, b: &Spectrum, tol: f64) -> bool {
    let (mut minus, mut plus) = (0.0, 0.0);
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        minus += (x - y).norm_sqr();
        plus += (x + y).norm_sqr();
    }
    minus.min(plus).sqrt() <= tol * a.norm().max(b.norm())
}

/// Case 3: two analytic windows, even `N`, `3N/2−1` magnitudes.
pub fn recover_case3(meas: &impl Measurements, ws: &WindowSet, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    check_setup(ws, Case::Case3, cfg)?;
    let n = ws.n();
    let h = n / 2;
    let candidates = case3_candidates(meas, ws)?;

    let attempt = |(dc, top): (f64, f64)| -> Result<(Spectrum, Vec<f64>)> {
        let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
        spectrum[0] = Complex64::new(dc, 0.0);
        spectrum[h] = Complex64::new(top, 0.0);
        let mut tracker = Tracker::new(meas, ws, cfg)?;
        tracker.add_row(MeasurementKey::new(0, h, 0));
        tracker.add_row(MeasurementKey::new(1, h, 0));
        tracker.vars.extend([(0, false), (h, false)]);
        let mut residuals = Vec::with_capacity(h);
        recurse(&mut spectrum, h, 1, meas, ws.primary(), cfg, &mut tracker, true, &mut residuals)?;
        let estimate = Spectrum::new(spectrum)?;
        let estimate = finish(estimate, &tracker, meas, ws, cfg)?;
        Ok((estimate, residuals))
    };
    let outcomes = candidates.map(attempt);
    let worst = |r: &Result<(Spectrum, Vec<f64>)>| match r {
        Ok((_, res)) => res.iter().copied().fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    let [first, second] = outcomes;
    let chosen = match (first, second) {
        (Ok(a), Err(_)) | (Err(_), Ok(a)) => a,
        (Ok(a), Ok(b)) if same_up_to_sign(&a.0, &b.0, cfg.residual_tol) => a,
        (Ok(a), Ok(b)) => {
            let residuals = [worst(&Ok(a.clone())), worst(&Ok(b.clone()))];
            match cfg.branch_policy {
                BranchPolicy::Strict => return Err(Error::AmbiguousBranch { residuals }),
                BranchPolicy::PreferSmallest => {
                    if residuals[0] <= residuals[1] {
                        a
                    } else {
                        b
                    }
                }
            }
        }
        (Err(e1), Err(e2)) => {
            return Err(match (e1, e2) {
                (e @ Error::DegenerateSignal { .. }, _) | (_, e @ Error::DegenerateSignal { .. }) => e,
                (e @ Error::MissingMeasurement { .. }, _) | (_, e @ Error::MissingMeasurement { .. }) => e,
                _ => Error::NoBranch,
            })
        }
    };
    let (estimate, residuals) = chosen;
    Ok(RecoveryResult::new(estimate, residuals, Case::Case3, cfg.zero_tol))
}

/// Dispatch on the window set's case.
pub fn recover(meas: &impl Measurements, ws: &WindowSet, cfg: &RecoveryConfig) -> Result<RecoveryResult> {
    match ws.case() {
        Case::Case1 => {
            if ws.len() != 1 {
                return Err(Error::InvalidWindow(format!("case1 needs 1 window, got {}", ws.len())));
            }
            recover_case1(meas, ws.primary(), cfg)
        }
        Case::Case2 => recover_case2(meas, ws, cfg),
        Case::Case3 => recover_case3(meas, ws, cfg),
    }
}
