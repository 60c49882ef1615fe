//! STFT windows designed in the Fourier domain for each recovery case.
//!
//! A window is `B`-bandlimited when its DFT has `N−B` consecutive zeros
//! (indices mod `N`) starting at `i`; the band then runs from
//! `s = i+N−B` to `i−1`. The spectrum is the source of truth and the
//! time-domain vector is derived from it.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::analytic::spectrum_is_analytic;
use crate::dsp::{idft, mod_index, Signal, Spectrum};
use crate::error::{Error, Result};
use crate::stft::{validate_m_triple, StftParams};

/// Relative threshold below which a window entry counts as zero.
pub const ZERO_TOL: f64 = 1e-10;

/// Margin enforced by the constructors on every entry the algorithms divide
/// by or otherwise require to be nonzero, relative to `‖ŵ‖∞`.
pub const DESIGN_MARGIN: f64 = 0.1;

/// Largest A₀ condition number accepted by validation.
pub const A0_CONDITION_LIMIT: f64 = 1e12;

const MAX_ATTEMPTS: usize = 10_000;

/// Which recovery algorithm a window (set) is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    /// One `B`-bandlimited window, `2 ≤ B ≤ ⌈N/2⌉`.
    Case1,
    /// Four `(⌈N/2⌉+1)`-bandlimited windows.
    Case2,
    /// Two analytic windows, `N` even.
    Case3,
}

impl Case {
    pub const ALL: [Case; 3] = [Case::Case1, Case::Case2, Case::Case3];

    pub fn window_count(self) -> usize {
        match self {
            Case::Case1 => 1,
            Case::Case2 => 4,
            Case::Case3 => 2,
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::Case1 => "case1",
            Case::Case2 => "case2",
            Case::Case3 => "case3",
        })
    }
}

impl FromStr for Case {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "case1" => Ok(Case::Case1),
            "2" | "case2" => Ok(Case::Case2),
            "3" | "case3" => Ok(Case::Case3),
            other => Err(Error::InvalidParameter(format!("unknown case {other:?}"))),
        }
    }
}

/// Length of the maximal circular zero run and where it starts, returned as
/// `(B, i)` with `B = N − run`. Ties go to the smallest start.
pub fn bandlimit_profile(w: &Spectrum, tol: f64) -> Result<(usize, usize)> {
    let n = w.n();
    let cutoff = tol * w.sup_norm();
    let zero: Vec<bool> = w.as_slice().iter().map(|c| c.norm() <= cutoff).collect();
    if zero.iter().all(|&z| z) || w.sup_norm() == 0.0 {
        return Err(Error::AllZero);
    }
    let mut best = (0usize, 0usize);
    for start in 0..n {
        // only count runs from their true beginning
        if !zero[start] || zero[(start + n - 1) % n] {
            continue;
        }
        let len = (0..n).take_while(|&t| zero[(start + t) % n]).count();
        if len > best.0 {
            best = (len, start);
        }
    }
    if best.0 == 0 {
        return Ok((n, 0));
    }
    Ok((n - best.0, best.1))
}

/// A Fourier-designed window with its bandlimit metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    spectrum: Spectrum,
    time: Signal,
    bandlimit: usize,
    zero_run_start: usize,
    case: Case,
}

impl Window {
    /// Build a window whose `(B, i)` is read off the spectrum.
    pub fn from_spectrum(spectrum: Spectrum, case: Case) -> Result<Self> {
        let (b, i) = bandlimit_profile(&spectrum, ZERO_TOL)?;
        Self::with_profile(spectrum, b, i, case)
    }

    /// Build a window with a declared `(B, i)`. Checks that `ŵ_i … ŵ_{i+N−B−1}`
    /// vanish and `ŵ_{i+N−B} ≠ 0`; the declared run need not be maximal.
    pub fn with_profile(spectrum: Spectrum, bandlimit: usize, zero_run_start: usize, case: Case) -> Result<Self> {
        let n = spectrum.n();
        if bandlimit == 0 || bandlimit > n || zero_run_start >= n {
            return Err(Error::InvalidWindow(format!(
                "profile (B={bandlimit}, i={zero_run_start}) out of range for N={n}"
            )));
        }
        let sup = spectrum.sup_norm();
        if sup == 0.0 {
            return Err(Error::AllZero);
        }
        let cutoff = ZERO_TOL * sup;
        for t in 0..n - bandlimit {
            let j = (zero_run_start + t) % n;
            if spectrum[j].norm() > cutoff {
                return Err(Error::InvalidWindow(format!("entry {j} lies in the zero run but is nonzero")));
            }
        }
        let s = (zero_run_start + n - bandlimit) % n;
        if spectrum[s].norm() <= cutoff {
            return Err(Error::InvalidWindow(format!("band start entry {s} is zero")));
        }
        let time = idft(&spectrum);
        Ok(Self { spectrum, time, bandlimit, zero_run_start, case })
    }

    pub fn n(&self) -> usize {
        self.spectrum.n()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Time-domain samples `w_n`.
    pub fn time(&self) -> &Signal {
        &self.time
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    pub fn zero_run_start(&self) -> usize {
        self.zero_run_start
    }

    /// First band index `s = i+N−B (mod N)`.
    pub fn band_start(&self) -> usize {
        (self.zero_run_start + self.n() - self.bandlimit) % self.n()
    }

    pub fn case(&self) -> Case {
        self.case
    }

    /// `ŵ_j` with `j` reduced mod `N`.
    pub fn coeff(&self, j: i64) -> Complex64 {
        self.spectrum.at(j)
    }
}

/// The ordered windows one recovery case consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    windows: Vec<Window>,
    case: Case,
}

impl WindowSet {
    /// Group windows, checking the count, shared length and shared `(B, i)`.
    /// Recovery preconditions are checked by [`validate_for_case`].
    pub fn new(windows: Vec<Window>, case: Case) -> Result<Self> {
        if windows.len() != case.window_count() {
            return Err(Error::InvalidWindow(format!(
                "{case} needs {} windows, got {}",
                case.window_count(),
                windows.len()
            )));
        }
        let first = &windows[0];
        for w in &windows[1..] {
            if w.n() != first.n() {
                return Err(Error::LengthMismatch { expected: first.n(), got: w.n() });
            }
            if (w.bandlimit(), w.zero_run_start()) != (first.bandlimit(), first.zero_run_start()) {
                return Err(Error::InvalidWindow("windows must share (B, i)".into()));
            }
        }
        Ok(Self { windows, case })
    }

    pub fn single(w: Window) -> Self {
        let case = w.case();
        Self { windows: vec![w], case }
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn case(&self) -> Case {
        self.case
    }

    pub fn n(&self) -> usize {
        self.windows[0].n()
    }

    pub fn bandlimit(&self) -> usize {
        self.windows[0].bandlimit()
    }

    pub fn zero_run_start(&self) -> usize {
        self.windows[0].zero_run_start()
    }

    pub fn primary(&self) -> &Window {
        &self.windows[0]
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn real_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), 0.0)
}

/// Random band entries on `s, …, s+B−1`, zero elsewhere, scaled to `‖ŵ‖∞ = 1`.
fn random_band(rng: &mut ChaCha8Rng, n: usize, s: usize, b: usize) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for t in 0..b {
        coeffs[(s + t) % n] = complex_normal(rng);
    }
    normalize(&mut coeffs);
    coeffs
}

fn normalize(coeffs: &mut [Complex64]) {
    let sup = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if sup > 0.0 {
        coeffs.iter_mut().for_each(|c| *c /= sup);
    }
}

/// Random `B`-bandlimited window with zero run `i … i+N−B−1` whose first two
/// band entries have modulus at least [`DESIGN_MARGIN`].
pub fn make_case1_window(n: usize, bandlimit: usize, zero_run_start: usize, seed: u64) -> Result<Window> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("case 1 needs N >= 3, got {n}")));
    }
    if bandlimit < 2 || bandlimit > n.div_ceil(2) {
        return Err(Error::InvalidParameter(format!(
            "case 1 needs 2 <= B <= ceil(N/2) = {}, got B={bandlimit}",
            n.div_ceil(2)
        )));
    }
    if zero_run_start >= n {
        return Err(Error::InvalidParameter(format!("i must lie in [0, {n}), got {zero_run_start}")));
    }
    let s = (zero_run_start + n - bandlimit) % n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let coeffs = random_band(&mut rng, n, s, bandlimit);
        let key_ok = coeffs[s].norm() >= DESIGN_MARGIN && coeffs[(s + 1) % n].norm() >= DESIGN_MARGIN;
        // keep every band entry well clear of the zero threshold so the
        // profile round-trips
        let band_ok = (0..bandlimit).all(|t| coeffs[(s + t) % n].norm() >= 1e-3);
        if key_ok && band_ok {
            return Window::with_profile(Spectrum::new(coeffs)?, bandlimit, zero_run_start, Case::Case1);
        }
    }
    Err(Error::ConstructionFailed { attempts: MAX_ATTEMPTS })
}

/// The two A₀ key indices `(i+⌊N/2⌋−1, i−1)` mod `N` for a Case-2 zero run at `i`.
pub fn case2_key_indices(n: usize, zero_run_start: usize) -> (usize, usize) {
    let i = zero_run_start as i64;
    (mod_index(i + (n / 2) as i64 - 1, n), mod_index(i - 1, n))
}

fn case2_side_conditions(alpha: Complex64, beta: Complex64) -> bool {
    let (ma, mb) = (alpha.norm(), beta.norm());
    ma >= DESIGN_MARGIN
        && mb >= DESIGN_MARGIN
        && (ma - mb).abs() >= DESIGN_MARGIN * ma.max(mb)
        && (alpha * beta.conj()).im.abs() >= DESIGN_MARGIN * ma * mb
}

/// Four `(⌈N/2⌉+1)`-bandlimited windows where window `s` carries the `s`-th
/// powers of window 1's two key entries. The other in-band entries of windows
/// 2–4 are random; no planned measurement reads them.
pub fn make_case2_windows(n: usize, zero_run_start: usize, seed: u64) -> Result<WindowSet> {
    if n < 4 {
        return Err(Error::InvalidParameter(format!("case 2 needs N >= 4, got {n}")));
    }
    if zero_run_start >= n {
        return Err(Error::InvalidParameter(format!("i must lie in [0, {n}), got {zero_run_start}")));
    }
    let b = n.div_ceil(2) + 1;
    let s = (zero_run_start + n - b) % n;
    let (ka, kb) = case2_key_indices(n, zero_run_start);
    debug_assert_eq!(ka, s);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let first = random_band(&mut rng, n, s, b);
        let (alpha, beta) = (first[ka], first[kb]);
        if !case2_side_conditions(alpha, beta)
            || first[(s + 1) % n].norm() < DESIGN_MARGIN
            || (0..b).any(|t| first[(s + t) % n].norm() < 1e-3)
        {
            continue;
        }
        let mut spectra = vec![first];
        for power in 2..=4 {
            let mut coeffs = random_band(&mut rng, n, s, b);
            coeffs[ka] = alpha.powi(power);
            coeffs[kb] = beta.powi(power);
            spectra.push(coeffs);
        }
        let windows = spectra
            .into_iter()
            .map(|c| Window::with_profile(Spectrum::new(c)?, b, zero_run_start, Case::Case2))
            .collect::<Result<Vec<_>>>()?;
        let set = WindowSet::new(windows, Case::Case2)?;
        if build_a0(&set)?.condition() <= 1e8 {
            return Ok(set);
        }
    }
    Err(Error::ConstructionFailed { attempts: MAX_ATTEMPTS })
}

/// Two analytic windows meeting the Case-3 hypotheses with margin.
pub fn make_case3_windows(n: usize, seed: u64) -> Result<WindowSet> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("even N required for case 3, got N={n}")));
    }
    if n < 4 {
        return Err(Error::InvalidParameter(format!("case 3 needs N >= 4, got {n}")));
    }
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        coeffs[0] = real_normal(rng);
        for c in coeffs.iter_mut().take(half).skip(1) {
            *c = complex_normal(rng);
        }
        coeffs[half] = real_normal(rng);
        normalize(&mut coeffs);
        coeffs
    };
    for _ in 0..MAX_ATTEMPTS {
        let w1 = draw(&mut rng);
        let w2 = draw(&mut rng);
        let det = w1[0] * w2[half] - w2[0] * w1[half];
        let ok = w1[0].norm() >= DESIGN_MARGIN
            && w1[1].norm() >= DESIGN_MARGIN
            && w1[half].norm() >= DESIGN_MARGIN
            && w2[half].norm() >= DESIGN_MARGIN
            && det.norm() >= DESIGN_MARGIN
            && w1.iter().take(half + 1).all(|c| c.norm() >= 1e-3)
            && w2.iter().take(half + 1).all(|c| c.norm() >= 1e-3);
        if ok {
            let windows = [w1, w2]
                .into_iter()
                .map(|c| Window::with_profile(Spectrum::new(c)?, half + 1, half + 1, Case::Case3))
                .collect::<Result<Vec<_>>>()?;
            return WindowSet::new(windows, Case::Case3);
        }
    }
    Err(Error::ConstructionFailed { attempts: MAX_ATTEMPTS })
}

/// The 4×4 system matrix linking the Case-2 anchor magnitudes to the
/// quadratic monomials `(|ẑ_K|², ẑ_K ẑ_0, conj(ẑ_K) ẑ_0, ẑ_0²)`, `K = ⌊N/2⌋`.
#[derive(Debug, Clone, PartialEq)]
pub struct A0Matrix {
    entries: Matrix4<Complex64>,
    condition: f64,
}

impl A0Matrix {
    pub fn from_rows(rows: [[Complex64; 4]; 4]) -> Self {
        let entries = Matrix4::from_fn(|r, c| rows[r][c]);
        let sv = entries.singular_values();
        let (max, min) = (sv.max(), sv.min());
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        Self { entries, condition }
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn rows(&self) -> [[Complex64; 4]; 4] {
        std::array::from_fn(|r| std::array::from_fn(|c| self.entries[(r, c)]))
    }

    /// 2-norm condition number; infinite when singular.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn determinant(&self) -> Complex64 {
        self.entries.determinant()
    }

    pub fn solve(&self, rhs: [f64; 4]) -> Option<[Complex64; 4]> {
        let b = Vector4::from_fn(|r, _| Complex64::new(rhs[r], 0.0));
        let x = self.entries.lu().solve(&b)?;
        Some([x[0], x[1], x[2], x[3]])
    }
}

/// Row `s` is `(|ŵ_a|², ŵ_a·conj ŵ_b, ŵ_b·conj ŵ_a, |ŵ_b|²)` for window `s`,
/// with `(a, b)` from [`case2_key_indices`].
pub fn build_a0(ws: &WindowSet) -> Result<A0Matrix> {
    if ws.len() != 4 {
        return Err(Error::InvalidWindow(format!("A0 needs 4 windows, got {}", ws.len())));
    }
    let (ka, kb) = case2_key_indices(ws.n(), ws.zero_run_start());
    let rows = std::array::from_fn(|r| {
        let w = ws.windows()[r].spectrum();
        let (a, b) = (w[ka], w[kb]);
        [Complex64::new(a.norm_sqr(), 0.0), a * b.conj(), b * a.conj(), Complex64::new(b.norm_sqr(), 0.0)]
    });
    Ok(A0Matrix::from_rows(rows))
}

/// One named hypothesis and whether it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// Result of checking a window set against one case's hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub case: Case,
    pub checks: Vec<Check>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// `Ok(())` when every check passes, else `InvalidWindow` naming the failures.
    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            return Ok(());
        }
        let msg = self
            .failures()
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::InvalidWindow(msg))
    }
}

impl fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "[{}] {}: {}", if c.pass { "ok" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

struct Checker {
    checks: Vec<Check>,
}

impl Checker {
    fn push(&mut self, name: &'static str, pass: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check { name, pass, detail: detail.into() });
        pass
    }

    fn nonzero(&mut self, name: &'static str, value: Complex64, scale: f64, label: &str) -> bool {
        let pass = value.norm() > ZERO_TOL * scale;
        self.push(name, pass, format!("|{label}| = {:.3e}", value.norm()))
    }
}

/// Check the hypotheses of one recovery case. Never fails; violations are
/// reported as failed checks.
pub fn validate_for_case(ws: &WindowSet, case: Case, params: &StftParams) -> Diagnostics {
    let mut ck = Checker { checks: Vec::new() };
    let n = ws.n();
    let m = params.m();
    let m_check = validate_m_triple(params.n(), params.separation(), m);
    ck.push(
        "signal length",
        params.n() == n,
        format!("windows have N={n}, parameters N={}", params.n()),
    );
    ck.push(
        "modulation triple",
        m_check.pass,
        format!("m={m:?}, L={}, Im ratio {:?}", params.separation(), m_check.im_ratio),
    );
    let count_ok = ck.push(
        "window count",
        ws.len() == case.window_count(),
        format!("{} windows, {case} needs {}", ws.len(), case.window_count()),
    );
    if !count_ok {
        return Diagnostics { case, checks: ck.checks };
    }
    let (b, i) = (ws.bandlimit(), ws.zero_run_start());
    let w1 = ws.primary();
    let scale = w1.spectrum().sup_norm();
    match case {
        Case::Case1 => {
            ck.push("bandlimit range", (2..=n.div_ceil(2)).contains(&b), format!("B={b}, need 2..={}", n.div_ceil(2)));
            let s = w1.band_start() as i64;
            ck.nonzero("band start nonzero", w1.coeff(s), scale, "ŵ_{i+N-B}");
            let pass = w1.coeff(s + 1).norm() > ZERO_TOL * scale;
            ck.push(
                "underdetermined recursion",
                pass,
                format!("|ŵ_{{i+N-B+1}}| = {:.3e} must be nonzero", w1.coeff(s + 1).norm()),
            );
        }
        Case::Case2 => {
            ck.push("bandlimit", b == n.div_ceil(2) + 1, format!("B={b}, need ceil(N/2)+1={}", n.div_ceil(2) + 1));
            let (ka, _) = case2_key_indices(n, i);
            ck.nonzero("band start nonzero", w1.coeff(ka as i64), scale, "ŵ1_{i+N/2-1}");
            ck.nonzero("recursion entry nonzero", w1.coeff(ka as i64 + 1), scale, "ŵ1_{i+N/2}");
            match build_a0(ws) {
                Ok(a0) => {
                    ck.push(
                        "A0 invertible",
                        a0.condition() <= A0_CONDITION_LIMIT,
                        format!("condition number {:.3e}", a0.condition()),
                    );
                }
                Err(e) => {
                    ck.push("A0 invertible", false, e.to_string());
                }
            }
        }
        Case::Case3 => {
            ck.push("even length", n.is_multiple_of(2), format!("N={n}"));
            let analytic = ws.windows().iter().all(|w| spectrum_is_analytic(w.spectrum(), ZERO_TOL));
            ck.push("analytic windows", analytic, "both windows must be analytic");
            if n.is_multiple_of(2) {
                let w2 = &ws.windows()[1];
                let h = (n / 2) as i64;
                let s2 = w2.spectrum().sup_norm();
                ck.nonzero("w1_0 w1_1 nonzero", w1.coeff(0) * w1.coeff(1), scale * scale, "ŵ1_0 ŵ1_1");
                ck.nonzero("w1_N/2 w2_N/2 nonzero", w1.coeff(h) * w2.coeff(h), scale * s2, "ŵ1_N/2 ŵ2_N/2");
                let det = w1.coeff(0) * w2.coeff(h) - w2.coeff(0) * w1.coeff(h);
                ck.nonzero("anchor determinant nonzero", det, scale * s2, "ŵ1_0 ŵ2_N/2 - ŵ2_0 ŵ1_N/2");
            }
        }
    }
    Diagnostics { case, checks: ck.checks }
}
