//! Plain-text walkthrough of one small recovery: which products `ẑ_q ŵ_l`
//! enter each measurement, the measured magnitudes, and the coefficient
//! recovered at every step next to the true one.

use std::fmt::Write;

use num_complex::Complex64;

use crate::analytic::sample_generic;
use crate::dsp::{idft, mod_index, Spectrum};
use crate::error::{Error, Result};
use crate::recovery::{recover, RecoveryConfig};
use crate::stft::{measure, measurement_plan, MeasurementSet, StftParams};
use crate::windows::{make_case1_window, make_case2_windows, make_case3_windows, Case, WindowSet};

/// Largest `N` the walkthrough accepts; the layout gets unreadable beyond it.
pub const MAX_DEMO_N: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOptions {
    pub case: Case,
    pub n: usize,
    pub seed: u64,
    /// Case-1 bandlimit, `⌈N/2⌉` when absent.
    pub bandlimit: Option<usize>,
    /// Measure the zero signal instead of a random one.
    pub zero_signal: bool,
}

impl DemoOptions {
    pub fn new(case: Case, n: usize) -> Self {
        Self { case, n, seed: 0, bandlimit: None, zero_signal: false }
    }
}

/// Windows whose band starts at `ŵ_0`, so the layout lines up by column.
pub fn demo_windows(opts: &DemoOptions) -> Result<WindowSet> {
    let n = opts.n;
    match opts.case {
        Case::Case1 => {
            let b = opts.bandlimit.unwrap_or(n.div_ceil(2));
            Ok(WindowSet::single(make_case1_window(n, b, b % n, opts.seed)?))
        }
        Case::Case2 => make_case2_windows(n, (n.div_ceil(2) + 1) % n, opts.seed),
        Case::Case3 => make_case3_windows(n, opts.seed),
    }
}

/// Rows of the dependency triangle: for each recursion row the measurement
/// frequency and the `(q, l)` pairs of the nonzero products `ẑ_q ŵ_l`.
pub fn triangle_rows(ws: &WindowSet) -> Vec<(usize, Vec<(usize, usize)>)> {
    let n = ws.n();
    let half = n / 2;
    let w = ws.primary();
    let s = w.band_start() as i64;
    let bottom = if ws.case() == Case::Case1 { 0 } else { 1 };
    (bottom..=half)
        .rev()
        .map(|t| {
            let k = mod_index(t as i64 - s, n);
            let terms = (0..=half)
                .filter_map(|q| {
                    let l = mod_index(q as i64 - k as i64, n);
                    (mod_index(l as i64 - s, n) < w.bandlimit()).then_some((q, l))
                })
                .collect();
            (k, terms)
        })
        .collect()
}

/// The triangle with one column per `ẑ` index.
pub fn render_triangle(ws: &WindowSet) -> String {
    let half = ws.n() / 2;
    let rows = triangle_rows(ws);
    let width = rows
        .iter()
        .flat_map(|(_, t)| t.iter().map(|(q, l)| format!("z{q}w{l}").len()))
        .max()
        .unwrap_or(4);
    let mut out = String::new();
    for (row, (k, terms)) in rows.iter().enumerate() {
        let mut line = format!("n={:<2} k={:<2} |", row + 1, k);
        for q in 0..=half {
            let cell = terms.iter().find(|(tq, _)| *tq == q).map(|(q, l)| format!("z{q}w{l}")).unwrap_or_default();
            let _ = write!(line, " {cell:>width$}");
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn fmt_magnitude(y: f64) -> String {
    if y == 0.0 {
        "0".into()
    } else {
        format!("{y:.6e}")
    }
}

fn fmt_complex(c: Complex64) -> String {
    format!("{:+.9e} {:+.9e}i", c.re, c.im)
}

pub fn render_measurements(set: &MeasurementSet) -> String {
    let mut out = String::new();
    for (key, y) in set.iter() {
        let _ = writeln!(out, "  window {} k={:<2} m={:<2} |y| = {}", key.window, key.k, key.m, fmt_magnitude(y));
    }
    out
}

/// Recovered versus true coefficients in recursion order, with the true
/// spectrum sign-aligned to the estimate.
pub fn render_steps(recovered: &Spectrum, truth: &Spectrum, residuals: &[f64], case: Case) -> String {
    let half = truth.n() / 2;
    let plus: f64 = (0..truth.n()).map(|q| (recovered[q] - truth[q]).norm_sqr()).sum();
    let minus: f64 = (0..truth.n()).map(|q| (recovered[q] + truth[q]).norm_sqr()).sum();
    let sign = if minus < plus { -1.0 } else { 1.0 };
    let mut order: Vec<(usize, &str, Option<f64>)> = Vec::new();
    match case {
        Case::Case1 => order.push((half, "anchor", None)),
        Case::Case2 | Case::Case3 => {
            order.push((0, "anchor", None));
            order.push((half, "anchor", None));
        }
    }
    let bottom = if case == Case::Case1 { 0 } else { 1 };
    for (step, k) in (bottom..half).rev().enumerate() {
        order.push((k, "circle", residuals.get(step).copied()));
    }
    let mut out = String::new();
    for (k, how, res) in order {
        let _ = write!(
            out,
            "  z^{k:<2} {how:<6} recovered {}  true {}",
            fmt_complex(recovered[k]),
            fmt_complex(truth[k] * sign)
        );
        if let Some(r) = res {
            let _ = write!(out, "  residual {r:.2e}");
        }
        out.push('\n');
    }
    out
}

/// Full walkthrough text.
pub fn render_demo(opts: &DemoOptions) -> Result<String> {
    let n = opts.n;
    if n > MAX_DEMO_N {
        return Err(Error::InvalidParameter(format!("demo needs N <= {MAX_DEMO_N}, got {n}")));
    }
    let params = StftParams::default_for(n)?;
    let ws = demo_windows(opts)?;
    let plan = measurement_plan(opts.case, n, ws.bandlimit(), ws.zero_run_start(), &params)?;
    let truth = if opts.zero_signal { Spectrum::zeros(n) } else { sample_generic(n, opts.seed)?.spectrum().clone() };
    let z = idft(&truth);
    let meas = measure(&z, &ws, &plan, &params)?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} N={n} B={} i={} L={} m={:?} windows={} measurements={}",
        opts.case,
        ws.bandlimit(),
        ws.zero_run_start(),
        params.separation(),
        params.m(),
        ws.len(),
        plan.len()
    );
    out.push_str("\nproducts z_q w_l entering |y_(k,0)| (window 0):\n");
    out.push_str(&render_triangle(&ws));
    out.push_str("\nmeasurements:\n");
    out.push_str(&render_measurements(&meas));
    out.push_str("\nrecovery:\n");
    match recover(&meas, &ws, &RecoveryConfig::new(params)) {
        Ok(r) => out.push_str(&render_steps(&r.spectrum, &truth, &r.step_residuals, opts.case)),
        Err(e) => {
            let _ = writeln!(out, "  no estimate: {e}");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case1_n6_layout() {
        let ws = demo_windows(&DemoOptions::new(Case::Case1, 6)).unwrap();
        let rows = triangle_rows(&ws);
        let terms: Vec<Vec<(usize, usize)>> = rows.into_iter().map(|(_, t)| t).collect();
        assert_eq!(
            terms,
            vec![
                vec![(3, 0)],
                vec![(2, 0), (3, 1)],
                vec![(1, 0), (2, 1), (3, 2)],
                vec![(0, 0), (1, 1), (2, 2)],
            ]
        );
    }

    #[test]
    fn case2_n6_layout() {
        let ws = demo_windows(&DemoOptions::new(Case::Case2, 6)).unwrap();
        assert_eq!(ws.zero_run_start(), 4);
        let rows = triangle_rows(&ws);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0], (3, vec![(0, 3), (3, 0)]));
        assert_eq!(rows[1].1, vec![(2, 0), (3, 1)]);
        assert_eq!(rows[2].1, vec![(1, 0), (2, 1), (3, 2)]);
    }

    #[test]
    fn zero_signal_magnitudes_are_zero() {
        let mut opts = DemoOptions::new(Case::Case1, 6);
        opts.zero_signal = true;
        let text = render_demo(&opts).unwrap();
        let lines: Vec<&str> = text.lines().filter(|l| l.contains("|y| =")).collect();
        assert_eq!(lines.len(), 10);
        assert!(lines.iter().all(|l| l.ends_with("|y| = 0")));
    }

    #[test]
    fn oversized_n_rejected() {
        assert!(render_demo(&DemoOptions::new(Case::Case1, 17)).is_err());
    }
}
