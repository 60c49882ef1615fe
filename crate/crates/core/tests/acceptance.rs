//! Acceptance run: nine criteria, one PASS/FAIL line each. Exits nonzero if
//! any criterion fails.

use std::cell::RefCell;
use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use analytic_pr::analytic::{
    analytic_from_real, hilbert, hilbert_matrix, instantaneous_frequency, is_analytic, sample_generic,
};
use analytic_pr::circle::{solve_three_circles, CircleError, CircleSystem, CircleTolerance};
use analytic_pr::dsp::{dft, mod_index, Signal, Spectrum};
use analytic_pr::error::{Error, Result};
use analytic_pr::recovery::{canonicalize, recover, up_to_sign_error, RecoveryConfig};
use analytic_pr::stft::{
    measure, measurement_plan, modulation_count, stft_magnitude, stft_magnitude_freq, validate_m_triple,
    MeasurementKey, MeasurementSet, Measurements, StftParams,
};
use analytic_pr::windows::{
    make_case1_window, make_case2_windows, make_case3_windows, validate_for_case, Case, Window, WindowSet,
};

const SIZES: [usize; 6] = [6, 7, 8, 13, 16, 32];

struct Outcome {
    pass: bool,
    detail: String,
}

type Criterion = fn() -> Outcome;

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn gaussian_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn sizes_for(case: Case) -> Vec<usize> {
    SIZES.iter().copied().filter(|n| case != Case::Case3 || n % 2 == 0).collect()
}

/// Fresh valid windows for one trial; `i` and (Case 1) `B` vary with the seed.
fn fresh_windows(case: Case, n: usize, seed: u64) -> Result<WindowSet> {
    let i = (seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 32) as usize % n;
    match case {
        Case::Case1 => {
            let b = 2 + (seed as usize / n) % (n.div_ceil(2) - 1);
            Ok(WindowSet::single(make_case1_window(n, b, i, seed)?))
        }
        Case::Case2 => make_case2_windows(n, i, seed),
        Case::Case3 => make_case3_windows(n, seed),
    }
}

fn setup(case: Case, n: usize, seed: u64) -> Result<(WindowSet, StftParams, MeasurementSet, Signal)> {
    let params = StftParams::default_for(n)?;
    let ws = fresh_windows(case, n, seed)?;
    validate_for_case(&ws, case, &params).into_result()?;
    let plan = measurement_plan(case, n, ws.bandlimit(), ws.zero_run_start(), &params)?;
    let z = sample_generic(n, seed.wrapping_add(1_000_003))?;
    let meas = measure(z.signal(), &ws, &plan, &params)?;
    Ok((ws, params, meas, z.signal().clone()))
}

/// Records every key the recovery reads.
struct Counting<'a> {
    inner: &'a MeasurementSet,
    seen: RefCell<Vec<MeasurementKey>>,
}

impl Measurements for Counting<'_> {
    fn magnitude(&self, key: MeasurementKey) -> Result<f64> {
        self.seen.borrow_mut().push(key);
        self.inner.magnitude(key)
    }
}

fn criterion1() -> Outcome {
    let mut bad = Vec::new();
    for n in 4..=64 {
        let params = StftParams::default_for(n).unwrap();
        let expected = [3 * (n / 2) + 1, 3 * (n / 2) + 1, 3 * n / 2 - 1];
        for (case, want) in Case::ALL.into_iter().zip(expected) {
            if case == Case::Case3 && n % 2 == 1 {
                continue;
            }
            let b = match case {
                Case::Case1 => n.div_ceil(2),
                Case::Case2 => n.div_ceil(2) + 1,
                Case::Case3 => n / 2 + 1,
            };
            let plan = measurement_plan(case, n, b, 1, &params).unwrap();
            let distinct: HashSet<_> = plan.entries().iter().collect();
            if plan.len() != want || distinct.len() != want {
                bad.push(format!("{case} N={n}: {} (want {want})", plan.len()));
            }
        }
    }
    // Recovery reads nothing outside the plan.
    for case in Case::ALL {
        for n in sizes_for(case) {
            let (ws, params, meas, _) = setup(case, n, 5).unwrap();
            let counting = Counting { inner: &meas, seen: RefCell::new(Vec::new()) };
            recover(&counting, &ws, &RecoveryConfig::new(params)).unwrap();
            let read: HashSet<_> = counting.seen.borrow().iter().copied().collect();
            let plan: HashSet<_> = meas.plan().entries().iter().copied().collect();
            if !read.is_subset(&plan) || read.len() != plan.len() {
                bad.push(format!("{case} N={n}: read {} distinct keys of {}", read.len(), plan.len()));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "plan sizes exact for N=4..64".into() } else { bad.join("; ") })
}

fn criterion2() -> Outcome {
    let trials = 500u64;
    let mut lines = Vec::new();
    let mut pass = true;
    for case in Case::ALL {
        for n in sizes_for(case) {
            let results: Vec<std::result::Result<f64, Error>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let seed = 10_000 * n as u64 + t;
                    let (ws, params, meas, z) = setup(case, n, seed)?;
                    let r = recover(&meas, &ws, &RecoveryConfig::new(params))?;
                    up_to_sign_error(&r.signal, &z)
                })
                .collect();
            let ok = results.iter().filter(|r| matches!(r, Ok(e) if *e <= 1e-8)).count();
            let silent = results.iter().filter(|r| matches!(r, Ok(e) if *e >= 1e-6)).count();
            let worst = results.iter().filter_map(|r| r.as_ref().ok()).fold(0.0f64, |a, b| a.max(*b));
            let errors: Vec<&str> = results.iter().filter_map(|r| r.as_ref().err().map(Error::kind)).collect();
            if (ok as f64) < 0.99 * trials as f64 || silent > 0 {
                pass = false;
            }
            let named = if errors.is_empty() { String::new() } else { format!(" errors {errors:?}") };
            lines.push(format!("{case}/N={n} {ok}/{trials} max {worst:.1e}{named}"));
        }
    }
    outcome(pass, lines.join(", "))
}

fn criterion3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let tol = CircleTolerance::default();
    let (mut planted, mut worst, mut bad) = (0, 0.0f64, 0);
    while planted < 10_000 {
        let z = gaussian_c(&mut rng);
        let centers = [gaussian_c(&mut rng), gaussian_c(&mut rng), gaussian_c(&mut rng)];
        let sys = CircleSystem::planted(z, centers);
        match sys.im_ratio() {
            Ok(r) if r.abs() >= 1e-3 => {}
            _ => continue,
        }
        planted += 1;
        match solve_three_circles(&sys, &tol) {
            Ok(found) => {
                let rel = (found - z).norm() / z.norm();
                worst = worst.max(rel);
                if rel > 1e-10 {
                    bad += 1;
                }
            }
            Err(_) => bad += 1,
        }
    }
    let mut rejected = 0;
    for _ in 0..1000 {
        let v1 = gaussian_c(&mut rng);
        let d = gaussian_c(&mut rng);
        let (t2, t3): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
        let sys = CircleSystem::planted(gaussian_c(&mut rng), [v1, v1 + d * t2, v1 + d * t3]);
        if matches!(solve_three_circles(&sys, &tol), Err(CircleError::DegenerateGeometry { .. })) {
            rejected += 1;
        }
    }
    outcome(
        bad == 0 && rejected == 1000,
        format!("planted: {bad} failures, worst rel {worst:.1e}; collinear rejected {rejected}/1000"),
    )
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst, mut bad) = (0.0f64, 0);
    for _ in 0..1000 {
        let n = rng.random_range(3..=48usize);
        let max_l = (1..n).filter(|&l| modulation_count(n, l) >= 3).max().unwrap();
        let l = rng.random_range(1..=max_l);
        let params = StftParams::new(n, l, [0, 1, 2]).unwrap();
        let z = Signal::new((0..n).map(|_| gaussian_c(&mut rng)).collect()).unwrap();
        let w = Signal::new((0..n).map(|_| gaussian_c(&mut rng)).collect()).unwrap();
        let k = rng.random_range(0..n);
        let m = rng.random_range(0..modulation_count(n, l));
        let a = stft_magnitude(&z, &w, k, m, &params).unwrap();
        let b = stft_magnitude_freq(&dft(&z), &dft(&w), k, m, &params).unwrap();
        let rel = (a - b).abs() / a.max(b);
        worst = worst.max(rel);
        if rel.is_nan() || rel > 1e-10 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("1000 tuples, worst rel {worst:.1e}"))
}

fn criterion5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let matrices: Vec<_> = (0..=32).map(|n| (n >= 2).then(|| hilbert_matrix(n).unwrap())).collect();
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for parity in [0usize, 1] {
        for _ in 0..1000 {
            let n = 2 * rng.random_range(1..=16usize) + parity;
            let n = if n > 32 { n - 2 } else { n };
            let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let z = analytic_from_real(&x).unwrap();
            if !is_analytic(z.signal(), 1e-10) {
                bad.push(format!("not analytic N={n}"));
            }
            let re_err = z.signal().re().iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let hx = hilbert(&x).unwrap();
            let he = matrices[n].as_ref().unwrap().apply(&x).unwrap();
            let h_err = hx.iter().zip(&he).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(re_err).max(h_err);
            if re_err > 1e-10 || h_err > 1e-10 {
                bad.push(format!("N={n}: Re err {re_err:.1e}, H err {h_err:.1e}"));
            }
        }
    }
    outcome(bad.is_empty(), format!("2000 samples, worst {worst:.1e} {}", bad.join("; ")))
}

fn criterion6() -> Outcome {
    let (mut count, mut min_abs, mut bad) = (0usize, f64::INFINITY, 0usize);
    for n in 3..=32 {
        for l in 1..n {
            let mc = modulation_count(n, l);
            if mc < 3 {
                continue;
            }
            for a in 0..mc {
                for b in 0..mc {
                    for c in 0..mc {
                        if a == b || a == c || b == c {
                            continue;
                        }
                        count += 1;
                        match validate_m_triple(n, l, [a, b, c]).im_ratio {
                            Some(r) if r.abs() > 1e-6 => min_abs = min_abs.min(r.abs()),
                            _ => bad += 1,
                        }
                    }
                }
            }
        }
    }
    outcome(bad == 0, format!("{count} triples, min |Im| {min_abs:.2e}"))
}

fn criterion7() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for case in Case::ALL {
        let sizes = sizes_for(case);
        let (mut done, mut worst, mut bad, mut seed) = (0, 0.0f64, 0, 0u64);
        while done < 200 {
            seed += 1;
            let n = sizes[done % sizes.len()];
            let (ws, params, meas, z) = setup(case, n, 70_000 + seed).unwrap();
            let floor = 1e-6 * z.sup_norm();
            if z.as_slice().iter().any(|c| c.norm() <= floor) {
                continue;
            }
            done += 1;
            let ok = recover(&meas, &ws, &RecoveryConfig::new(params)).and_then(|r| {
                let a = instantaneous_frequency(&z)?;
                let b = instantaneous_frequency(&r.signal)?;
                Ok(a.max_circular_distance(&b))
            });
            match ok {
                Ok(d) if d <= 1e-8 => worst = worst.max(d),
                _ => bad += 1,
            }
        }
        pass &= bad == 0;
        lines.push(format!("{case}: {bad} failures, worst {worst:.1e}"));
    }
    outcome(pass, lines.join(", "))
}

/// Rebuild a window with one spectral entry zeroed, keeping its declared profile.
fn zero_entry(w: &Window, index: usize) -> Window {
    let mut spec: Spectrum = w.spectrum().clone();
    spec[index] = Complex64::new(0.0, 0.0);
    Window::with_profile(spec, w.bandlimit(), w.zero_run_start(), w.case()).unwrap()
}

fn criterion8() -> Outcome {
    let mut rejected = [0, 0];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for t in 0..100u64 {
        let n = rng.random_range(5..=40usize);
        let params = StftParams::default_for(n).unwrap();
        let cfg = RecoveryConfig::new(params);
        let z = sample_generic(n, t).unwrap();

        let b = rng.random_range(2..=n.div_ceil(2));
        let i = rng.random_range(0..n);
        let w = make_case1_window(n, b, i, t).unwrap();
        let bad = WindowSet::single(zero_entry(&w, mod_index((i + n - b + 1) as i64, n)));
        let good = WindowSet::single(w);

        let i2 = rng.random_range(0..n);
        let ws2 = make_case2_windows(n, i2, t).unwrap();
        let mut windows = ws2.windows().to_vec();
        windows[0] = zero_entry(&windows[0], mod_index((i2 + n / 2) as i64, n));
        let bad2 = WindowSet::new(windows, Case::Case2).unwrap();

        for (slot, case, bad_ws, plan_ws) in [(0, Case::Case1, &bad, &good), (1, Case::Case2, &bad2, &ws2)] {
            let plan = measurement_plan(case, n, plan_ws.bandlimit(), plan_ws.zero_run_start(), &params).unwrap();
            let meas = measure(z.signal(), plan_ws, &plan, &params).unwrap();
            let counting = Counting { inner: &meas, seen: RefCell::new(Vec::new()) };
            let flagged = !validate_for_case(bad_ws, case, &params).passed();
            let refused = matches!(recover(&counting, bad_ws, &cfg), Err(Error::InvalidWindow(_)));
            if flagged && refused && counting.seen.borrow().is_empty() {
                rejected[slot] += 1;
            }
        }
    }
    outcome(rejected == [100, 100], format!("case1 {}/100, case2 {}/100", rejected[0], rejected[1]))
}

fn criterion9() -> Outcome {
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let case = Case::ALL[seed as usize % 3];
        let sizes = sizes_for(case);
        let n = sizes[(seed as usize / 3) % sizes.len()];
        let (ws, params, meas, z) = setup(case, n, 90_000 + seed).unwrap();
        let neg = measure(&-&z, &ws, meas.plan(), &params).unwrap();
        let same_bits = meas.magnitudes().iter().zip(neg.magnitudes()).all(|(a, b)| a.to_bits() == b.to_bits());
        if !same_bits {
            bad.push(format!("seed {seed}: measurements differ"));
            continue;
        }
        let cfg = RecoveryConfig::new(params);
        match (recover(&meas, &ws, &cfg), recover(&neg, &ws, &cfg)) {
            (Ok(a), Ok(b)) => {
                let (ca, cb) = (canonicalize(&a.spectrum, 1e-10), canonicalize(&b.spectrum, 1e-10));
                let d = (0..n).map(|q| (ca[q] - cb[q]).norm()).fold(0.0, f64::max);
                worst = worst.max(d);
                if d > 1e-12 {
                    bad.push(format!("seed {seed}: canonical forms differ by {d:.1e}"));
                }
            }
            _ => bad.push(format!("seed {seed}: recovery failed")),
        }
    }
    outcome(bad.is_empty(), format!("100 seeds, worst {worst:.1e} {}", bad.join("; ")))
}

fn main() -> ExitCode {
    let criteria: [(&str, Duration, Criterion); 9] = [
        ("1 measurement counts", Duration::from_secs(1), criterion1),
        ("2 round-trip recovery", Duration::from_secs(60), criterion2),
        ("3 circle-solver oracle", Duration::from_secs(5), criterion3),
        ("4 formula duality", Duration::from_secs(5), criterion4),
        ("5 analytic structure", Duration::MAX, criterion5),
        ("6 modulation triple sweep", Duration::from_secs(30), criterion6),
        ("7 IF pipeline", Duration::MAX, criterion7),
        ("8 degenerate-window rejection", Duration::MAX, criterion8),
        ("9 sign blindness", Duration::MAX, criterion9),
    ];
    let mut failed = 0;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let pass = out.pass && elapsed < budget;
        failed += usize::from(!pass);
        let limit = if budget == Duration::MAX { String::new() } else { format!(" (limit {}s)", budget.as_secs()) };
        println!(
            "criterion {name}: {} in {:.2}s{limit} | {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
