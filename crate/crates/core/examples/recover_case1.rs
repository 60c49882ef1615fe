//! One bandlimited window, 3⌊N/2⌋+1 magnitudes.

use analytic_pr::analytic::sample_generic;
use analytic_pr::recovery::{recover_case1, up_to_sign_error, RecoveryConfig};
use analytic_pr::stft::{measure, measurement_plan, StftParams};
use analytic_pr::windows::{make_case1_window, Case, WindowSet};

fn main() -> analytic_pr::error::Result<()> {
    let (n, b, i) = (32, 5, 9);
    let params = StftParams::default_for(n)?;
    let w = make_case1_window(n, b, i, 11)?;
    let ws = WindowSet::single(w.clone());
    let plan = measurement_plan(Case::Case1, n, b, i, &params)?;

    let z = sample_generic(n, 2024)?;
    let meas = measure(z.signal(), &ws, &plan, &params)?;
    let result = recover_case1(&meas, &w, &RecoveryConfig::new(params))?;

    println!("N={n} B={b} i={i}: {} magnitudes", plan.len());
    println!("up-to-sign error: {:.3e}", up_to_sign_error(&result.signal, z.signal())?);
    let worst = result.step_residuals.iter().cloned().fold(0.0, f64::max);
    println!("worst circle-step residual: {worst:.3e}");
    Ok(())
}
