//! Two analytic windows, 3N/2−1 magnitudes, even N. The anchor equation has
//! two sign branches and only one survives the full recursion.

use analytic_pr::analytic::sample_generic;
use analytic_pr::recovery::{case3_candidates, recover, up_to_sign_error, RecoveryConfig};
use analytic_pr::stft::{measure, measurement_plan, StftParams};
use analytic_pr::windows::{make_case3_windows, Case};

fn main() -> analytic_pr::error::Result<()> {
    let n = 20;
    let params = StftParams::default_for(n)?;
    let ws = make_case3_windows(n, 3)?;
    let plan = measurement_plan(Case::Case3, n, ws.bandlimit(), ws.zero_run_start(), &params)?;
    let z = sample_generic(n, 17)?;
    let meas = measure(z.signal(), &ws, &plan, &params)?;

    let truth = (z.spectrum()[0].re, z.spectrum()[n / 2].re);
    println!("true (z0, zN/2) = ({:+.6}, {:+.6})", truth.0, truth.1);
    for (b, (dc, top)) in case3_candidates(&meas, &ws)?.iter().enumerate() {
        println!("branch {b}: ({dc:+.6}, {top:+.6})");
    }

    let result = recover(&meas, &ws, &RecoveryConfig::new(params))?;
    println!("{} magnitudes, up-to-sign error {:.3e}", plan.len(), up_to_sign_error(&result.signal, z.signal())?);
    Ok(())
}
