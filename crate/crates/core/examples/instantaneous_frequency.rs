//! The instantaneous frequency survives phase retrieval: it is blind to
//! the global sign.

use analytic_pr::analytic::{instantaneous_frequency, sample_generic};
use analytic_pr::recovery::{recover, RecoveryConfig};
use analytic_pr::stft::{measure, measurement_plan, StftParams};
use analytic_pr::windows::{make_case1_window, Case, WindowSet};

fn main() -> analytic_pr::error::Result<()> {
    let n = 13;
    let params = StftParams::default_for(n)?;
    let ws = WindowSet::single(make_case1_window(n, 4, 1, 8)?);
    let plan = measurement_plan(Case::Case1, n, 4, 1, &params)?;
    let z = sample_generic(n, 31)?;
    let meas = measure(z.signal(), &ws, &plan, &params)?;
    let result = recover(&meas, &ws, &RecoveryConfig::new(params))?;

    let truth = instantaneous_frequency(z.signal())?;
    let found = instantaneous_frequency(&result.signal)?;
    for (k, (a, b)) in truth.values().iter().zip(found.values()).enumerate() {
        println!("IF[{k:2}] true {a:.10} recovered {b:.10}");
    }
    println!("max circular distance {:.2e}", truth.max_circular_distance(&found));
    Ok(())
}
