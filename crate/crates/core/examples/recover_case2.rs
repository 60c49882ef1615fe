//! Four (⌈N/2⌉+1)-bandlimited windows: the anchor pair comes from a 4×4
//! linear system, the rest from three-circle steps.

use analytic_pr::analytic::sample_generic;
use analytic_pr::recovery::{case2_monomials, recover, up_to_sign_error, RecoveryConfig};
use analytic_pr::stft::{measure, measurement_plan, StftParams};
use analytic_pr::windows::{build_a0, make_case2_windows, Case};

fn main() -> analytic_pr::error::Result<()> {
    let (n, i) = (16, 3);
    let params = StftParams::default_for(n)?;
    let ws = make_case2_windows(n, i, 5)?;
    println!("A0 condition number {:.3e}", build_a0(&ws)?.condition());

    let plan = measurement_plan(Case::Case2, n, ws.bandlimit(), i, &params)?;
    let z = sample_generic(n, 99)?;
    let meas = measure(z.signal(), &ws, &plan, &params)?;

    let [m1, m2, m3, m4] = case2_monomials(&meas, &ws)?;
    let (top, dc) = (z.spectrum()[n / 2], z.spectrum()[0]);
    println!("|zK|^2   {:.6} vs {:.6}", m1.re, top.norm_sqr());
    println!("zK z0    {:.6} vs {:.6}", m2, top * dc);
    println!("~zK z0   {:.6} vs {:.6}", m3, top.conj() * dc);
    println!("z0^2     {:.6} vs {:.6}", m4.re, (dc * dc).re);

    let result = recover(&meas, &ws, &RecoveryConfig::new(params))?;
    println!("{} magnitudes, up-to-sign error {:.3e}", plan.len(), up_to_sign_error(&result.signal, z.signal())?);
    Ok(())
}
