//! Construct windows for each case and print their validation report.

use analytic_pr::stft::StftParams;
use analytic_pr::windows::{
    build_a0, make_case1_window, make_case2_windows, make_case3_windows, validate_for_case, Case, WindowSet,
};

fn main() -> analytic_pr::error::Result<()> {
    let n = 48;
    let params = StftParams::default_for(n)?;

    let w1 = WindowSet::single(make_case1_window(n, 2, 2, 7)?);
    println!("{}", validate_for_case(&w1, Case::Case1, &params));

    let w2 = make_case2_windows(n, 25, 7)?;
    println!("{}", validate_for_case(&w2, Case::Case2, &params));
    println!("A0 condition number: {:.3e}\n", build_a0(&w2)?.condition());

    let w3 = make_case3_windows(n, 7)?;
    println!("{}", validate_for_case(&w3, Case::Case3, &params));

    match make_case3_windows(7, 7) {
        Ok(_) => println!("unexpected: odd length accepted"),
        Err(e) => println!("N=7, case 3: {e}"),
    }
    Ok(())
}
