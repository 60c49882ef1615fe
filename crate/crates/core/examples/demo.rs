//! The N=6 walkthroughs for all three cases.

use analytic_pr::demo::{render_demo, DemoOptions};
use analytic_pr::windows::Case;

fn main() -> analytic_pr::error::Result<()> {
    for case in Case::ALL {
        println!("{}", render_demo(&DemoOptions::new(case, 6))?);
    }
    Ok(())
}
