//! A seeded batch run with a CSV trial log and a JSON summary.
//! `ANALYTIC_PR_THREADS` caps the worker pool.

use analytic_pr::experiment::{run_experiment, summarize, write_trials_csv, ExperimentSpec};
use analytic_pr::formats::to_json_string;
use analytic_pr::windows::Case;

fn main() -> analytic_pr::error::Result<()> {
    let spec = ExperimentSpec::new(Case::Case2, vec![7, 16], 50, 1);
    let records = run_experiment(&spec)?;

    let mut head = Vec::new();
    write_trials_csv(&records[..5], &mut head)?;
    print!("{}", String::from_utf8_lossy(&head));
    println!("...");
    println!("{}", to_json_string(&summarize(&spec, &records))?);
    Ok(())
}
