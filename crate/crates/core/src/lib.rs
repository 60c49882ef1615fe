//! Constructive phase retrieval of discrete analytic signals from
//! short-time Fourier transform magnitudes.
//!
//! An analytic `z ∈ ℂ^N` is determined up to a global sign by
//! `3⌊N/2⌋+1` STFT magnitudes taken with one bandlimited window
//! ([`windows::Case::Case1`]) or four `(⌈N/2⌉+1)`-bandlimited windows
//! ([`windows::Case::Case2`]), or by `3N/2−1` magnitudes taken with two
//! analytic windows when `N` is even ([`windows::Case::Case3`]). Recovery
//! works down the spectrum one coefficient at a time, each step solving
//! three circle equations in closed form.
//!
//! ```
//! use analytic_pr::analytic::sample_generic;
//! use analytic_pr::recovery::{recover, up_to_sign_error, RecoveryConfig};
//! use analytic_pr::stft::{measure, measurement_plan, StftParams};
//! use analytic_pr::windows::{make_case1_window, Case, WindowSet};
//!
//! let n = 16;
//! let params = StftParams::default_for(n).unwrap();
//! let ws = WindowSet::single(make_case1_window(n, 4, 2, 1).unwrap());
//! let plan = measurement_plan(Case::Case1, n, 4, 2, &params).unwrap();
//! assert_eq!(plan.len(), 25);
//!
//! let z = sample_generic(n, 7).unwrap();
//! let meas = measure(z.signal(), &ws, &plan, &params).unwrap();
//! let found = recover(&meas, &ws, &RecoveryConfig::new(params)).unwrap();
//! assert!(up_to_sign_error(&found.signal, z.signal()).unwrap() < 1e-10);
//! ```

// Negated float comparisons are deliberate: they treat NaN as failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod circle;
pub mod demo;
pub mod dsp;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod recovery;
pub mod refine;
pub mod stft;
pub mod windows;
