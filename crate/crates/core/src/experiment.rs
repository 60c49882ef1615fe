//! Seeded batch trials: sample, measure, recover, score.
//!
//! Trial `t` of every `N` cell uses the trial seed `seed + t`. From it the
//! signal is drawn with `sample_generic(N, trial_seed)`, the windows with
//! `trial_seed ^ WINDOW_SALT` and the optional noise with
//! `trial_seed ^ NOISE_SALT`, so any single trial can be replayed from the
//! `seed` column of the report.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::sample_generic;
use crate::error::{Error, Result};
use crate::recovery::{recover, up_to_sign_error, RecoveryConfig};
use crate::stft::{measure, measurement_plan, plan_count, StftParams};
use crate::windows::{make_case1_window, make_case2_windows, make_case3_windows, Case, WindowSet};

pub const WINDOW_SALT: u64 = 0x5851_f42d_4c95_7f2d;
pub const NOISE_SALT: u64 = 0x1405_7b7e_f767_814f;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "ANALYTIC_PR_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub case: Case,
    pub n_list: Vec<usize>,
    /// Case-1 bandlimit; drawn per trial from `2..=⌈N/2⌉` when absent.
    pub bandlimit: Option<usize>,
    /// Separation `L`; `max(1, ⌊N/3⌋)` when absent.
    pub separation: Option<usize>,
    /// Modulation indices; `(0, 1, 2)` when absent.
    pub m: Option<[usize; 3]>,
    pub trials: usize,
    pub seed: u64,
    /// Standard deviation of additive magnitude noise; 0 disables it.
    pub noise_sigma: f64,
    /// Record wall time per trial. Off by default so reports are reproducible
    /// byte for byte.
    pub timing: bool,
    /// Errors at or below this count as successes in the summary.
    pub success_threshold: f64,
}

impl ExperimentSpec {
    pub fn new(case: Case, n_list: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            case,
            n_list,
            bandlimit: None,
            separation: None,
            m: None,
            trials,
            seed,
            noise_sigma: 0.0,
            timing: false,
            success_threshold: 1e-8,
        }
    }

    pub fn params_for(&self, n: usize) -> Result<StftParams> {
        match (self.separation, self.m) {
            (None, None) => StftParams::default_for(n),
            (l, m) => StftParams::new(n, l.unwrap_or((n / 3).max(1)), m.unwrap_or([0, 1, 2])),
        }
    }

    /// Reject parameter combinations before any trial runs.
    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::InvalidParameter("no signal lengths given".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidParameter("noise sigma must be finite and nonnegative".into()));
        }
        for &n in &self.n_list {
            self.params_for(n)?;
            match self.case {
                Case::Case1 => {
                    if n < 3 {
                        return Err(Error::InvalidParameter(format!("case 1 needs N >= 3, got {n}")));
                    }
                    if let Some(b) = self.bandlimit {
                        if b < 2 || b > n.div_ceil(2) {
                            return Err(Error::InvalidParameter(format!(
                                "bandlimit {b} outside 2..=ceil(N/2) for N={n}"
                            )));
                        }
                    }
                }
                Case::Case2 if n < 4 => {
                    return Err(Error::InvalidParameter(format!("case 2 needs N >= 4, got {n}")));
                }
                Case::Case3 if n % 2 != 0 || n < 4 => {
                    return Err(Error::InvalidParameter(format!("even N required for case 3, got N={n}")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Degenerate,
    Ambiguous,
    Failed,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Degenerate => "degenerate",
            TrialStatus::Ambiguous => "ambiguous",
            TrialStatus::Failed => "failed",
        }
    }

    fn from_error(e: &Error) -> Self {
        match e {
            Error::DegenerateSignal { .. } => TrialStatus::Degenerate,
            Error::AmbiguousBranch { .. } => TrialStatus::Ambiguous,
            _ => TrialStatus::Failed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub seed: u64,
    pub n: usize,
    pub case: Case,
    /// Present iff `status` is `Ok`.
    pub error: Option<f64>,
    pub status: TrialStatus,
    /// Error kind tag for failed trials.
    pub detail: Option<&'static str>,
    pub wall_time_ms: Option<f64>,
}

/// Windows for one trial, following the seeding scheme in the module docs.
pub fn trial_windows(spec: &ExperimentSpec, n: usize, trial_seed: u64) -> Result<WindowSet> {
    let wseed = trial_seed ^ WINDOW_SALT;
    let i = (wseed % n as u64) as usize;
    match spec.case {
        Case::Case1 => {
            let b = spec.bandlimit.unwrap_or(2 + ((wseed >> 16) % (n.div_ceil(2) as u64 - 1)) as usize);
            Ok(WindowSet::single(make_case1_window(n, b, i, wseed)?))
        }
        Case::Case2 => make_case2_windows(n, i, wseed),
        Case::Case3 => make_case3_windows(n, wseed),
    }
}

/// Run one trial end to end.
pub fn run_trial(spec: &ExperimentSpec, n: usize, trial_seed: u64) -> TrialRecord {
    let start = Instant::now();
    let outcome = (|| -> Result<f64> {
        let params = spec.params_for(n)?;
        let ws = trial_windows(spec, n, trial_seed)?;
        let z = sample_generic(n, trial_seed)?;
        let plan = measurement_plan(spec.case, n, ws.bandlimit(), ws.zero_run_start(), &params)?;
        let meas = measure(z.signal(), &ws, &plan, &params)?.with_noise(spec.noise_sigma, trial_seed ^ NOISE_SALT)?;
        let result = recover(&meas, &ws, &RecoveryConfig::new(params))?;
        up_to_sign_error(&result.signal, z.signal())
    })();
    let wall_time_ms = spec.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
    let (error, status, detail) = match outcome {
        Ok(e) => (Some(e), TrialStatus::Ok, None),
        Err(e) => (None, TrialStatus::from_error(&e), Some(e.kind())),
    };
    TrialRecord { seed: trial_seed, n, case: spec.case, error, status, detail, wall_time_ms }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if t > 0 {
            builder = builder.num_threads(t);
        }
    }
    builder.build().map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))
}

/// All trials of all cells, in `(N, trial)` order regardless of which
/// worker finished first.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialRecord>> {
    spec.validate()?;
    let jobs: Vec<(usize, u64)> = spec
        .n_list
        .iter()
        .flat_map(|&n| (0..spec.trials as u64).map(move |t| (n, spec.seed.wrapping_add(t))))
        .collect();
    let pool = thread_pool()?;
    Ok(pool.install(|| jobs.par_iter().map(|&(n, seed)| run_trial(spec, n, seed)).collect()))
}

/// CSV header `seed,n,case,error,status,wall_time_ms`; empty fields where a
/// value is absent.
pub fn write_trials_csv(records: &[TrialRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::InvalidParameter(format!("csv: {e}"));
    w.write_record(["seed", "n", "case", "error", "status", "wall_time_ms"]).map_err(err)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.n.to_string(),
            r.case.to_string(),
            r.error.map(|e| format!("{e:e}")).unwrap_or_default(),
            r.status.as_str().to_string(),
            r.wall_time_ms.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::InvalidParameter(format!("csv: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub case: Case,
    pub n: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Median error over trials that returned an estimate.
    pub median_error: Option<f64>,
    pub max_error: Option<f64>,
    pub measurement_count: usize,
    pub ok: usize,
    pub degenerate: usize,
    pub ambiguous: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub success_threshold: f64,
    pub noise_sigma: f64,
    pub cells: Vec<CellSummary>,
}

pub fn summarize(spec: &ExperimentSpec, records: &[TrialRecord]) -> Summary {
    let cells = spec
        .n_list
        .iter()
        .map(|&n| {
            let rows: Vec<&TrialRecord> = records.iter().filter(|r| r.n == n).collect();
            let mut errors: Vec<f64> = rows.iter().filter_map(|r| r.error).collect();
            errors.sort_by(f64::total_cmp);
            let count = |s: TrialStatus| rows.iter().filter(|r| r.status == s).count();
            let successes = errors.iter().filter(|e| **e <= spec.success_threshold).count();
            CellSummary {
                case: spec.case,
                n,
                trials: rows.len(),
                successes,
                success_rate: if rows.is_empty() { 0.0 } else { successes as f64 / rows.len() as f64 },
                median_error: median(&errors),
                max_error: errors.last().copied(),
                measurement_count: plan_count(spec.case, n),
                ok: count(TrialStatus::Ok),
                degenerate: count(TrialStatus::Degenerate),
                ambiguous: count(TrialStatus::Ambiguous),
                failed: count(TrialStatus::Failed),
            }
        })
        .collect();
    Summary { success_threshold: spec.success_threshold, noise_sigma: spec.noise_sigma, cells }
}

fn median(sorted: &[f64]) -> Option<f64> {
    match sorted.len() {
        0 => None,
        len if len % 2 == 1 => Some(sorted[len / 2]),
        len => Some(0.5 * (sorted[len / 2 - 1] + sorted[len / 2])),
    }
}
