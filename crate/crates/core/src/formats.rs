//! JSON and CSV encodings of signals, windows, measurements and results.
//!
//! Complex vectors are written as `{"n": N, "re": [...], "im": [...]}`.
//! Windows store their DFT coefficients in that shape together with
//! `bandlimit`, `zero_run_start` and `case`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dsp::{Signal, Spectrum};
use crate::error::{Error, Result};
use crate::recovery::RecoveryResult;
use crate::stft::{MeasurementKey, MeasurementPlan, MeasurementSet};
use crate::windows::{Case, Window, WindowSet};

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("format error: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl ComplexJson {
    fn from_parts(re: Vec<f64>, im: Vec<f64>) -> Self {
        Self { n: re.len(), re, im }
    }

    fn check(&self) -> Result<()> {
        if self.re.len() != self.n || self.im.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: self.re.len().min(self.im.len()) });
        }
        Ok(())
    }

    pub fn to_signal(&self) -> Result<Signal> {
        self.check()?;
        Signal::from_parts(&self.re, &self.im)
    }

    pub fn to_spectrum(&self) -> Result<Spectrum> {
        self.check()?;
        Spectrum::from_parts(&self.re, &self.im)
    }
}

impl From<&Signal> for ComplexJson {
    fn from(s: &Signal) -> Self {
        Self::from_parts(s.re(), s.im())
    }
}

impl From<&Spectrum> for ComplexJson {
    fn from(s: &Spectrum) -> Self {
        Self::from_parts(s.re(), s.im())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowJson {
    pub n: usize,
    /// Real parts of the DFT coefficients `ŵ`.
    pub re: Vec<f64>,
    /// Imaginary parts of the DFT coefficients `ŵ`.
    pub im: Vec<f64>,
    pub bandlimit: usize,
    pub zero_run_start: usize,
    pub case: Case,
}

impl From<&Window> for WindowJson {
    fn from(w: &Window) -> Self {
        Self {
            n: w.n(),
            re: w.spectrum().re(),
            im: w.spectrum().im(),
            bandlimit: w.bandlimit(),
            zero_run_start: w.zero_run_start(),
            case: w.case(),
        }
    }
}

impl WindowJson {
    pub fn to_window(&self) -> Result<Window> {
        let spectrum = ComplexJson { n: self.n, re: self.re.clone(), im: self.im.clone() }.to_spectrum()?;
        Window::with_profile(spectrum, self.bandlimit, self.zero_run_start, self.case)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSetJson {
    pub case: Case,
    pub windows: Vec<WindowJson>,
}

/// A window file holds either a single window or a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WindowFile {
    Set(WindowSetJson),
    Single(WindowJson),
}

impl WindowFile {
    pub fn to_window_set(&self) -> Result<WindowSet> {
        match self {
            WindowFile::Single(w) => Ok(WindowSet::single(w.to_window()?)),
            WindowFile::Set(set) => {
                let windows = set.windows.iter().map(WindowJson::to_window).collect::<Result<Vec<_>>>()?;
                WindowSet::new(windows, set.case)
            }
        }
    }
}

impl From<&WindowSet> for WindowFile {
    fn from(ws: &WindowSet) -> Self {
        if ws.len() == 1 {
            WindowFile::Single(ws.primary().into())
        } else {
            WindowFile::Set(WindowSetJson { case: ws.case(), windows: ws.windows().iter().map(Into::into).collect() })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryJson {
    pub n: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub ambiguity: String,
    pub case: Case,
    pub step_residuals: Vec<f64>,
}

impl From<&RecoveryResult> for RecoveryJson {
    fn from(r: &RecoveryResult) -> Self {
        Self {
            n: r.signal.n(),
            re: r.signal.re(),
            im: r.signal.im(),
            ambiguity: "global_sign".into(),
            case: r.case,
            step_residuals: r.step_residuals.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRow {
    pub window: usize,
    pub k: usize,
    pub m: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementsJson {
    pub case: Case,
    pub entries: Vec<MeasurementRow>,
}

fn rows(set: &MeasurementSet) -> Vec<MeasurementRow> {
    set.iter()
        .map(|(key, magnitude)| MeasurementRow { window: key.window, k: key.k, m: key.m, magnitude })
        .collect()
}

fn from_rows(case: Case, rows: Vec<MeasurementRow>) -> Result<MeasurementSet> {
    let keys = rows.iter().map(|r| MeasurementKey::new(r.window, r.k, r.m)).collect();
    let plan = MeasurementPlan::from_entries(case, keys);
    MeasurementSet::new(plan, rows.iter().map(|r| r.magnitude).collect())
}

/// Measurements as CSV with header `window,k,m,magnitude`, in plan order.
pub fn write_measurements_csv(set: &MeasurementSet, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows(set) {
        w.serialize(row).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Read measurements written by [`write_measurements_csv`]. The CSV does not
/// record the case, so the caller supplies it.
pub fn read_measurements_csv(case: Case, input: impl Read) -> Result<MeasurementSet> {
    let mut r = csv::Reader::from_reader(input);
    let rows = r.deserialize().collect::<std::result::Result<Vec<MeasurementRow>, _>>().map_err(io_err)?;
    from_rows(case, rows)
}

pub fn measurements_to_json(set: &MeasurementSet) -> MeasurementsJson {
    MeasurementsJson { case: set.plan().case(), entries: rows(set) }
}

pub fn measurements_from_json(json: MeasurementsJson) -> Result<MeasurementSet> {
    from_rows(json.case, json.entries)
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(io_err)
}

pub fn from_json_str<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(io_err)
}
