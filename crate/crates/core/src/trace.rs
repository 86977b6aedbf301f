//! Absorption traces and their CSV/JSON forms.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DamsError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    /// `floquet`, `time-domain` or `synthesized`.
    pub method: String,
    pub system: String,
    pub omega_c_rabi: f64,
    pub gamma: f64,
    pub theta: f64,
    pub coupling_phase: f64,
    pub probe_rabi: f64,
    pub external_loss: f64,
    /// Largest harmonic truncation order used on the grid (Floquet only).
    pub k: Option<usize>,
    pub normalization: String,
    /// Free-form notes (width policy of a synthesized trace, for example).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumTrace {
    pub deltas: Vec<f64>,
    pub absorption: Vec<f64>,
    pub meta: TraceMeta,
}

impl SpectrumTrace {
    pub fn new(deltas: Vec<f64>, absorption: Vec<f64>, meta: TraceMeta) -> Result<Self> {
        if deltas.len() != absorption.len() {
            return Err(DamsError::Domain(format!(
                "trace lengths differ ({} deltas, {} values)",
                deltas.len(),
                absorption.len()
            )));
        }
        check_grid(&deltas)?;
        Ok(SpectrumTrace { deltas, absorption, meta })
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    /// `delta,absorption` with 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,absorption\n");
        for (d, a) in self.deltas.iter().zip(&self.absorption) {
            let _ = writeln!(out, "{},{}", sig12(*d), sig12(*a));
        }
        out
    }

    /// Writes `<stem>.csv` and its `<stem>.json` metadata sidecar into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        std::fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&self.meta)? + "\n",
        )?;
        Ok(())
    }
}

pub fn check_grid(deltas: &[f64]) -> Result<()> {
    if deltas.is_empty() {
        return Err(DamsError::Domain("empty detuning grid".into()));
    }
    if deltas.iter().any(|d| !d.is_finite()) {
        return Err(DamsError::Domain("non-finite detuning in grid".into()));
    }
    if deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(DamsError::Domain("detuning grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `points` evenly spaced detunings from `min` to `max` inclusive. A grid
/// symmetric about zero comes out exactly antisymmetric, with an exact zero
/// in the middle when `points` is odd.
pub fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![min];
    }
    let span = (points - 1) as f64;
    (0..points).map(|i| (min * (span - i as f64) + max * i as f64) / span).collect()
}

/// Formats with 12 significant digits, trimming trailing zeros.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
        if s == "-0" { "0".into() } else { s }
    } else {
        format!("{x:.11e}")
    }
}
