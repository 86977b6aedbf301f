//! Run configuration (TOML).
//!
//! ```toml
//! F_g = 2
//! F_e = 1
//! omega_c_rabi = 1.0
//! mode = "spectrum"
//!
//! [detuning_grid]
//! min = -3.0
//! max = 3.0
//! points = 801
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::angular::HalfInt;
use crate::error::{DamsError, Result};
use crate::obe::{Method, Normalization};
use crate::system::{build_system, TransitionSystem};
use crate::trace::linear_grid;

/// Keys describing a detuned coupling field. The model keeps the coupling on
/// resonance, so these are refused rather than silently ignored.
const OFF_RESONANT_KEYS: &[&str] = &[
    "coupling_detuning",
    "omega_c_detuning",
    "delta_c",
    "coupling_frequency",
    "pump_detuning",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Analyze,
    Spectrum,
    Compare,
    Sweep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetuningGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for DetuningGrid {
    fn default() -> Self {
        DetuningGrid { min: -3.0, max: 3.0, points: 801 }
    }
}

impl DetuningGrid {
    pub fn values(&self) -> Vec<f64> {
        linear_grid(self.min, self.max, self.points)
    }

    /// Parses `min:max:points`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || DamsError::config("grid", format!("expected min:max:points, got '{spec}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let grid = DetuningGrid {
            min: parts[0].trim().parse().map_err(|_| bad())?,
            max: parts[1].trim().parse().map_err(|_| bad())?,
            points: parts[2].trim().parse().map_err(|_| bad())?,
        };
        grid.validate("grid")?;
        Ok(grid)
    }

    fn validate(&self, key: &str) -> Result<()> {
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(DamsError::config(format!("{key}.min"), "grid bounds must be finite"));
        }
        if self.min >= self.max {
            return Err(DamsError::config(format!("{key}.min"), format!("min {} must be below max {}", self.min, self.max)));
        }
        if self.points < 3 {
            return Err(DamsError::config(format!("{key}.points"), format!("need at least 3 points, got {}", self.points)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSettings {
    /// Oracle peaks must stand out by this fraction of the trace maximum.
    #[serde(default = "default_prominence")]
    pub min_prominence_fraction: f64,
    /// Pathway resonances closer than this (units of Γ) form one peak.
    #[serde(default = "default_merge")]
    pub merge_tolerance: f64,
    /// Half-width of synthesized two-photon peaks (units of Γ).
    #[serde(default = "default_two_photon_width")]
    pub two_photon_width: f64,
    #[serde(default)]
    pub normalization: Normalization,
}

fn default_prominence() -> f64 {
    1e-3
}
fn default_merge() -> f64 {
    0.05
}
fn default_two_photon_width() -> f64 {
    0.25
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        AnalysisSettings {
            min_prominence_fraction: default_prominence(),
            merge_tolerance: default_merge(),
            two_photon_width: default_two_photon_width(),
            normalization: Normalization::PerIntensity,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "F_g")]
    pub f_g: HalfInt,
    #[serde(rename = "F_e")]
    pub f_e: HalfInt,
    pub omega_c_rabi: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "ninety")]
    pub theta_degrees: f64,
    /// Phase of the coupling field, radians.
    #[serde(default)]
    pub coupling_phase: f64,
    #[serde(default = "default_probe")]
    pub probe_rabi: f64,
    #[serde(default)]
    pub detuning_grid: DetuningGrid,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub method: Method,
    #[serde(default)]
    pub sweep_values: Option<Vec<f64>>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Extra excited-state loss returning atoms unpolarized to the ground
    /// level. Zero keeps the transition closed.
    #[serde(default)]
    pub external_loss_rate: f64,
    #[serde(default)]
    pub analysis: AnalysisSettings,
}

fn one() -> f64 {
    1.0
}
fn ninety() -> f64 {
    90.0
}
fn default_probe() -> f64 {
    0.05
}
fn default_output() -> PathBuf {
    PathBuf::from("dams-out")
}

impl RunConfig {
    pub fn theta(&self) -> f64 {
        self.theta_degrees.to_radians()
    }

    pub fn system(&self) -> Result<TransitionSystem> {
        self.system_at(self.omega_c_rabi)
    }

    /// The configured system with the coupling Rabi frequency replaced.
    pub fn system_at(&self, omega_c_rabi: f64) -> Result<TransitionSystem> {
        build_system(self.f_g, self.f_e, omega_c_rabi, self.gamma, self.theta(), self.coupling_phase)?
            .with_external_loss(self.external_loss_rate)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(DamsError::config(key, format!("must be a finite value >= 0, got {v}")))
            }
        };
        nonneg("omega_c_rabi", self.omega_c_rabi)?;
        nonneg("probe_rabi", self.probe_rabi)?;
        nonneg("external_loss_rate", self.external_loss_rate)?;
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(DamsError::config("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if !self.theta_degrees.is_finite() {
            return Err(DamsError::config("theta_degrees", "must be finite"));
        }
        if !self.coupling_phase.is_finite() {
            return Err(DamsError::config("coupling_phase", "must be finite"));
        }
        self.detuning_grid.validate("detuning_grid")?;
        let a = &self.analysis;
        if !(a.min_prominence_fraction >= 0.0) {
            return Err(DamsError::config("analysis.min_prominence_fraction", "must be >= 0"));
        }
        if !(a.merge_tolerance > 0.0) {
            return Err(DamsError::config("analysis.merge_tolerance", "must be > 0"));
        }
        if !(a.two_photon_width > 0.0) {
            return Err(DamsError::config("analysis.two_photon_width", "must be > 0"));
        }
        if let Some(values) = &self.sweep_values {
            if values.is_empty() {
                return Err(DamsError::config("sweep_values", "sweep list is empty"));
            }
            for (i, &v) in values.iter().enumerate() {
                nonneg(&format!("sweep_values[{i}]"), v)?;
            }
        }
        if self.mode == Mode::Sweep && self.sweep_values.is_none() {
            return Err(DamsError::config("sweep_values", "sweep mode needs a list of coupling Rabi frequencies"));
        }
        build_system(self.f_g, self.f_e, self.omega_c_rabi, self.gamma, self.theta(), self.coupling_phase)
            .map_err(|e| DamsError::config("F_g", e.to_string()))?;
        Ok(())
    }
}

/// Parses and validates a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| DamsError::config("<document>", e.message()))?;
    for key in OFF_RESONANT_KEYS {
        if table.contains_key(*key) {
            return Err(DamsError::config(*key, "off-resonant coupling is not supported; the coupling field is always resonant"));
        }
    }
    let config: RunConfig = toml::from_str(text).map_err(|e| {
        let msg = e.message().to_string();
        let key = msg
            .split('`')
            .nth(1)
            .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
            .unwrap_or("<document>")
            .to_string();
        DamsError::config(key, msg)
    })?;
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| DamsError::config("<file>", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config("F_g = 2\nF_e = 1\nomega_c_rabi = 1.0\n").unwrap();
        assert_eq!(c.f_g, HalfInt::from_int(2));
        assert_eq!(c.theta_degrees, 90.0);
        assert_eq!(c.gamma, 1.0);
        assert_eq!(c.probe_rabi, 0.05);
        assert_eq!(c.mode, Mode::Analyze);
        assert_eq!(c.detuning_grid, DetuningGrid::default());
    }

    #[test]
    fn half_integers_and_nested_grid() {
        let c = parse_config(
            "F_g = \"3/2\"\nF_e = 0.5\nomega_c_rabi = 2\nmode = \"sweep\"\nsweep_values = [0.3, 1, 3]\n\
             [detuning_grid]\nmin = -1\nmax = 1\npoints = 5\n",
        )
        .unwrap();
        assert_eq!(c.f_g, HalfInt::from_twice(3));
        assert_eq!(c.f_e, HalfInt::from_twice(1));
        assert_eq!(c.detuning_grid.values(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    fn key_of(text: &str) -> String {
        match parse_config(text).unwrap_err() {
            DamsError::Config { key, .. } => key,
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn rejections_carry_key_paths() {
        assert_eq!(key_of("F_g = 0\nF_e = 0\nomega_c_rabi = 1\n"), "F_g");
        assert_eq!(key_of("F_g = 1\nF_e = 1\nomega_c_rabi = 1\nprobe_rabi = -0.1\n"), "probe_rabi");
        assert_eq!(key_of("F_g = 1\nF_e = 1\nomega_c_rabi = 1\ncoupling_detuning = 0.5\n"), "coupling_detuning");
        assert_eq!(key_of("F_g = 1\nF_e = 1\nomega_c_rabi = 1\ncolour = 1\n"), "colour");
        assert_eq!(key_of("F_g = 1\nF_e = 1\n"), "omega_c_rabi");
        assert_eq!(key_of("F_g = 1\nF_e = 1\nomega_c_rabi = 1\nsweep_values = []\n"), "sweep_values");
        assert_eq!(
            key_of("F_g = 1\nF_e = 1\nomega_c_rabi = 1\n[detuning_grid]\nmin = 1\nmax = -1\npoints = 9\n"),
            "detuning_grid.min"
        );
        assert_eq!(
            key_of("F_g = 1\nF_e = 1\nomega_c_rabi = 1\n[detuning_grid]\nmin = -1\nmax = 1\npoints = 2\n"),
            "detuning_grid.points"
        );
    }

    #[test]
    fn grid_flag() {
        let g = DetuningGrid::parse("-2:2:41").unwrap();
        assert_eq!((g.min, g.max, g.points), (-2.0, 2.0, 41));
        assert!(DetuningGrid::parse("2:-2:41").is_err());
        assert!(DetuningGrid::parse("a:b").is_err());
    }
}
