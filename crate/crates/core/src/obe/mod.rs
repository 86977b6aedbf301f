//! Nonperturbative probe absorption from the Lindblad master equation with
//! both fields, used as the numerical reference for the pathway picture.

pub mod blocktri;
pub mod degenerate;
pub mod floquet;
pub mod peaks;
pub mod timedomain;

use serde::{Deserialize, Serialize};

pub use degenerate::{degenerate_absorption, degenerate_steady_state, phase_averaged_absorption};
pub use floquet::{
    absorption_at, converged_absorption, floquet_solve, linear_response, FloquetSolution, Normalization,
};
pub use peaks::{find_peaks, local_maxima, FoundPeak};
pub use timedomain::{time_domain_solve, MIN_TRANSIENT};

use crate::error::{DamsError, Result};
use crate::par::{self, Execution};
use crate::system::TransitionSystem;
use crate::trace::{check_grid, SpectrumTrace, TraceMeta};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Floquet,
    #[serde(alias = "time")]
    TimeDomain,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Floquet => "floquet",
            Method::TimeDomain => "time-domain",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumOptions {
    pub method: Method,
    pub normalization: Normalization,
    pub execution: Execution,
    /// Starting harmonic truncation for the K-doubling loop.
    pub k_start: usize,
    /// Time-domain transient, in units of 1/Γ.
    pub t_transient: f64,
    /// Minimum time-domain averaging window; rounded up to whole beat periods.
    pub t_average: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            method: Method::Floquet,
            normalization: Normalization::PerIntensity,
            execution: Execution::Parallel,
            k_start: floquet::DEFAULT_K,
            t_transient: 200.0,
            t_average: 100.0,
        }
    }
}

/// Absorption at one detuning, plus the truncation order that converged.
pub fn absorption_point(
    system: &TransitionSystem,
    probe_rabi: f64,
    delta: f64,
    opts: &SpectrumOptions,
) -> Result<(f64, Option<usize>)> {
    match (opts.method, delta == 0.0) {
        (Method::Floquet, false) => {
            let c = converged_absorption(system, probe_rabi, delta, opts.k_start, opts.normalization)?;
            Ok((c.absorption, Some(c.solution.k_max)))
        }
        (Method::Floquet, true) => Ok((phase_averaged_absorption(system, probe_rabi, opts.normalization)?, None)),
        (Method::TimeDomain, false) => {
            let window = timedomain::beat_window(delta, opts.t_average);
            let a = timedomain::time_domain_absorption(
                system,
                probe_rabi,
                delta,
                0.0,
                opts.t_transient,
                window,
                opts.normalization,
            )?;
            Ok((a, None))
        }
        (Method::TimeDomain, true) => {
            let n = degenerate::PHASE_NODES;
            let mut sum = 0.0;
            for j in 0..n {
                let chi = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
                sum += timedomain::time_domain_absorption(
                    system,
                    probe_rabi,
                    0.0,
                    chi,
                    opts.t_transient,
                    opts.t_average,
                    opts.normalization,
                )?;
            }
            Ok((sum / n as f64, None))
        }
    }
}

pub fn trace_meta(system: &TransitionSystem, probe_rabi: f64, method: &str, k: Option<usize>, normalization: Normalization) -> TraceMeta {
    TraceMeta {
        method: method.into(),
        system: system.id(),
        omega_c_rabi: system.omega_c_rabi,
        gamma: system.gamma,
        theta: system.probe_geometry.theta,
        coupling_phase: system.coupling_phase,
        probe_rabi,
        external_loss: system.external_loss,
        k,
        normalization: normalization.name().into(),
        notes: Vec::new(),
    }
}

/// Absorption spectrum over `grid`. Grid points are independent and may be
/// solved concurrently; the first failure in grid order is returned,
/// tagged with its detuning.
pub fn spectrum(system: &TransitionSystem, probe_rabi: f64, grid: &[f64], opts: &SpectrumOptions) -> Result<SpectrumTrace> {
    check_grid(grid)?;
    if !(probe_rabi >= 0.0) || !probe_rabi.is_finite() {
        return Err(DamsError::Domain(format!("probe Rabi frequency {probe_rabi} must be >= 0")));
    }
    let points = par::map(opts.execution, grid, |&d| {
        absorption_point(system, probe_rabi, d, opts)
            .map_err(|e| DamsError::AtDetuning { delta: d, source: Box::new(e) })
    });
    let mut values = Vec::with_capacity(grid.len());
    let mut k_used: Option<usize> = None;
    for p in points {
        let (a, k) = p?;
        values.push(a);
        k_used = k_used.max(k);
    }
    let mut meta = trace_meta(system, probe_rabi, opts.method.name(), k_used, opts.normalization);
    if grid.contains(&0.0) {
        meta.notes.push(format!(
            "delta = 0 solved as a time-independent problem, averaged over {} relative probe phases",
            degenerate::PHASE_NODES
        ));
    }
    SpectrumTrace::new(grid.to_vec(), values, meta)
}

/// Linear-response spectrum per unit probe intensity.
pub fn linear_spectrum(system: &TransitionSystem, grid: &[f64], execution: Execution) -> Result<SpectrumTrace> {
    check_grid(grid)?;
    let points = par::map(execution, grid, |&d| {
        linear_response(system, d).map_err(|e| DamsError::AtDetuning { delta: d, source: Box::new(e) })
    });
    let values = points.into_iter().collect::<Result<Vec<_>>>()?;
    SpectrumTrace::new(
        grid.to_vec(),
        values,
        trace_meta(system, 0.0, "linear-response", None, Normalization::PerIntensity),
    )
}

/// Higher-order part of a per-intensity trace, `(a − a_linear) / Ω_p²`,
/// which isolates processes beyond first order in the probe field.
pub fn higher_order_component(full: &SpectrumTrace, linear: &SpectrumTrace) -> Result<SpectrumTrace> {
    if full.deltas != linear.deltas {
        return Err(DamsError::Domain("traces sampled on different grids".into()));
    }
    if full.meta.normalization != Normalization::PerIntensity.name() {
        return Err(DamsError::Domain("higher-order component needs a per-intensity trace".into()));
    }
    let op2 = full.meta.probe_rabi.powi(2);
    if op2 == 0.0 {
        return Err(DamsError::Domain("higher-order component needs a nonzero probe".into()));
    }
    let values = full.absorption.iter().zip(&linear.absorption).map(|(a, l)| (a - l) / op2).collect();
    let mut meta = full.meta.clone();
    meta.method = format!("{}-higher-order", full.meta.method);
    meta.notes.push("(absorption - linear response) / probe_rabi^2".into());
    SpectrumTrace::new(full.deltas.clone(), values, meta)
}
