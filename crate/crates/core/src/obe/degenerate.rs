//! Probe and coupling at the same frequency (`δ = 0`).
//!
//! Both fields then share one rotating frame and the Hamiltonian is time
//! independent. Its steady state depends on the relative probe phase `χ`,
//! and the detuning-scanned experiment sees the average over `χ`: the beat
//! phase `δt` sweeps every value as `δ → 0`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::floquet::Normalization;
use crate::error::Result;
use crate::liouville::{lindbladian, steady_state};
use crate::pumping::pumped_density_matrix;
use crate::system::{CMatrix, TransitionSystem};

/// Number of relative phases in the `χ` average (trapezoid rule on a
/// periodic integrand; 16 and 32 nodes agree to ~1e−13).
pub const PHASE_NODES: usize = 16;

/// Steady state of the time-independent problem with relative probe phase
/// `chi`, reached from the coupling-only pumped state.
pub fn degenerate_steady_state(system: &TransitionSystem, probe_rabi: f64, chi: f64) -> Result<CMatrix> {
    let h = system.degenerate_hamiltonian(probe_rabi, chi);
    let l = lindbladian(&h, system.jump_operators());
    steady_state(&l, system.dim(), &pumped_density_matrix(system)?)
}

/// Raw absorbed power `−Ω_p Im(e^{iχ} Tr(P† ρ))` for a density matrix of the
/// degenerate problem.
pub fn degenerate_power(system: &TransitionSystem, probe_rabi: f64, chi: f64, rho: &CMatrix) -> f64 {
    let tr = (system.probe_op.adjoint() * rho).trace();
    -probe_rabi * (Complex64::from_polar(1.0, chi) * tr).im
}

fn normalize(raw: f64, probe_rabi: f64, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::Raw => raw,
        Normalization::PerIntensity if probe_rabi > 0.0 => raw / (probe_rabi * probe_rabi),
        Normalization::PerIntensity => 0.0,
    }
}

/// Absorption at a single relative phase.
pub fn degenerate_absorption(
    system: &TransitionSystem,
    probe_rabi: f64,
    chi: f64,
    normalization: Normalization,
) -> Result<f64> {
    if probe_rabi == 0.0 {
        return Ok(0.0);
    }
    let rho = degenerate_steady_state(system, probe_rabi, chi)?;
    Ok(normalize(degenerate_power(system, probe_rabi, chi, &rho), probe_rabi, normalization))
}

/// Absorption averaged over the relative phase; this is what a detuning
/// scan records at `δ = 0`.
pub fn phase_averaged_absorption(
    system: &TransitionSystem,
    probe_rabi: f64,
    normalization: Normalization,
) -> Result<f64> {
    if probe_rabi == 0.0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for j in 0..PHASE_NODES {
        let chi = 2.0 * PI * j as f64 / PHASE_NODES as f64;
        let rho = degenerate_steady_state(system, probe_rabi, chi)?;
        sum += degenerate_power(system, probe_rabi, chi, &rho);
    }
    Ok(normalize(sum / PHASE_NODES as f64, probe_rabi, normalization))
}
