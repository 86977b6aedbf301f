//! Coupling-only steady state: where optical pumping leaves the atoms before
//! the probe is switched on.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::SublevelRef;
use crate::error::Result;
use crate::liouville::{lindbladian, steady_state};
use crate::system::{CMatrix, TransitionSystem};

pub const DEFAULT_TRAP_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SublevelPopulation {
    pub sublevel: SublevelRef,
    pub population: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PopulationDistribution {
    /// One entry per sublevel, in basis order.
    pub populations: Vec<SublevelPopulation>,
    /// Populated, coupling-dark ground sublevels.
    pub trapped: Vec<SublevelRef>,
    pub threshold: f64,
}

impl PopulationDistribution {
    pub fn population(&self, s: SublevelRef) -> f64 {
        self.populations.iter().find(|p| p.sublevel == s).map_or(0.0, |p| p.population)
    }

    pub fn total(&self) -> f64 {
        self.populations.iter().map(|p| p.population).sum()
    }
}

/// Unpolarized initial state: uniform over the ground sublevels.
pub fn unpolarized_ground(system: &TransitionSystem) -> CMatrix {
    let n = system.dim();
    let ng = system.n_ground();
    CMatrix::from_fn(n, n, |i, j| {
        if i == j && i < ng {
            Complex64::new(1.0 / ng as f64, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Liouvillian with the coupling field and all dissipation, probe off.
pub fn coupling_liouvillian(system: &TransitionSystem) -> CMatrix {
    lindbladian(&system.coupling_hamiltonian(), system.jump_operators())
}

/// Stationary density matrix of the coupling-only dynamics, reached from the
/// unpolarized ground state.
pub fn pumped_density_matrix(system: &TransitionSystem) -> Result<CMatrix> {
    steady_state(&coupling_liouvillian(system), system.dim(), &unpolarized_ground(system))
}

pub fn pump_steady_state(system: &TransitionSystem) -> Result<PopulationDistribution> {
    pump_steady_state_with(system, DEFAULT_TRAP_THRESHOLD)
}

pub fn pump_steady_state_with(system: &TransitionSystem, threshold: f64) -> Result<PopulationDistribution> {
    let rho = pumped_density_matrix(system)?;
    Ok(distribution_from(system, &rho, threshold))
}

pub fn distribution_from(system: &TransitionSystem, rho: &CMatrix, threshold: f64) -> PopulationDistribution {
    let dark = coupling_dark_ground(system);
    let populations: Vec<_> = (0..system.dim())
        .map(|i| SublevelPopulation { sublevel: system.sublevel(i), population: rho[(i, i)].re })
        .collect();
    let trapped = populations
        .iter()
        .filter(|p| p.population > threshold && dark.contains(&p.sublevel))
        .map(|p| p.sublevel)
        .collect();
    PopulationDistribution { populations, trapped, threshold }
}

/// Ground sublevels with no π coupling partner.
fn coupling_dark_ground(system: &TransitionSystem) -> Vec<SublevelRef> {
    let n = system.dim();
    (0..system.n_ground())
        .filter(|&g| (0..n).all(|e| system.coupling_op[(e, g)].norm() == 0.0))
        .map(|g| system.sublevel(g))
        .collect()
}

/// Ground sublevels dark to the coupling. Population can only flow into
/// them, so from the unpolarized start every one of them ends up populated
/// and the list coincides with the trapped set of [`pump_steady_state`].
pub fn dark_states(system: &TransitionSystem) -> Vec<SublevelRef> {
    coupling_dark_ground(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{HalfInt, Level};
    use crate::system::build_system;
    use std::f64::consts::FRAC_PI_2;

    fn h(v: i32) -> HalfInt {
        HalfInt::from_int(v)
    }

    fn sys(fg: i32, fe: i32, oc: f64) -> TransitionSystem {
        build_system(h(fg), h(fe), oc, 1.0, FRAC_PI_2, 0.0).unwrap()
    }

    #[test]
    fn two_to_one_splits_evenly_between_stretched_states() {
        let p = pump_steady_state(&sys(2, 1, 1.0)).unwrap();
        assert!((p.population(SublevelRef::ground(h(2))) - 0.5).abs() < 1e-10);
        assert!((p.population(SublevelRef::ground(h(-2))) - 0.5).abs() < 1e-10);
        assert_eq!(p.trapped, vec![SublevelRef::ground(h(-2)), SublevelRef::ground(h(2))]);
        assert!((p.total() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn one_to_one_traps_in_m_zero() {
        let p = pump_steady_state(&sys(1, 1, 1.0)).unwrap();
        assert!((p.population(SublevelRef::ground(h(0))) - 1.0).abs() < 1e-10);
        assert_eq!(p.trapped, vec![SublevelRef::ground(h(0))]);
    }

    #[test]
    fn no_coupling_leaves_uniform_ground() {
        let p = pump_steady_state(&sys(2, 1, 0.0)).unwrap();
        for m in -2..=2 {
            assert!((p.population(SublevelRef::ground(h(m))) - 0.2).abs() < 1e-12);
        }
        assert_eq!(p.trapped.len(), 5);
    }

    #[test]
    fn dark_states_examples() {
        assert_eq!(dark_states(&sys(2, 2, 1.0)), vec![SublevelRef::ground(h(0))]);
        assert!(dark_states(&sys(1, 2, 1.0)).is_empty());
        assert!(dark_states(&sys(0, 1, 1.0)).is_empty());
    }

    #[test]
    fn normal_system_has_no_trapping() {
        let p = pump_steady_state(&sys(1, 2, 1.0)).unwrap();
        assert!(p.trapped.is_empty());
        let excited: f64 = p
            .populations
            .iter()
            .filter(|s| s.sublevel.level == Level::Excited)
            .map(|s| s.population)
            .sum();
        assert!(excited > 0.01);
    }
}
