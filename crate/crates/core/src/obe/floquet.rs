//! Harmonic balance in the probe–coupling beat frequency.
//!
//! With `ρ(t) = Σ_k ρ⁽ᵏ⁾ e^{−ikδt}` the master equation splits into
//!
//! ```text
//! (L₀ + ikδ) ρ⁽ᵏ⁾ + L₊ ρ⁽ᵏ⁻¹⁾ + L₋ ρ⁽ᵏ⁺¹⁾ = 0,
//! ```
//!
//! `L₊ = −i(Ω_p/2)[P, ·]`, `L₋ = −i(Ω_p/2)[P†, ·]`, truncated at `|k| ≤ K`.
//! One population equation of the `k = 0` block is replaced by `Tr ρ⁽⁰⁾ = 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::blocktri;
use crate::error::{DamsError, Result};
use crate::liouville::{drive_super, unvectorize, vectorize, CVector};
use crate::pumping::{coupling_liouvillian, pumped_density_matrix};
use crate::system::{CMatrix, TransitionSystem};

pub const DEFAULT_K: usize = 4;
pub const K_LIMIT: usize = 64;
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Absorbed power divided by probe intensity (`Ω_p²`).
    #[default]
    PerIntensity,
    /// The absorbed power `R` itself, proportional to `Ω_p²` at weak probe.
    Raw,
}

impl Normalization {
    pub fn name(self) -> &'static str {
        match self {
            Normalization::PerIntensity => "per-intensity",
            Normalization::Raw => "raw",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FloquetSolution {
    /// Truncation order `K`.
    pub k_max: usize,
    pub delta: f64,
    pub probe_rabi: f64,
    /// `ρ⁽ᵏ⁾` at index `k + K`.
    pub harmonics: Vec<CMatrix>,
    /// Norm of the residual of the full harmonic-balance system.
    pub residual: f64,
}

impl FloquetSolution {
    pub fn harmonic(&self, k: i64) -> Option<&CMatrix> {
        let idx = k + self.k_max as i64;
        (0..self.harmonics.len() as i64).contains(&idx).then(|| &self.harmonics[idx as usize])
    }
}

/// Probe superoperators `(L₊, L₋)` for Rabi frequency `probe_rabi`.
pub fn probe_supers(system: &TransitionSystem, probe_rabi: f64) -> (CMatrix, CMatrix) {
    let p = &system.probe_op;
    (drive_super(p, probe_rabi), drive_super(&p.adjoint(), probe_rabi))
}

/// Solves the truncated harmonic-balance system at detuning `delta ≠ 0`.
pub fn floquet_solve(system: &TransitionSystem, probe_rabi: f64, delta: f64, k_max: usize) -> Result<FloquetSolution> {
    if !(probe_rabi >= 0.0) || !probe_rabi.is_finite() {
        return Err(DamsError::Domain(format!("probe Rabi frequency {probe_rabi} must be >= 0")));
    }
    if k_max < 1 {
        return Err(DamsError::Domain("harmonic truncation K must be >= 1".into()));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(DamsError::Domain(format!(
            "harmonic balance needs a nonzero finite detuning, got {delta}; use the degenerate solver"
        )));
    }
    let n = system.dim();
    let nb = 2 * k_max + 1;
    if probe_rabi == 0.0 {
        let mut harmonics = vec![CMatrix::zeros(n, n); nb];
        harmonics[k_max] = pumped_density_matrix(system)?;
        return Ok(FloquetSolution { k_max, delta, probe_rabi, harmonics, residual: 0.0 });
    }

    let nn = n * n;
    let l0 = coupling_liouvillian(system);
    let (lp, lm) = probe_supers(system, probe_rabi);
    let trace_row = vectorize(&CMatrix::identity(n, n)).transpose();
    let k_of = |b: usize| b as f64 - k_max as f64;

    let diag = |b: usize| {
        let mut d = l0.clone();
        let shift = Complex64::new(0.0, k_of(b) * delta);
        for i in 0..nn {
            d[(i, i)] += shift;
        }
        if b == k_max {
            d.row_mut(0).copy_from(&trace_row);
        }
        d
    };
    let lower = |b: usize| {
        let mut m = lp.clone();
        if b == k_max {
            m.row_mut(0).fill(Complex64::new(0.0, 0.0));
        }
        m
    };
    let upper = |b: usize| {
        let mut m = lm.clone();
        if b == k_max {
            m.row_mut(0).fill(Complex64::new(0.0, 0.0));
        }
        m
    };
    let mut rhs = vec![CVector::zeros(nn); nb];
    rhs[k_max][0] = Complex64::new(1.0, 0.0);

    let sol = blocktri::solve(nb, k_max, diag, lower, upper, &rhs, &format!("harmonic balance at δ = {delta}"))?;

    let mut residual = 0.0;
    for b in 0..nb {
        let mut r = diag(b) * &sol.blocks[b] - &rhs[b];
        if b > 0 {
            r += lower(b) * &sol.blocks[b - 1];
        }
        if b + 1 < nb {
            r += upper(b) * &sol.blocks[b + 1];
        }
        residual += r.norm_squared();
    }
    let harmonics = sol.blocks.iter().map(|v| unvectorize(v, n)).collect();
    Ok(FloquetSolution { k_max, delta, probe_rabi, harmonics, residual: residual.sqrt() })
}

/// `R = −Ω_p Im Tr(P† ρ⁽¹⁾)`, positive for absorption. Per-intensity mode
/// divides by `Ω_p²`; at `Ω_p = 0` that limit is the linear response.
pub fn absorption_at(solution: &FloquetSolution, system: &TransitionSystem, normalization: Normalization) -> Result<f64> {
    let op = solution.probe_rabi;
    if op == 0.0 {
        return match normalization {
            Normalization::Raw => Ok(0.0),
            Normalization::PerIntensity => linear_response(system, solution.delta),
        };
    }
    let rho1 = solution.harmonic(1).expect("K >= 1");
    let raw = -op * (system.probe_op.adjoint() * rho1).trace().im;
    Ok(match normalization {
        Normalization::Raw => raw,
        Normalization::PerIntensity => raw / (op * op),
    })
}

#[derive(Clone, Debug)]
pub struct Converged {
    pub solution: FloquetSolution,
    pub absorption: f64,
}

/// Doubles `K` from `k_start` until the absorption moves by less than
/// `CONVERGENCE_TOL · max(1, |a|)`.
pub fn converged_absorption(
    system: &TransitionSystem,
    probe_rabi: f64,
    delta: f64,
    k_start: usize,
    normalization: Normalization,
) -> Result<Converged> {
    let mut k = k_start.max(1);
    let solution = floquet_solve(system, probe_rabi, delta, k)?;
    let mut a = absorption_at(&solution, system, normalization)?;
    if probe_rabi == 0.0 {
        return Ok(Converged { solution, absorption: a });
    }
    let mut last_change = f64::INFINITY;
    while 2 * k <= K_LIMIT {
        k *= 2;
        let solution = floquet_solve(system, probe_rabi, delta, k)?;
        let b = absorption_at(&solution, system, normalization)?;
        last_change = (b - a).abs();
        if last_change < CONVERGENCE_TOL * b.abs().max(1.0) {
            return Ok(Converged { solution, absorption: b });
        }
        a = b;
    }
    Err(DamsError::Convergence { k_max: k, last_change })
}

/// First-order response per unit probe intensity, `−Im Tr(P† ρ₁)` with
/// `(L₀ + iδ) ρ₁ = −L₊ ρ₀` at unit Rabi frequency. At `δ = 0` the equation
/// is solved with `Tr ρ₁ = 0` in the least-squares sense; the undetermined
/// part lies among ground-state coherences and does not reach the observable.
pub fn linear_response(system: &TransitionSystem, delta: f64) -> Result<f64> {
    let n = system.dim();
    let nn = n * n;
    let rho0 = pumped_density_matrix(system)?;
    let (lp, _) = probe_supers(system, 1.0);
    let mut a = coupling_liouvillian(system);
    for i in 0..nn {
        a[(i, i)] += Complex64::new(0.0, delta);
    }
    let b: CVector = -(lp * vectorize(&rho0));
    let x = if delta != 0.0 {
        a.lu().solve(&b).ok_or_else(|| DamsError::Singular {
            context: format!("linear response at δ = {delta}"),
            pivot_ratio: 0.0,
        })?
    } else {
        let mut a = a;
        let mut b = b;
        a.row_mut(0).copy_from(&vectorize(&CMatrix::identity(n, n)).transpose());
        b[0] = Complex64::new(0.0, 0.0);
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        svd.solve(&b, 1e-10 * smax).map_err(|e| DamsError::Singular {
            context: format!("linear response at δ = 0: {e}"),
            pivot_ratio: 0.0,
        })?
    };
    let rho1 = unvectorize(&x, n);
    Ok(-(system.probe_op.adjoint() * rho1).trace().im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::HalfInt;
    use crate::system::build_system;
    use std::f64::consts::FRAC_PI_2;

    fn h(v: i32) -> HalfInt {
        HalfInt::from_int(v)
    }

    #[test]
    fn two_level_lorentzian() {
        // 0 → 1 with the coupling off is a set of independent two-level atoms
        // for the σ components; weak-probe absorption is Lorentzian with
        // half-width Γ/2.
        let sys = build_system(h(0), h(1), 0.0, 1.0, FRAC_PI_2, 0.0).unwrap();
        let a = |d: f64| {
            let s = floquet_solve(&sys, 1e-3, d, 2).unwrap();
            absorption_at(&s, &sys, Normalization::PerIntensity).unwrap()
        };
        let peak = a(1e-6);
        assert!(peak > 0.0);
        assert!((a(0.5) / peak - 0.5).abs() < 1e-5);
        assert!((a(-0.5) - a(0.5)).abs() < 1e-12);
    }

    #[test]
    fn zero_probe_returns_pumped_state() {
        let sys = build_system(h(2), h(1), 1.0, 1.0, FRAC_PI_2, 0.0).unwrap();
        let s = floquet_solve(&sys, 0.0, 0.3, 3).unwrap();
        let rho0 = pumped_density_matrix(&sys).unwrap();
        assert!((s.harmonic(0).unwrap() - rho0).norm() < 1e-14);
        assert_eq!(s.harmonic(1).unwrap().norm(), 0.0);
        assert_eq!(absorption_at(&s, &sys, Normalization::Raw).unwrap(), 0.0);
    }

    #[test]
    fn harmonics_are_hermitian_pairs() {
        let sys = build_system(h(2), h(1), 1.0, 1.0, 1.0, 0.4).unwrap();
        let s = floquet_solve(&sys, 0.3, 0.2, 6).unwrap();
        assert!(s.residual < 1e-10);
        assert!((s.harmonic(0).unwrap().trace() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        for k in 1..=6 {
            let plus = s.harmonic(k).unwrap();
            let minus = s.harmonic(-k).unwrap();
            assert!((minus - plus.adjoint()).norm() < 1e-10);
            assert!(plus.trace().norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_zero_detuning() {
        let sys = build_system(h(1), h(1), 1.0, 1.0, FRAC_PI_2, 0.0).unwrap();
        assert!(matches!(floquet_solve(&sys, 0.1, 0.0, 4), Err(DamsError::Domain(_))));
    }

    #[test]
    fn parallel_probe_on_dark_system_is_singular() {
        // |±2⟩ are dark to both fields: two disconnected stationary sectors.
        let sys = build_system(h(2), h(1), 1.0, 1.0, 0.0, 0.0).unwrap();
        let err = floquet_solve(&sys, 0.1, 0.3, 4).err().unwrap();
        assert!(err.is_solver_error(), "{err}");
    }

    #[test]
    fn weak_probe_tends_to_linear_response() {
        let sys = build_system(h(1), h(2), 0.5, 1.0, FRAC_PI_2, 0.0).unwrap();
        let lin = linear_response(&sys, 0.4).unwrap();
        let s = floquet_solve(&sys, 1e-4, 0.4, 2).unwrap();
        let a = absorption_at(&s, &sys, Normalization::PerIntensity).unwrap();
        assert!((a - lin).abs() < 1e-6 * lin.abs().max(1.0));
    }
}
