//! Direct integration of the time-dependent master equation, used as an
//! independent check on the harmonic-balance solver.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::floquet::{probe_supers, Normalization};
use crate::error::{DamsError, Result};
use crate::liouville::{vectorize, CVector};
use crate::pumping::{coupling_liouvillian, pumped_density_matrix};
use crate::system::TransitionSystem;

pub const MIN_TRANSIENT: f64 = 50.0;
const RTOL: f64 = 1e-10;
const ATOL: f64 = 1e-10;
const MAX_STEPS: usize = 20_000_000;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) integration of `y' = f(t, y)` from `t0` to
/// `t1` (mixed tolerance `1e−10`). Uses the first-same-as-last property.
pub fn integrate<F>(f: F, t0: f64, t1: f64, mut y: CVector) -> Result<CVector>
where
    F: Fn(f64, &CVector) -> CVector,
{
    if t1 <= t0 {
        return Ok(y);
    }
    let mut t = t0;
    let mut h = ((t1 - t0) * 1e-3).min(0.05);
    let mut k1 = f(t, &y);
    let mut steps = 0usize;
    while t < t1 {
        steps += 1;
        if steps > MAX_STEPS {
            return Err(DamsError::Integration(format!("step budget exhausted at t = {t}")));
        }
        if t + h > t1 {
            h = t1 - t;
        }
        let mut k: Vec<CVector> = Vec::with_capacity(7);
        k.push(k1.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = A[s][j];
                if a != 0.0 {
                    ys.axpy(Complex64::new(h * a, 0.0), kj, Complex64::new(1.0, 0.0));
                }
            }
            k.push(f(t + C[s] * h, &ys));
        }
        let mut y5 = y.clone();
        let mut err = CVector::zeros(y.len());
        for s in 0..7 {
            if B5[s] != 0.0 {
                y5.axpy(Complex64::new(h * B5[s], 0.0), &k[s], Complex64::new(1.0, 0.0));
            }
            let e = B5[s] - B4[s];
            if e != 0.0 {
                err.axpy(Complex64::new(h * e, 0.0), &k[s], Complex64::new(1.0, 0.0));
            }
        }
        let mut acc = 0.0;
        for i in 0..y.len() {
            let scale = ATOL + RTOL * y[i].norm().max(y5[i].norm());
            acc += (err[i].norm() / scale).powi(2);
        }
        let en = (acc / y.len() as f64).sqrt();
        if en <= 1.0 {
            t += h;
            y = y5;
            k1 = k.swap_remove(6);
        }
        let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
        h *= if en <= 1.0 { factor } else { factor.min(1.0) };
        if h < 1e-12 * t.abs().max(1.0) {
            return Err(DamsError::Integration(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}

/// Time-averaged absorbed power with relative probe phase offset `chi`.
///
/// The state vector carries `vec(ρ)` plus one accumulator slot integrating
/// the instantaneous power `−Ω_p Im(e^{i(δt+χ)} Tr(P† ρ))` over the window.
pub fn time_domain_absorption(
    system: &TransitionSystem,
    probe_rabi: f64,
    delta: f64,
    chi: f64,
    t_transient: f64,
    t_average: f64,
    normalization: Normalization,
) -> Result<f64> {
    if !(t_transient >= MIN_TRANSIENT) {
        return Err(DamsError::Domain(format!("transient time {t_transient} must be >= {MIN_TRANSIENT}/Γ")));
    }
    if !(t_average > 0.0) || !t_average.is_finite() {
        return Err(DamsError::Domain(format!("averaging window {t_average} must be > 0")));
    }
    if delta != 0.0 {
        let periods = t_average * delta.abs() / (2.0 * PI);
        if (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) || periods.round() < 1.0 {
            return Err(DamsError::Domain(format!(
                "averaging window {t_average} is not a whole number of beat periods 2π/|δ|"
            )));
        }
    }
    if probe_rabi == 0.0 {
        return Ok(0.0);
    }
    let n = system.dim();
    let nn = n * n;
    let l0 = coupling_liouvillian(system);
    let (lp, lm) = probe_supers(system, probe_rabi);
    let pdag = system.probe_op.adjoint();

    let rhs = |t: f64, y: &CVector, accumulate: bool| {
        let rho = y.rows(0, nn);
        let phase = Complex64::from_polar(1.0, -(delta * t + chi));
        let drho = &l0 * rho + (&lp * rho) * phase + (&lm * rho) * phase.conj();
        let mut out = CVector::zeros(nn + 1);
        out.rows_mut(0, nn).copy_from(&drho);
        if accumulate {
            // Tr(P† ρ) = Σ_ij P†_ij ρ_ji
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..n {
                for j in 0..n {
                    tr += pdag[(i, j)] * rho[j * n + i];
                }
            }
            out[nn] = Complex64::new(-probe_rabi * (phase.conj() * tr).im, 0.0);
        }
        out
    };

    let mut y = CVector::zeros(nn + 1);
    y.rows_mut(0, nn).copy_from(&vectorize(&pumped_density_matrix(system)?));
    let y = integrate(|t, y| rhs(t, y, false), 0.0, t_transient, y)?;
    let y = integrate(|t, y| rhs(t, y, true), t_transient, t_transient + t_average, y)?;
    let raw = y[nn].re / t_average;
    Ok(match normalization {
        Normalization::Raw => raw,
        Normalization::PerIntensity => raw / (probe_rabi * probe_rabi),
    })
}

/// Time-domain counterpart of `absorption_at`, probe phase zero.
pub fn time_domain_solve(
    system: &TransitionSystem,
    probe_rabi: f64,
    delta: f64,
    t_transient: f64,
    t_average: f64,
) -> Result<f64> {
    time_domain_absorption(system, probe_rabi, delta, 0.0, t_transient, t_average, Normalization::PerIntensity)
}

/// A window of whole beat periods at least `min_window` long (or
/// `min_window` itself when `delta = 0`).
pub fn beat_window(delta: f64, min_window: f64) -> f64 {
    if delta == 0.0 {
        return min_window;
    }
    let period = 2.0 * PI / delta.abs();
    (min_window / period).ceil().max(1.0) * period
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_exponential_and_rotation() {
        let y0 = CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        let y = integrate(
            |_, y| CVector::from_vec(vec![-y[0], y[1] * Complex64::new(0.0, 1.0)]),
            0.0,
            3.0,
            y0,
        )
        .unwrap();
        assert!((y[0].re - (-3.0f64).exp()).abs() < 1e-9);
        assert!((y[1] - Complex64::from_polar(1.0, 3.0)).norm() < 1e-9);
    }

    #[test]
    fn window_is_whole_periods() {
        let w = beat_window(0.3, 50.0);
        let periods = w * 0.3 / (2.0 * PI);
        assert!((periods - periods.round()).abs() < 1e-12);
        assert!(w >= 50.0);
    }
}
