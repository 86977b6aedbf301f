//! The degenerate two-level model: sublevels, π-polarized resonant coupling,
//! linearly polarized probe, and spontaneous-decay jump operators.
//!
//! Basis ordering: ground sublevels `m = −F_g … F_g`, then excited sublevels
//! `m = −F_e … F_e`. The rotating frame turns at the coupling frequency, which
//! sits on the atomic resonance, so the only frequency left is the probe
//! detuning `δ = ω_p − ω`.
//!
//! Field strengths are Rabi frequencies in units of `Γ`. The coupling
//! Hamiltonian is `C + C†` with `C = (Ω_c e^{iφ_c}/2) D_0`, and a probe of
//! Rabi frequency `Ω_p` and phase `χ` adds `(Ω_p/2)(e^{−iχ} P + e^{iχ} P†)`,
//! where `D_q` is the raising dipole matrix for component `q` and
//! `P = Σ_q ε_q D_q` is the unit probe operator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{dipole_element, HalfInt, Level, SublevelRef};
use crate::error::{DamsError, Result};

pub type CMatrix = DMatrix<Complex64>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Spherical decomposition of a linear probe polarization at angle `theta`
/// to the coupling (quantization) axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeGeometry {
    pub theta: f64,
    pub eps_minus: Complex64,
    pub eps_0: Complex64,
    pub eps_plus: Complex64,
}

impl ProbeGeometry {
    pub fn component(&self, q: i32) -> Complex64 {
        match q {
            -1 => self.eps_minus,
            0 => self.eps_0,
            1 => self.eps_plus,
            _ => ZERO,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.eps_minus.norm_sqr() + self.eps_0.norm_sqr() + self.eps_plus.norm_sqr()
    }
}

/// `ε_0 = cos θ`, `ε_± = ∓ sin θ / √2`.
pub fn polarization_components(theta: f64) -> ProbeGeometry {
    let (s, c) = theta.sin_cos();
    let r = s / std::f64::consts::SQRT_2;
    ProbeGeometry {
        theta,
        eps_minus: Complex64::new(r, 0.0),
        eps_0: Complex64::new(c, 0.0),
        eps_plus: Complex64::new(-r, 0.0),
    }
}

#[derive(Clone, Debug)]
pub struct TransitionSystem {
    pub f_g: HalfInt,
    pub f_e: HalfInt,
    pub omega_c_rabi: f64,
    pub gamma: f64,
    pub coupling_phase: f64,
    pub probe_geometry: ProbeGeometry,
    /// Extra excited-state decay that returns atoms to the ground level
    /// unpolarized. Zero for the closed two-manifold model.
    pub external_loss: f64,
    /// Raising part `C` of the coupling Hamiltonian (excited ← ground).
    pub coupling_op: CMatrix,
    /// Unit probe operator `P` (excited ← ground).
    pub probe_op: CMatrix,
    /// Jump operators for `q = −1, 0, +1`, each `√Γ D_q†`.
    pub decay_channels: Vec<CMatrix>,
    /// Jump operators for the external loss channel (empty when it is off).
    pub loss_channels: Vec<CMatrix>,
    /// Raising dipole matrices `D_q` for `q = −1, 0, +1`.
    dipole: [CMatrix; 3],
}

impl TransitionSystem {
    pub fn n_ground(&self) -> usize {
        self.f_g.multiplicity()
    }

    pub fn n_excited(&self) -> usize {
        self.f_e.multiplicity()
    }

    pub fn dim(&self) -> usize {
        self.n_ground() + self.n_excited()
    }

    /// Basis index of a sublevel, or `None` when `m` lies outside its level.
    pub fn index_of(&self, s: SublevelRef) -> Option<usize> {
        let (f, offset) = match s.level {
            Level::Ground => (self.f_g, 0),
            Level::Excited => (self.f_e, self.n_ground()),
        };
        if s.m.abs() > f || (f.twice() - s.m.twice()) % 2 != 0 {
            return None;
        }
        Some(offset + ((s.m.twice() + f.twice()) / 2) as usize)
    }

    pub fn sublevel(&self, index: usize) -> SublevelRef {
        let ng = self.n_ground();
        if index < ng {
            SublevelRef::ground(HalfInt::from_twice(2 * index as i32 - self.f_g.twice()))
        } else {
            SublevelRef::excited(HalfInt::from_twice(2 * (index - ng) as i32 - self.f_e.twice()))
        }
    }

    pub fn sublevels(&self) -> Vec<SublevelRef> {
        (0..self.dim()).map(|i| self.sublevel(i)).collect()
    }

    pub fn ground_sublevels(&self) -> Vec<SublevelRef> {
        (0..self.n_ground()).map(|i| self.sublevel(i)).collect()
    }

    /// Raising dipole matrix for spherical component `q`.
    pub fn dipole_matrix(&self, q: i32) -> &CMatrix {
        &self.dipole[(q + 1) as usize]
    }

    /// π Clebsch–Gordan coefficient `c_m` of the coupling transition `|m⟩ ↔ |m′⟩`.
    pub fn pi_coefficient(&self, m: HalfInt) -> f64 {
        match (self.index_of(SublevelRef::ground(m)), self.index_of(SublevelRef::excited(m))) {
            (Some(g), Some(e)) => self.dipole[1][(e, g)].re,
            _ => 0.0,
        }
    }

    /// Coupling-only Hamiltonian `C + C†`.
    pub fn coupling_hamiltonian(&self) -> CMatrix {
        &self.coupling_op + self.coupling_op.adjoint()
    }

    /// Time-independent Hamiltonian when probe and coupling share a frequency,
    /// with the probe carrying relative phase `chi`.
    pub fn degenerate_hamiltonian(&self, probe_rabi: f64, chi: f64) -> CMatrix {
        let w = Complex64::from_polar(probe_rabi / 2.0, -chi);
        let p = self.probe_op.map(|x| x * w);
        self.coupling_hamiltonian() + &p + p.adjoint()
    }

    /// All dissipative jump operators (spontaneous decay plus external loss).
    pub fn jump_operators(&self) -> impl Iterator<Item = &CMatrix> {
        self.decay_channels.iter().chain(self.loss_channels.iter())
    }

    /// Adds an unpolarized-return loss channel of rate `rate` out of every
    /// excited sublevel.
    pub fn with_external_loss(mut self, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(DamsError::Domain(format!("external loss rate {rate} must be >= 0")));
        }
        self.external_loss = rate;
        self.loss_channels.clear();
        if rate > 0.0 {
            let (ng, n) = (self.n_ground(), self.dim());
            let amp = Complex64::new((rate / ng as f64).sqrt(), 0.0);
            for g in 0..ng {
                for e in ng..n {
                    let mut j = CMatrix::zeros(n, n);
                    j[(g, e)] = amp;
                    self.loss_channels.push(j);
                }
            }
        }
        Ok(self)
    }

    /// Short identifier such as `F_g=2->F_e=1`.
    pub fn id(&self) -> String {
        format!("F_g={}->F_e={}", self.f_g, self.f_e)
    }
}

/// Assembles the operators of a degenerate two-level system.
pub fn build_system(
    f_g: HalfInt,
    f_e: HalfInt,
    omega_c_rabi: f64,
    gamma: f64,
    theta: f64,
    coupling_phase: f64,
) -> Result<TransitionSystem> {
    if f_g.twice() < 0 || f_e.twice() < 0 {
        return Err(DamsError::Domain("angular momenta must be non-negative".into()));
    }
    if (f_e.twice() - f_g.twice()).abs() > 2 || (f_e.twice() - f_g.twice()) % 2 != 0 {
        return Err(DamsError::Domain(format!(
            "F_g={f_g} -> F_e={f_e} is not a dipole-allowed pair"
        )));
    }
    if f_g.twice() == 0 && f_e.twice() == 0 {
        return Err(DamsError::Domain("F_g = F_e = 0 has no dipole transition".into()));
    }
    if !(omega_c_rabi >= 0.0) || !omega_c_rabi.is_finite() {
        return Err(DamsError::Domain(format!("coupling Rabi frequency {omega_c_rabi} must be >= 0")));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(DamsError::Domain(format!("decay rate {gamma} must be > 0")));
    }
    if !theta.is_finite() || !coupling_phase.is_finite() {
        return Err(DamsError::Domain("angles must be finite".into()));
    }

    let ng = f_g.multiplicity();
    let n = ng + f_e.multiplicity();
    let mut dipole = [CMatrix::zeros(n, n), CMatrix::zeros(n, n), CMatrix::zeros(n, n)];
    for (gi, m_g) in f_g.projections().enumerate() {
        for (ei, m_e) in f_e.projections().enumerate() {
            let d = dipole_element(f_g, m_g, f_e, m_e)?;
            if d.q.abs() <= 1 && d.value != 0.0 {
                dipole[(d.q + 1) as usize][(ng + ei, gi)] = Complex64::new(d.value, 0.0);
            }
        }
    }

    let geometry = polarization_components(theta);
    let mut probe_op = CMatrix::zeros(n, n);
    for q in -1..=1 {
        probe_op += dipole[(q + 1) as usize].map(|x| x * geometry.component(q));
    }
    let coupling_scale = Complex64::from_polar(omega_c_rabi / 2.0, coupling_phase);
    let coupling_op = dipole[1].map(|x| x * coupling_scale);
    let sqrt_gamma = gamma.sqrt();
    let decay_channels = dipole.iter().map(|d| d.adjoint().map(|x| x * sqrt_gamma)).collect();

    Ok(TransitionSystem {
        f_g,
        f_e,
        omega_c_rabi,
        gamma,
        coupling_phase,
        probe_geometry: geometry,
        external_loss: 0.0,
        coupling_op,
        probe_op,
        decay_channels,
        loss_channels: Vec::new(),
        dipole,
    })
}
