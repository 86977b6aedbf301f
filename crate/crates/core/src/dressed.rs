//! Resonant dressed-state basis of the coupling field.
//!
//! Every sublevel pair `|m⟩, |m′⟩` with a nonzero π coupling
//! `g_m = (Ω_c/2) e^{iφ_c} c_m = |g_m| e^{iφ_m}` forms a doublet
//!
//! ```text
//! |m+⟩ = (e^{−iφ_m} |m⟩ + |m′⟩) / √2      energy +Ω_m/2
//! |m−⟩ = (|m⟩ − e^{iφ_m} |m′⟩) / √2       energy −Ω_m/2
//! ```
//!
//! with `Ω_m = 2|g_m| = Ω_c |c_m|`. Sublevels without π coupling pass through
//! as bare survivors. Photon-number bookkeeping lives in [`ManifoldLabel`]:
//! manifold `N` holds `|m, N+1⟩` (ground, `N+1` coupling photons) and
//! `|m′, N⟩`, and one absorbed probe photon raises `N` by one.

use std::cmp::Ordering;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::{HalfInt, Level, SublevelRef};
use crate::error::{DamsError, Result};
use crate::system::{CMatrix, TransitionSystem};

/// Below this |c_m|·Ω_c a sublevel pair counts as uncoupled.
const COUPLING_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StateLabel {
    Bare { sublevel: SublevelRef },
    Dressed { m: HalfInt, branch: Branch },
}

impl StateLabel {
    pub fn is_bare(&self) -> bool {
        matches!(self, StateLabel::Bare { .. })
    }

    fn sort_key(&self) -> (u8, i32, i32) {
        match *self {
            StateLabel::Bare { sublevel } => (
                match sublevel.level {
                    Level::Ground => 0,
                    Level::Excited => 2,
                },
                sublevel.m.twice(),
                0,
            ),
            StateLabel::Dressed { m, branch } => (1, m.twice(), branch.sign() as i32),
        }
    }
}

impl PartialOrd for StateLabel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for StateLabel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateLabel::Bare { sublevel } => write!(f, "{sublevel}"),
            StateLabel::Dressed { m, branch } => {
                let s = if *branch == Branch::Plus { "+" } else { "-" };
                write!(f, "|{m}{s}⟩")
            }
        }
    }
}

/// A state label tagged with its manifold index (`n`, `n+1`, `n+2`, …
/// relative to the manifold of the initial state).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ManifoldLabel {
    pub manifold: i32,
    pub state: StateLabel,
}

fn photon_tag(n: i32) -> String {
    match n.cmp(&0) {
        Ordering::Equal => "n".to_string(),
        Ordering::Greater => format!("n+{n}"),
        Ordering::Less => format!("n{n}"),
    }
}

impl fmt::Display for ManifoldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.state {
            StateLabel::Bare { sublevel } => {
                let photons = match sublevel.level {
                    Level::Ground => self.manifold + 1,
                    Level::Excited => self.manifold,
                };
                let prime = if sublevel.level == Level::Excited { "′" } else { "" };
                write!(f, "|{}{},{}⟩", sublevel.m, prime, photon_tag(photons))
            }
            StateLabel::Dressed { m, branch } => {
                let s = if branch == Branch::Plus { "+" } else { "-" };
                write!(f, "|{m}{s},{}⟩", photon_tag(self.manifold))
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DressedDoublet {
    pub m: HalfInt,
    /// Splitting `Ω_m` in units of Γ.
    pub omega_m: f64,
    /// Phase `φ_m` of the coupling matrix element `g_m`.
    pub phi_m: f64,
    /// Components over `(|m⟩, |m′⟩)`.
    pub plus_state: [Complex64; 2],
    pub minus_state: [Complex64; 2],
}

#[derive(Clone, Debug)]
pub struct DressedBasis {
    pub doublets: Vec<DressedDoublet>,
    pub bare_survivors: Vec<SublevelRef>,
    /// Column `k` is state `labels[k]` expanded over the bare basis.
    pub transform: CMatrix,
    pub labels: Vec<StateLabel>,
}

impl DressedBasis {
    pub fn doublet(&self, m: HalfInt) -> Option<&DressedDoublet> {
        self.doublets.iter().find(|d| d.m == m)
    }

    pub fn position(&self, label: &StateLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Serializable summary (doublets, splittings, phases, survivors).
    pub fn dump(&self) -> DressedBasisDump {
        DressedBasisDump {
            doublets: self
                .doublets
                .iter()
                .map(|d| DoubletDump {
                    m: d.m,
                    omega_m: d.omega_m,
                    phi_m: d.phi_m,
                    plus_state: d.plus_state.map(|c| [c.re, c.im]),
                    minus_state: d.minus_state.map(|c| [c.re, c.im]),
                })
                .collect(),
            bare_survivors: self.bare_survivors.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubletDump {
    pub m: HalfInt,
    pub omega_m: f64,
    pub phi_m: f64,
    /// `[re, im]` pairs over `(|m⟩, |m′⟩)`.
    pub plus_state: [[f64; 2]; 2],
    pub minus_state: [[f64; 2]; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DressedBasisDump {
    pub doublets: Vec<DoubletDump>,
    pub bare_survivors: Vec<SublevelRef>,
}

/// Builds the dressed basis of `system`.
///
/// Columns follow the bare ordering: a coupled ground sublevel is replaced by
/// its `+` state and the matching excited sublevel by its `−` state, so an
/// undressed system (`Ω_c = 0`) yields the identity transform.
pub fn dress(system: &TransitionSystem) -> DressedBasis {
    let n = system.dim();
    let ng = system.n_ground();
    let mut doublets = Vec::new();
    for m in system.f_g.projections() {
        let Some(e) = system.index_of(SublevelRef::excited(m)) else { continue };
        let g = system.index_of(SublevelRef::ground(m)).expect("ground projection");
        // ⟨m′|H|m⟩
        let g_m = system.coupling_op[(e, g)];
        if g_m.norm() <= COUPLING_FLOOR {
            continue;
        }
        let phi = g_m.arg();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        doublets.push(DressedDoublet {
            m,
            omega_m: 2.0 * g_m.norm(),
            phi_m: phi,
            plus_state: [Complex64::from_polar(r, -phi), Complex64::new(r, 0.0)],
            minus_state: [Complex64::new(r, 0.0), -Complex64::from_polar(r, phi)],
        });
    }

    let mut labels = Vec::with_capacity(n);
    let mut transform = CMatrix::zeros(n, n);
    let mut survivors = Vec::new();
    for col in 0..n {
        let s = system.sublevel(col);
        match doublets.iter().find(|d| d.m == s.m) {
            Some(d) => {
                let g = system.index_of(SublevelRef::ground(s.m)).expect("ground");
                let e = system.index_of(SublevelRef::excited(s.m)).expect("excited");
                let (branch, v) = if col < ng {
                    (Branch::Plus, d.plus_state)
                } else {
                    (Branch::Minus, d.minus_state)
                };
                transform[(g, col)] = v[0];
                transform[(e, col)] = v[1];
                labels.push(StateLabel::Dressed { m: s.m, branch });
            }
            None => {
                transform[(col, col)] = Complex64::new(1.0, 0.0);
                labels.push(StateLabel::Bare { sublevel: s });
                survivors.push(s);
            }
        }
    }

    DressedBasis { doublets, bare_survivors: survivors, transform, labels }
}

/// Energy of `label` relative to its manifold center, in units of Γ.
pub fn dressed_energy(basis: &DressedBasis, label: &StateLabel) -> Result<f64> {
    match label {
        StateLabel::Bare { sublevel } => {
            if basis.bare_survivors.contains(sublevel) {
                Ok(0.0)
            } else {
                Err(DamsError::UnknownLabel(label.to_string()))
            }
        }
        StateLabel::Dressed { m, branch } => basis
            .doublet(*m)
            .map(|d| branch.sign() * d.omega_m / 2.0)
            .ok_or_else(|| DamsError::UnknownLabel(label.to_string())),
    }
}

/// Unit-probe matrix elements `⟨f|P|i⟩` between dressed/bare labels, with `f`
/// one manifold above `i`. Row and column order follow `basis.labels`.
pub fn probe_in_dressed_basis(system: &TransitionSystem, basis: &DressedBasis) -> CMatrix {
    basis.transform.adjoint() * &system.probe_op * &basis.transform
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::build_system;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn h(v: i32) -> HalfInt {
        HalfInt::from_int(v)
    }

    #[test]
    fn two_to_one_doublets_and_survivors() {
        let sys = build_system(h(2), h(1), 1.0, 1.0, FRAC_PI_2, 0.0).unwrap();
        let b = dress(&sys);
        let ms: Vec<_> = b.doublets.iter().map(|d| d.m).collect();
        assert_eq!(ms, vec![h(-1), h(0), h(1)]);
        assert_eq!(b.bare_survivors, vec![SublevelRef::ground(h(-2)), SublevelRef::ground(h(2))]);
    }

    #[test]
    fn one_to_one_survivors() {
        let sys = build_system(h(1), h(1), 1.0, 1.0, FRAC_PI_2, 0.0).unwrap();
        let b = dress(&sys);
        let ms: Vec<_> = b.doublets.iter().map(|d| d.m).collect();
        assert_eq!(ms, vec![h(-1), h(1)]);
        assert_eq!(b.bare_survivors, vec![SublevelRef::ground(h(0)), SublevelRef::excited(h(0))]);
    }

    #[test]
    fn undressed_system_has_identity_transform() {
        let sys = build_system(h(2), h(2), 0.0, 1.0, FRAC_PI_2, 0.0).unwrap();
        let b = dress(&sys);
        assert!(b.doublets.is_empty());
        assert_eq!((b.transform.clone() - CMatrix::identity(10, 10)).norm(), 0.0);
    }

    #[test]
    fn energies() {
        let sys = build_system(h(2), h(1), 2.0, 1.0, FRAC_PI_2, 0.0).unwrap();
        let b = dress(&sys);
        let omega1 = 2.0 * (3.0f64 / 10.0).sqrt();
        let omega0 = 2.0 * (4.0f64 / 10.0).sqrt();
        let e = dressed_energy(&b, &StateLabel::Dressed { m: h(1), branch: Branch::Minus }).unwrap();
        assert_relative_eq!(e, -omega1 / 2.0, max_relative = 1e-14);
        let e = dressed_energy(&b, &StateLabel::Dressed { m: h(0), branch: Branch::Plus }).unwrap();
        assert_relative_eq!(e, omega0 / 2.0, max_relative = 1e-14);
        let bare2 = StateLabel::Bare { sublevel: SublevelRef::ground(h(2)) };
        assert_eq!(dressed_energy(&b, &bare2).unwrap(), 0.0);
        let bogus = StateLabel::Bare { sublevel: SublevelRef::ground(h(1)) };
        assert!(dressed_energy(&b, &bogus).is_err());
    }

    #[test]
    fn probe_element_from_bare_state_matches_substitution() {
        let sys = build_system(h(2), h(1), 1.7, 1.0, FRAC_PI_2, 0.9).unwrap();
        let b = dress(&sys);
        let v = probe_in_dressed_basis(&sys, &b);
        let i = b.position(&StateLabel::Bare { sublevel: SublevelRef::ground(h(2)) }).unwrap();
        let f = b.position(&StateLabel::Dressed { m: h(1), branch: Branch::Minus }).unwrap();
        let phi = b.doublet(h(1)).unwrap().phi_m;
        let bare = sys.probe_op[(
            sys.index_of(SublevelRef::excited(h(1))).unwrap(),
            sys.index_of(SublevelRef::ground(h(2))).unwrap(),
        )];
        let expected = -Complex64::from_polar(1.0, -phi) * bare / 2f64.sqrt();
        assert!((v[(f, i)] - expected).norm() < 1e-14);
    }

    #[test]
    fn perpendicular_probe_respects_selection_rule() {
        let sys = build_system(h(2), h(2), 1.0, 1.0, FRAC_PI_2, 0.3).unwrap();
        let b = dress(&sys);
        let v = probe_in_dressed_basis(&sys, &b);
        let m_of = |l: &StateLabel| match l {
            StateLabel::Bare { sublevel } => sublevel.m,
            StateLabel::Dressed { m, .. } => *m,
        };
        for (r, lr) in b.labels.iter().enumerate() {
            for (c, lc) in b.labels.iter().enumerate() {
                if (m_of(lr).twice() - m_of(lc).twice()).abs() != 2 {
                    assert!(v[(r, c)].norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn row_norms_are_basis_independent() {
        let sys = build_system(h(2), h(1), 1.3, 1.0, 1.0, 0.4).unwrap();
        let b = dress(&sys);
        let v = probe_in_dressed_basis(&sys, &b);
        assert_relative_eq!(v.norm(), sys.probe_op.norm(), max_relative = 1e-14);
    }
}
