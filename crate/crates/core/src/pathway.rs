//! One- and two-photon probe pathways out of trapped bare states.
//!
//! Energies are measured from each manifold's center, so a pathway absorbing
//! `p` probe photons is resonant at `δ = (E_final − E_initial)/p`. Two-photon
//! amplitudes are second-order perturbation sums evaluated at that resonance,
//!
//! ```text
//! T = Σ_k ⟨f|V|k⟩⟨k|V|i⟩ / (E_k − E_i − δ_res)
//! ```
//!
//! with `V = P/2` (unit probe Rabi frequency). Amplitudes add coherently only
//! for a common `(initial, final)` pair; everything else adds as rates.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::HalfInt;
use crate::dressed::{dress, dressed_energy, probe_in_dressed_basis, DressedBasis, ManifoldLabel, StateLabel};
use crate::error::{DamsError, Result};
use crate::pumping::{pump_steady_state, PopulationDistribution};
use crate::system::{build_system, TransitionSystem};
use crate::trace::{check_grid, SpectrumTrace, TraceMeta};

/// Matrix elements below this are selection-rule zeros.
const ELEMENT_FLOOR: f64 = 1e-12;
/// Energy denominators below this (units of Γ) mark a divergent branch.
pub const DIVERGENCE_FLOOR: f64 = 1e-6;
/// Relative margin of the interference verdict.
pub const INTERFERENCE_EPS: f64 = 1e-9;
/// Peak positions closer than this sort as equal.
const SORT_QUANTUM: f64 = 1e-9;
/// Coupling strength (units of Γ) at which break-up predictions are made.
pub const REFERENCE_OMEGA_C: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PathwayClass {
    OnePhotonBareDressed,
    TwoPhotonBareBare,
    TwoPhotonBareDressed,
}

impl PathwayClass {
    pub fn photons(self) -> u8 {
        match self {
            PathwayClass::OnePhotonBareDressed => 1,
            _ => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            PathwayClass::OnePhotonBareDressed => "1BD",
            PathwayClass::TwoPhotonBareBare => "2BB",
            PathwayClass::TwoPhotonBareDressed => "2BD",
        }
    }
}

impl fmt::Display for PathwayClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interference {
    Constructive,
    Destructive,
    Mixed,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathBranch {
    pub intermediate: ManifoldLabel,
    /// `⟨f|V|k⟩⟨k|V|i⟩`.
    pub numerator: Complex64,
    /// `E_k − E_i − δ_res`.
    pub denominator: f64,
    /// `None` when the branch is divergent.
    pub amplitude: Option<Complex64>,
}

impl PathBranch {
    pub fn is_divergent(&self) -> bool {
        self.amplitude.is_none()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Pathway {
    pub id: String,
    pub class: PathwayClass,
    pub initial: ManifoldLabel,
    #[serde(rename = "final")]
    pub final_state: ManifoldLabel,
    pub branches: Vec<PathBranch>,
    /// Coherent sum of the finite branch amplitudes (or the single matrix
    /// element of a one-photon pathway).
    pub total_amplitude: Complex64,
    pub resonance_detuning: f64,
    pub initial_population: f64,
    pub interference: Interference,
    pub divergent: bool,
}

impl Pathway {
    /// `initial_population · |total_amplitude|²`.
    pub fn weight(&self) -> f64 {
        self.initial_population * self.total_amplitude.norm_sqr()
    }
}

fn make_id(class: PathwayClass, i: &ManifoldLabel, f: &ManifoldLabel) -> String {
    format!("{}:{}->{}", class.tag(), i, f)
}

/// Lists every probe pathway with up to `max_photons` photons out of the
/// trapped states of `pops`, sorted by `(class, initial, final)`.
pub fn enumerate_pathways(
    system: &TransitionSystem,
    basis: &DressedBasis,
    pops: &PopulationDistribution,
    max_photons: u8,
) -> Result<Vec<Pathway>> {
    if !(1..=2).contains(&max_photons) {
        return Err(DamsError::Domain(format!("max_photons must be 1 or 2, got {max_photons}")));
    }
    let v = probe_in_dressed_basis(system, basis) * Complex64::new(0.5, 0.0);
    let n = basis.labels.len();
    let energies: Vec<f64> =
        basis.labels.iter().map(|l| dressed_energy(basis, l)).collect::<Result<_>>()?;

    let mut out = Vec::new();
    for &start in &pops.trapped {
        let label = StateLabel::Bare { sublevel: start };
        let Some(i) = basis.position(&label) else { continue };
        let initial = ManifoldLabel { manifold: 0, state: label };
        let pop = pops.population(start);

        for f in 0..n {
            let el = v[(f, i)];
            if el.norm() <= ELEMENT_FLOOR || basis.labels[f].is_bare() {
                continue;
            }
            let final_state = ManifoldLabel { manifold: 1, state: basis.labels[f] };
            let class = PathwayClass::OnePhotonBareDressed;
            out.push(Pathway {
                id: make_id(class, &initial, &final_state),
                class,
                initial,
                final_state,
                branches: Vec::new(),
                total_amplitude: el,
                resonance_detuning: energies[f] - energies[i],
                initial_population: pop,
                interference: Interference::NotApplicable,
                divergent: false,
            });
        }

        if max_photons < 2 {
            continue;
        }
        for f in 0..n {
            let delta_res = (energies[f] - energies[i]) / 2.0;
            let branches: Vec<PathBranch> = (0..n)
                .filter(|&k| v[(k, i)].norm() > ELEMENT_FLOOR && v[(f, k)].norm() > ELEMENT_FLOOR)
                .map(|k| {
                    let numerator = v[(f, k)] * v[(k, i)];
                    let denominator = energies[k] - energies[i] - delta_res;
                    PathBranch {
                        intermediate: ManifoldLabel { manifold: 1, state: basis.labels[k] },
                        numerator,
                        denominator,
                        amplitude: (denominator.abs() >= DIVERGENCE_FLOOR).then(|| numerator / denominator),
                    }
                })
                .collect();
            if branches.is_empty() {
                continue;
            }
            let final_state = ManifoldLabel { manifold: 2, state: basis.labels[f] };
            let class = if final_state.state.is_bare() {
                PathwayClass::TwoPhotonBareBare
            } else {
                PathwayClass::TwoPhotonBareDressed
            };
            let amps: Vec<Option<Complex64>> = branches.iter().map(|b| b.amplitude).collect();
            out.push(Pathway {
                id: make_id(class, &initial, &final_state),
                class,
                initial,
                final_state,
                total_amplitude: amps.iter().flatten().sum(),
                interference: interference_verdict(&amps),
                divergent: amps.iter().any(Option::is_none),
                branches,
                resonance_detuning: delta_res,
                initial_population: pop,
            });
        }
    }
    out.sort_by(|a, b| (a.class, a.initial, a.final_state).cmp(&(b.class, b.initial, b.final_state)));
    Ok(out)
}

/// Second-order amplitude through one intermediate state, at the two-photon
/// resonance of `initial → final`. `None` for a divergent denominator.
pub fn branch_amplitude(
    system: &TransitionSystem,
    basis: &DressedBasis,
    initial: &StateLabel,
    intermediate: &StateLabel,
    final_state: &StateLabel,
) -> Result<Option<Complex64>> {
    let pos = |l: &StateLabel| basis.position(l).ok_or_else(|| DamsError::UnknownLabel(l.to_string()));
    let (i, k, f) = (pos(initial)?, pos(intermediate)?, pos(final_state)?);
    let (ei, ek, ef) = (
        dressed_energy(basis, initial)?,
        dressed_energy(basis, intermediate)?,
        dressed_energy(basis, final_state)?,
    );
    let v = probe_in_dressed_basis(system, basis) * Complex64::new(0.5, 0.0);
    let den = ek - ei - (ef - ei) / 2.0;
    Ok((den.abs() >= DIVERGENCE_FLOOR).then(|| v[(f, k)] * v[(k, i)] / den))
}

/// Compares `|Σ T_k|²` against `Σ |T_k|²`. Divergent branches (`None`) are
/// ignored; fewer than two finite branches is `NotApplicable`.
pub fn interference_verdict(branches: &[Option<Complex64>]) -> Interference {
    let finite: Vec<Complex64> = branches.iter().flatten().copied().collect();
    if finite.len() < 2 {
        return Interference::NotApplicable;
    }
    let coherent = finite.iter().sum::<Complex64>().norm_sqr();
    let incoherent: f64 = finite.iter().map(|t| t.norm_sqr()).sum();
    if coherent > incoherent * (1.0 + INTERFERENCE_EPS) {
        Interference::Constructive
    } else if coherent < incoherent * (1.0 - INTERFERENCE_EPS) {
        Interference::Destructive
    } else {
        Interference::Mixed
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Peak {
    pub delta: f64,
    pub weight: f64,
    pub class: PathwayClass,
    pub photons: u8,
    pub constituents: Vec<String>,
    pub interference: Interference,
    /// Some constituent had a divergent branch.
    pub divergent: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeakTable {
    pub peaks: Vec<Peak>,
    pub merge_tolerance: f64,
}

impl PeakTable {
    pub fn two_photon(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.photons == 2)
    }

    pub fn one_photon(&self) -> impl Iterator<Item = &Peak> {
        self.peaks.iter().filter(|p| p.photons == 1)
    }

    /// `delta,weight,class,photons,interference,divergent`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,weight,class,photons,interference,divergent\n");
        for p in &self.peaks {
            out.push_str(&format!(
                "{},{},{},{},{:?},{}\n",
                crate::trace::sig12(p.delta),
                crate::trace::sig12(p.weight),
                p.class,
                p.photons,
                p.interference,
                p.divergent
            ));
        }
        out
    }
}

fn combined_verdict(verdicts: impl Iterator<Item = Interference>) -> Interference {
    let mut seen: Option<Interference> = None;
    for v in verdicts.filter(|v| *v != Interference::NotApplicable) {
        match seen {
            None => seen = Some(v),
            Some(s) if s != v => return Interference::Mixed,
            _ => {}
        }
    }
    seen.unwrap_or(Interference::NotApplicable)
}

/// Groups pathways into spectral peaks.
///
/// Each pathway already carries the coherent sum over its branches. Pathways
/// of the same photon order whose resonances chain within `merge_tolerance`
/// form one peak, with weights added and the position weight-averaged.
/// One- and two-photon peaks are kept apart even when they coincide, since
/// they scale differently with probe intensity.
pub fn peak_table(pathways: &[Pathway], merge_tolerance: f64) -> PeakTable {
    let mut peaks = Vec::new();
    for photons in [1u8, 2] {
        let mut group: Vec<&Pathway> = pathways.iter().filter(|p| p.class.photons() == photons).collect();
        group.sort_by(|a, b| {
            a.resonance_detuning.total_cmp(&b.resonance_detuning).then_with(|| a.id.cmp(&b.id))
        });
        let mut clusters: Vec<Vec<&Pathway>> = Vec::new();
        for p in group {
            match clusters.last_mut() {
                Some(c) if p.resonance_detuning - c.last().unwrap().resonance_detuning < merge_tolerance => c.push(p),
                _ => clusters.push(vec![p]),
            }
        }
        for c in clusters {
            let weight: f64 = c.iter().map(|p| p.weight()).sum();
            let delta = if weight > 0.0 {
                c.iter().map(|p| p.weight() * p.resonance_detuning).sum::<f64>() / weight
            } else {
                c.iter().map(|p| p.resonance_detuning).sum::<f64>() / c.len() as f64
            };
            let dominant = c
                .iter()
                .max_by(|a, b| a.weight().total_cmp(&b.weight()).then_with(|| b.id.cmp(&a.id)))
                .unwrap();
            peaks.push(Peak {
                delta,
                weight,
                class: dominant.class,
                photons,
                constituents: c.iter().map(|p| p.id.clone()).collect(),
                interference: combined_verdict(c.iter().map(|p| p.interference)),
                divergent: c.iter().any(|p| p.divergent),
            });
        }
    }
    // Coincident one- and two-photon peaks can differ by rounding noise in
    // δ; ordering on a quantized position keeps them in photon order.
    let key = |p: &Peak| ((p.delta / SORT_QUANTUM).round() as i64, p.photons);
    peaks.sort_by(|a, b| key(a).cmp(&key(b)).then(a.delta.total_cmp(&b.delta)));
    PeakTable { peaks, merge_tolerance }
}

/// Pumping, dressing, enumeration and peak table in one call.
pub fn analyze_system(system: &TransitionSystem, merge_tolerance: f64) -> Result<(DressedBasis, PopulationDistribution, Vec<Pathway>, PeakTable)> {
    let basis = dress(system);
    let pops = pump_steady_state(system)?;
    let paths = enumerate_pathways(system, &basis, &pops, 2)?;
    let table = peak_table(&paths, merge_tolerance);
    Ok((basis, pops, paths, table))
}

/// A resonance position in units of a doublet splitting: `sign · Ω_|m| / 4`,
/// or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymbolicOffset {
    pub sign: i8,
    pub m: Option<HalfInt>,
}

impl fmt::Display for SymbolicOffset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.m {
            None => f.write_str("0"),
            Some(m) => {
                let s = if self.sign < 0 { "-" } else { "+" };
                write!(f, "{s}Ω_{}/4", m.abs())
            }
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Breakup {
    pub two_photon_peak_count: usize,
    pub positions: Vec<SymbolicOffset>,
}

fn symbolic(label: &StateLabel) -> SymbolicOffset {
    match *label {
        StateLabel::Bare { .. } => SymbolicOffset { sign: 0, m: None },
        StateLabel::Dressed { m, branch } => SymbolicOffset { sign: branch.sign() as i8, m: Some(m.abs()) },
    }
}

/// Distinct two-photon resonances in the strong-coupling regime, found by
/// running the pathway analysis at [`REFERENCE_OMEGA_C`].
pub fn predict_breakup(f_g: HalfInt, f_e: HalfInt, theta: f64) -> Result<Breakup> {
    let system = build_system(f_g, f_e, REFERENCE_OMEGA_C, 1.0, theta, 0.0)?;
    let (_, _, paths, table) = analyze_system(&system, 0.05)?;
    let by_id: BTreeMap<&str, &Pathway> = paths.iter().map(|p| (p.id.as_str(), p)).collect();
    let positions: Vec<SymbolicOffset> = table
        .two_photon()
        .map(|peak| {
            peak.constituents
                .iter()
                .map(|id| symbolic(&by_id[id.as_str()].final_state.state))
                .min()
                .expect("peak has constituents")
        })
        .collect();
    Ok(Breakup { two_photon_peak_count: positions.len(), positions })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidthPolicy {
    /// Half-width at half-maximum of one-photon peaks (units of Γ).
    pub one_photon: f64,
    pub two_photon: f64,
}

impl WidthPolicy {
    /// Γ/2 for one-photon peaks, Γ/4 for two-photon peaks.
    pub fn for_gamma(gamma: f64) -> Self {
        WidthPolicy { one_photon: gamma / 2.0, two_photon: gamma / 4.0 }
    }
}

impl Default for WidthPolicy {
    fn default() -> Self {
        WidthPolicy::for_gamma(1.0)
    }
}

/// Renders `table` as a sum of Lorentzians. Peak heights are the weights,
/// scaled by `probe_rabi²` for two-photon peaks (absorption per unit probe
/// intensity).
pub fn synthesize_spectrum(
    table: &PeakTable,
    widths: WidthPolicy,
    grid: &[f64],
    probe_rabi: f64,
    system: &TransitionSystem,
) -> Result<SpectrumTrace> {
    check_grid(grid)?;
    let values = grid
        .iter()
        .map(|&d| {
            table
                .peaks
                .iter()
                .map(|p| {
                    let (w, scale) = if p.photons == 1 {
                        (widths.one_photon, 1.0)
                    } else {
                        (widths.two_photon, probe_rabi * probe_rabi)
                    };
                    let x = d - p.delta;
                    scale * p.weight * w * w / (x * x + w * w)
                })
                .sum()
        })
        .collect();
    let meta = TraceMeta {
        method: "synthesized".into(),
        system: system.id(),
        omega_c_rabi: system.omega_c_rabi,
        gamma: system.gamma,
        theta: system.probe_geometry.theta,
        coupling_phase: system.coupling_phase,
        probe_rabi,
        external_loss: system.external_loss,
        k: None,
        normalization: "per-intensity".into(),
        notes: vec![format!(
            "lorentzian half-widths: one-photon {}, two-photon {}",
            widths.one_photon, widths.two_photon
        )],
    };
    SpectrumTrace::new(grid.to_vec(), values, meta)
}
