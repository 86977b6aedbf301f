//! Run modes: analyze, spectrum, compare, sweep. Each writes a fixed set of
//! files into one output directory, after all computation is done.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::angular::{HalfInt, SublevelRef};
use crate::config::{AnalysisSettings, RunConfig};
use crate::dressed::DressedBasisDump;
use crate::error::{DamsError, Result};
use crate::obe::{self, find_peaks, FoundPeak, Normalization, SpectrumOptions};
use crate::pathway::{analyze_system, predict_breakup, synthesize_spectrum, Breakup, Pathway, Peak, PeakTable, WidthPolicy};
use crate::pumping::SublevelPopulation;
use crate::system::TransitionSystem;
use crate::trace::{sig12, SpectrumTrace};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SystemSummary {
    pub id: String,
    #[serde(rename = "F_g")]
    pub f_g: HalfInt,
    #[serde(rename = "F_e")]
    pub f_e: HalfInt,
    pub omega_c_rabi: f64,
    pub gamma: f64,
    pub theta_degrees: f64,
    pub coupling_phase: f64,
    pub probe_rabi: f64,
    pub external_loss_rate: f64,
}

impl SystemSummary {
    pub fn new(system: &TransitionSystem, probe_rabi: f64) -> Self {
        SystemSummary {
            id: system.id(),
            f_g: system.f_g,
            f_e: system.f_e,
            omega_c_rabi: system.omega_c_rabi,
            gamma: system.gamma,
            theta_degrees: system.probe_geometry.theta.to_degrees(),
            coupling_phase: system.coupling_phase,
            probe_rabi,
            external_loss_rate: system.external_loss,
        }
    }
}

/// Matching tolerance between predicted and oracle peaks: `max(0.1Γ, 0.05 Ω_c)`.
pub fn concordance_tolerance(system: &TransitionSystem) -> f64 {
    (0.1 * system.gamma).max(0.05 * system.omega_c_rabi)
}

/// Half-width of the central region: the outermost predicted two-photon
/// resonance plus the concordance tolerance.
pub fn central_half_width(table: &PeakTable, system: &TransitionSystem) -> f64 {
    let outer = table.two_photon().map(|p| p.delta.abs()).fold(0.0, f64::max);
    outer + concordance_tolerance(system)
}

/// Peaks whose prominence is at least `fraction` of the largest |value|.
pub fn oracle_peaks(trace: &SpectrumTrace, fraction: f64) -> Vec<FoundPeak> {
    let scale = trace.absorption.iter().fold(0.0f64, |m, a| m.max(a.abs()));
    find_peaks(trace, fraction * scale)
}

pub fn central_peaks(peaks: &[FoundPeak], half_width: f64) -> Vec<FoundPeak> {
    peaks.iter().filter(|p| p.delta.abs() <= half_width).copied().collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub system: SystemSummary,
    pub regime: String,
    pub dressed_basis: DressedBasisDump,
    pub populations: Vec<SublevelPopulation>,
    pub trapped: Vec<SublevelRef>,
    pub trap_threshold: f64,
    pub pathway_count: usize,
    pub peak_table: PeakTable,
    pub breakup_prediction: Breakup,
    pub width_policy: WidthPolicy,
}

pub struct Analysis {
    pub report: AnalyzeReport,
    pub pathways: Vec<Pathway>,
    pub synthesized: SpectrumTrace,
}

fn regime_note(trapped: &[SublevelRef], pathways: &[Pathway]) -> String {
    if trapped.is_empty() {
        "no trapped states: population is not trapped in the ground level (normal-EIA regime)".into()
    } else if pathways.is_empty() {
        "trapped states present but no probe pathway couples them".into()
    } else {
        "population trapped in coupling-dark states (anomalous regime)".into()
    }
}

pub fn analyze(system: &TransitionSystem, probe_rabi: f64, grid: &[f64], settings: &AnalysisSettings) -> Result<Analysis> {
    let (basis, pops, pathways, table) = analyze_system(system, settings.merge_tolerance)?;
    let widths = WidthPolicy { one_photon: system.gamma / 2.0, two_photon: settings.two_photon_width * system.gamma };
    let synthesized = synthesize_spectrum(&table, widths, grid, probe_rabi, system)?;
    let breakup = predict_breakup(system.f_g, system.f_e, system.probe_geometry.theta)?;
    let report = AnalyzeReport {
        system: SystemSummary::new(system, probe_rabi),
        regime: regime_note(&pops.trapped, &pathways),
        dressed_basis: basis.dump(),
        populations: pops.populations.clone(),
        trapped: pops.trapped.clone(),
        trap_threshold: pops.threshold,
        pathway_count: pathways.len(),
        peak_table: table,
        breakup_prediction: breakup,
        width_policy: widths,
    };
    Ok(Analysis { report, pathways, synthesized })
}

fn prepare(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn populations_csv(pops: &[SublevelPopulation]) -> String {
    let mut out = String::from("level,m,population\n");
    for p in pops {
        let level = match p.sublevel.level {
            crate::angular::Level::Ground => "ground",
            crate::angular::Level::Excited => "excited",
        };
        out.push_str(&format!("{level},{},{}\n", p.sublevel.m, sig12(p.population)));
    }
    out
}

/// Writes `report.json`, `pathways.json`, `peaks.csv`, `populations.csv`
/// and the synthesized `spectrum.csv` (+ `spectrum.json`).
pub fn run_analyze(config: &RunConfig, out: &Path) -> Result<AnalyzeReport> {
    let system = config.system()?;
    let a = analyze(&system, config.probe_rabi, &config.detuning_grid.values(), &config.analysis)?;
    prepare(out)?;
    write_json(&out.join("report.json"), &a.report)?;
    write_json(&out.join("pathways.json"), &a.pathways)?;
    std::fs::write(out.join("peaks.csv"), a.report.peak_table.to_csv())?;
    std::fs::write(out.join("populations.csv"), populations_csv(&a.report.populations))?;
    a.synthesized.write(out, "spectrum")?;
    Ok(a.report)
}

pub fn found_peaks_csv(peaks: &[FoundPeak]) -> String {
    let mut out = String::from("delta,height,prominence\n");
    for p in peaks {
        out.push_str(&format!("{},{},{}\n", sig12(p.delta), sig12(p.height), sig12(p.prominence)));
    }
    out
}

/// Writes the oracle `spectrum.csv` (+ `spectrum.json`) and its `peaks.csv`.
pub fn run_spectrum(config: &RunConfig, out: &Path, opts: &SpectrumOptions) -> Result<SpectrumTrace> {
    let system = config.system()?;
    let trace = obe::spectrum(&system, config.probe_rabi, &config.detuning_grid.values(), opts)?;
    let peaks = oracle_peaks(&trace, config.analysis.min_prominence_fraction);
    prepare(out)?;
    trace.write(out, "spectrum")?;
    std::fs::write(out.join("peaks.csv"), found_peaks_csv(&peaks))?;
    Ok(trace)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Concordant,
    Discrepant,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PeakMatch {
    pub predicted_delta: f64,
    pub oracle_delta: f64,
    pub distance: f64,
    pub photons: u8,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Matching {
    pub matches: Vec<PeakMatch>,
    pub unmatched_predictions: Vec<Peak>,
    pub unmatched_oracle_peaks: Vec<FoundPeak>,
}

/// Greedy nearest-first pairing of predictions with oracle peaks, each used
/// at most once, within `tolerance`.
pub fn match_peaks(predicted: &[Peak], found: &[FoundPeak], tolerance: f64) -> Matching {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in predicted.iter().enumerate() {
        for (j, f) in found.iter().enumerate() {
            let d = (p.delta - f.delta).abs();
            if d <= tolerance {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_p = vec![false; predicted.len()];
    let mut used_f = vec![false; found.len()];
    let mut matches = Vec::new();
    for (d, i, j) in pairs {
        if used_p[i] || used_f[j] {
            continue;
        }
        used_p[i] = true;
        used_f[j] = true;
        matches.push(PeakMatch {
            predicted_delta: predicted[i].delta,
            oracle_delta: found[j].delta,
            distance: d,
            photons: predicted[i].photons,
        });
    }
    matches.sort_by(|a, b| a.predicted_delta.total_cmp(&b.predicted_delta));
    Matching {
        matches,
        unmatched_predictions: predicted.iter().zip(&used_p).filter(|(_, u)| !**u).map(|(p, _)| p.clone()).collect(),
        unmatched_oracle_peaks: found.iter().zip(&used_f).filter(|(_, u)| !**u).map(|(f, _)| *f).collect(),
    }
}

/// Peaks of the higher-order part `(a − a_linear)/Ω_p²` of the oracle trace,
/// matched against the two-photon predictions.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HigherOrderDiagnostics {
    pub peaks: Vec<FoundPeak>,
    pub two_photon_matches: Vec<PeakMatch>,
    pub unmatched_two_photon_predictions: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompareReport {
    pub system: SystemSummary,
    pub method: String,
    pub normalization: String,
    pub tolerance: f64,
    pub central_half_width: f64,
    pub central_oracle_peak_count: usize,
    pub predicted_peaks: PeakTable,
    pub oracle_peaks: Vec<FoundPeak>,
    pub matches: Vec<PeakMatch>,
    pub unmatched_predictions: Vec<Peak>,
    pub unmatched_oracle_peaks: Vec<FoundPeak>,
    pub verdict: Verdict,
    pub higher_order: Option<HigherOrderDiagnostics>,
}

pub struct Comparison {
    pub report: CompareReport,
    pub trace: SpectrumTrace,
    pub pathways: Vec<Pathway>,
}

/// Pathway predictions against the oracle spectrum on the same system.
pub fn compare(
    system: &TransitionSystem,
    probe_rabi: f64,
    grid: &[f64],
    settings: &AnalysisSettings,
    opts: &SpectrumOptions,
) -> Result<Comparison> {
    let (_, _, pathways, table) = analyze_system(system, settings.merge_tolerance)?;
    let trace = obe::spectrum(system, probe_rabi, grid, opts)?;
    let found = oracle_peaks(&trace, settings.min_prominence_fraction);
    let tolerance = concordance_tolerance(system);
    let matching = match_peaks(&table.peaks, &found, tolerance);
    let verdict = if matching.unmatched_predictions.iter().any(|p| p.photons == 2) {
        Verdict::Discrepant
    } else {
        Verdict::Concordant
    };
    let half = central_half_width(&table, system);

    let higher_order = if probe_rabi > 0.0 && opts.normalization == Normalization::PerIntensity {
        let linear = obe::linear_spectrum(system, grid, opts.execution)?;
        let ho = obe::higher_order_component(&trace, &linear)?;
        let peaks = oracle_peaks(&ho, settings.min_prominence_fraction);
        let two: Vec<Peak> = table.two_photon().cloned().collect();
        let m = match_peaks(&two, &peaks, tolerance);
        Some(HigherOrderDiagnostics {
            peaks,
            two_photon_matches: m.matches,
            unmatched_two_photon_predictions: m.unmatched_predictions.iter().map(|p| p.delta).collect(),
        })
    } else {
        None
    };

    let report = CompareReport {
        system: SystemSummary::new(system, probe_rabi),
        method: opts.method.name().into(),
        normalization: opts.normalization.name().into(),
        tolerance,
        central_half_width: half,
        central_oracle_peak_count: central_peaks(&found, half).len(),
        predicted_peaks: table,
        oracle_peaks: found,
        matches: matching.matches,
        unmatched_predictions: matching.unmatched_predictions,
        unmatched_oracle_peaks: matching.unmatched_oracle_peaks,
        verdict,
        higher_order,
    };
    Ok(Comparison { report, trace, pathways })
}

/// Writes `report.json` (the comparison), `pathways.json`, `peaks.csv`
/// (predicted table) and the oracle `spectrum.csv` (+ `spectrum.json`).
pub fn run_compare(config: &RunConfig, out: &Path, opts: &SpectrumOptions) -> Result<CompareReport> {
    let system = config.system()?;
    let c = compare(&system, config.probe_rabi, &config.detuning_grid.values(), &config.analysis, opts)?;
    prepare(out)?;
    write_json(&out.join("report.json"), &c.report)?;
    write_json(&out.join("pathways.json"), &c.pathways)?;
    std::fs::write(out.join("peaks.csv"), c.report.predicted_peaks.to_csv())?;
    c.trace.write(out, "spectrum")?;
    Ok(c.report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub omega_c_rabi: f64,
    pub central_peak_count: usize,
    /// Lower of the two outermost central peaks minus the lowest point
    /// between them; zero with fewer than two central peaks.
    pub dip_depth: f64,
    /// Distance between the outermost central peaks.
    pub splitting: f64,
    pub central_half_width: f64,
    pub spectrum_file: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSummary {
    pub system: SystemSummary,
    pub rows: Vec<SweepRow>,
    /// Smallest swept Ω_c with more than one central peak.
    pub breakup_threshold: Option<f64>,
}

impl SweepSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega_c_rabi,central_peak_count,dip_depth,splitting\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                sig12(r.omega_c_rabi),
                r.central_peak_count,
                sig12(r.dip_depth),
                sig12(r.splitting)
            ));
        }
        out
    }
}

pub fn sweep_row(trace: &SpectrumTrace, system: &TransitionSystem, settings: &AnalysisSettings, file: String) -> Result<SweepRow> {
    let (_, _, _, table) = analyze_system(system, settings.merge_tolerance)?;
    let half = central_half_width(&table, system);
    let central = central_peaks(&oracle_peaks(trace, settings.min_prominence_fraction), half);
    let (dip_depth, splitting) = match (central.first(), central.last()) {
        (Some(l), Some(r)) if central.len() >= 2 => {
            let floor = trace.absorption[l.index..=r.index].iter().cloned().fold(f64::INFINITY, f64::min);
            (l.height.min(r.height) - floor, r.delta - l.delta)
        }
        _ => (0.0, 0.0),
    };
    Ok(SweepRow {
        omega_c_rabi: system.omega_c_rabi,
        central_peak_count: central.len(),
        dip_depth,
        splitting,
        central_half_width: half,
        spectrum_file: file,
    })
}

/// One oracle spectrum per swept Ω_c (`spectrum_NN.csv` + `.json`), a
/// `sweep.csv` summary and `report.json`.
pub fn run_sweep(config: &RunConfig, out: &Path, opts: &SpectrumOptions) -> Result<SweepSummary> {
    let values = config
        .sweep_values
        .as_ref()
        .ok_or_else(|| DamsError::config("sweep_values", "sweep mode needs a list of coupling Rabi frequencies"))?;
    let grid = config.detuning_grid.values();
    // Sweep points run one after another; each spectrum spreads its grid
    // over the pool.
    let results = values.iter().map(|&oc| {
        let system = config.system_at(oc)?;
        let trace = obe::spectrum(&system, config.probe_rabi, &grid, opts)?;
        Ok::<_, DamsError>((system, trace))
    });
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for (i, r) in results.enumerate() {
        let (system, trace) = r?;
        let stem = format!("spectrum_{i:02}");
        rows.push(sweep_row(&trace, &system, &config.analysis, format!("{stem}.csv"))?);
        traces.push((stem, trace));
    }
    let breakup_threshold = rows.iter().filter(|r| r.central_peak_count > 1).map(|r| r.omega_c_rabi).reduce(f64::min);
    let summary = SweepSummary { system: SystemSummary::new(&config.system()?, config.probe_rabi), rows, breakup_threshold };
    prepare(out)?;
    for (stem, trace) in &traces {
        trace.write(out, stem)?;
    }
    std::fs::write(out.join("sweep.csv"), summary.to_csv())?;
    write_json(&out.join("report.json"), &summary)?;
    Ok(summary)
}
