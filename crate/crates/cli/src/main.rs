use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dams_core::config::{load_config, DetuningGrid, Mode};
use dams_core::obe::{Method, SpectrumOptions};
use dams_core::run::{run_analyze, run_compare, run_spectrum, run_sweep, Verdict};
use dams_core::DamsError;

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_DISCREPANT: u8 = 4;

#[derive(Parser)]
#[command(name = "dams", version, about = "Dressed-atom multiphoton spectroscopy of degenerate two-level atoms")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Dressed basis, trapped populations, pathways and predicted peaks.
    Analyze(Common),
    /// Oracle absorption spectrum.
    Spectrum(Common),
    /// Predicted peaks against the oracle spectrum.
    Compare(Common),
    /// Oracle spectra over the configured coupling strengths.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides `output_dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Detuning grid as `min:max:points` (overrides `detuning_grid`).
    #[arg(long, value_name = "MIN:MAX:POINTS", allow_hyphen_values = true)]
    grid: Option<String>,
}

#[derive(ValueEnum, Clone, Copy)]
enum MethodArg {
    Floquet,
    Time,
}

enum Failure {
    Error(DamsError),
    Discrepant,
}

impl From<DamsError> for Failure {
    fn from(e: DamsError) -> Self {
        Failure::Error(e)
    }
}

fn run(verb: Verb) -> Result<(), Failure> {
    let (mode, common) = match verb {
        Verb::Analyze(c) => (Mode::Analyze, c),
        Verb::Spectrum(c) => (Mode::Spectrum, c),
        Verb::Compare(c) => (Mode::Compare, c),
        Verb::Sweep(c) => (Mode::Sweep, c),
    };
    let mut config = load_config(&common.config)?;
    // The verb decides what runs; `mode` in the file is only a default.
    config.mode = mode;
    if let Some(g) = &common.grid {
        config.detuning_grid = DetuningGrid::parse(g)?;
    }
    if let Some(m) = common.method {
        config.method = match m {
            MethodArg::Floquet => Method::Floquet,
            MethodArg::Time => Method::TimeDomain,
        };
    }
    config.validate()?;
    let out = common.out.unwrap_or_else(|| config.output_dir.clone());
    let opts = SpectrumOptions {
        method: config.method,
        normalization: config.analysis.normalization,
        ..SpectrumOptions::default()
    };

    match mode {
        Mode::Analyze => {
            let r = run_analyze(&config, &out)?;
            println!(
                "{}: {} pathways, {} peaks ({} two-photon); {}",
                r.system.id,
                r.pathway_count,
                r.peak_table.peaks.len(),
                r.peak_table.two_photon().count(),
                r.regime
            );
        }
        Mode::Spectrum => {
            let t = run_spectrum(&config, &out, &opts)?;
            println!("{}: {} points written to {}", t.meta.system, t.len(), out.display());
        }
        Mode::Compare => {
            let r = run_compare(&config, &out, &opts)?;
            println!(
                "{}: {:?} ({} matches, {} unmatched predictions, tolerance {})",
                r.system.id,
                r.verdict,
                r.matches.len(),
                r.unmatched_predictions.len(),
                r.tolerance
            );
            if r.verdict == Verdict::Discrepant {
                return Err(Failure::Discrepant);
            }
        }
        Mode::Sweep => {
            let s = run_sweep(&config, &out, &opts)?;
            for row in &s.rows {
                println!("omega_c = {}: {} central peaks", row.omega_c_rabi, row.central_peak_count);
            }
            match s.breakup_threshold {
                Some(t) => println!("break-up threshold: omega_c = {t}"),
                None => println!("no break-up in the swept range"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.verb) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Discrepant) => ExitCode::from(EXIT_DISCREPANT),
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            let code = match &e {
                DamsError::Config { .. } | DamsError::Domain(_) => EXIT_CONFIG,
                e if e.is_solver_error() => EXIT_SOLVER,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
