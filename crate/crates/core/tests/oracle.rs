use std::f64::consts::{FRAC_PI_2, PI};

use dams_core::angular::HalfInt;
use dams_core::obe::degenerate::degenerate_absorption;
use dams_core::obe::timedomain::{beat_window, time_domain_absorption};
use dams_core::obe::{
    absorption_at, converged_absorption, floquet_solve, phase_averaged_absorption, spectrum, time_domain_solve,
    Normalization, SpectrumOptions,
};
use dams_core::pumping::pumped_density_matrix;
use dams_core::system::{build_system, TransitionSystem};
use dams_core::trace::linear_grid;

fn system(g: i32, e: i32, omega_c: f64, theta: f64) -> TransitionSystem {
    build_system(HalfInt::from_int(g), HalfInt::from_int(e), omega_c, 1.0, theta, 0.0).unwrap()
}

fn per_intensity(sys: &TransitionSystem, probe: f64, delta: f64) -> f64 {
    converged_absorption(sys, probe, delta, 4, Normalization::PerIntensity).unwrap().absorption
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// Values from a separate dense-matrix implementation of the same harmonic
/// balance (full linear solve, `K = 10`, converged to machine precision).
#[test]
fn matches_independent_dense_solver() {
    let deltas = [-1.2, -0.3, 0.45, 0.9];
    let cases: [((i32, i32, f64, f64, f64), [f64; 4]); 4] = [
        ((2, 1, 1.0, FRAC_PI_2, 0.05), [0.04854379182370368, 0.295133251165952, 0.22609121622469835, 0.0816886869192285]),
        ((1, 1, 3.0, FRAC_PI_2, 0.1), [0.38212630593130104, 0.01024195187224311, 0.02791029419343308, 0.3263776594357801]),
        ((2, 2, 3.0, PI / 3.0, 0.1), [0.08955970144581622, 0.08038613080588745, 0.22912574107680148, 0.19024577220549638]),
        ((1, 2, 0.3, FRAC_PI_2, 0.05), [0.07773275879868441, 0.3477900993095998, 0.2695557098119748, 0.12194666178788496]),
    ];
    for ((g, e, oc, theta, probe), want) in cases {
        let sys = system(g, e, oc, theta);
        for (d, w) in deltas.iter().zip(want) {
            let got = per_intensity(&sys, probe, *d);
            assert!(rel(got, w) < 1e-10, "{g}->{e} Ω_c={oc} δ={d}: {got} vs {w}");
        }
    }
    let two_level = system(0, 1, 0.0, 0.0);
    for (d, w) in deltas.iter().zip([0.14781966001478192, 0.7326007326007323, 0.5509641873278236, 0.23557126030624267]) {
        assert!(rel(per_intensity(&two_level, 0.05, *d), w) < 1e-10);
    }
}

#[test]
fn zero_detuning_phase_average_matches_independent_solver() {
    let cases = [
        (system(1, 2, 0.3, FRAC_PI_2), 1.0225892939512917),
        (system(1, 2, 0.0, FRAC_PI_2), 0.5865102639296191),
        (system(0, 1, 0.0, 0.0), 0.9950248756218903),
    ];
    for (sys, want) in cases {
        let got = phase_averaged_absorption(&sys, 0.05, Normalization::PerIntensity).unwrap();
        assert!(rel(got, want) < 1e-10, "{}: {got} vs {want}", sys.id());
    }
}

#[test]
fn harmonics_are_hermitian_pairs_with_correct_traces() {
    for sys in [system(2, 1, 1.0, FRAC_PI_2), system(2, 2, 2.0, PI / 3.0)] {
        let sol = floquet_solve(&sys, 0.2, 0.37, 6).unwrap();
        let r0 = sol.harmonic(0).unwrap();
        assert!((r0.trace().re - 1.0).abs() < 1e-10 && r0.trace().im.abs() < 1e-10);
        for k in 1..=6 {
            let (p, m) = (sol.harmonic(k).unwrap(), sol.harmonic(-k).unwrap());
            assert!((p.adjoint() - m).norm() < 1e-10);
            assert!(p.trace().norm() < 1e-10);
        }
        assert!(sol.residual < 1e-10);
    }
}

#[test]
fn undriven_harmonics_reduce_to_pumped_state() {
    let sys = system(2, 1, 1.0, FRAC_PI_2);
    let sol = floquet_solve(&sys, 0.0, 0.5, 4).unwrap();
    assert!((sol.harmonic(0).unwrap() - pumped_density_matrix(&sys).unwrap()).norm() < 1e-12);
    for k in 1..=4 {
        assert!(sol.harmonic(k).unwrap().norm() < 1e-14);
    }
    assert_eq!(time_domain_solve(&sys, 0.0, 0.5, 60.0, beat_window(0.5, 20.0)).unwrap(), 0.0);
}

#[test]
fn doubling_truncation_changes_weak_probe_absorption_below_tolerance() {
    for sys in [system(2, 1, 1.0, FRAC_PI_2), system(1, 1, 2.0, FRAC_PI_2), system(2, 2, 3.0, PI / 3.0)] {
        for d in [-1.0, -0.2, 0.05, 0.6] {
            let a = |k| absorption_at(&floquet_solve(&sys, 0.05, d, k).unwrap(), &sys, Normalization::PerIntensity).unwrap();
            assert!((a(8) - a(4)).abs() <= 1e-8, "{} δ={d}", sys.id());
        }
    }
}

#[test]
fn raw_normalization_is_power() {
    let sys = system(2, 1, 1.0, FRAC_PI_2);
    let sol = floquet_solve(&sys, 0.3, 0.4, 8).unwrap();
    let raw = absorption_at(&sol, &sys, Normalization::Raw).unwrap();
    let norm = absorption_at(&sol, &sys, Normalization::PerIntensity).unwrap();
    assert!(rel(raw, norm * 0.09) < 1e-14);
}

#[test]
fn spectra_are_mirror_symmetric() {
    let grid = linear_grid(-2.0, 2.0, 41);
    let cases = [
        system(2, 1, 2.0, FRAC_PI_2),
        system(1, 1, 2.0, FRAC_PI_2),
        system(2, 2, 2.0, FRAC_PI_2),
        system(1, 2, 1.0, 0.0),
        system(0, 1, 0.0, 0.0),
        system(1, 1, 1.0, 0.0),
    ];
    for sys in cases {
        let t = spectrum(&sys, 0.1, &grid, &SpectrumOptions::default()).unwrap();
        let n = t.absorption.len();
        for i in 0..n / 2 {
            let (a, b) = (t.absorption[i], t.absorption[n - 1 - i]);
            assert!((a - b).abs() <= 1e-8, "{} δ={}: {a} vs {b}", sys.id(), t.deltas[i]);
        }
    }
}

#[test]
fn spectra_do_not_depend_on_coupling_phase() {
    let grid = linear_grid(-1.5, 1.5, 13);
    for (g, e, theta) in [(2, 1, FRAC_PI_2), (1, 1, PI / 3.0), (2, 2, PI / 3.0)] {
        let base = spectrum(&system(g, e, 2.0, theta), 0.1, &grid, &SpectrumOptions::default()).unwrap();
        for phase in [0.7, 2.9, 5.1] {
            let sys = build_system(HalfInt::from_int(g), HalfInt::from_int(e), 2.0, 1.0, theta, phase).unwrap();
            let t = spectrum(&sys, 0.1, &grid, &SpectrumOptions::default()).unwrap();
            for (a, b) in base.absorption.iter().zip(&t.absorption) {
                assert!((a - b).abs() <= 1e-10, "{g}->{e} φ_c={phase}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn time_domain_agrees_with_floquet() {
    let sys = system(2, 1, 1.0, FRAC_PI_2);
    let td = time_domain_solve(&sys, 0.05, 0.3, 200.0, beat_window(0.3, 100.0)).unwrap();
    let fl = per_intensity(&sys, 0.05, 0.3);
    assert!(rel(td, fl) <= 1e-4, "{td} vs {fl}");

    for sys in [system(2, 1, 2.0, FRAC_PI_2), system(1, 1, 2.0, FRAC_PI_2), system(2, 2, 2.0, FRAC_PI_2)] {
        for d in [-1.3, -0.5, 0.2, 0.8, 1.7] {
            let td = time_domain_solve(&sys, 0.05, d, 200.0, beat_window(d, 100.0)).unwrap();
            let fl = per_intensity(&sys, 0.05, d);
            assert!(rel(td, fl) <= 1e-4, "{} δ={d}: {td} vs {fl}", sys.id());
        }
    }
}

#[test]
fn zero_detuning_time_domain_matches_static_solution() {
    let sys = system(1, 2, 0.5, FRAC_PI_2);
    for chi in [0.0, 1.1] {
        let td = time_domain_absorption(&sys, 0.1, 0.0, chi, 400.0, 200.0, Normalization::PerIntensity).unwrap();
        let st = degenerate_absorption(&sys, 0.1, chi, Normalization::PerIntensity).unwrap();
        assert!(rel(td, st) <= 1e-4, "χ={chi}: {td} vs {st}");
    }
}

#[test]
fn one_to_one_line_center_is_a_dark_resonance() {
    // With both fields at the same frequency the Λ structure |0⟩ ↔ |±1′⟩ ↔
    // |±1⟩ has a dark superposition, so line centre is a narrow minimum.
    let sys = system(1, 1, 0.5, FRAC_PI_2);
    let t = spectrum(&sys, 0.1, &[-0.02, 0.0, 0.02], &SpectrumOptions::default()).unwrap();
    assert!(t.absorption[1] < t.absorption[0] && t.absorption[1] < t.absorption[2]);
    assert!(t.absorption[1].abs() < 1e-10);
}

#[test]
fn weak_probe_response_is_linear() {
    let sys = system(0, 1, 0.0, 0.0);
    let raw = |p: f64| {
        absorption_at(&floquet_solve(&sys, p, 0.4, 4).unwrap(), &sys, Normalization::Raw).unwrap()
    };
    // Raw power grows as Ω_p² for a one-photon line: per-intensity is flat.
    assert!(rel(raw(1e-3) / 1e-6, raw(2e-3) / 4e-6) < 1e-5);
}
