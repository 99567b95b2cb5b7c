use fessi_core::analysis::{chirp_duration, duration, transform_limit, DurationModel};
use fessi_core::bessel::bessel_j_all;
use fessi_core::constants::HBAR;
use fessi_core::interferometer::{delay, fringe_visibility, interfere, measure, MeasurementConfig, MeasurementWarning};
use fessi_core::lem::{pinem_modulate, shear, CouplingStrength};
use fessi_core::reconstruction::{concatenate, concatenate_lattice, reconstruct, MaskedPhase, ReconstructionOptions};
use fessi_core::wavepacket::{
    intensity_moments, make_gaussian_spectrum, to_energy_domain, to_time_domain, SpectralPhaseSpec,
    SpectralWavefunction,
};
use fessi_core::scenario::{run_scenario, Scenario, SweepParameter};
use fessi_core::EnergyGrid;
use proptest::prelude::*;

fn pulse(sigma: f64, c2: f64, c3: f64, count: usize) -> (SpectralWavefunction, SpectralPhaseSpec) {
    let grid = EnergyGrid::spanning(10_000.0, sigma, 16.0, count).unwrap();
    let spec = SpectralPhaseSpec::polynomial(&[(2, c2), (3, c3)]).unwrap();
    (make_gaussian_spectrum(&grid, sigma, &spec).unwrap(), spec)
}

fn peak(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// Noise-free chain at `ΔE = 0.1176·2σ_E`, `τ ≈ 6.2 πħ/σ_E`; returns F.
fn closed_loop(psi: &SpectralWavefunction, original_phase: &[f64], sigma: f64) -> Option<f64> {
    let config = MeasurementConfig {
        tau: 6.2 * std::f64::consts::PI * HBAR / sigma,
        delta_e: 0.2353 * sigma,
        resolution: 0.01,
        jitter_fraction: 0.0,
        shots: 1,
    };
    let sheared = shear(psi, config.delta_e).unwrap();
    let sig = measure(psi, &sheared, &config, 0).unwrap();
    let cal = measure(psi, psi, &config.calibration(), 0).unwrap();
    let result = reconstruct(
        &sig.interferogram,
        &cal.interferogram,
        &psi.density(),
        &config,
        &ReconstructionOptions::default(),
    )
    .unwrap();
    result.compare(psi, original_phase).unwrap().fidelity.value()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalization_and_round_trip(sigma in 0.05f64..5.0, a in -0.3f64..0.3, b in -0.3f64..0.3) {
        let (psi, _) = pulse(sigma, a / (sigma * sigma), b / sigma.powi(3), 2048);
        let t = to_time_domain(&psi);
        prop_assert!((psi.norm() - 1.0).abs() < 1e-9);
        prop_assert!((t.norm() - 1.0).abs() < 1e-9);
        let back = to_energy_domain(&t);
        prop_assert!(back.max_abs_difference(&psi).unwrap() < 1e-10 * peak(&psi.amplitude()).max(1.0));
    }

    #[test]
    fn constant_and_linear_phase_leave_rms(sigma in 0.1f64..2.0, c2 in -2.0f64..2.0, c0 in -5.0f64..5.0, c1 in -3.0f64..3.0) {
        let (psi, _) = pulse(sigma, c2, 0.0, 4096);
        let m0 = intensity_moments(&to_time_domain(&psi));
        let m1 = intensity_moments(&to_time_domain(&psi.with_phase(|q| c0 + c1 * q)));
        prop_assert!((m1.rms - m0.rms).abs() < 1e-12, "{} vs {}", m1.rms, m0.rms);
        prop_assert!((m1.mean - m0.mean - HBAR * c1).abs() < 1e-9);
    }

    #[test]
    fn chirp_law(sigma in 0.1f64..2.0, phi2 in 0.0f64..5.0) {
        let grid = EnergyGrid::spanning(10_000.0, sigma, 16.0, 4096).unwrap();
        let psi = make_gaussian_spectrum(&grid, sigma, &SpectralPhaseSpec::from_taylor(phi2, 0.0)).unwrap();
        let rms = intensity_moments(&to_time_domain(&psi)).rms;
        let want = chirp_duration(transform_limit(sigma), phi2);
        prop_assert!(((rms - want) / want).abs() < 5e-3);
    }

    #[test]
    fn bessel_completeness_and_recurrence(z in 1e-3f64..5.0, big in 0.0f64..20.0) {
        let j = bessel_j_all(z, 40);
        for n in 1..=10 {
            prop_assert!((j[n - 1] + j[n + 1] - 2.0 * n as f64 / z * j[n]).abs() < 1e-10);
        }
        let jb = bessel_j_all(big, 60);
        let total = jb[0] * jb[0] + 2.0 * jb[1..].iter().map(|v| v * v).sum::<f64>();
        prop_assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn shear_group_and_delay_modulus(de in -0.8f64..0.8, tau in 0.0f64..500.0) {
        let (psi, _) = pulse(0.425, 0.34, 1.05, 4096);
        let there = shear(&psi, de).unwrap();
        let back = shear(&there, -de).unwrap();
        prop_assert!(back.max_abs_difference(&psi).unwrap() < 1e-10);
        let d = delay(&psi, tau);
        let dev = d.amplitude().iter().zip(psi.amplitude()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-14);
    }

    #[test]
    fn three_term_identity(de in -0.5f64..0.5, tau in 1.0f64..400.0, c2 in -1.0f64..1.0, c3 in -1.0f64..1.0) {
        let (psi, _) = pulse(0.425, c2, c3, 4096);
        let b = delay(&shear(&psi, de).unwrap(), tau);
        let i = interfere(&psi, &b).unwrap();
        let scale = peak(i.intensity());
        for k in 0..psi.grid().count() {
            let (x, y) = (psi.samples()[k], b.samples()[k]);
            let want = x.norm_sqr() + y.norm_sqr() + 2.0 * x.norm() * y.norm() * (x.arg() - y.arg()).cos();
            prop_assert!((i.intensity()[k] - want).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn difference_operator_is_linear(a2 in -1.0f64..1.0, a3 in -1.0f64..1.0, b2 in -1.0f64..1.0, b3 in -1.0f64..1.0, steps in 12usize..240) {
        // an on-lattice shear keeps interpolation error out of the comparison
        let grid = EnergyGrid::spanning(10_000.0, 0.425, 16.0, 4096).unwrap();
        let de = steps as f64 * grid.spacing();
        let theta = |c2: f64, c3: f64| -> Vec<f64> {
            let spec = SpectralPhaseSpec::polynomial(&[(2, c2), (3, c3)]).unwrap();
            let psi = make_gaussian_spectrum(&grid, 0.425, &spec).unwrap();
            let s = shear(&psi, de).unwrap();
            psi.samples().iter().zip(s.samples()).map(|(x, y)| (x * y.conj()).arg()).collect()
        };
        let (ta, tb, tab) = (theta(a2, a3), theta(b2, b3), theta(a2 + b2, a3 + b3));
        let amp = make_gaussian_spectrum(&grid, 0.425, &SpectralPhaseSpec::zero()).unwrap().amplitude();
        let shifted = shear(&make_gaussian_spectrum(&grid, 0.425, &SpectralPhaseSpec::zero()).unwrap(), de).unwrap().amplitude();
        let top = peak(&amp);
        for k in 0..grid.count() {
            if amp[k].min(shifted[k]) >= 1e-3 * top {
                let d = tab[k] - ta[k] - tb[k];
                let wrapped = d - (2.0 * std::f64::consts::PI) * (d / (2.0 * std::f64::consts::PI)).round();
                prop_assert!(wrapped.abs() < 1e-10, "k = {k}: {wrapped}");
            }
        }
    }

    #[test]
    fn telescoping_is_exact(theta in prop::collection::vec(-3.0f64..3.0, 2..60), offset in 0usize..59) {
        let first = -((offset % theta.len()) as i64);
        let phi = concatenate_lattice(&theta, first).unwrap();
        let zero = (-first) as usize;
        prop_assert_eq!(phi[zero], 0.0);
        for j in 1..theta.len() {
            prop_assert!((phi[j] - phi[j - 1] - theta[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn concatenation_independent_of_grid(c2 in -2.0f64..2.0, count in prop::sample::select(vec![512usize, 1024, 4096])) {
        // quadratic φ gives a linear θ, which the spline carries exactly
        let de = 0.1;
        let grid = EnergyGrid::spanning(10_000.0, 0.425, 16.0, count).unwrap();
        let phi = |q: f64| c2 * q * q;
        let values: Vec<f64> = grid.offsets().iter().map(|&q| phi(q) - phi(q - de)).collect();
        let theta = MaskedPhase {
            grid,
            values,
            valid: vec![true; count],
            amplitude: vec![1.0; count],
        };
        let out = concatenate(&theta, de, 10_000.0).unwrap();
        for (e, v) in out.energies.iter().zip(&out.values) {
            let q = e - 10_000.0;
            prop_assert!((v - phi(q)).abs() < 1e-9 * (1.0 + phi(q).abs()), "q = {q}: {v} vs {}", phi(q));
        }
    }

    #[test]
    fn duration_formula_limits(sigma in 0.01f64..5.0, phi2 in -20.0f64..20.0, phi3 in -50.0f64..50.0) {
        let period = 10.33e3 / 299.792458;
        let m = DurationModel::from_spectral_width(sigma, phi2, phi3, period).unwrap();
        prop_assert!(duration(&m) >= m.sigma_t0);
        let m0 = DurationModel::from_spectral_width(sigma, phi2, 0.0, period).unwrap();
        let want = chirp_duration(m0.sigma_t0, phi2);
        prop_assert!(((duration(&m0) - want) / want).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn shear_limit_monotone_in_coupling(two_g in 0.1f64..1.0, ratio in 0.3f64..0.95) {
        // 2σ_E/ħω = 7 here
        let (psi, _) = pulse(0.425, 0.34, 1.05, 4096);
        let hw = 0.12;
        let dist = |tg: f64| {
            pinem_modulate(&psi, CouplingStrength::from_two_g(tg), hw, None)
                .unwrap()
                .relative_l2_distance(&shear(&psi, tg * hw).unwrap())
                .unwrap()
        };
        prop_assert!(dist(two_g * ratio) < dist(two_g));
    }

    #[test]
    fn closed_loop_recovers_polynomial_phase(
        sigma in prop::sample::select(vec![0.2, 0.425, 4.25]),
        a in -0.3f64..0.3,
        b in -0.3f64..0.3,
    ) {
        prop_assume!(a.abs() + b.abs() > 0.02);
        let (psi, spec) = pulse(sigma, a / (sigma * sigma), b / sigma.powi(3), 4096);
        let phase: Vec<f64> = psi.grid().offsets().iter().map(|&q| spec.eval(q)).collect();
        let f = closed_loop(&psi, &phase, sigma).unwrap();
        prop_assert!(f >= 0.999, "F = {f}");
    }

    #[test]
    fn fidelity_gauge_invariant(a in -0.3f64..0.3, b in -0.3f64..0.3, c0 in -4.0f64..4.0, c1 in -3.0f64..3.0) {
        prop_assume!(a.abs() + b.abs() > 0.02);
        let sigma = 0.425;
        let (psi, spec) = pulse(sigma, a / (sigma * sigma), b / sigma.powi(3), 4096);
        let q = psi.grid().offsets();
        let phase: Vec<f64> = q.iter().map(|&v| spec.eval(v)).collect();
        let f1 = closed_loop(&psi, &phase, sigma).unwrap();
        let moved = psi.with_phase(|v| c0 + c1 * v);
        let phase2: Vec<f64> = phase.iter().zip(&q).map(|(p, v)| p + c0 + c1 * v).collect();
        let f2 = closed_loop(&moved, &phase2, sigma).unwrap();
        prop_assert!((f1 - f2).abs() < 1e-6, "{f1} vs {f2}");
    }

    #[test]
    fn jitter_lowers_visibility(seed in any::<u64>(), lo in 0.0f64..1e-6, step in 1e-7f64..1e-6) {
        // E0·jitter·τ/ħ stays below ~1 rad here
        let (psi, _) = pulse(0.425, 0.34, 1.05, 4096);
        let sheared = shear(&psi, 0.1).unwrap();
        let vis = |j: f64| {
            let config = MeasurementConfig { tau: 30.0, delta_e: 0.1, resolution: 0.01, jitter_fraction: j, shots: 1000 };
            fringe_visibility(&measure(&psi, &sheared, &config, seed).unwrap().interferogram, 30.0)
        };
        prop_assert!(vis(lo + step) <= vis(lo) * (1.0 + 1e-12));
    }
}

#[test]
fn coarse_resolution_suppresses_fringes() {
    let (psi, _) = pulse(0.425, 0.34, 1.05, 4096);
    let sheared = shear(&psi, 0.1).unwrap();
    let tau = 30.0;
    let period = 2.0 * std::f64::consts::PI * HBAR / tau;
    let run = |resolution: f64| {
        let config = MeasurementConfig { tau, delta_e: 0.1, resolution, jitter_fraction: 0.0, shots: 1 };
        measure(&psi, &sheared, &config, 0).unwrap()
    };
    let sharp = run(1e-4);
    let wide = run(1.2 * period);
    assert!(sharp.warnings.is_empty());
    assert!(matches!(wide.warnings[0], MeasurementWarning::FringesUnresolved { .. }));
    let ratio = fringe_visibility(&wide.interferogram, tau) / fringe_visibility(&sharp.interferogram, tau);
    assert!(ratio < 0.5, "a.c. kept {ratio}");
}

#[test]
fn shear_size_error_is_u_shaped() {
    // measured with the reference jitter, which sets the floor a tiny shear must beat
    let base = Scenario::preset("fig3").unwrap();
    let error = |de: f64| {
        run_scenario(&base.with_parameter(SweepParameter::DeltaE, de).unwrap())
            .map(|r| r.comparison.fidelity.rms_error())
            .unwrap_or(f64::INFINITY)
    };
    let small = error(0.005 * 0.85);
    let mid = error(0.1);
    let large = error(1.5 * 0.85);
    assert!(small > 10.0 * mid && large > 10.0 * mid, "{small} / {mid} / {large}");
}

#[test]
fn duration_ignores_constant_and_linear_phase() {
    let (psi, _) = pulse(0.425, 0.34, 1.05, 4096);
    let base = intensity_moments(&to_time_domain(&psi)).rms;
    let moved = intensity_moments(&to_time_domain(&psi.with_phase(|q| 1.3 - 0.7 * q))).rms;
    assert!((base - moved).abs() < 1e-12);
}
