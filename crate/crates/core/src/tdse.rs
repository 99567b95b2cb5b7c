//! Split-step propagation of the electron through the laser-driven foil.
//!
//! The wavepacket is evolved in the frame co-moving at `v0`, where the
//! drift term `v0(p − p0)` drops out and the free Hamiltonian reduces to
//! `(p − p0)²/2γ³m`. Energy offsets map to relative momenta through
//! `E − E0 = v0 (p − p0)`, so the sample at arrival time `t` of a
//! [`TemporalWavefunction`] sits at co-moving position `ξ = −v0 t`.
//!
//! The vector potential `A(t) = A0 sin(ωt + φ_L)` with `A0 = −F0/ω` is uniform
//! inside the foil and zero outside, giving the potential `V = −e v0 A` while a
//! slice of the packet is inside. Its phase is integrated exactly over the
//! part of each step that a slice spends in the foil. The `A·(p − p0)` part of
//! the interaction is dropped; its relative size is `(E − E0)/(γ m v0²)`.

use num_complex::Complex64;

use crate::constants::{ELECTRON_REST_ENERGY, HBAR};
use crate::error::{Error, Result};
use crate::fourier::{CenteredFft, Sign};
use crate::lem::LemParams;
use crate::wavepacket::TemporalWavefunction;

/// Minimum steps per optical cycle for a trusted run.
pub const MIN_STEPS_PER_CYCLE: f64 = 200.0;

/// Norm drift above which a run is flagged.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct TdseOutcome {
    pub psi: TemporalWavefunction,
    /// `|‖ψ_out‖² − ‖ψ_in‖²|`
    pub norm_drift: f64,
    pub steps_per_cycle: f64,
    /// fs, total propagation time
    pub duration: f64,
    pub under_resolved: bool,
}

/// Quadratic spectral-phase coefficient (rad/eV²) accumulated by free
/// propagation over `duration` fs.
pub fn free_dispersion_coefficient(params: &LemParams, duration: f64) -> f64 {
    -duration / (2.0 * params.gamma.powi(3) * ELECTRON_REST_ENERGY * params.beta.powi(2) * HBAR)
}

/// Time span swept by the foil so that every slice of the grid crosses it.
pub fn sweep_window(psi: &TemporalWavefunction, params: &LemParams) -> (f64, f64) {
    let grid = psi.grid();
    let pad = 0.5 * params.transit_time() + grid.spacing();
    (grid.time(0) - pad, grid.time(grid.count() - 1) + pad)
}

/// Strang-split propagation over the foil sweep window in `steps` steps.
pub fn tdse_propagate(psi: &TemporalWavefunction, params: &LemParams, steps: usize) -> Result<TdseOutcome> {
    params.validate()?;
    if steps == 0 {
        return Err(Error::invalid("steps", "must be >= 1"));
    }
    let grid = *psi.grid();
    let n = grid.count();
    let (t_start, t_end) = sweep_window(psi, params);
    let duration = t_end - t_start;
    let h = duration / steps as f64;

    let energy_spacing = grid.conjugate(psi.carrier_energy()).spacing();
    let mass_term = 2.0 * params.gamma.powi(3) * ELECTRON_REST_ENERGY * params.beta.powi(2);
    let half_kick: Vec<Complex64> = (0..n)
        .map(|j| {
            let q = (j as f64 - (n / 2) as f64) * energy_spacing;
            Complex64::from_polar(1.0, -0.5 * h * q * q / (mass_term * HBAR))
        })
        .collect();

    let omega = params.angular_frequency();
    let a0 = -params.field_peak / omega;
    // (v0/ħ)∫A dt = amp·[cos(ωa + φ) − cos(ωb + φ)]
    let amp = params.velocity() * a0 / (HBAR * omega);
    let half_transit = 0.5 * params.transit_time();
    let times = grid.times();

    let mut fft = CenteredFft::new(n);
    let inv_n = 1.0 / n as f64;
    let mut data = psi.samples().to_vec();
    let norm_in: f64 = data.iter().map(|z| z.norm_sqr()).sum();

    // data lives in the energy representation between steps
    fft.process(&mut data, Sign::Positive);
    for step in 0..steps {
        let s0 = t_start + step as f64 * h;
        let s1 = s0 + h;
        data.iter_mut().zip(&half_kick).for_each(|(z, k)| *z *= k);
        fft.process(&mut data, Sign::Negative);
        if params.field_peak != 0.0 {
            for (z, &t) in data.iter_mut().zip(&times) {
                let a = s0.max(t - half_transit);
                let b = s1.min(t + half_transit);
                if b > a {
                    let phase = amp
                        * ((omega * a + params.phase_delay).cos() - (omega * b + params.phase_delay).cos());
                    *z *= Complex64::from_polar(1.0, phase);
                }
            }
        }
        fft.process(&mut data, Sign::Positive);
        data.iter_mut().for_each(|z| *z *= inv_n);
        data.iter_mut().zip(&half_kick).for_each(|(z, k)| *z *= k);
    }
    fft.process(&mut data, Sign::Negative);
    data.iter_mut().for_each(|z| *z *= inv_n);

    let norm_out: f64 = data.iter().map(|z| z.norm_sqr()).sum();
    let norm_drift = ((norm_out - norm_in) * grid.spacing()).abs();
    let steps_per_cycle = steps as f64 * params.optical_period() / duration;
    let out = TemporalWavefunction::from_samples(grid, psi.carrier_energy(), data)?;
    Ok(TdseOutcome {
        psi: out,
        norm_drift,
        steps_per_cycle,
        duration,
        under_resolved: norm_drift > MAX_NORM_DRIFT || steps_per_cycle < MIN_STEPS_PER_CYCLE,
    })
}

/// Steps needed to reach `per_cycle` steps per optical cycle over the sweep window.
pub fn steps_for_resolution(psi: &TemporalWavefunction, params: &LemParams, per_cycle: f64) -> usize {
    let (a, b) = sweep_window(psi, params);
    ((b - a) / params.optical_period() * per_cycle).ceil() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j_all;
    use crate::grid::EnergyGrid;
    use crate::lem::field_for_coupling;
    use crate::wavepacket::{make_gaussian_spectrum, to_energy_domain, to_time_domain, SpectralPhaseSpec};

    fn narrow_packet() -> TemporalWavefunction {
        let grid = EnergyGrid::new(10_000.0, 2.4 / 1023.0, 1024).unwrap();
        to_time_domain(&make_gaussian_spectrum(&grid, 0.01, &SpectralPhaseSpec::zero()).unwrap())
    }

    #[test]
    fn zero_field_gives_free_dispersion() {
        let psi = narrow_packet();
        let params = LemParams::from_kinetic_energy(10_000.0, 10.33, 0.0, 50.0, 0.0).unwrap();
        let steps = steps_for_resolution(&psi, &params, 200.0);
        let out = tdse_propagate(&psi, &params, steps).unwrap();
        assert!(!out.under_resolved);
        assert!(out.norm_drift < 1e-10);
        let a = to_energy_domain(&psi);
        let b = to_energy_domain(&out.psi);
        let c2 = free_dispersion_coefficient(&params, out.duration);
        let grid = a.grid();
        let peak = a.amplitude().iter().cloned().fold(0.0, f64::max);
        for i in 0..grid.count() {
            if a.amplitude()[i] > 1e-3 * peak {
                let q = grid.offset(i);
                let got = (b.samples()[i] / a.samples()[i]).arg();
                assert!((got - c2 * q * q).abs() < 1e-9, "q = {q}: {got} vs {}", c2 * q * q);
            }
        }
    }

    #[test]
    fn thin_foil_reproduces_bessel_populations() {
        let psi = narrow_packet();
        let mut params = LemParams::from_kinetic_energy(10_000.0, 10.33, 0.0, 50.0, 0.0).unwrap();
        let two_g = 0.8333;
        params.field_peak = field_for_coupling(&params, two_g);
        let steps = steps_for_resolution(&psi, &params, 200.0);
        let out = tdse_propagate(&psi, &params, steps).unwrap();
        assert!(!out.under_resolved);
        let spec = to_energy_domain(&out.psi);
        let grid = spec.grid();
        let hw = params.photon_energy();
        let density = spec.density();
        let j = bessel_j_all(two_g, 6);
        for n in -3i32..=3 {
            let pop: f64 = (0..grid.count())
                .filter(|&i| (grid.offset(i) - n as f64 * hw).abs() < 0.5 * hw)
                .map(|i| density[i] * grid.spacing())
                .sum();
            let want = j[n.unsigned_abs() as usize].powi(2);
            assert!((pop - want).abs() < 0.01 * want.max(1e-3), "n = {n}: {pop} vs {want}");
        }
    }

    #[test]
    fn coarse_stepping_is_flagged() {
        let psi = narrow_packet();
        let params = LemParams::from_kinetic_energy(10_000.0, 10.33, 0.0, 50.0, 0.0).unwrap();
        let out = tdse_propagate(&psi, &params, 100).unwrap();
        assert!(out.under_resolved);
        assert!(tdse_propagate(&psi, &params, 0).is_err());
    }
}
