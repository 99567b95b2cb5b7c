//! Light-electron modulator: PINEM sidebands and the spectral-shear limit.
//!
//! Field strengths are in V/nm, so that with the elementary charge set to one
//! `F·z` is an energy in eV.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::bessel::bessel_j_all;
use crate::constants::{C_NM_PER_FS, ELECTRON_REST_ENERGY, HBAR, HC};
use crate::error::{Error, Result};
use crate::wavepacket::{to_energy_domain, to_time_domain, SpectralWavefunction};

/// Sideband orders beyond this are never summed.
pub const MAX_ORDER_CAP: usize = 32;

/// Completeness required of `Σ J_n²` over the retained orders.
pub const COMPLETENESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemParams {
    /// µm
    pub wavelength: f64,
    /// V/nm
    pub field_peak: f64,
    /// nm
    pub foil_thickness: f64,
    /// rad
    pub phase_delay: f64,
    /// eV
    pub kinetic_energy: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LemParams {
    /// Derive `γ = 1 + ε0/mc²` and `β` from the kinetic energy.
    pub fn from_kinetic_energy(
        kinetic_energy: f64,
        wavelength: f64,
        field_peak: f64,
        foil_thickness: f64,
        phase_delay: f64,
    ) -> Result<Self> {
        if !(kinetic_energy > 0.0) || !kinetic_energy.is_finite() {
            return Err(Error::invalid("kinetic energy", format!("{kinetic_energy} must be > 0")));
        }
        let gamma = 1.0 + kinetic_energy / ELECTRON_REST_ENERGY;
        let beta = (1.0 - 1.0 / (gamma * gamma)).sqrt();
        let params = Self {
            wavelength,
            field_peak,
            foil_thickness,
            phase_delay,
            kinetic_energy,
            beta,
            gamma,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.wavelength > 0.0) || !self.wavelength.is_finite() {
            return Err(Error::invalid("wavelength", format!("{} must be > 0", self.wavelength)));
        }
        if !(self.foil_thickness > 0.0) || !self.foil_thickness.is_finite() {
            return Err(Error::invalid("foil thickness", format!("{} must be > 0", self.foil_thickness)));
        }
        if !self.field_peak.is_finite() || !self.phase_delay.is_finite() {
            return Err(Error::invalid("LEM field", "field and phase delay must be finite"));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::invalid("beta", format!("{} must lie in (0, 1)", self.beta)));
        }
        let expected = 1.0 / (1.0 - self.beta * self.beta).sqrt();
        if (self.gamma - expected).abs() > 1e-12 * expected {
            return Err(Error::invalid(
                "gamma",
                format!("{} inconsistent with beta (expected {expected})", self.gamma),
            ));
        }
        Ok(())
    }

    /// ħω_L = hc/λ_L, eV.
    pub fn photon_energy(&self) -> f64 {
        HC / (self.wavelength * 1000.0)
    }

    /// ω_L, rad/fs.
    pub fn angular_frequency(&self) -> f64 {
        self.photon_energy() / HBAR
    }

    /// T = λ_L/c, fs.
    pub fn optical_period(&self) -> f64 {
        self.wavelength * 1000.0 / C_NM_PER_FS
    }

    /// v0, nm/fs.
    pub fn velocity(&self) -> f64 {
        self.beta * C_NM_PER_FS
    }

    /// p0·c = γβmc², eV.
    pub fn momentum_ev(&self) -> f64 {
        self.gamma * self.beta * ELECTRON_REST_ENERGY
    }

    /// ω_L/v0, rad/nm.
    pub fn slippage_wavenumber(&self) -> f64 {
        2.0 * PI / (self.wavelength * 1000.0 * self.beta)
    }

    /// Foil transit time L/v0, fs.
    pub fn transit_time(&self) -> f64 {
        self.foil_thickness / self.velocity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingStrength {
    pub g: Complex64,
}

impl CouplingStrength {
    pub fn new(g: Complex64) -> Self {
        Self { g }
    }

    /// Real coupling with `2|g| = two_g`.
    pub fn from_two_g(two_g: f64) -> Self {
        Self {
            g: Complex64::new(0.5 * two_g, 0.0),
        }
    }

    pub fn two_g(&self) -> f64 {
        2.0 * self.g.norm()
    }

    /// Net shift `2|g|·ħω` in the broadband limit.
    pub fn shear_energy(&self, photon_energy: f64) -> f64 {
        self.two_g() * photon_energy
    }
}

/// Longitudinal field amplitude sampled along the electron path.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldProfile {
    /// nm
    z: Vec<f64>,
    /// V/nm
    field: Vec<f64>,
}

impl FieldProfile {
    pub fn new(z: Vec<f64>, field: Vec<f64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::invalid("field profile", "no samples"));
        }
        if z.len() != field.len() {
            return Err(Error::invalid(
                "field profile",
                format!("{} positions vs {} field values", z.len(), field.len()),
            ));
        }
        if z.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("field profile", "positions must be strictly increasing"));
        }
        if field.iter().chain(&z).any(|v| !v.is_finite()) {
            return Err(Error::invalid("field profile", "non-finite sample"));
        }
        Ok(Self { z, field })
    }

    /// Constant `field` over `[−L/2, L/2]`.
    pub fn uniform(thickness: f64, field: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::invalid("field profile", "uniform profile needs >= 2 samples"));
        }
        let z = (0..samples)
            .map(|i| -0.5 * thickness + thickness * i as f64 / (samples - 1) as f64)
            .collect();
        Self::new(z, vec![field; samples])
    }

    pub fn positions(&self) -> &[f64] {
        &self.z
    }

    pub fn values(&self) -> &[f64] {
        &self.field
    }
}

/// `g = (1/2ħω) ∫ F(z) exp(−iωz/v0) dz` by the trapezoid rule.
///
/// A single-sample profile has no extent and yields `g = 0`.
pub fn coupling_from_field(params: &LemParams, profile: &FieldProfile) -> CouplingStrength {
    let kappa = params.slippage_wavenumber();
    let integrand: Vec<Complex64> = profile
        .z
        .iter()
        .zip(&profile.field)
        .map(|(&z, &f)| f * Complex64::from_polar(1.0, -kappa * z))
        .collect();
    let integral: Complex64 = profile
        .z
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(z, w)| 0.5 * (z[1] - z[0]) * (w[0] + w[1]))
        .sum();
    CouplingStrength::new(integral / (2.0 * params.photon_energy()))
}

/// Uniform field over the foil that produces `2|g| = two_g`.
pub fn field_for_coupling(params: &LemParams, two_g: f64) -> f64 {
    let half_phase = 0.5 * params.slippage_wavenumber() * params.foil_thickness;
    let sinc = if half_phase == 0.0 { 1.0 } else { half_phase.sin() / half_phase };
    two_g * params.photon_energy() / (params.foil_thickness * sinc)
}

/// Smallest order `n` with `J_0² + 2Σ_{k≤n} J_k² > 1 − 1e−12`, or `None` past the cap.
pub fn default_max_order(two_g: f64) -> Option<usize> {
    let j = bessel_j_all(two_g, MAX_ORDER_CAP);
    let mut total = j[0] * j[0];
    for (n, v) in j.iter().enumerate() {
        if n > 0 {
            total += 2.0 * v * v;
        }
        if total > 1.0 - COMPLETENESS_TOL {
            return Some(n);
        }
    }
    None
}

/// `ψ_f(E) = Σ_n J_n(2|g|) e^{in·arg g} ψ(E − nħω)`.
///
/// Each sideband shift is applied as a phase ramp in the time domain, which
/// interpolates band-limitedly when `nħω` falls between energy samples.
pub fn pinem_modulate(
    psi: &SpectralWavefunction,
    coupling: CouplingStrength,
    photon_energy: f64,
    max_order: Option<usize>,
) -> Result<SpectralWavefunction> {
    if !(photon_energy > 0.0) {
        return Err(Error::invalid("photon energy", format!("{photon_energy} must be > 0")));
    }
    let two_g = coupling.two_g();
    if two_g == 0.0 {
        return Ok(psi.clone());
    }
    let order = match max_order {
        Some(n) => n,
        None => default_max_order(two_g).ok_or_else(|| {
            Error::invalid(
                "coupling",
                format!("2|g| = {two_g} needs more than {MAX_ORDER_CAP} sideband orders"),
            )
        })?,
    };
    let j = bessel_j_all(two_g, order);
    let captured = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
    if captured <= 1.0 - COMPLETENESS_TOL {
        return Err(Error::invalid(
            "max_order",
            format!("{order} orders capture only {captured:.15} of the sideband weight"),
        ));
    }

    let grid = psi.grid();
    let reach = (order + 4) as f64 * photon_energy;
    let half_span = (-grid.offset(0)).min(grid.offset(grid.count() - 1));
    if reach > half_span {
        return Err(Error::GridTooNarrow {
            reason: format!("{order} sideband orders of {photon_energy} eV"),
            required: 2.0 * reach,
            actual: grid.span(),
        });
    }

    let theta = coupling.g.arg();
    let coeffs: Vec<(f64, Complex64)> = (-(order as i64)..=order as i64)
        .map(|n| {
            let mag = j[n.unsigned_abs() as usize];
            let signed = if n < 0 && n % 2 != 0 { -mag } else { mag };
            (n as f64, Complex64::from_polar(signed, n as f64 * theta))
        })
        .collect();

    let temporal = to_time_domain(psi);
    let tg = *temporal.grid();
    let omega = photon_energy / HBAR;
    let samples: Vec<Complex64> = temporal
        .samples()
        .iter()
        .enumerate()
        .map(|(m, z)| {
            let t = tg.time(m);
            let factor: Complex64 = coeffs
                .iter()
                .map(|&(n, c)| c * Complex64::from_polar(1.0, -n * omega * t))
                .sum();
            z * factor
        })
        .collect();
    let modulated = crate::wavepacket::TemporalWavefunction::from_samples(tg, temporal.carrier_energy(), samples)?;
    let out = to_energy_domain(&modulated);
    SpectralWavefunction::from_samples(*grid, out.into_samples())
}

/// Rigid translation `ψ(E) → ψ(E − ΔE)` by the Fourier-shift theorem.
pub fn shear(psi: &SpectralWavefunction, delta_e: f64) -> Result<SpectralWavefunction> {
    let grid = psi.grid();
    if !delta_e.is_finite() || delta_e.abs() >= grid.span() / 4.0 {
        return Err(Error::GridTooNarrow {
            reason: format!("shear of {delta_e} eV"),
            required: 4.0 * delta_e.abs(),
            actual: grid.span(),
        });
    }
    if delta_e == 0.0 {
        return Ok(psi.clone());
    }
    let temporal = to_time_domain(psi);
    let tg = *temporal.grid();
    let samples = temporal
        .samples()
        .iter()
        .enumerate()
        .map(|(m, z)| z * Complex64::from_polar(1.0, -delta_e * tg.time(m) / HBAR))
        .collect();
    let shifted = crate::wavepacket::TemporalWavefunction::from_samples(tg, temporal.carrier_energy(), samples)?;
    SpectralWavefunction::from_samples(*grid, to_energy_domain(&shifted).into_samples())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::EnergyGrid;
    use crate::wavepacket::{make_gaussian_spectrum, SpectralPhaseSpec};

    fn ten_kev() -> LemParams {
        LemParams::from_kinetic_energy(10_000.0, 10.33, 0.0, 50.0, 0.0).unwrap()
    }

    #[test]
    fn relativistic_factors() {
        let p = ten_kev();
        assert!((p.gamma - 1.019_57).abs() < 1e-5);
        assert!((p.beta - 0.1949).abs() < 1e-3);
        assert!((p.photon_energy() - 0.120_023).abs() < 1e-6);
        assert!((p.optical_period() - 34.457).abs() < 1e-3);
        let bad = LemParams { gamma: 1.5, ..p };
        assert!(bad.validate().is_err());
        assert!(LemParams::from_kinetic_energy(-1.0, 10.33, 0.0, 50.0, 0.0).is_err());
    }

    #[test]
    fn coupling_quadrature() {
        let p = ten_kev();
        let zero = FieldProfile::uniform(50.0, 0.0, 101).unwrap();
        assert_eq!(coupling_from_field(&p, &zero).two_g(), 0.0);

        // closed form for a constant field: (F L/ħω)·sinc(κL/2)
        let f = 0.002;
        let profile = FieldProfile::uniform(50.0, f, 2001).unwrap();
        let g = coupling_from_field(&p, &profile);
        let x = 0.5 * p.slippage_wavenumber() * 50.0;
        let exact = f * 50.0 / p.photon_energy() * x.sin() / x;
        assert!(((g.two_g() - exact) / exact).abs() < 1e-6);
        let thin = f * 50.0 / p.photon_energy();
        assert!(((g.two_g() - thin) / thin).abs() < 2e-3);

        let target = 0.1 / p.photon_energy();
        let field = field_for_coupling(&p, target);
        let back = coupling_from_field(&p, &FieldProfile::uniform(50.0, field, 2001).unwrap());
        assert!((back.two_g() - target).abs() < 1e-6);
        assert!(FieldProfile::new(vec![], vec![]).is_err());
    }

    #[test]
    fn zero_coupling_is_identity() {
        let grid = EnergyGrid::spanning(10_000.0, 0.425, 16.0, 1024).unwrap();
        let psi = make_gaussian_spectrum(&grid, 0.425, &SpectralPhaseSpec::from_taylor(0.68, 6.3)).unwrap();
        let out = pinem_modulate(&psi, CouplingStrength::from_two_g(0.0), 0.12, None).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn monochromatic_sidebands() {
        let grid = EnergyGrid::new(0.0, 0.002, 2048).unwrap();
        let psi = make_gaussian_spectrum(&grid, 0.01, &SpectralPhaseSpec::zero()).unwrap();
        let hw = 0.120_023;
        let out = pinem_modulate(&psi, CouplingStrength::from_two_g(1.0), hw, None).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-9);
        let density = out.density();
        let pop = |n: i32| -> f64 {
            (0..grid.count())
                .filter(|&i| (grid.offset(i) - n as f64 * hw).abs() < 0.5 * hw)
                .map(|i| density[i] * grid.spacing())
                .sum()
        };
        assert!((pop(0) - 0.5855).abs() < 1e-4);
        assert!((pop(1) - 0.1936).abs() < 1e-4);
        assert!((pop(-1) - 0.1936).abs() < 1e-4);
        assert!((pop(2) - 0.013_20).abs() < 1e-5);
    }

    #[test]
    fn pinem_span_and_order_checks() {
        let grid = EnergyGrid::new(0.0, 0.001, 1024).unwrap();
        let psi = make_gaussian_spectrum(&grid, 0.03, &SpectralPhaseSpec::zero()).unwrap();
        assert!(matches!(
            pinem_modulate(&psi, CouplingStrength::from_two_g(1.0), 0.12, None),
            Err(Error::GridTooNarrow { .. })
        ));
        let wide = EnergyGrid::new(0.0, 0.004, 2048).unwrap();
        let psi = make_gaussian_spectrum(&wide, 0.03, &SpectralPhaseSpec::zero()).unwrap();
        assert!(pinem_modulate(&psi, CouplingStrength::from_two_g(1.0), 0.12, Some(2)).is_err());
        assert!(default_max_order(100.0).is_none());
        assert!(default_max_order(0.8333).unwrap() <= 12);
    }

    #[test]
    fn shear_group_property() {
        let grid = EnergyGrid::spanning(10_000.0, 0.425, 16.0, 4096).unwrap();
        let psi = make_gaussian_spectrum(&grid, 0.425, &SpectralPhaseSpec::polynomial(&[(2, 0.34), (3, 1.05)]).unwrap()).unwrap();
        assert_eq!(shear(&psi, 0.0).unwrap(), psi);
        let there = shear(&psi, 0.1).unwrap();
        let back = shear(&there, -0.1).unwrap();
        assert!(back.max_abs_difference(&psi).unwrap() < 1e-10);
        assert!((there.norm() - 1.0).abs() < 1e-9);
        // peak moves up by ΔE
        let expected = make_gaussian_spectrum(&grid, 0.425, &SpectralPhaseSpec::zero())
            .unwrap()
            .with_phase(|q| 0.34 * (q - 0.1).powi(2) + 1.05 * (q - 0.1).powi(3));
        let amp: Vec<f64> = (0..grid.count())
            .map(|i| (-(grid.offset(i) - 0.1).powi(2) / (4.0 * 0.425 * 0.425)).exp())
            .collect();
        let scale = there.amplitude()[grid.count() / 2] / amp[grid.count() / 2];
        for i in (1000..3000).step_by(97) {
            let want = amp[i] * scale * Complex64::from_polar(1.0, expected.samples()[i].arg());
            assert!((there.samples()[i] - want).norm() < 1e-9);
        }
        assert!(shear(&psi, grid.span() / 4.0).is_err());
    }

    #[test]
    fn pinem_approaches_shear_at_fig3_point() {
        let grid = EnergyGrid::spanning(10_000.0, 0.425, 16.0, 4096).unwrap();
        let psi = make_gaussian_spectrum(&grid, 0.425, &SpectralPhaseSpec::polynomial(&[(2, 0.34), (3, 1.05)]).unwrap()).unwrap();
        let hw = ten_kev().photon_energy();
        let two_g = 0.1 / hw;
        let pinem = pinem_modulate(&psi, CouplingStrength::from_two_g(two_g), hw, None).unwrap();
        let exact = shear(&psi, 0.1).unwrap();
        let d = pinem.relative_l2_distance(&exact).unwrap();
        assert!(d < 0.01, "distance {d}");
    }
}
