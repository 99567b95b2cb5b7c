//! Electron wavefunctions in the energy and time domains.
//!
//! A [`SpectralWavefunction`] holds complex samples `ψ(E)` normalized so that
//! `Σ|ψ|²·dE = 1`. Its Fourier partner, [`TemporalWavefunction`], holds the
//! slowly varying envelope `ψ(t)` relative to the carrier at the grid center
//! energy, normalized so that `Σ|ψ|²·dt = 1`. The transform kernel is
//!
//! ```text
//! ψ(t) = (2πħ)^(-1/2) ∫ dE ψ(E) exp(−i (E − E0) t / ħ)
//! ```
//!
//! so a linear spectral phase `φ1·(E − E0)` moves the pulse to `t = ħ·φ1`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::fourier::{centered_dft, Sign};
use crate::grid::{EnergyGrid, TimeGrid};

/// Largest tolerated fraction of a Gaussian's norm lying outside the grid.
pub const MAX_TRUNCATION: f64 = 1e-6;

/// Minimum grid span, in units of `sigma_E`, for a Gaussian spectrum.
pub const MIN_SPAN_SIGMAS: f64 = 8.0;

/// Refinement factor used when locating half-maximum crossings.
const MOMENT_REFINEMENT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatoryPhase {
    /// rad
    pub amplitude: f64,
    /// eV
    pub period: f64,
    /// eV, measured from the center energy
    pub offset: f64,
}

/// Spectral phase `Σ c_n (E − E0)^n` for orders `n ≥ 2`, plus an optional
/// sinusoidal ripple `a·sin(2π (E − E0 − offset) / period)`.
///
/// Coefficients are polynomial coefficients, not Taylor derivatives: the
/// Taylor coefficient of order `n` is `n!·c_n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectralPhaseSpec {
    poly: Vec<(u32, f64)>,
    oscillatory: Option<OscillatoryPhase>,
}

impl SpectralPhaseSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(poly: Vec<(u32, f64)>, oscillatory: Option<OscillatoryPhase>) -> Result<Self> {
        for (i, &(order, coeff)) in poly.iter().enumerate() {
            if order < 2 {
                return Err(Error::invalid(
                    "phase order",
                    format!("order {order} is a gauge term; only orders >= 2 are accepted"),
                ));
            }
            if !coeff.is_finite() {
                return Err(Error::invalid("phase coefficient", format!("order {order} is not finite")));
            }
            if poly[..i].iter().any(|&(o, _)| o == order) {
                return Err(Error::invalid("phase order", format!("order {order} given twice")));
            }
        }
        if let Some(osc) = oscillatory {
            if !(osc.period > 0.0) || !osc.amplitude.is_finite() || !osc.offset.is_finite() {
                return Err(Error::invalid(
                    "oscillatory phase",
                    "period must be > 0 and amplitude/offset finite",
                ));
            }
        }
        let mut poly = poly;
        poly.sort_by_key(|&(o, _)| o);
        Ok(Self { poly, oscillatory })
    }

    pub fn polynomial(coeffs: &[(u32, f64)]) -> Result<Self> {
        Self::new(coeffs.to_vec(), None)
    }

    /// `½ φ2 (E−E0)² + ⅙ φ3 (E−E0)³` from Taylor coefficients (rad/eV², rad/eV³).
    pub fn from_taylor(phi2: f64, phi3: f64) -> Self {
        let mut poly = Vec::new();
        if phi2 != 0.0 {
            poly.push((2, 0.5 * phi2));
        }
        if phi3 != 0.0 {
            poly.push((3, phi3 / 6.0));
        }
        Self {
            poly,
            oscillatory: None,
        }
    }

    pub fn with_oscillation(self, osc: OscillatoryPhase) -> Result<Self> {
        Self::new(self.poly, Some(osc))
    }

    pub fn poly_coeffs(&self) -> &[(u32, f64)] {
        &self.poly
    }

    pub fn oscillatory(&self) -> Option<OscillatoryPhase> {
        self.oscillatory
    }

    /// Polynomial coefficient of `order`, zero when absent.
    pub fn coefficient(&self, order: u32) -> f64 {
        self.poly
            .iter()
            .find(|&&(o, _)| o == order)
            .map_or(0.0, |&(_, c)| c)
    }

    /// Taylor coefficient `∂ⁿφ/∂Eⁿ` at the center energy (polynomial part only).
    pub fn taylor(&self, order: u32) -> f64 {
        let factorial: f64 = (1..=order).map(f64::from).product();
        factorial * self.coefficient(order)
    }

    /// Phase at energy offset `q = E − E0`.
    pub fn eval(&self, q: f64) -> f64 {
        let poly: f64 = self.poly.iter().map(|&(n, c)| c * q.powi(n as i32)).sum();
        let osc = self
            .oscillatory
            .map_or(0.0, |o| o.amplitude * (2.0 * PI * (q - o.offset) / o.period).sin());
        poly + osc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralWavefunction {
    grid: EnergyGrid,
    samples: Vec<Complex64>,
}

impl SpectralWavefunction {
    pub fn from_samples(grid: EnergyGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}-point grid",
                samples.len(),
                grid.count()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("wavefunction", "non-finite sample"));
        }
        Ok(Self { grid, samples })
    }

    /// Build from samples and rescale to unit norm.
    pub fn normalized_from(grid: EnergyGrid, samples: Vec<Complex64>) -> Result<Self> {
        let mut psi = Self::from_samples(grid, samples)?;
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::invalid("wavefunction", "zero norm"));
        }
        let scale = norm.sqrt().recip();
        psi.samples.iter_mut().for_each(|z| *z *= scale);
        Ok(psi)
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// `Σ|ψ|²·dE`
    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn density(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn amplitude(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    /// `arg ψ(E)` sample by sample, wrapped to (−π, π].
    pub fn wrapped_phase(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.arg()).collect()
    }

    /// Multiply every sample by `exp(i f(E − E0))`.
    pub fn with_phase(&self, f: impl Fn(f64) -> f64) -> Self {
        let samples = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, z)| z * Complex64::from_polar(1.0, f(self.grid.offset(i))))
            .collect();
        Self {
            grid: self.grid,
            samples,
        }
    }

    /// `‖self − other‖ / ‖other‖` on a shared grid.
    pub fn relative_l2_distance(&self, other: &SpectralWavefunction) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        let diff: f64 = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let base: f64 = other.samples.iter().map(|z| z.norm_sqr()).sum();
        Ok((diff / base).sqrt())
    }

    pub fn max_abs_difference(&self, other: &SpectralWavefunction) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn ensure_same_grid(a: &EnergyGrid, b: &EnergyGrid) -> Result<()> {
    if a.same_lattice(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!("{a:?} vs {b:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalWavefunction {
    grid: TimeGrid,
    carrier_energy: f64,
    samples: Vec<Complex64>,
}

impl TemporalWavefunction {
    pub fn from_samples(grid: TimeGrid, carrier_energy: f64, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a {}-point grid",
                samples.len(),
                grid.count()
            )));
        }
        Ok(Self {
            grid,
            carrier_energy,
            samples,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn carrier_energy(&self) -> f64 {
        self.carrier_energy
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Band-limited interpolation onto a grid `factor` times finer with the same extent.
    pub fn refined(&self, factor: usize) -> Self {
        if factor <= 1 {
            return self.clone();
        }
        let spectral = to_energy_domain(self);
        let n = spectral.grid.count();
        let big = n * factor;
        let mut padded = vec![Complex64::new(0.0, 0.0); big];
        let start = big / 2 - n / 2;
        padded[start..start + n].copy_from_slice(&spectral.samples);
        let grid = spectral
            .grid
            .with_count(big)
            .expect("refined count is even and larger than the original");
        let t0 = self.grid.center_time();
        let wide = SpectralWavefunction { grid, samples: padded }.with_phase(|q| -q * t0 / HBAR);
        let mut out = to_time_domain(&wide);
        out.grid = TimeGrid::new(t0, out.grid.spacing(), big).expect("refined grid is valid");
        out
    }
}

/// Gaussian spectrum `|ψ| ∝ exp(−(E−E0)²/4σ_E²)` with the given phase, unit-normalized.
pub fn make_gaussian_spectrum(
    grid: &EnergyGrid,
    sigma_e: f64,
    phase: &SpectralPhaseSpec,
) -> Result<SpectralWavefunction> {
    if !(sigma_e > 0.0) || !sigma_e.is_finite() {
        return Err(Error::invalid("sigma_E", format!("{sigma_e} must be > 0")));
    }
    let span = grid.span();
    if span < MIN_SPAN_SIGMAS * sigma_e {
        return Err(Error::GridTooNarrow {
            reason: format!("Gaussian of sigma_E = {sigma_e} eV"),
            required: MIN_SPAN_SIGMAS * sigma_e,
            actual: span,
        });
    }
    // |ψ|² is a normal density with standard deviation σ_E
    let lo = -grid.offset(0);
    let hi = grid.offset(grid.count() - 1);
    let scale = sigma_e * std::f64::consts::SQRT_2;
    let outside = 0.5 * libm::erfc(lo / scale) + 0.5 * libm::erfc(hi / scale);
    if outside > MAX_TRUNCATION {
        let half = scale * erfc_inverse_bound(MAX_TRUNCATION);
        return Err(Error::GridTooNarrow {
            reason: format!("truncated norm fraction {outside:.3e} exceeds {MAX_TRUNCATION:e}"),
            required: 2.0 * half,
            actual: span,
        });
    }
    let samples = (0..grid.count())
        .map(|i| {
            let q = grid.offset(i);
            Complex64::from_polar((-q * q / (4.0 * sigma_e * sigma_e)).exp(), phase.eval(q))
        })
        .collect();
    SpectralWavefunction::normalized_from(*grid, samples)
}

/// Smallest x with erfc(x) ≤ p, by bisection (only used for error messages).
fn erfc_inverse_bound(p: f64) -> f64 {
    let (mut a, mut b) = (0.0, 40.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if libm::erfc(m) > p {
            a = m;
        } else {
            b = m;
        }
    }
    b
}

pub fn to_time_domain(psi: &SpectralWavefunction) -> TemporalWavefunction {
    let grid = psi.grid.conjugate();
    let mut data = psi.samples.clone();
    centered_dft(&mut data, Sign::Negative);
    let scale = psi.grid.spacing() / (2.0 * PI * HBAR).sqrt();
    data.iter_mut().for_each(|z| *z *= scale);
    TemporalWavefunction {
        grid,
        carrier_energy: psi.grid.center_energy(),
        samples: data,
    }
}

pub fn to_energy_domain(psi: &TemporalWavefunction) -> SpectralWavefunction {
    let grid = psi.grid.conjugate(psi.carrier_energy);
    let mut data = psi.samples.clone();
    centered_dft(&mut data, Sign::Positive);
    let scale = psi.grid.spacing() / (2.0 * PI * HBAR).sqrt();
    let t0 = psi.grid.center_time();
    for (i, z) in data.iter_mut().enumerate() {
        *z *= scale;
        if t0 != 0.0 {
            *z *= Complex64::from_polar(1.0, grid.offset(i) * t0 / HBAR);
        }
    }
    SpectralWavefunction { grid, samples: data }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityMoments {
    /// fs
    pub mean: f64,
    /// fs
    pub rms: f64,
    /// fs, outermost half-maximum crossings
    pub fwhm: f64,
    /// more than two half-maximum crossings were found
    pub multimodal: bool,
}

/// Mean, rms width and FWHM of `|ψ(t)|²`.
///
/// Moments and half-maximum crossings are taken on a band-limited refinement
/// of the pulse. Sampling `|ψ|²` at twice the native rate or more makes the
/// moment sums exact for a localized pulse, and pulses spanning only a few
/// native samples still get a sharp FWHM.
pub fn intensity_moments(psi: &TemporalWavefunction) -> IntensityMoments {
    let fine = psi.refined(MOMENT_REFINEMENT);
    let intensity = fine.intensity();
    let times = fine.grid.times();
    let m0: f64 = intensity.iter().sum();
    let m1 = times.iter().zip(&intensity).map(|(t, i)| t * i).sum::<f64>() / m0;
    let m2 = times.iter().zip(&intensity).map(|(t, i)| (t - m1).powi(2) * i).sum::<f64>() / m0;
    let (fwhm, multimodal) = half_max_width(&times, &intensity);
    IntensityMoments {
        mean: m1,
        rms: m2.sqrt(),
        fwhm,
        multimodal,
    }
}

/// Width between the outermost half-maximum crossings, and whether more than
/// two crossings exist.
pub fn half_max_width(x: &[f64], y: &[f64]) -> (f64, bool) {
    let peak = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let half = 0.5 * peak;
    let mut crossings = Vec::new();
    for i in 0..y.len().saturating_sub(1) {
        let (a, b) = (y[i] - half, y[i + 1] - half);
        if a == 0.0 {
            crossings.push(x[i]);
        } else if a * b < 0.0 {
            crossings.push(x[i] + (x[i + 1] - x[i]) * a / (a - b));
        }
    }
    match (crossings.first(), crossings.last()) {
        (Some(&l), Some(&r)) if crossings.len() >= 2 => (r - l, crossings.len() > 2),
        _ => (f64::NAN, false),
    }
}
