//! Delay, recombination and detection of the two interferometer arms.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::constants::{FWHM_PER_SIGMA, HBAR};
use crate::error::{Error, Result};
use crate::fourier::{centered_dft, Sign};
use crate::grid::EnergyGrid;
use crate::wavepacket::{ensure_same_grid, SpectralWavefunction};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementConfig {
    /// fs
    pub tau: f64,
    /// eV
    pub delta_e: f64,
    /// eV, FWHM of the spectrometer response
    pub resolution: f64,
    /// standard deviation of the delay jitter as a fraction of `tau`
    pub jitter_fraction: f64,
    pub shots: usize,
}

impl MeasurementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::invalid("tau", format!("{} must be > 0", self.tau)));
        }
        if !self.delta_e.is_finite() {
            return Err(Error::invalid("delta_E", "must be finite"));
        }
        if !(self.resolution > 0.0) || !self.resolution.is_finite() {
            return Err(Error::invalid("resolution", format!("{} must be > 0", self.resolution)));
        }
        if !(self.jitter_fraction >= 0.0) || !self.jitter_fraction.is_finite() {
            return Err(Error::invalid(
                "jitter_fraction",
                format!("{} must be >= 0", self.jitter_fraction),
            ));
        }
        if self.shots == 0 {
            return Err(Error::invalid("shots", "must be >= 1"));
        }
        Ok(())
    }

    /// Fringe period `2πħ/τ` in eV.
    pub fn fringe_period(&self) -> f64 {
        2.0 * PI * HBAR / self.tau
    }

    /// The same measurement without shear.
    pub fn calibration(&self) -> Self {
        Self { delta_e: 0.0, ..*self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    grid: EnergyGrid,
    intensity: Vec<f64>,
    config: Option<MeasurementConfig>,
}

impl Interferogram {
    pub fn new(grid: EnergyGrid, intensity: Vec<f64>, config: Option<MeasurementConfig>) -> Result<Self> {
        if intensity.len() != grid.count() {
            return Err(Error::GridMismatch(format!(
                "{} intensities for a {}-point grid",
                intensity.len(),
                grid.count()
            )));
        }
        if intensity.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("interferogram", "intensities must be finite and >= 0"));
        }
        Ok(Self { grid, intensity, config })
    }

    pub fn grid(&self) -> &EnergyGrid {
        &self.grid
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn config(&self) -> Option<&MeasurementConfig> {
        self.config.as_ref()
    }

    pub fn with_config(mut self, config: MeasurementConfig) -> Self {
        self.config = Some(config);
        self
    }

    /// `∫ I dE`
    pub fn integral(&self) -> f64 {
        self.intensity.iter().sum::<f64>() * self.grid.spacing()
    }
}

/// Wien-filter delay: multiply by `exp(+iEτ/ħ)` with the absolute energy `E`.
///
/// Under the `exp(−iEt/ħ)` kernel this moves the packet later by `τ`, and the
/// cross term of [`interfere`] then carries `φ(E) − φ(E−ΔE) − Eτ/ħ`.
pub fn delay(psi: &SpectralWavefunction, tau: f64) -> SpectralWavefunction {
    let grid = *psi.grid();
    let samples = psi
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::from_polar(1.0, grid.energy(i) * tau / HBAR))
        .collect();
    SpectralWavefunction::from_samples(grid, samples).expect("delay keeps the grid")
}

/// `I(E) = |a(E) + b(E)|²`.
pub fn interfere(arm_a: &SpectralWavefunction, arm_b: &SpectralWavefunction) -> Result<Interferogram> {
    ensure_same_grid(arm_a.grid(), arm_b.grid())?;
    let intensity = arm_a
        .samples()
        .iter()
        .zip(arm_b.samples())
        .map(|(a, b)| (a + b).norm_sqr())
        .collect();
    Interferogram::new(*arm_a.grid(), intensity, None)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementWarning {
    /// Response FWHM exceeds the fringe period.
    FringesUnresolved { resolution: f64, fringe_period: f64 },
}

impl std::fmt::Display for MeasurementWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeasurementWarning::FringesUnresolved {
                resolution,
                fringe_period,
            } => write!(
                f,
                "spectrometer resolution {resolution} eV exceeds the fringe period {fringe_period:.6} eV"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Measurement {
    pub interferogram: Interferogram,
    pub warnings: Vec<MeasurementWarning>,
}

/// Jitter-averaged, resolution-limited interferogram of the direct arm and the
/// sheared arm delayed by `τ + δτ` per shot.
///
/// `sheared` must not be delayed yet. Delays `δτ ~ Normal(0, jitter·τ)` are
/// drawn in shot order from a ChaCha8 stream seeded with `seed`.
pub fn measure(
    direct: &SpectralWavefunction,
    sheared: &SpectralWavefunction,
    config: &MeasurementConfig,
    seed: u64,
) -> Result<Measurement> {
    config.validate()?;
    ensure_same_grid(direct.grid(), sheared.grid())?;
    let grid = *direct.grid();
    let n = grid.count();

    let offsets: Vec<f64> = if config.jitter_fraction == 0.0 {
        vec![0.0]
    } else {
        let normal = Normal::new(0.0, config.jitter_fraction * config.tau)
            .map_err(|e| Error::invalid("jitter_fraction", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..config.shots).map(|_| normal.sample(&mut rng)).collect()
    };

    let a = direct.samples();
    let b = sheared.samples();
    let mut total = vec![0.0; n];
    for &dtau in &offsets {
        let t = config.tau + dtau;
        for (i, acc) in total.iter_mut().enumerate() {
            let shifted = b[i] * Complex64::from_polar(1.0, grid.energy(i) * t / HBAR);
            *acc += (a[i] + shifted).norm_sqr();
        }
    }
    let shots = offsets.len() as f64;
    total.iter_mut().for_each(|v| *v /= shots);

    let smoothed = convolve_gaussian(&grid, &total, config.resolution);
    let mut warnings = Vec::new();
    if config.resolution > config.fringe_period() {
        warnings.push(MeasurementWarning::FringesUnresolved {
            resolution: config.resolution,
            fringe_period: config.fringe_period(),
        });
    }
    Ok(Measurement {
        interferogram: Interferogram::new(grid, smoothed, Some(*config))?,
        warnings,
    })
}

/// Circular convolution with a unit-area Gaussian of the given FWHM, clamped at zero.
pub fn convolve_gaussian(grid: &EnergyGrid, values: &[f64], fwhm: f64) -> Vec<f64> {
    let sigma = fwhm / FWHM_PER_SIGMA;
    let n = values.len();
    let tg = grid.conjugate();
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    centered_dft(&mut data, Sign::Positive);
    for (m, z) in data.iter_mut().enumerate() {
        let t = tg.time(m);
        *z *= (-0.5 * (sigma * t / HBAR).powi(2)).exp() / n as f64;
    }
    centered_dft(&mut data, Sign::Negative);
    data.iter().map(|z| z.re.max(0.0)).collect()
}

/// a.c./d.c. ratio: largest conjugate-domain magnitude in `[τ/2, 3τ/2]`
/// relative to the magnitude at zero.
pub fn fringe_visibility(interferogram: &Interferogram, tau: f64) -> f64 {
    let tg = interferogram.grid.conjugate();
    let mut data: Vec<Complex64> = interferogram
        .intensity
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    centered_dft(&mut data, Sign::Positive);
    let dc = data[tg.count() / 2].norm();
    let ac = (0..tg.count())
        .filter(|&m| (tg.time(m) - tau).abs() <= 0.5 * tau)
        .map(|m| data[m].norm())
        .fold(0.0, f64::max);
    ac / dc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    /// πħ/σ_E, fs
    pub tau_min: f64,
    /// 2πħ/δ_E, fs
    pub tau_max: f64,
    pub tau_ok: bool,
    /// ΔE / 2σ_E
    pub shear_ratio: f64,
    pub shear_ok: bool,
    /// exp(−ΔE²/4σ_E²)
    pub visibility: f64,
    /// response narrower than the fringe period
    pub resolution_ok: bool,
}

impl ConstraintReport {
    pub fn all_passed(&self) -> bool {
        self.tau_ok && self.shear_ok && self.resolution_ok
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.tau_ok {
            out.push(format!(
                "delay outside the window ({:.4}, {:.4}) fs",
                self.tau_min, self.tau_max
            ));
        }
        if !self.shear_ok {
            out.push(format!(
                "shear is {:.1}% of the spectral width 2 sigma_E (must be below 100%), visibility {:.3}",
                100.0 * self.shear_ratio,
                self.visibility
            ));
        }
        if !self.resolution_ok {
            out.push("spectrometer resolution exceeds the fringe period".to_string());
        }
        out
    }
}

pub fn check_constraints(sigma_e: f64, config: &MeasurementConfig) -> ConstraintReport {
    let tau_min = PI * HBAR / sigma_e;
    let tau_max = 2.0 * PI * HBAR / config.resolution;
    let shear_ratio = config.delta_e.abs() / (2.0 * sigma_e);
    ConstraintReport {
        tau_min,
        tau_max,
        tau_ok: config.tau > tau_min && config.tau < tau_max,
        shear_ratio,
        shear_ok: shear_ratio < 1.0,
        visibility: (-config.delta_e.powi(2) / (4.0 * sigma_e * sigma_e)).exp(),
        resolution_ok: config.resolution <= config.fringe_period(),
    }
}
