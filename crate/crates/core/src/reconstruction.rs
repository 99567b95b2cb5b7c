//! Spectral phase retrieval from a pair of interferograms.
//!
//! The chain is: transform `I(E)` to the conjugate axis, isolate the a.c.
//! sideband at `+τ` with a super-Gaussian window, transform back and take the
//! argument, subtract the unsheared calibration run, and sum the resulting
//! finite differences `θ(E) = φ(E) − φ(E − ΔE)` along a lattice of spacing ΔE.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::fourier::{centered_dft, Sign};
use crate::grid::EnergyGrid;
use crate::interferometer::{Interferogram, MeasurementConfig};
use crate::interp::CubicSpline;
use crate::wavepacket::{to_time_domain, SpectralWavefunction, TemporalWavefunction};

/// Default a.c. amplitude floor, relative to its peak, below which phase samples are masked.
pub const DEFAULT_AMPLITUDE_FLOOR: f64 = 1e-5;

/// Fidelity support: |ψ| at least this fraction of its peak.
pub const SUPPORT_FRACTION: f64 = 0.01;

/// Where the reconstructed wavefunction is referred to.
pub const REFERENCE_PLANE: &str = "lem";

/// Super-Gaussian window `exp(−ln2·(2(t − center)/fwhm)^(2·order))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub center: f64,
    pub fwhm: f64,
    pub order: u32,
}

impl FilterSpec {
    /// Fourth-order window centered on τ with FWHM τ.
    pub fn standard(tau: f64) -> Self {
        Self {
            center: tau,
            fwhm: tau,
            order: 4,
        }
    }

    pub fn response(&self, t: f64) -> f64 {
        let x = 2.0 * (t - self.center) / self.fwhm;
        (-LN_2 * x.powi(2 * self.order as i32)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconstructionOptions {
    pub amplitude_floor: f64,
    /// `None` uses [`FilterSpec::standard`] at the measured delay.
    pub filter: Option<FilterSpec>,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            amplitude_floor: DEFAULT_AMPLITUDE_FLOOR,
            filter: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AcExtraction {
    pub grid: EnergyGrid,
    pub tau: f64,
    pub filter: FilterSpec,
    /// windowed transform on the conjugate axis
    pub conjugate: Vec<Complex64>,
    /// location of the a.c. maximum, fs
    pub peak_time: f64,
    /// a.c. term back on the energy axis, `∝ ψ_a(E)·ψ_b*(E)`
    pub signal: Vec<Complex64>,
}

pub fn extract_ac(interferogram: &Interferogram, tau: f64) -> Result<AcExtraction> {
    extract_ac_with(interferogram, tau, FilterSpec::standard(tau))
}

pub fn extract_ac_with(interferogram: &Interferogram, tau: f64, filter: FilterSpec) -> Result<AcExtraction> {
    let not_found = |reason: String| Error::AcPeakNotFound { tau, reason };
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("{tau} must be > 0")));
    }
    let grid = *interferogram.grid();
    let tg = grid.conjugate();
    let n = grid.count();
    if 1.5 * tau > tg.time(n - 1) {
        return Err(not_found(format!(
            "conjugate axis ends at {:.3} fs; refine the energy grid",
            tg.time(n - 1)
        )));
    }

    let mut data: Vec<Complex64> = interferogram
        .intensity()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    centered_dft(&mut data, Sign::Positive);
    let dc = data[n / 2].norm();

    let (peak_index, peak_mag) = (0..n)
        .filter(|&m| (tg.time(m) - tau).abs() <= 0.5 * tau)
        .map(|m| (m, data[m].norm()))
        .fold((n / 2, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    if !(peak_mag >= 1e-9 * dc) || peak_mag == 0.0 {
        return Err(not_found(format!(
            "no fringe signal (a.c./d.c. = {:.3e})",
            peak_mag / dc
        )));
    }
    let peak_time = tg.time(peak_index);
    if (peak_time - tau).abs() > 0.25 * tau {
        return Err(not_found(format!("strongest sideband sits at {peak_time:.3} fs")));
    }

    for (m, z) in data.iter_mut().enumerate() {
        *z *= filter.response(tg.time(m));
    }
    let conjugate = data.clone();
    centered_dft(&mut data, Sign::Negative);
    let inv_n = 1.0 / n as f64;
    data.iter_mut().for_each(|z| *z *= inv_n);
    Ok(AcExtraction {
        grid,
        tau,
        filter,
        conjugate,
        peak_time,
        signal: data,
    })
}

/// Phase samples on the energy grid with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedPhase {
    pub grid: EnergyGrid,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
    /// weights used to pick the seed and the floor
    pub amplitude: Vec<f64>,
}

impl MaskedPhase {
    pub fn peak_index(&self) -> usize {
        argmax(&self.amplitude)
    }

    /// Contiguous valid run `[lo, hi]` (inclusive indices).
    pub fn support(&self) -> Option<(usize, usize)> {
        let lo = self.valid.iter().position(|&v| v)?;
        let hi = self.valid.iter().rposition(|&v| v)?;
        Some((lo, hi))
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Nearest-branch unwrapping outward from the amplitude peak. Samples below
/// `floor·max(amplitude)`, and everything beyond them, are masked.
pub fn unwrap_from_peak(wrapped: &[f64], amplitude: &[f64], floor: f64) -> (Vec<f64>, Vec<bool>) {
    let n = wrapped.len();
    let p = argmax(amplitude);
    let threshold = floor * amplitude[p];
    let mut values = vec![0.0; n];
    let mut valid = vec![false; n];
    values[p] = wrapped[p];
    valid[p] = true;
    let mut step = |i: usize, prev: f64| -> Option<f64> {
        if amplitude[i] < threshold {
            return None;
        }
        let v = wrapped[i] + 2.0 * PI * ((prev - wrapped[i]) / (2.0 * PI)).round();
        values[i] = v;
        valid[i] = true;
        Some(v)
    };
    let mut prev = wrapped[p];
    for i in p + 1..n {
        match step(i, prev) {
            Some(v) => prev = v,
            None => break,
        }
    }
    prev = wrapped[p];
    for i in (0..p).rev() {
        match step(i, prev) {
            Some(v) => prev = v,
            None => break,
        }
    }
    (values, valid)
}

/// Unwrapped `arg` of the a.c. term: `φ(E) − φ(E − ΔE) − Eτ/ħ` up to 2π.
///
/// The fringe ramp `−(E − E0)τ/ħ` is demodulated before unwrapping and
/// restored afterwards, so that the unwrapper only follows the slow part.
pub fn phase_difference(ac: &AcExtraction, amplitude_floor: f64) -> MaskedPhase {
    let grid = ac.grid;
    let ramp = |i: usize| -grid.offset(i) * ac.tau / HBAR;
    let wrapped: Vec<f64> = ac
        .signal
        .iter()
        .enumerate()
        .map(|(i, z)| (z * Complex64::from_polar(1.0, -ramp(i))).arg())
        .collect();
    let amplitude: Vec<f64> = ac.signal.iter().map(|z| z.norm()).collect();
    let (mut values, valid) = unwrap_from_peak(&wrapped, &amplitude, amplitude_floor);
    values.iter_mut().enumerate().for_each(|(i, v)| *v += ramp(i));
    MaskedPhase {
        grid,
        values,
        valid,
        amplitude,
    }
}

/// `θ = signal − calibration`, shifted by a multiple of 2π so that θ at the
/// signal's amplitude peak lies in (−π, π].
pub fn calibrate(signal: &MaskedPhase, calibration: &MaskedPhase) -> Result<MaskedPhase> {
    if !signal.grid.same_lattice(&calibration.grid) {
        return Err(Error::GridMismatch("signal and calibration grids differ".into()));
    }
    let n = signal.values.len();
    let mut values: Vec<f64> = (0..n)
        .map(|i| signal.values[i] - calibration.values[i])
        .collect();
    let valid: Vec<bool> = (0..n).map(|i| signal.valid[i] && calibration.valid[i]).collect();
    let p = signal.peak_index();
    if !valid[p] {
        return Err(Error::Reconstruction("calibration run does not cover the signal peak".into()));
    }
    let shift = 2.0 * PI * ((values[p] - PI) / (2.0 * PI)).ceil();
    values.iter_mut().for_each(|v| *v -= shift);
    // keep only the contiguous run through the peak
    let mut valid_run = vec![false; n];
    for i in p..n {
        if !valid[i] {
            break;
        }
        valid_run[i] = true;
    }
    for i in (0..p).rev() {
        if !valid[i] {
            break;
        }
        valid_run[i] = true;
    }
    Ok(MaskedPhase {
        grid: signal.grid,
        values,
        valid: valid_run,
        amplitude: signal.amplitude.clone(),
    })
}

/// Phase on the lattice `anchor + kΔE`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSamples {
    pub anchor: f64,
    pub delta_e: f64,
    /// lattice indices k, ascending in energy
    pub indices: Vec<i64>,
    /// eV, ascending
    pub energies: Vec<f64>,
    /// rad; zero at the anchor
    pub values: Vec<f64>,
}

/// Cumulative sum of lattice differences. `theta[j]` is θ at lattice index
/// `first + j`; returns φ at the same indices with φ(0) = 0.
///
/// For k > 0, φ_k = Σ_{m=1..k} θ_m; for k < 0, φ_k = −Σ_{m=k+1..0} θ_m.
pub fn concatenate_lattice(theta: &[f64], first: i64) -> Result<Vec<f64>> {
    let last = first + theta.len() as i64 - 1;
    if first > 0 || last < 0 {
        return Err(Error::Reconstruction(format!(
            "lattice [{first}, {last}] does not contain the anchor"
        )));
    }
    let zero = (-first) as usize;
    let mut phi = vec![0.0; theta.len()];
    for j in zero + 1..theta.len() {
        phi[j] = phi[j - 1] + theta[j];
    }
    for j in (0..zero).rev() {
        phi[j] = phi[j + 1] - theta[j + 1];
    }
    Ok(phi)
}

/// Interpolate θ onto `anchor + kΔE` within its valid support and concatenate.
pub fn concatenate(theta: &MaskedPhase, delta_e: f64, anchor: f64) -> Result<PhaseSamples> {
    if delta_e == 0.0 || !delta_e.is_finite() {
        return Err(Error::invalid("delta_E", "concatenation needs a nonzero shear"));
    }
    let (lo, hi) = theta
        .support()
        .ok_or_else(|| Error::Reconstruction("no valid phase samples".into()))?;
    if hi - lo < 3 {
        return Err(Error::Reconstruction("valid phase support is too narrow".into()));
    }
    let grid = theta.grid;
    let x: Vec<f64> = (lo..=hi).map(|i| grid.energy(i)).collect();
    let y = theta.values[lo..=hi].to_vec();
    let spline = CubicSpline::new(x, y)?;
    let (e_lo, e_hi) = (grid.energy(lo), grid.energy(hi));
    if anchor < e_lo || anchor > e_hi {
        return Err(Error::Reconstruction(format!(
            "anchor {anchor} eV outside the valid support [{e_lo}, {e_hi}]"
        )));
    }
    let k_a = ((e_lo - anchor) / delta_e).ceil().min(((e_hi - anchor) / delta_e).ceil()) as i64;
    let k_b = ((e_lo - anchor) / delta_e).floor().max(((e_hi - anchor) / delta_e).floor()) as i64;
    let ks: Vec<i64> = (k_a..=k_b)
        .filter(|&k| {
            let e = anchor + k as f64 * delta_e;
            e >= e_lo - 1e-12 && e <= e_hi + 1e-12
        })
        .collect();
    if ks.len() < 2 {
        return Err(Error::Reconstruction(format!(
            "shear {delta_e} eV leaves fewer than two lattice points in the support"
        )));
    }
    let first = ks[0];
    let theta_lattice: Vec<f64> = ks
        .iter()
        .map(|&k| spline.eval(anchor + k as f64 * delta_e))
        .collect();
    let phi = concatenate_lattice(&theta_lattice, first)?;
    let mut rows: Vec<(i64, f64, f64)> = ks
        .iter()
        .zip(&phi)
        .map(|(&k, &v)| (k, anchor + k as f64 * delta_e, v))
        .collect();
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(PhaseSamples {
        anchor,
        delta_e,
        indices: rows.iter().map(|r| r.0).collect(),
        energies: rows.iter().map(|r| r.1).collect(),
        values: rows.iter().map(|r| r.2).collect(),
    })
}

/// Amplitude-weighted least-squares `c0 + c1·x` fit.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let xm = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let ym = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, b)| b * (a - xm).powi(2)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .zip(w)
        .map(|((a, c), b)| b * (a - xm) * (c - ym))
        .sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ym - slope * xm, slope)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fidelity {
    Value { f: f64, rms_error: f64 },
    /// original phase vanishes on the support after gauge removal
    Degenerate { rms_error: f64 },
}

impl Fidelity {
    pub fn value(&self) -> Option<f64> {
        match self {
            Fidelity::Value { f, .. } => Some(*f),
            Fidelity::Degenerate { .. } => None,
        }
    }

    pub fn rms_error(&self) -> f64 {
        match self {
            Fidelity::Value { rms_error, .. } | Fidelity::Degenerate { rms_error } => *rms_error,
        }
    }
}

/// `F = Σφo² / (Σ(φr − φo)² + Σφo²)` over the support `|ψ| ≥ 1%` of peak,
/// after removing the weighted constant+linear part from each phase.
pub fn fidelity(energies: &[f64], phi_original: &[f64], phi_reconstructed: &[f64], amplitude: &[f64]) -> Result<Fidelity> {
    let n = energies.len();
    if phi_original.len() != n || phi_reconstructed.len() != n || amplitude.len() != n {
        return Err(Error::GridMismatch("fidelity inputs differ in length".into()));
    }
    let peak = amplitude.iter().cloned().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..n).filter(|&i| amplitude[i] >= SUPPORT_FRACTION * peak && peak > 0.0).collect();
    if idx.len() < 3 {
        return Err(Error::Reconstruction("fidelity support has fewer than three samples".into()));
    }
    let e0 = energies[idx[idx.len() / 2]];
    let x: Vec<f64> = idx.iter().map(|&i| energies[i] - e0).collect();
    let w: Vec<f64> = idx.iter().map(|&i| amplitude[i]).collect();
    let detrend = |phi: &[f64]| -> Vec<f64> {
        let y: Vec<f64> = idx.iter().map(|&i| phi[i]).collect();
        let (c0, c1) = weighted_linear_fit(&x, &y, &w);
        y.iter().zip(&x).map(|(v, xi)| v - c0 - c1 * xi).collect()
    };
    let o = detrend(phi_original);
    let r = detrend(phi_reconstructed);
    let err: f64 = o.iter().zip(&r).map(|(a, b)| (b - a).powi(2)).sum();
    let sig: f64 = o.iter().map(|a| a * a).sum();
    let rms_error = (err / idx.len() as f64).sqrt();
    if sig <= 1e-20 * idx.len() as f64 {
        return Ok(Fidelity::Degenerate { rms_error });
    }
    Ok(Fidelity::Value {
        f: sig / (err + sig),
        rms_error,
    })
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub phase: PhaseSamples,
    pub theta: MaskedPhase,
    /// |ψ(E)| from the single-arm spectrum
    pub amplitude: Vec<f64>,
    /// lattice phase interpolated onto the detector grid
    pub dense_phase: Vec<f64>,
    pub spectral: SpectralWavefunction,
    pub temporal: TemporalWavefunction,
    pub signal_peak_time: f64,
    pub calibration_peak_time: f64,
    pub reference_plane: &'static str,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub fidelity: Fidelity,
    /// max |I_r(t) − I_o(t)| / max I_o(t) after gauge alignment
    pub temporal_max_deviation: f64,
    pub aligned: SpectralWavefunction,
}

impl ReconstructionResult {
    /// Score against the original wavefunction and its unwrapped phase.
    pub fn compare(&self, original: &SpectralWavefunction, original_phase: &[f64]) -> Result<Comparison> {
        let grid = *self.spectral.grid();
        if !grid.same_lattice(original.grid()) || original_phase.len() != grid.count() {
            return Err(Error::GridMismatch("original and reconstruction grids differ".into()));
        }
        let energies = grid.energies();
        let amp = original.amplitude();
        let fid = fidelity(&energies, original_phase, &self.dense_phase, &amp)?;

        let peak = amp.iter().cloned().fold(0.0, f64::max);
        let idx: Vec<usize> = (0..grid.count()).filter(|&i| amp[i] >= SUPPORT_FRACTION * peak).collect();
        let x: Vec<f64> = idx.iter().map(|&i| grid.offset(i)).collect();
        let d: Vec<f64> = idx.iter().map(|&i| self.dense_phase[i] - original_phase[i]).collect();
        let w: Vec<f64> = idx.iter().map(|&i| amp[i]).collect();
        let (c0, c1) = weighted_linear_fit(&x, &d, &w);
        let aligned = self.spectral.with_phase(|q| -(c0 + c1 * q));

        let io = to_time_domain(original).intensity();
        let ir = to_time_domain(&aligned).intensity();
        let top = io.iter().cloned().fold(0.0, f64::max);
        let dev = io.iter().zip(&ir).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / top;
        Ok(Comparison {
            fidelity: fid,
            temporal_max_deviation: dev,
            aligned,
        })
    }
}

/// Full retrieval from the sheared signal run, the unsheared calibration run
/// and the single-arm spectral density `|ψ(E)|²`.
pub fn reconstruct(
    signal: &Interferogram,
    calibration: &Interferogram,
    single_arm_spectrum: &[f64],
    config: &MeasurementConfig,
    options: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    config.validate()?;
    let grid = *signal.grid();
    if !grid.same_lattice(calibration.grid()) {
        return Err(Error::GridMismatch("signal and calibration grids differ".into()));
    }
    if single_arm_spectrum.len() != grid.count() {
        return Err(Error::GridMismatch("single-arm spectrum length differs from the grid".into()));
    }
    let filter = options.filter.unwrap_or_else(|| FilterSpec::standard(config.tau));
    let ac_s = extract_ac_with(signal, config.tau, filter)?;
    let ac_c = extract_ac_with(calibration, config.tau, filter)?;
    let ps = phase_difference(&ac_s, options.amplitude_floor);
    let pc = phase_difference(&ac_c, options.amplitude_floor);
    let theta = calibrate(&ps, &pc)?;

    let amplitude: Vec<f64> = single_arm_spectrum.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let anchor = grid.energy(argmax(&amplitude));
    let phase = concatenate(&theta, config.delta_e, anchor)?;

    let dense_phase: Vec<f64> = if phase.energies.len() >= 2 {
        let spline = CubicSpline::new(phase.energies.clone(), phase.values.clone())?;
        grid.energies().iter().map(|&e| spline.eval(e)).collect()
    } else {
        vec![0.0; grid.count()]
    };
    let samples = amplitude
        .iter()
        .zip(&dense_phase)
        .map(|(&a, &p)| Complex64::from_polar(a, p))
        .collect();
    let spectral = SpectralWavefunction::normalized_from(grid, samples)?;
    let temporal = to_time_domain(&spectral);
    Ok(ReconstructionResult {
        phase,
        theta,
        amplitude,
        dense_phase,
        spectral,
        temporal,
        signal_peak_time: ac_s.peak_time,
        calibration_peak_time: ac_c.peak_time,
        reference_plane: REFERENCE_PLANE,
    })
}
