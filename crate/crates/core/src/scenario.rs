//! Scenario files, built-in presets, end-to-end runs and parameter sweeps.
//!
//! A scenario is a TOML document with optional `[pulse]`, `[lem]`,
//! `[measurement]`, `[reconstruction]`, `[diagram]` and `[sweep]` sections.
//! Unknown keys are rejected so that a misspelled physics parameter can never
//! be silently ignored.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::analysis::{parameter_diagram, AxisSpec, Diagram, PhaseAxis};
use crate::constants::C_NM_PER_FS;
use crate::error::{Error, Result};
use crate::grid::EnergyGrid;
use crate::interferometer::{check_constraints, fringe_visibility, measure, ConstraintReport, Interferogram, MeasurementConfig};
use crate::lem::{coupling_from_field, field_for_coupling, pinem_modulate, shear, CouplingStrength, FieldProfile, LemParams};
use crate::reconstruction::{reconstruct, Comparison, FilterSpec, ReconstructionOptions, ReconstructionResult};
use crate::tdse::{free_dispersion_coefficient, steps_for_resolution, tdse_propagate};
use crate::textio;
use crate::wavepacket::{
    intensity_moments, make_gaussian_spectrum, to_energy_domain, to_time_domain, IntensityMoments, OscillatoryPhase,
    SpectralPhaseSpec, SpectralWavefunction, TemporalWavefunction,
};

const DEFAULT_SEED: u64 = 1;

/// Seed of the calibration run, derived from the scenario seed.
pub fn calibration_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub pulse: Option<PulseConfig>,
    pub lem: Option<LemConfig>,
    pub measurement: Option<MeasurementSection>,
    pub reconstruction: Option<ReconstructionSection>,
    pub diagram: Option<DiagramConfig>,
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    /// eV
    pub sigma_e: f64,
    /// eV
    #[serde(default = "default_center")]
    pub center_energy: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_span")]
    pub span_sigmas: f64,
    /// polynomial coefficients keyed `c2`, `c3`, ... in rad/eVⁿ
    #[serde(default)]
    pub phase: BTreeMap<String, f64>,
    pub oscillation: Option<OscillationConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillationConfig {
    pub amplitude: f64,
    pub period: f64,
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemConfig {
    /// `shear`, `pinem` or `tdse`
    #[serde(default = "default_model")]
    pub model: String,
    #[serde(default = "default_wavelength")]
    pub wavelength_um: f64,
    /// eV; defaults to the pulse center energy
    pub kinetic_energy: Option<f64>,
    #[serde(default = "default_thickness")]
    pub foil_thickness_nm: f64,
    #[serde(default)]
    pub phase_delay: f64,
    /// uniform field over the foil; calibrated to `measurement.delta_e` when absent
    pub field_peak_v_per_nm: Option<f64>,
    /// two-column `z_nm, F_V_per_nm` file, relative to the scenario file
    pub field_profile: Option<String>,
    pub max_order: Option<usize>,
    #[serde(default = "default_steps_per_cycle")]
    pub tdse_steps_per_cycle: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSection {
    /// fs
    pub tau: f64,
    /// eV; may be omitted when the LEM field fixes the shear
    pub delta_e: Option<f64>,
    /// eV
    pub resolution: f64,
    #[serde(default)]
    pub jitter_fraction: f64,
    #[serde(default = "default_shots")]
    pub shots: usize,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionSection {
    pub amplitude_floor: Option<f64>,
    pub filter_order: Option<u32>,
    /// fs; defaults to tau
    pub filter_fwhm: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl AxisConfig {
    fn spec(&self) -> AxisSpec {
        AxisSpec {
            min: self.min,
            max: self.max,
            count: self.count,
            log: self.log,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagramConfig {
    /// `phi2` or `phi3`
    pub axis: String,
    pub sigma_e: AxisConfig,
    pub phase: AxisConfig,
    /// value of the order not on the axis
    #[serde(default)]
    pub other: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength_um: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Option<Vec<f64>>,
    pub range: Option<AxisConfig>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
}

fn default_center() -> f64 {
    10_000.0
}
fn default_count() -> usize {
    4096
}
fn default_span() -> f64 {
    16.0
}
fn default_model() -> String {
    "shear".into()
}
fn default_wavelength() -> f64 {
    10.33
}
fn default_thickness() -> f64 {
    50.0
}
fn default_steps_per_cycle() -> f64 {
    200.0
}
fn default_shots() -> usize {
    1
}
fn default_replicates() -> usize {
    1
}

impl ScenarioConfig {
    /// Parse TOML; syntax and schema errors carry the line number.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            let msg = e.message().to_string();
            match line {
                Some(l) => Error::Config(format!("line {l}: {msg}")),
                None => Error::Config(msg),
            }
        })
    }

    pub fn from_file(path: &Path) -> Result<(Self, String)> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::from_toml_str(&text)?, text))
    }
}

/// Line of `key` inside `[section]` (or the top level for an empty section).
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(h) = t.strip_prefix('[').and_then(|h| h.strip_suffix(']')) {
            current = h.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Config error pointing at `section.key` in the source text when possible.
fn config_error(source: Option<&str>, section: &str, key: &str, reason: impl std::fmt::Display) -> Error {
    let path = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
    match source.and_then(|s| locate(s, section, key)) {
        Some(line) => Error::Config(format!("line {line}: {path}: {reason}")),
        None => Error::Config(format!("{path}: {reason}")),
    }
}

#[derive(Debug, Clone)]
pub struct PulseSpec {
    pub grid: EnergyGrid,
    pub sigma_e: f64,
    pub phase: SpectralPhaseSpec,
}

impl PulseSpec {
    pub fn synthesize(&self) -> Result<SpectralWavefunction> {
        make_gaussian_spectrum(&self.grid, self.sigma_e, &self.phase)
    }

    /// Unwrapped phase on the grid.
    pub fn phase_on_grid(&self) -> Vec<f64> {
        self.grid.offsets().iter().map(|&q| self.phase.eval(q)).collect()
    }
}

#[derive(Debug, Clone)]
pub enum ShearModel {
    Exact { delta_e: f64 },
    Pinem { params: LemParams, coupling: CouplingStrength, max_order: Option<usize> },
    Tdse { params: LemParams, steps_per_cycle: f64 },
}

impl ShearModel {
    pub fn name(&self) -> &'static str {
        match self {
            ShearModel::Exact { .. } => "shear",
            ShearModel::Pinem { .. } => "pinem",
            ShearModel::Tdse { .. } => "tdse",
        }
    }

    /// Net shear seen by the reconstruction.
    pub fn delta_e(&self) -> f64 {
        match self {
            ShearModel::Exact { delta_e } => *delta_e,
            ShearModel::Pinem { params, coupling, .. } => coupling.shear_energy(params.photon_energy()),
            ShearModel::Tdse { params, .. } => {
                let profile = FieldProfile::uniform(params.foil_thickness, params.field_peak, 2001)
                    .expect("uniform profile");
                coupling_from_field(params, &profile).shear_energy(params.photon_energy())
            }
        }
    }

    pub fn apply(&self, psi: &SpectralWavefunction) -> Result<(SpectralWavefunction, Vec<String>)> {
        match self {
            ShearModel::Exact { delta_e } => Ok((shear(psi, *delta_e)?, Vec::new())),
            ShearModel::Pinem { params, coupling, max_order } => {
                Ok((pinem_modulate(psi, *coupling, params.photon_energy(), *max_order)?, Vec::new()))
            }
            ShearModel::Tdse { params, steps_per_cycle } => {
                let temporal = to_time_domain(psi);
                let steps = steps_for_resolution(&temporal, params, *steps_per_cycle);
                let outcome = tdse_propagate(&temporal, params, steps)?;
                let mut warnings = Vec::new();
                if outcome.under_resolved {
                    warnings.push(format!(
                        "TDSE under-resolved: {:.1} steps per cycle, norm drift {:.3e}",
                        outcome.steps_per_cycle, outcome.norm_drift
                    ));
                }
                // undo free drift over the padded window; only the foil interaction remains
                let c2 = free_dispersion_coefficient(params, outcome.duration);
                let spectral = to_energy_domain(&outcome.psi);
                let spectral = SpectralWavefunction::from_samples(*psi.grid(), spectral.into_samples())?;
                Ok((spectral.with_phase(|q| -c2 * q * q), warnings))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct DiagramSpec {
    pub axis: PhaseAxis,
    pub sigma_e: AxisSpec,
    pub phase: AxisSpec,
    pub other: f64,
    /// fs
    pub optical_period: f64,
}

impl DiagramSpec {
    pub fn evaluate(&self) -> Result<Diagram> {
        parameter_diagram(&self.sigma_e, self.axis, &self.phase, self.other, self.optical_period)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Tau,
    DeltaE,
    Jitter,
    Resolution,
    SigmaE,
    Shots,
}

impl SweepParameter {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "tau" => SweepParameter::Tau,
            "delta_e" => SweepParameter::DeltaE,
            "jitter_fraction" | "jitter" => SweepParameter::Jitter,
            "resolution" => SweepParameter::Resolution,
            "sigma_e" => SweepParameter::SigmaE,
            "shots" => SweepParameter::Shots,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Tau => "tau",
            SweepParameter::DeltaE => "delta_e",
            SweepParameter::Jitter => "jitter_fraction",
            SweepParameter::Resolution => "resolution",
            SweepParameter::SigmaE => "sigma_e",
            SweepParameter::Shots => "shots",
        }
    }

    fn set(&self, cfg: &mut ScenarioConfig, value: f64) -> Result<()> {
        let missing = |s: &str| Error::Config(format!("sweeping {} needs a [{s}] section", self.name()));
        match self {
            SweepParameter::SigmaE => cfg.pulse.as_mut().ok_or_else(|| missing("pulse"))?.sigma_e = value,
            _ => {
                let m = cfg.measurement.as_mut().ok_or_else(|| missing("measurement"))?;
                match self {
                    SweepParameter::Tau => m.tau = value,
                    SweepParameter::DeltaE => m.delta_e = Some(value),
                    SweepParameter::Jitter => m.jitter_fraction = value,
                    SweepParameter::Resolution => m.resolution = value,
                    SweepParameter::Shots => {
                        if value < 1.0 || value.fract() != 0.0 {
                            return Err(Error::Config(format!("shots must be a positive integer, got {value}")));
                        }
                        m.shots = value as usize
                    }
                    SweepParameter::SigmaE => unreachable!(),
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub replicates: usize,
}

impl SweepSpec {
    pub fn new(parameter: SweepParameter, values: Vec<f64>, replicates: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config(format!("sweep over {} has an empty axis", parameter.name())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("sweep values must be finite".into()));
        }
        if replicates == 0 {
            return Err(Error::Config("sweep.replicates must be >= 1".into()));
        }
        Ok(Self {
            parameter,
            values,
            replicates,
        })
    }
}

/// Validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub pulse: Option<PulseSpec>,
    pub shear: Option<ShearModel>,
    pub measurement: Option<MeasurementConfig>,
    pub options: ReconstructionOptions,
    pub diagram: Option<DiagramSpec>,
    pub sweep: Option<SweepSpec>,
    /// the config this scenario was resolved from, kept for sweeps
    pub raw: ScenarioConfig,
    base_dir: Option<PathBuf>,
}

impl Scenario {
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw = ScenarioConfig::from_toml_str(text)?;
        Self::resolve(raw, Some(text), base_dir)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let (raw, text) = ScenarioConfig::from_file(path)?;
        Self::resolve(raw, Some(&text), path.parent())
    }

    pub fn preset(name: &str) -> Result<Self> {
        let preset = find_preset(name)
            .ok_or_else(|| Error::Config(format!("unknown preset '{name}' (see `fessi presets`)")))?;
        Self::from_toml_str(preset.toml, None)
    }

    /// Check every section against the module invariants.
    pub fn resolve(raw: ScenarioConfig, source: Option<&str>, base_dir: Option<&Path>) -> Result<Self> {
        let err = |section: &str, key: &str, reason: &dyn std::fmt::Display| config_error(source, section, key, reason);

        let pulse = match &raw.pulse {
            None => None,
            Some(p) => {
                let grid = EnergyGrid::spanning(p.center_energy, p.sigma_e, p.span_sigmas, p.count)
                    .map_err(|e| err("pulse", "sigma_e", &e))?;
                let mut poly = Vec::new();
                for (key, &coeff) in &p.phase {
                    let order = key
                        .strip_prefix('c')
                        .and_then(|n| n.parse::<u32>().ok())
                        .ok_or_else(|| err("pulse.phase", key, &"phase keys are c2, c3, ..."))?;
                    poly.push((order, coeff));
                }
                let osc = p.oscillation.as_ref().map(|o| OscillatoryPhase {
                    amplitude: o.amplitude,
                    period: o.period,
                    offset: o.offset,
                });
                let phase = SpectralPhaseSpec::new(poly, osc).map_err(|e| err("pulse", "phase", &e))?;
                let spec = PulseSpec {
                    grid,
                    sigma_e: p.sigma_e,
                    phase,
                };
                spec.synthesize().map_err(|e| err("pulse", "sigma_e", &e))?;
                Some(spec)
            }
        };

        let mut measurement = None;
        let mut shear_model = None;
        if let Some(m) = &raw.measurement {
            let pulse = pulse
                .as_ref()
                .ok_or_else(|| Error::Config("[measurement] needs a [pulse] section".into()))?;
            let model = raw.lem.as_ref().map_or("shear", |l| l.model.as_str());
            let model = match model {
                "shear" => {
                    let delta_e = m
                        .delta_e
                        .ok_or_else(|| err("measurement", "delta_e", &"required for the exact shear model"))?;
                    ShearModel::Exact { delta_e }
                }
                "pinem" | "tdse" => {
                    let l = raw.lem.as_ref().expect("model came from [lem]");
                    let mut params = LemParams::from_kinetic_energy(
                        l.kinetic_energy.unwrap_or(pulse.grid.center_energy()),
                        l.wavelength_um,
                        0.0,
                        l.foil_thickness_nm,
                        l.phase_delay,
                    )
                    .map_err(|e| err("lem", "kinetic_energy", &e))?;
                    let coupling = match (l.field_peak_v_per_nm, &l.field_profile, m.delta_e) {
                        (Some(_), Some(_), _) => {
                            return Err(err("lem", "field_profile", &"give either field_peak_v_per_nm or field_profile"))
                        }
                        (Some(_), _, Some(_)) | (_, Some(_), Some(_)) => {
                            return Err(err(
                                "measurement",
                                "delta_e",
                                &"the LEM field already fixes the shear; remove delta_e",
                            ))
                        }
                        (Some(f), None, None) => {
                            params.field_peak = f;
                            coupling_from_field(&params, &FieldProfile::uniform(params.foil_thickness, f, 2001)?)
                        }
                        (None, Some(path), None) => {
                            if model == "tdse" {
                                return Err(err("lem", "field_profile", &"the tdse model uses a uniform foil field"));
                            }
                            let full = base_dir.map_or_else(|| PathBuf::from(path), |d| d.join(path));
                            let file = File::open(&full)
                                .map_err(|e| err("lem", "field_profile", &format!("{}: {e}", full.display())))?;
                            let profile = textio::read_field_profile(std::io::BufReader::new(file))
                                .map_err(|e| err("lem", "field_profile", &e))?;
                            coupling_from_field(&params, &profile)
                        }
                        (None, None, Some(de)) => {
                            params.field_peak = field_for_coupling(&params, de / params.photon_energy());
                            CouplingStrength::from_two_g(de / params.photon_energy())
                        }
                        (None, None, None) => {
                            return Err(err("measurement", "delta_e", &"give delta_e or an LEM field"));
                        }
                    };
                    if model == "pinem" {
                        ShearModel::Pinem {
                            params,
                            coupling,
                            max_order: l.max_order,
                        }
                    } else {
                        if !(l.tdse_steps_per_cycle > 0.0) {
                            return Err(err("lem", "tdse_steps_per_cycle", &"must be > 0"));
                        }
                        ShearModel::Tdse {
                            params,
                            steps_per_cycle: l.tdse_steps_per_cycle,
                        }
                    }
                }
                other => {
                    return Err(err("lem", "model", &format!("unknown model '{other}' (shear, pinem, tdse)")));
                }
            };
            let config = MeasurementConfig {
                tau: m.tau,
                delta_e: model.delta_e(),
                resolution: m.resolution,
                jitter_fraction: m.jitter_fraction,
                shots: m.shots,
            };
            config.validate().map_err(|e| {
                let key = match &e {
                    Error::InvalidParameter { name, .. } => match *name {
                        "delta_E" => "delta_e",
                        other => other,
                    },
                    _ => "tau",
                };
                err("measurement", key, &e)
            })?;
            if config.delta_e.abs() >= pulse.grid.span() / 4.0 || config.delta_e == 0.0 {
                return Err(err(
                    "measurement",
                    "delta_e",
                    &format!("shear {} eV must be nonzero and below a quarter of the grid span", config.delta_e),
                ));
            }
            measurement = Some(config);
            shear_model = Some(model);
        } else if raw.lem.is_some() {
            return Err(Error::Config("[lem] needs a [measurement] section".into()));
        }

        let rs = raw.reconstruction.clone().unwrap_or_default();
        let mut options = ReconstructionOptions::default();
        if let Some(floor) = rs.amplitude_floor {
            if !(floor > 0.0 && floor < 1.0) {
                return Err(err("reconstruction", "amplitude_floor", &"must lie in (0, 1)"));
            }
            options.amplitude_floor = floor;
        }
        if rs.filter_order.is_some() || rs.filter_fwhm.is_some() {
            let tau = measurement
                .map(|m| m.tau)
                .ok_or_else(|| Error::Config("[reconstruction] filter settings need [measurement]".into()))?;
            let order = rs.filter_order.unwrap_or(4);
            if order == 0 {
                return Err(err("reconstruction", "filter_order", &"must be >= 1"));
            }
            let fwhm = rs.filter_fwhm.unwrap_or(tau);
            if !(fwhm > 0.0) {
                return Err(err("reconstruction", "filter_fwhm", &"must be > 0"));
            }
            options.filter = Some(FilterSpec {
                center: tau,
                fwhm,
                order,
            });
        }

        let diagram = match &raw.diagram {
            None => None,
            Some(d) => {
                let axis = match d.axis.as_str() {
                    "phi2" => PhaseAxis::Phi2,
                    "phi3" => PhaseAxis::Phi3,
                    other => return Err(err("diagram", "axis", &format!("'{other}' is not phi2 or phi3"))),
                };
                if !(d.wavelength_um > 0.0) {
                    return Err(err("diagram", "wavelength_um", &"must be > 0"));
                }
                let sigma = d.sigma_e.spec();
                let s_vals = sigma.values().map_err(|e| err("diagram", "sigma_e", &e))?;
                if s_vals.iter().any(|&s| !(s > 0.0)) {
                    return Err(err("diagram", "sigma_e", &"values must be > 0"));
                }
                let phase = d.phase.spec();
                phase.values().map_err(|e| err("diagram", "phase", &e))?;
                Some(DiagramSpec {
                    axis,
                    sigma_e: sigma,
                    phase,
                    other: d.other,
                    optical_period: d.wavelength_um * 1000.0 / C_NM_PER_FS,
                })
            }
        };

        let sweep = match &raw.sweep {
            None => None,
            Some(s) => {
                let parameter = SweepParameter::parse(&s.parameter)
                    .ok_or_else(|| err("sweep", "parameter", &format!("unknown parameter '{}'", s.parameter)))?;
                let values = match (&s.values, &s.range) {
                    (Some(v), None) => v.clone(),
                    (None, Some(r)) => r.spec().values().map_err(|e| err("sweep", "range", &e))?,
                    _ => return Err(err("sweep", "values", &"give exactly one of values or range")),
                };
                Some(SweepSpec::new(parameter, values, s.replicates).map_err(|e| err("sweep", "values", &e))?)
            }
        };

        Ok(Self {
            name: raw.name.clone().unwrap_or_else(|| "scenario".into()),
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            out: raw.out.as_ref().map(PathBuf::from),
            pulse,
            shear: shear_model,
            measurement,
            options,
            diagram,
            sweep,
            raw,
            base_dir: base_dir.map(Path::to_path_buf),
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.raw.seed = Some(seed);
        self
    }

    fn require_pulse(&self) -> Result<&PulseSpec> {
        self.pulse
            .as_ref()
            .ok_or_else(|| Error::Config(format!("scenario '{}' has no [pulse] section", self.name)))
    }

    /// Copy of this scenario with one swept parameter replaced.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> Result<Self> {
        let mut raw = self.raw.clone();
        parameter.set(&mut raw, value)?;
        raw.sweep = None;
        let mut s = Self::resolve(raw, None, self.base_dir.as_deref())?;
        s.seed = self.seed;
        Ok(s)
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub spectral: SpectralWavefunction,
    pub temporal: TemporalWavefunction,
    pub moments: IntensityMoments,
}

pub fn synthesize(scenario: &Scenario) -> Result<SynthOutput> {
    let spectral = scenario.require_pulse()?.synthesize()?;
    let temporal = to_time_domain(&spectral);
    let moments = intensity_moments(&temporal);
    Ok(SynthOutput {
        spectral,
        temporal,
        moments,
    })
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub original: SpectralWavefunction,
    pub signal: Interferogram,
    pub calibration: Interferogram,
    pub result: ReconstructionResult,
    pub comparison: Comparison,
    pub constraints: ConstraintReport,
    pub warnings: Vec<String>,
    pub signal_visibility: f64,
    pub calibration_visibility: f64,
    pub original_moments: IntensityMoments,
    pub reconstructed_moments: IntensityMoments,
    /// (stage, seconds); kept out of the written files so they stay reproducible
    pub timings: Vec<(&'static str, f64)>,
}

impl RunOutput {
    pub fn fidelity(&self) -> Option<f64> {
        self.comparison.fidelity.value()
    }
}

/// synth → LEM → measure (signal and calibration) → reconstruct → compare.
pub fn run_scenario(scenario: &Scenario) -> Result<RunOutput> {
    let pulse = scenario.require_pulse()?;
    let config = scenario
        .measurement
        .ok_or_else(|| Error::Config(format!("scenario '{}' has no [measurement] section", scenario.name)))?;
    let model = scenario.shear.as_ref().expect("measurement implies a shear model");
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |stage: &'static str, timings: &mut Vec<(&'static str, f64)>| {
        timings.push((stage, clock.elapsed().as_secs_f64()));
        clock = Instant::now();
    };

    let original = pulse.synthesize()?;
    lap("synth", &mut timings);
    let (sheared, mut warnings) = model.apply(&original)?;
    lap("lem", &mut timings);
    let signal = measure(&original, &sheared, &config, scenario.seed)?;
    let calibration = measure(&original, &original, &config.calibration(), calibration_seed(scenario.seed))?;
    lap("measure", &mut timings);
    warnings.extend(signal.warnings.iter().map(|w| w.to_string()));

    let constraints = check_constraints(pulse.sigma_e, &config);
    warnings.extend(constraints.violations());

    let result = reconstruct(
        &signal.interferogram,
        &calibration.interferogram,
        &original.density(),
        &config,
        &scenario.options,
    )?;
    let comparison = result.compare(&original, &pulse.phase_on_grid())?;
    lap("reconstruct", &mut timings);

    let original_moments = intensity_moments(&to_time_domain(&original));
    let reconstructed_moments = intensity_moments(&to_time_domain(&comparison.aligned));
    Ok(RunOutput {
        signal_visibility: fringe_visibility(&signal.interferogram, config.tau),
        calibration_visibility: fringe_visibility(&calibration.interferogram, config.tau),
        original,
        signal: signal.interferogram,
        calibration: calibration.interferogram,
        result,
        comparison,
        constraints,
        warnings,
        original_moments,
        reconstructed_moments,
        timings,
    })
}

/// Ordered summary entries of a run.
pub fn run_summary(scenario: &Scenario, run: &RunOutput) -> Vec<(String, String)> {
    let pulse = scenario.pulse.as_ref().expect("run needs a pulse");
    let m = scenario.measurement.expect("run needs a measurement");
    let model = scenario.shear.as_ref().expect("run needs a shear model");
    let c = &run.constraints;
    let mut out: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| out.push((k.to_string(), v));
    put("name", scenario.name.clone());
    put("seed", scenario.seed.to_string());
    put("calibration_seed", calibration_seed(scenario.seed).to_string());
    put("sigma_E_eV", pulse.sigma_e.to_string());
    put("center_energy_eV", pulse.grid.center_energy().to_string());
    put("grid_count", pulse.grid.count().to_string());
    put("grid_spacing_eV", pulse.grid.spacing().to_string());
    for &(order, coeff) in pulse.phase.poly_coeffs() {
        put(&format!("phase_c{order}"), coeff.to_string());
    }
    if let Some(o) = pulse.phase.oscillatory() {
        put("phase_oscillation_amplitude", o.amplitude.to_string());
        put("phase_oscillation_period_eV", o.period.to_string());
        put("phase_oscillation_offset_eV", o.offset.to_string());
    }
    put("lem_model", model.name().to_string());
    match model {
        ShearModel::Exact { .. } => {}
        ShearModel::Pinem { params, coupling, .. } => {
            put("lem_two_g", coupling.two_g().to_string());
            put("lem_photon_energy_eV", params.photon_energy().to_string());
            put("lem_field_peak_V_per_nm", params.field_peak.to_string());
        }
        ShearModel::Tdse { params, steps_per_cycle } => {
            put("lem_photon_energy_eV", params.photon_energy().to_string());
            put("lem_field_peak_V_per_nm", params.field_peak.to_string());
            put("lem_steps_per_cycle", steps_per_cycle.to_string());
        }
    }
    put("tau_fs", m.tau.to_string());
    put("delta_E_eV", m.delta_e.to_string());
    put("resolution_eV", m.resolution.to_string());
    put("jitter_fraction", m.jitter_fraction.to_string());
    put("shots", m.shots.to_string());
    put("tau_min_fs", c.tau_min.to_string());
    put("tau_max_fs", c.tau_max.to_string());
    put("tau_ok", c.tau_ok.to_string());
    put("shear_ratio", c.shear_ratio.to_string());
    put("shear_ok", c.shear_ok.to_string());
    put("visibility_estimate", c.visibility.to_string());
    put("resolution_ok", c.resolution_ok.to_string());
    put("signal_visibility", run.signal_visibility.to_string());
    put("calibration_visibility", run.calibration_visibility.to_string());
    put("anchor_eV", run.result.phase.anchor.to_string());
    put("lattice_points", run.result.phase.values.len().to_string());
    match run.comparison.fidelity.value() {
        Some(f) => put("fidelity", f.to_string()),
        None => put("fidelity", "degenerate".to_string()),
    }
    put("rms_phase_error_rad", run.comparison.fidelity.rms_error().to_string());
    put("temporal_max_deviation", run.comparison.temporal_max_deviation.to_string());
    put("original_rms_fs", run.original_moments.rms.to_string());
    put("original_fwhm_fs", run.original_moments.fwhm.to_string());
    put("reconstructed_rms_fs", run.reconstructed_moments.rms.to_string());
    put("reconstructed_fwhm_fs", run.reconstructed_moments.fwhm.to_string());
    put("reference_plane", run.result.reference_plane.to_string());
    put("warnings", run.warnings.len().to_string());
    for (i, w) in run.warnings.iter().enumerate() {
        put(&format!("warning_{i}"), w.clone());
    }
    out
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn write_synth_outputs(dir: &Path, out: &SynthOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    textio::write_spectral(&mut create(dir, "spectral.txt")?, &out.spectral)?;
    textio::write_temporal(&mut create(dir, "temporal.txt")?, &out.temporal)?;
    let report = vec![
        ("mean_fs".to_string(), out.moments.mean.to_string()),
        ("rms_fs".to_string(), out.moments.rms.to_string()),
        ("fwhm_fs".to_string(), out.moments.fwhm.to_string()),
        ("multimodal".to_string(), out.moments.multimodal.to_string()),
    ];
    textio::write_report(&mut create(dir, "moments.txt")?, &report)?;
    Ok(())
}

pub fn write_run_outputs(dir: &Path, scenario: &Scenario, run: &RunOutput) -> Result<()> {
    fs::create_dir_all(dir)?;
    textio::write_spectral(&mut create(dir, "original_spectral.txt")?, &run.original)?;
    textio::write_temporal(&mut create(dir, "original_temporal.txt")?, &to_time_domain(&run.original))?;
    textio::write_interferogram(&mut create(dir, "interferogram_signal.txt")?, &run.signal)?;
    textio::write_interferogram(&mut create(dir, "interferogram_calibration.txt")?, &run.calibration)?;
    textio::write_phase_lattice(&mut create(dir, "phase_lattice.txt")?, &run.result)?;
    textio::write_dense_phase(&mut create(dir, "dense_phase.txt")?, &run.result)?;
    textio::write_temporal(
        &mut create(dir, "reconstructed_temporal.txt")?,
        &to_time_domain(&run.comparison.aligned),
    )?;
    textio::write_report(&mut create(dir, "summary.txt")?, &run_summary(scenario, run))?;
    Ok(())
}

pub fn write_diagram_outputs(dir: &Path, diagram: &Diagram) -> Result<()> {
    fs::create_dir_all(dir)?;
    textio::write_diagram_grid(&mut create(dir, "diagram_grid.txt")?, diagram)?;
    textio::write_diagram_contours(&mut create(dir, "diagram_contour.txt")?, diagram)?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: f64,
    pub seed: u64,
    /// `None` when the chain failed (no a.c. peak, invalid setting, ...)
    pub fidelity: Option<f64>,
    pub rms_phase_error: f64,
    pub temporal_max_deviation: f64,
    pub signal_visibility: f64,
    pub error: Option<String>,
}

/// Run the scenario at every sweep value and replicate seed, in parallel.
/// Results come back in (value, replicate) order regardless of scheduling.
pub fn sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<Vec<SweepPoint>> {
    // validate every point up front so schema errors surface before any work
    let scenarios: Vec<Scenario> = spec
        .values
        .iter()
        .map(|&v| scenario.with_parameter(spec.parameter, v))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, u64)> = (0..scenarios.len())
        .flat_map(|i| (0..spec.replicates as u64).map(move |r| (i, r)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(i, r)| {
            let seed = scenario.seed.wrapping_add(r);
            let s = scenarios[i].clone().with_seed(seed);
            let value = spec.values[i];
            match run_scenario(&s) {
                Ok(run) => SweepPoint {
                    value,
                    seed,
                    fidelity: run.fidelity(),
                    rms_phase_error: run.comparison.fidelity.rms_error(),
                    temporal_max_deviation: run.comparison.temporal_max_deviation,
                    signal_visibility: run.signal_visibility,
                    error: None,
                },
                Err(e) => SweepPoint {
                    value,
                    seed,
                    fidelity: None,
                    rms_phase_error: f64::NAN,
                    temporal_max_deviation: f64::NAN,
                    signal_visibility: f64::NAN,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect())
}

/// Median fidelity per sweep value, failures counted as zero.
pub fn median_fidelity(points: &[SweepPoint], values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&v| {
            let mut f: Vec<f64> = points
                .iter()
                .filter(|p| p.value == v)
                .map(|p| p.fidelity.unwrap_or(0.0))
                .collect();
            f.sort_by(f64::total_cmp);
            let n = f.len();
            if n % 2 == 1 {
                f[n / 2]
            } else {
                0.5 * (f[n / 2 - 1] + f[n / 2])
            }
        })
        .collect()
}

/// Long format: `parameter, value, seed, metric, result`.
pub fn write_sweep_table(w: &mut impl Write, spec: &SweepSpec, points: &[SweepPoint]) -> Result<()> {
    writeln!(w, "# kind=sweep")?;
    writeln!(w, "# parameter={}", spec.parameter.name())?;
    writeln!(w, "# replicates={}", spec.replicates)?;
    writeln!(w, "# columns=parameter, value, seed, metric, result")?;
    let name = spec.parameter.name();
    let fmt = |v: f64| if v.is_nan() { "nan".to_string() } else { v.to_string() };
    for p in points {
        let rows = [
            ("fidelity", p.fidelity.unwrap_or(f64::NAN)),
            ("rms_phase_error", p.rms_phase_error),
            ("temporal_max_deviation", p.temporal_max_deviation),
            ("signal_visibility", p.signal_visibility),
            ("failed", if p.error.is_some() { 1.0 } else { 0.0 }),
        ];
        for (metric, v) in rows {
            writeln!(w, "{name}, {}, {}, {metric}, {}", p.value, p.seed, fmt(v))?;
        }
    }
    if spec.replicates > 1 {
        for (v, m) in spec.values.iter().zip(median_fidelity(points, &spec.values)) {
            writeln!(w, "{name}, {v}, all, fidelity_median, {}", fmt(m))?;
        }
    }
    Ok(())
}

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub toml: &'static str,
}

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

pub static PRESETS: &[Preset] = &[
    Preset {
        name: "fig3-pulse",
        description: "10 keV pulse, 2 sigma_E = 0.85 eV, phase 0.34 q^2 + 1.05 q^3",
        toml: r#"
name = "fig3-pulse"
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c2 = 0.34, c3 = 1.05 }
"#,
    },
    Preset {
        name: "transform-limited",
        description: "same envelope as fig3-pulse with zero spectral phase",
        toml: r#"
name = "transform-limited"
[pulse]
sigma_e = 0.425
center_energy = 10000.0
"#,
    },
    Preset {
        name: "fig-s6-atto",
        description: "attosecond pulse, 2 sigma_E = 8.5 eV, phase 1.35e-2 q^2 + 2.6e-3 q^3",
        toml: r#"
name = "fig-s6-atto"
[pulse]
sigma_e = 4.25
center_energy = 10000.0
phase = { c2 = 1.35e-2, c3 = 2.6e-3 }
"#,
    },
    Preset {
        name: "fig3",
        description: "full chain: tau 30 fs, shear 0.1 eV, resolution 10 meV, jitter 1e-5, 1000 shots",
        toml: FIG3,
    },
    Preset {
        name: "fig3-pinem",
        description: "fig3 with the shear produced by PINEM sidebands at 2|g| = 0.1 eV / h-bar omega",
        toml: r#"
name = "fig3-pinem"
seed = 1
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c2 = 0.34, c3 = 1.05 }
[lem]
model = "pinem"
wavelength_um = 10.33
foil_thickness_nm = 50.0
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 1e-5
shots = 1000
"#,
    },
    Preset {
        name: "fig3-tdse",
        description: "fig3 with the shear produced by split-step propagation through the foil",
        toml: r#"
name = "fig3-tdse"
seed = 1
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c2 = 0.34, c3 = 1.05 }
[lem]
model = "tdse"
wavelength_um = 10.33
foil_thickness_nm = 50.0
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 1e-5
shots = 1000
"#,
    },
    Preset {
        name: "fig-s2",
        description: "fig3 with jitter 7e-5",
        toml: r#"
name = "fig-s2"
seed = 1
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c2 = 0.34, c3 = 1.05 }
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 7e-5
shots = 1000
"#,
    },
    Preset {
        name: "fig-s4a",
        description: "pure second-order phase 1.35 q^2",
        toml: r#"
name = "fig-s4a"
seed = 1
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c2 = 1.35 }
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 1e-5
shots = 1000
"#,
    },
    Preset {
        name: "fig-s4b",
        description: "pure third-order phase 1.40 q^3",
        toml: r#"
name = "fig-s4b"
seed = 1
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c3 = 1.40 }
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 1e-5
shots = 1000
"#,
    },
    Preset {
        name: "fig-s6",
        description: "attosecond chain: shear 1 eV, tau 5 fs, jitter 1e-5",
        toml: r#"
name = "fig-s6"
seed = 1
[pulse]
sigma_e = 4.25
center_energy = 10000.0
phase = { c2 = 1.35e-2, c3 = 2.6e-3 }
[measurement]
tau = 5.0
delta_e = 1.0
resolution = 0.01
jitter_fraction = 1e-5
shots = 1000
"#,
    },
    Preset {
        name: "fig-s5a",
        description: "sigma_t over sigma_E x phi2 with the T/4 contour",
        toml: r#"
name = "fig-s5a"
[diagram]
axis = "phi2"
sigma_e = { min = 0.01, max = 5.0, count = 200, log = true }
phase = { min = 0.0, max = 20.0, count = 201 }
wavelength_um = 10.33
"#,
    },
    Preset {
        name: "fig-s5b",
        description: "sigma_t over sigma_E x phi3 with the T/4 contour",
        toml: r#"
name = "fig-s5b"
[diagram]
axis = "phi3"
sigma_e = { min = 0.01, max = 5.0, count = 200, log = true }
phase = { min = 0.0, max = 50.0, count = 201 }
wavelength_um = 10.33
"#,
    },
    Preset {
        name: "oscillatory-small",
        description: "fig3 phase plus a 0.2 rad ripple of period 0.5 eV, PINEM shear, no jitter",
        toml: r#"
name = "oscillatory-small"
seed = 1
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c2 = 0.34, c3 = 1.05 }
oscillation = { amplitude = 0.2, period = 0.5 }
[lem]
model = "pinem"
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 0.0
shots = 1
"#,
    },
    Preset {
        name: "oscillatory-large",
        description: "fig3 phase plus a 1.0 rad ripple of period 0.5 eV, PINEM shear, no jitter",
        toml: r#"
name = "oscillatory-large"
seed = 1
[pulse]
sigma_e = 0.425
center_energy = 10000.0
phase = { c2 = 0.34, c3 = 1.05 }
oscillation = { amplitude = 1.0, period = 0.5 }
[lem]
model = "pinem"
[measurement]
tau = 30.0
delta_e = 0.1
resolution = 0.01
jitter_fraction = 0.0
shots = 1
"#,
    },
    Preset {
        name: "tau-sweep",
        description: "fig3 chain with the delay swept from 2 to 500 fs",
        toml: concat!(
            "name = \"tau-sweep\"\n",
            include_str!("presets/fig3.toml"),
            r#"
[sweep]
parameter = "tau"
values = [2.0, 3.0, 4.0, 4.5, 5.0, 6.0, 8.0, 10.0, 20.0, 30.0, 60.0, 100.0, 200.0, 300.0, 400.0, 450.0, 500.0]
"#
        ),
    },
    Preset {
        name: "shear-sweep",
        description: "fig3 chain with the shear swept from 1% to 150% of 2 sigma_E",
        toml: concat!(
            "name = \"shear-sweep\"\n",
            include_str!("presets/fig3.toml"),
            r#"
[sweep]
parameter = "delta_e"
values = [0.002, 0.005, 0.0085, 0.017, 0.05, 0.1, 0.2, 0.4, 0.6, 0.85, 1.0, 1.275]
"#
        ),
    },
    Preset {
        name: "jitter-sweep",
        description: "fig3 chain with jitter 0 to 1e-3, nine seeds per point",
        toml: concat!(
            "name = \"jitter-sweep\"\n",
            include_str!("presets/fig3.toml"),
            r#"
[sweep]
parameter = "jitter_fraction"
values = [0.0, 1e-5, 7e-5, 3e-4, 1e-3]
replicates = 9
"#
        ),
    },
];

const FIG3: &str = concat!("name = \"fig3\"\n", include_str!("presets/fig3.toml"));

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for p in PRESETS {
            let s = Scenario::preset(p.name).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(s.name, p.name);
        }
        assert!(Scenario::preset("nope").is_err());
    }

    #[test]
    fn presets_encode_stated_parameters() {
        let s = Scenario::preset("fig3").unwrap();
        let p = s.pulse.as_ref().unwrap();
        assert_eq!(p.sigma_e, 0.425);
        assert_eq!(p.phase.coefficient(2), 0.34);
        assert_eq!(p.phase.coefficient(3), 1.05);
        let m = s.measurement.unwrap();
        assert_eq!((m.tau, m.delta_e, m.resolution, m.jitter_fraction, m.shots), (30.0, 0.1, 0.01, 1e-5, 1000));
        let s6 = Scenario::preset("fig-s6").unwrap();
        assert_eq!(s6.pulse.as_ref().unwrap().sigma_e * 2.0, 8.5);
        assert_eq!(s6.measurement.unwrap().tau, 5.0);
        assert_eq!(Scenario::preset("fig-s2").unwrap().measurement.unwrap().jitter_fraction, 7e-5);
    }

    #[test]
    fn unknown_keys_are_rejected_with_lines() {
        let text = "[pulse]\nsigma_e = 0.425\nsigma_f = 1.0\n";
        let e = Scenario::from_toml_str(text, None).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let text = "[pulse]\nsigma_e = -1.0\n";
        let e = Scenario::from_toml_str(text, None).unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("pulse.sigma_e"), "{e}");
        let text = "[pulse]\nsigma_e = 0.4\nphase = { c1 = 2.0 }\n";
        assert!(Scenario::from_toml_str(text, None).is_err());
        let text = "[pulse]\nsigma_e = 0.4\n[measurement]\ntau = 30.0\nresolution = 0.01\n";
        let e = Scenario::from_toml_str(text, None).unwrap_err().to_string();
        assert!(e.contains("delta_e"), "{e}");
    }

    #[test]
    fn pinem_field_calibration() {
        let s = Scenario::preset("fig3-pinem").unwrap();
        assert!((s.measurement.unwrap().delta_e - 0.1).abs() < 1e-12);
        match s.shear.unwrap() {
            ShearModel::Pinem { params, coupling, .. } => {
                assert!((coupling.two_g() - 0.8332).abs() < 1e-3);
                assert!(params.field_peak > 0.0);
            }
            other => panic!("{other:?}"),
        }
        let text = "[pulse]\nsigma_e = 0.425\n[lem]\nmodel = \"pinem\"\nfield_peak_v_per_nm = 0.002\n[measurement]\ntau = 30.0\nresolution = 0.01\n";
        let s = Scenario::from_toml_str(text, None).unwrap();
        assert!((s.measurement.unwrap().delta_e - 0.0998).abs() < 1e-3);
    }

    #[test]
    fn empty_sweep_axis_rejected() {
        let text = format!("{FIG3}\n[sweep]\nparameter = \"tau\"\nvalues = []\n");
        assert!(Scenario::from_toml_str(&text, None).is_err());
        assert!(SweepSpec::new(SweepParameter::Tau, vec![], 1).is_err());
    }

    #[test]
    fn sweep_preserves_order_and_is_deterministic() {
        let s = Scenario::preset("fig3").unwrap();
        let spec = SweepSpec::new(SweepParameter::Tau, vec![30.0, 3.0, 100.0], 1).unwrap();
        let fast = s.with_parameter(SweepParameter::Jitter, 0.0).unwrap();
        let a = sweep(&fast, &spec).unwrap();
        let b = sweep(&fast, &spec).unwrap();
        assert_eq!(a.iter().map(|p| p.value).collect::<Vec<_>>(), vec![30.0, 3.0, 100.0]);
        let mut ta = Vec::new();
        let mut tb = Vec::new();
        write_sweep_table(&mut ta, &spec, &a).unwrap();
        write_sweep_table(&mut tb, &spec, &b).unwrap();
        assert_eq!(ta, tb);
    }
}
