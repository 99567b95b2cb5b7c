//! Pulse duration versus spectral phase, the quarter-cycle locality
//! criterion, and σ_E–φ_n parameter diagrams.
//!
//! Phase coefficients enter as Taylor coefficients in rad·eV⁻ⁿ and are turned
//! into time units with `φ̃_n = ħⁿ φ_n`.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::constants::HBAR;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationModel {
    /// fs
    pub sigma_t0: f64,
    /// rad/eV²
    pub phi2: f64,
    /// rad/eV³
    pub phi3: f64,
    /// fs
    pub optical_period: f64,
}

impl DurationModel {
    pub fn new(sigma_t0: f64, phi2: f64, phi3: f64, optical_period: f64) -> Result<Self> {
        if !(sigma_t0 > 0.0) || !sigma_t0.is_finite() {
            return Err(Error::invalid("sigma_t0", format!("{sigma_t0} must be > 0")));
        }
        if !(optical_period > 0.0) || !optical_period.is_finite() {
            return Err(Error::invalid("optical period", format!("{optical_period} must be > 0")));
        }
        if !phi2.is_finite() || !phi3.is_finite() {
            return Err(Error::invalid("phase coefficients", "must be finite"));
        }
        Ok(Self {
            sigma_t0,
            phi2,
            phi3,
            optical_period,
        })
    }

    /// Model for an rms spectral width `sigma_e` (eV).
    pub fn from_spectral_width(sigma_e: f64, phi2: f64, phi3: f64, optical_period: f64) -> Result<Self> {
        if !(sigma_e > 0.0) {
            return Err(Error::invalid("sigma_E", format!("{sigma_e} must be > 0")));
        }
        Self::new(transform_limit(sigma_e), phi2, phi3, optical_period)
    }

    pub fn quarter_period(&self) -> f64 {
        0.25 * self.optical_period
    }
}

/// σ_t0 = ħ/2σ_E, fs.
pub fn transform_limit(sigma_e: f64) -> f64 {
    HBAR / (2.0 * sigma_e)
}

/// `σ_t = σ_t0 √(1 + (φ̃2/2σ_t0²)² + ½(φ̃3/4σ_t0³)²)`.
pub fn duration(model: &DurationModel) -> f64 {
    let s = model.sigma_t0;
    let p2 = HBAR * HBAR * model.phi2;
    let p3 = HBAR.powi(3) * model.phi3;
    s * (1.0 + (p2 / (2.0 * s * s)).powi(2) + 0.5 * (p3 / (4.0 * s.powi(3))).powi(2)).sqrt()
}

/// Pure-chirp law `√(σ_t0² + (ħ²φ2/2σ_t0)²)`.
pub fn chirp_duration(sigma_t0: f64, phi2: f64) -> f64 {
    (sigma_t0 * sigma_t0 + (HBAR * HBAR * phi2 / (2.0 * sigma_t0)).powi(2)).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advisory {
    pub label: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalityReport {
    pub sigma_t: f64,
    /// T/4, fs
    pub limit: f64,
    /// limit − σ_t, fs
    pub margin: f64,
    pub pass: bool,
    pub advisories: Vec<Advisory>,
}

/// Compare the rms duration against a quarter optical cycle.
pub fn locality_check(model: &DurationModel) -> LocalityReport {
    let sigma_t = duration(model);
    let limit = model.quarter_period();
    let t = model.optical_period;
    let s = model.sigma_t0;
    let p2 = HBAR * HBAR * model.phi2;
    let advisories = vec![
        Advisory {
            label: "sigma_t0 < T/4",
            holds: s < limit,
            detail: format!("sigma_t0 = {s:.6} fs, T/4 = {limit:.6} fs"),
        },
        Advisory {
            label: "|phi2| < sigma_t0*T/2",
            holds: p2.abs() < s * t / 2.0,
            detail: format!("hbar^2 |phi2| = {:.6} fs^2, sigma_t0*T/2 = {:.6} fs^2", p2.abs(), s * t / 2.0),
        },
        Advisory {
            label: "|phi2| < T^2/64",
            holds: p2.abs() < t * t / 64.0,
            detail: format!("hbar^2 |phi2| = {:.6} fs^2, T^2/64 = {:.6} fs^2", p2.abs(), t * t / 64.0),
        },
    ];
    LocalityReport {
        sigma_t,
        limit,
        margin: limit - sigma_t,
        pass: sigma_t < limit,
        advisories,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl AxisSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::invalid("axis", "count must be >= 1"));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.max < self.min {
            return Err(Error::invalid("axis", format!("bad range [{}, {}]", self.min, self.max)));
        }
        if self.log && !(self.min > 0.0) {
            return Err(Error::invalid("axis", "log axis needs a positive minimum"));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let n = (self.count - 1) as f64;
        Ok((0..self.count)
            .map(|i| {
                let f = i as f64 / n;
                if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseAxis {
    Phi2,
    Phi3,
}

impl PhaseAxis {
    pub fn name(&self) -> &'static str {
        match self {
            PhaseAxis::Phi2 => "phi2",
            PhaseAxis::Phi3 => "phi3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagram {
    pub axis: PhaseAxis,
    /// eV
    pub sigma_e: Vec<f64>,
    /// rad/eVⁿ
    pub phase: Vec<f64>,
    /// `durations[row][col]` for `phase[row]`, `sigma_e[col]`, fs
    pub durations: Vec<Vec<f64>>,
    /// contour level, fs
    pub level: f64,
    /// polylines of (σ_E, φ_n) along the level
    pub contours: Vec<Vec<(f64, f64)>>,
}

impl Diagram {
    /// σ_E values where row `row` crosses the contour level, by linear interpolation.
    pub fn row_crossings(&self, row: usize) -> Vec<f64> {
        let d = &self.durations[row];
        let mut out = Vec::new();
        for i in 0..d.len().saturating_sub(1) {
            let (a, b) = (d[i] - self.level, d[i + 1] - self.level);
            if a == 0.0 {
                out.push(self.sigma_e[i]);
            } else if a * b < 0.0 {
                out.push(self.sigma_e[i] + (self.sigma_e[i + 1] - self.sigma_e[i]) * a / (a - b));
            }
        }
        out
    }
}

/// Evaluate σ_t over a σ_E × φ_n grid (the other order set to `other`) and
/// trace the T/4 contour.
pub fn parameter_diagram(
    sigma_axis: &AxisSpec,
    phase_axis: PhaseAxis,
    phase_spec: &AxisSpec,
    other: f64,
    optical_period: f64,
) -> Result<Diagram> {
    let sigma_e = sigma_axis.values()?;
    if sigma_e.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::invalid("sigma_E axis", "values must be > 0"));
    }
    let phase = phase_spec.values()?;
    if !(optical_period > 0.0) {
        return Err(Error::invalid("optical period", "must be > 0"));
    }
    let durations: Vec<Vec<f64>> = phase
        .par_iter()
        .map(|&p| {
            sigma_e
                .iter()
                .map(|&s| {
                    let (phi2, phi3) = match phase_axis {
                        PhaseAxis::Phi2 => (p, other),
                        PhaseAxis::Phi3 => (other, p),
                    };
                    duration(&DurationModel {
                        sigma_t0: transform_limit(s),
                        phi2,
                        phi3,
                        optical_period,
                    })
                })
                .collect()
        })
        .collect();
    let level = 0.25 * optical_period;
    let contours = marching_squares(&sigma_e, &phase, &durations, level);
    Ok(Diagram {
        axis: phase_axis,
        sigma_e,
        phase,
        durations,
        level,
        contours,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    /// between (i, j) and (i + 1, j)
    H(usize, usize),
    /// between (i, j) and (i, j + 1)
    V(usize, usize),
}

/// Level set of `z[j][i]` over abscissae `x[i]`, ordinates `y[j]`, as chained polylines.
pub fn marching_squares(x: &[f64], y: &[f64], z: &[Vec<f64>], level: f64) -> Vec<Vec<(f64, f64)>> {
    let (nx, ny) = (x.len(), y.len());
    if nx < 2 || ny < 2 {
        return Vec::new();
    }
    let above = |i: usize, j: usize| z[j][i] >= level;
    let point = |e: Edge| -> (f64, f64) {
        let lerp = |a: f64, b: f64, za: f64, zb: f64| a + (b - a) * (level - za) / (zb - za);
        match e {
            Edge::H(i, j) => (lerp(x[i], x[i + 1], z[j][i], z[j][i + 1]), y[j]),
            Edge::V(i, j) => (x[i], lerp(y[j], y[j + 1], z[j][i], z[j + 1][i])),
        }
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let bottom = Edge::H(i, j);
            let top = Edge::H(i, j + 1);
            let left = Edge::V(i, j);
            let right = Edge::V(i + 1, j);
            let code = (above(i, j) as u8)
                | (above(i + 1, j) as u8) << 1
                | (above(i + 1, j + 1) as u8) << 2
                | (above(i, j + 1) as u8) << 3;
            let center_above = (z[j][i] + z[j][i + 1] + z[j + 1][i] + z[j + 1][i + 1]) / 4.0 >= level;
            match code {
                0 | 15 => {}
                1 | 14 => segments.push((left, bottom)),
                2 | 13 => segments.push((bottom, right)),
                3 | 12 => segments.push((left, right)),
                4 | 11 => segments.push((right, top)),
                6 | 9 => segments.push((bottom, top)),
                7 | 8 => segments.push((left, top)),
                5 => {
                    if center_above {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    } else {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    }
                }
                10 => {
                    if center_above {
                        segments.push((left, bottom));
                        segments.push((right, top));
                    } else {
                        segments.push((left, top));
                        segments.push((bottom, right));
                    }
                }
                _ => unreachable!(),
            }
        }
    }
    chain(&segments).into_iter().map(|line| line.into_iter().map(point).collect()).collect()
}

/// Join segments that share an edge crossing into maximal polylines.
fn chain(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(k);
        by_edge.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let next_from = |edge: Edge, used: &[bool]| -> Option<usize> {
        by_edge.get(&edge)?.iter().copied().find(|&k| !used[k])
    };
    // open chains start at an edge touched once; closed loops are picked up afterwards
    let mut order: Vec<usize> = (0..segments.len())
        .filter(|&k| {
            let (a, b) = segments[k];
            by_edge[&a].len() == 1 || by_edge[&b].len() == 1
        })
        .collect();
    order.extend(0..segments.len());
    for start in order {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let (first, second) = if by_edge[&b].len() == 1 && by_edge[&a].len() != 1 { (b, a) } else { (a, b) };
        let mut line = vec![first, second];
        let mut tail = second;
        while let Some(k) = next_from(tail, &used) {
            used[k] = true;
            let (p, q) = segments[k];
            tail = if p == tail { q } else { p };
            line.push(tail);
        }
        lines.push(line);
    }
    lines
}
