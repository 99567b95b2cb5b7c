//! Uniform sampling lattices for the energy and time domains.
//!
//! Both grids index their samples so that the center value sits at index
//! `count / 2`; this is the layout the centered transforms in
//! [`crate::fourier`] expect.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::error::{Error, Result};

pub const MIN_COUNT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyGrid {
    center_energy: f64,
    spacing: f64,
    count: usize,
}

impl EnergyGrid {
    pub fn new(center_energy: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid("energy spacing", format!("{spacing} must be > 0")));
        }
        if !center_energy.is_finite() {
            return Err(Error::invalid("center energy", "must be finite"));
        }
        validate_count(count)?;
        Ok(Self {
            center_energy,
            spacing,
            count,
        })
    }

    /// Grid spanning `span_sigmas · sigma_e` (endpoint to endpoint) around `center_energy`.
    pub fn spanning(center_energy: f64, sigma_e: f64, span_sigmas: f64, count: usize) -> Result<Self> {
        if !(sigma_e > 0.0) {
            return Err(Error::invalid("sigma_E", format!("{sigma_e} must be > 0")));
        }
        if !(span_sigmas > 0.0) {
            return Err(Error::invalid("span_sigmas", format!("{span_sigmas} must be > 0")));
        }
        validate_count(count)?;
        Self::new(center_energy, span_sigmas * sigma_e / (count - 1) as f64, count)
    }

    pub fn center_energy(&self) -> f64 {
        self.center_energy
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Endpoint-to-endpoint extent, `spacing · (count − 1)`.
    pub fn span(&self) -> f64 {
        self.spacing * (self.count - 1) as f64
    }

    /// Offset of sample `i` from the center energy.
    #[inline]
    pub fn offset(&self, i: usize) -> f64 {
        (i as f64 - (self.count / 2) as f64) * self.spacing
    }

    #[inline]
    pub fn energy(&self, i: usize) -> f64 {
        self.center_energy + self.offset(i)
    }

    pub fn energies(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.energy(i)).collect()
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.offset(i)).collect()
    }

    pub fn min_energy(&self) -> f64 {
        self.energy(0)
    }

    pub fn max_energy(&self) -> f64 {
        self.energy(self.count - 1)
    }

    /// The time lattice reached by a Fourier transform of this grid.
    pub fn conjugate(&self) -> TimeGrid {
        TimeGrid {
            center_time: 0.0,
            spacing: 2.0 * PI * HBAR / (self.count as f64 * self.spacing),
            count: self.count,
        }
    }

    /// Same spacing and center, `count` samples.
    pub fn with_count(&self, count: usize) -> Result<Self> {
        Self::new(self.center_energy, self.spacing, count)
    }

    pub fn same_lattice(&self, other: &EnergyGrid) -> bool {
        self.count == other.count
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && (self.center_energy - other.center_energy).abs() <= 1e-9 * self.spacing.max(1e-300)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    center_time: f64,
    spacing: f64,
    count: usize,
}

impl TimeGrid {
    pub fn new(center_time: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::invalid("time spacing", format!("{spacing} must be > 0")));
        }
        validate_count(count)?;
        Ok(Self {
            center_time,
            spacing,
            count,
        })
    }

    pub fn center_time(&self) -> f64 {
        self.center_time
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.center_time + (i as f64 - (self.count / 2) as f64) * self.spacing
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.time(i)).collect()
    }

    /// Energy lattice conjugate to this grid, centered on `center_energy`.
    pub fn conjugate(&self, center_energy: f64) -> EnergyGrid {
        EnergyGrid {
            center_energy,
            spacing: 2.0 * PI * HBAR / (self.count as f64 * self.spacing),
            count: self.count,
        }
    }
}

fn validate_count(count: usize) -> Result<()> {
    if count < MIN_COUNT {
        return Err(Error::invalid("sample count", format!("{count} < {MIN_COUNT}")));
    }
    if count % 2 != 0 {
        return Err(Error::invalid("sample count", format!("{count} must be even")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_relation_holds() {
        let g = EnergyGrid::spanning(10_000.0, 0.425, 16.0, 4096).unwrap();
        let t = g.conjugate();
        let product = t.spacing() * t.count() as f64 * g.spacing();
        assert!((product - 2.0 * PI * HBAR).abs() < 1e-12);
        let back = t.conjugate(g.center_energy());
        assert!(back.same_lattice(&g));
    }

    #[test]
    fn center_sits_at_half_count() {
        let g = EnergyGrid::new(5.0, 0.1, 16).unwrap();
        assert_eq!(g.energy(8), 5.0);
        assert!((g.span() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(EnergyGrid::new(0.0, 0.0, 64).is_err());
        assert!(EnergyGrid::new(0.0, 0.1, 8).is_err());
        assert!(EnergyGrid::new(0.0, 0.1, 17).is_err());
        assert!(TimeGrid::new(0.0, -1.0, 64).is_err());
    }
}
