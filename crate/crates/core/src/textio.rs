//! Columnar text formats.
//!
//! Every file starts with `# key=value` header lines followed by comma
//! separated rows. Floats are written with 17 significant digits so that a
//! read-back reproduces the stored values bit for bit.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::analysis::Diagram;
use crate::error::{Error, Result};
use crate::grid::{EnergyGrid, TimeGrid};
use crate::interferometer::{Interferogram, MeasurementConfig};
use crate::lem::FieldProfile;
use crate::reconstruction::ReconstructionResult;
use crate::wavepacket::{SpectralWavefunction, TemporalWavefunction};

/// Round-trip float formatting.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header map and data rows of a columnar file.
#[derive(Debug, Default)]
pub struct Table {
    pub header: BTreeMap<String, String>,
    /// (line number, fields)
    pub rows: Vec<(usize, Vec<f64>)>,
}

impl Table {
    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut table = Table::default();
        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    table.header.insert(k.trim().to_string(), v.trim().to_string());
                }
                continue;
            }
            let fields = trimmed
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno,
                        message: format!("'{}': {e}", f.trim()),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            table.rows.push((lineno, fields));
        }
        Ok(table)
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self
            .header
            .get(key)
            .ok_or_else(|| Error::Parse { line: 0, message: format!("missing header key '{key}'") })?;
        raw.parse::<T>().map_err(|e| Error::Parse {
            line: 0,
            message: format!("header key '{key}' = '{raw}': {e}"),
        })
    }

    fn expect_kind(&self, kind: &str) -> Result<()> {
        let found: String = self.get("kind")?;
        if found != kind {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected kind={kind}, found kind={found}"),
            });
        }
        Ok(())
    }

    fn columns(&self, n: usize) -> Result<()> {
        for (line, row) in &self.rows {
            if row.len() != n {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("expected {n} columns, found {}", row.len()),
                });
            }
        }
        Ok(())
    }
}

fn write_header(w: &mut impl Write, pairs: &[(&str, String)]) -> Result<()> {
    for (k, v) in pairs {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn complex_rows(t: &Table, count: usize) -> Result<Vec<Complex64>> {
    t.columns(3)?;
    if t.rows.len() != count {
        return Err(Error::Parse {
            line: 0,
            message: format!("header says {count} rows, found {}", t.rows.len()),
        });
    }
    Ok(t.rows.iter().map(|(_, r)| Complex64::new(r[1], r[2])).collect())
}

pub fn write_spectral(w: &mut impl Write, psi: &SpectralWavefunction) -> Result<()> {
    let g = psi.grid();
    write_header(
        w,
        &[
            ("kind", "spectral".into()),
            ("center_energy_eV", fmt_f64(g.center_energy())),
            ("spacing_eV", fmt_f64(g.spacing())),
            ("count", g.count().to_string()),
            ("columns", "E_eV, re, im".into()),
        ],
    )?;
    for (i, z) in psi.samples().iter().enumerate() {
        writeln!(w, "{}, {}, {}", fmt_f64(g.energy(i)), fmt_f64(z.re), fmt_f64(z.im))?;
    }
    Ok(())
}

pub fn read_spectral(r: impl BufRead) -> Result<SpectralWavefunction> {
    let t = Table::parse(r)?;
    t.expect_kind("spectral")?;
    let grid = EnergyGrid::new(t.get("center_energy_eV")?, t.get("spacing_eV")?, t.get("count")?)?;
    SpectralWavefunction::from_samples(grid, complex_rows(&t, grid.count())?)
}

pub fn write_temporal(w: &mut impl Write, psi: &TemporalWavefunction) -> Result<()> {
    let g = psi.grid();
    write_header(
        w,
        &[
            ("kind", "temporal".into()),
            ("center_time_fs", fmt_f64(g.center_time())),
            ("spacing_fs", fmt_f64(g.spacing())),
            ("count", g.count().to_string()),
            ("carrier_energy_eV", fmt_f64(psi.carrier_energy())),
            ("columns", "t_fs, re, im".into()),
        ],
    )?;
    for (i, z) in psi.samples().iter().enumerate() {
        writeln!(w, "{}, {}, {}", fmt_f64(g.time(i)), fmt_f64(z.re), fmt_f64(z.im))?;
    }
    Ok(())
}

pub fn read_temporal(r: impl BufRead) -> Result<TemporalWavefunction> {
    let t = Table::parse(r)?;
    t.expect_kind("temporal")?;
    let grid = TimeGrid::new(t.get("center_time_fs")?, t.get("spacing_fs")?, t.get("count")?)?;
    TemporalWavefunction::from_samples(grid, t.get("carrier_energy_eV")?, complex_rows(&t, grid.count())?)
}

pub fn write_interferogram(w: &mut impl Write, interferogram: &Interferogram) -> Result<()> {
    let g = interferogram.grid();
    let mut header = vec![
        ("kind", "interferogram".to_string()),
        ("center_energy_eV", fmt_f64(g.center_energy())),
        ("spacing_eV", fmt_f64(g.spacing())),
        ("count", g.count().to_string()),
    ];
    if let Some(c) = interferogram.config() {
        header.extend([
            ("tau_fs", fmt_f64(c.tau)),
            ("delta_E_eV", fmt_f64(c.delta_e)),
            ("resolution_eV", fmt_f64(c.resolution)),
            ("jitter_fraction", fmt_f64(c.jitter_fraction)),
            ("shots", c.shots.to_string()),
        ]);
    }
    header.push(("columns", "E_eV, intensity".into()));
    write_header(w, &header)?;
    for (i, v) in interferogram.intensity().iter().enumerate() {
        writeln!(w, "{}, {}", fmt_f64(g.energy(i)), fmt_f64(*v))?;
    }
    Ok(())
}

pub fn read_interferogram(r: impl BufRead) -> Result<Interferogram> {
    let t = Table::parse(r)?;
    t.expect_kind("interferogram")?;
    t.columns(2)?;
    let grid = EnergyGrid::new(t.get("center_energy_eV")?, t.get("spacing_eV")?, t.get("count")?)?;
    let config = if t.header.contains_key("tau_fs") {
        Some(MeasurementConfig {
            tau: t.get("tau_fs")?,
            delta_e: t.get("delta_E_eV")?,
            resolution: t.get("resolution_eV")?,
            jitter_fraction: t.get("jitter_fraction")?,
            shots: t.get("shots")?,
        })
    } else {
        None
    };
    Interferogram::new(grid, t.rows.iter().map(|(_, r)| r[1]).collect(), config)
}

/// Lattice phase: `k, E_eV, phi_rad`.
pub fn write_phase_lattice(w: &mut impl Write, result: &ReconstructionResult) -> Result<()> {
    let p = &result.phase;
    write_header(
        w,
        &[
            ("kind", "phase_lattice".into()),
            ("anchor_eV", fmt_f64(p.anchor)),
            ("delta_E_eV", fmt_f64(p.delta_e)),
            ("reference_plane", result.reference_plane.into()),
            ("columns", "k, E_eV, phi_rad".into()),
        ],
    )?;
    for ((k, e), v) in p.indices.iter().zip(&p.energies).zip(&p.values) {
        writeln!(w, "{k}, {}, {}", fmt_f64(*e), fmt_f64(*v))?;
    }
    Ok(())
}

/// Dense spectrum: `E_eV, amplitude, phase_rad, theta_rad, theta_valid`.
pub fn write_dense_phase(w: &mut impl Write, result: &ReconstructionResult) -> Result<()> {
    let g = result.spectral.grid();
    write_header(
        w,
        &[
            ("kind", "dense_phase".into()),
            ("reference_plane", result.reference_plane.into()),
            ("columns", "E_eV, amplitude, phase_rad, theta_rad, theta_valid".into()),
        ],
    )?;
    for i in 0..g.count() {
        writeln!(
            w,
            "{}, {}, {}, {}, {}",
            fmt_f64(g.energy(i)),
            fmt_f64(result.amplitude[i]),
            fmt_f64(result.dense_phase[i]),
            fmt_f64(result.theta.values[i]),
            result.theta.valid[i] as u8
        )?;
    }
    Ok(())
}

/// Ordered `key=value` lines.
pub fn write_report(w: &mut impl Write, entries: &[(String, String)]) -> Result<()> {
    for (k, v) in entries {
        writeln!(w, "{k}={v}")?;
    }
    Ok(())
}

pub fn read_report(r: impl BufRead) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: idx + 1,
            message: "expected key=value".into(),
        })?;
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Long-format grid: `sigma_E_eV, phi_n, sigma_t_fs`.
pub fn write_diagram_grid(w: &mut impl Write, diagram: &Diagram) -> Result<()> {
    let name = diagram.axis.name();
    write_header(
        w,
        &[
            ("kind", "diagram".into()),
            ("phase_axis", name.into()),
            ("level_fs", fmt_f64(diagram.level)),
            ("columns", format!("sigma_E_eV, {name}, sigma_t_fs")),
        ],
    )?;
    for (row, p) in diagram.phase.iter().enumerate() {
        for (col, s) in diagram.sigma_e.iter().enumerate() {
            writeln!(w, "{}, {}, {}", fmt_f64(*s), fmt_f64(*p), fmt_f64(diagram.durations[row][col]))?;
        }
    }
    Ok(())
}

/// Contour polylines separated by blank lines, each preceded by `# polyline=k`.
pub fn write_diagram_contours(w: &mut impl Write, diagram: &Diagram) -> Result<()> {
    let name = diagram.axis.name();
    write_header(
        w,
        &[
            ("kind", "contour".into()),
            ("level_fs", fmt_f64(diagram.level)),
            ("polylines", diagram.contours.len().to_string()),
            ("columns", format!("sigma_E_eV, {name}")),
        ],
    )?;
    for (k, line) in diagram.contours.iter().enumerate() {
        writeln!(w)?;
        writeln!(w, "# polyline={k}")?;
        for (s, p) in line {
            writeln!(w, "{}, {}", fmt_f64(*s), fmt_f64(*p))?;
        }
    }
    Ok(())
}

/// Two-column field profile `z_nm, F_V_per_nm`; `#` lines are comments.
pub fn read_field_profile(r: impl BufRead) -> Result<FieldProfile> {
    let t = Table::parse(r)?;
    t.columns(2)?;
    if t.rows.is_empty() {
        return Err(Error::Parse { line: 0, message: "field profile has no rows".into() });
    }
    FieldProfile::new(
        t.rows.iter().map(|(_, r)| r[0]).collect(),
        t.rows.iter().map(|(_, r)| r[1]).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavepacket::{make_gaussian_spectrum, to_time_domain, SpectralPhaseSpec};

    fn pulse() -> SpectralWavefunction {
        let grid = EnergyGrid::spanning(10_000.0, 0.425, 16.0, 256).unwrap();
        make_gaussian_spectrum(&grid, 0.425, &SpectralPhaseSpec::polynomial(&[(2, 0.34), (3, 1.05)]).unwrap()).unwrap()
    }

    #[test]
    fn spectral_round_trip_is_bit_exact() {
        let psi = pulse();
        let mut buf = Vec::new();
        write_spectral(&mut buf, &psi).unwrap();
        let back = read_spectral(buf.as_slice()).unwrap();
        assert_eq!(back, psi);
    }

    #[test]
    fn temporal_round_trip_is_bit_exact() {
        let t = to_time_domain(&pulse());
        let mut buf = Vec::new();
        write_temporal(&mut buf, &t).unwrap();
        assert_eq!(read_temporal(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn interferogram_round_trip() {
        let psi = pulse();
        let cfg = MeasurementConfig { tau: 30.0, delta_e: 0.1, resolution: 0.01, jitter_fraction: 1e-5, shots: 10 };
        let i = Interferogram::new(*psi.grid(), psi.density(), Some(cfg)).unwrap();
        let mut buf = Vec::new();
        write_interferogram(&mut buf, &i).unwrap();
        assert_eq!(read_interferogram(buf.as_slice()).unwrap(), i);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "# kind=spectral\n# center_energy_eV=0\n# spacing_eV=0.1\n# count=16\n1, 2, x\n";
        match read_spectral(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        assert!(read_temporal("# kind=spectral\n".as_bytes()).is_err());
        let profile = read_field_profile("# z, F\n-25, 0.002\n25, 0.002\n".as_bytes()).unwrap();
        assert_eq!(profile.positions(), &[-25.0, 25.0]);
        assert!(read_field_profile("1, 2, 3\n".as_bytes()).is_err());
    }
}
