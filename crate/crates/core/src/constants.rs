//! Physical constants in the crate's unit system (eV, fs, nm).

/// Reduced Planck constant, eV·fs.
pub const HBAR: f64 = 0.658_211_956_9;

/// h·c, eV·nm.
pub const HC: f64 = 1_239.841_984;

/// Speed of light, nm/fs.
pub const C_NM_PER_FS: f64 = 299.792_458;

/// Electron rest energy m·c², eV.
pub const ELECTRON_REST_ENERGY: f64 = 510_998.950_00;

/// Conversion from a FWHM to the standard deviation of a Gaussian.
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;
