//! Centered discrete Fourier transforms between conjugate lattices.
//!
//! With sample `j` at offset `(j − N/2)·d`, the forward transform evaluates
//! `Σ_j x_j exp(−i q_j t_m / ħ)` and the backward transform
//! `Σ_m y_m exp(+i q_j t_m / ħ)`, both unnormalized. Callers apply the
//! measure factors.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    /// Kernel `exp(−i q t / ħ)`.
    Negative,
    /// Kernel `exp(+i q t / ħ)`.
    Positive,
}

/// Unnormalized centered DFT of `data` in place. `data.len()` must be even.
pub fn centered_dft(data: &mut [Complex64], sign: Sign) {
    let n = data.len();
    debug_assert!(n % 2 == 0);
    let mut planner = FftPlanner::<f64>::new();
    let fft = match sign {
        Sign::Negative => planner.plan_fft_forward(n),
        Sign::Positive => planner.plan_fft_inverse(n),
    };
    data.rotate_left(n / 2);
    fft.process(data);
    data.rotate_right(n / 2);
}

/// Planned forward/backward pair for repeated transforms of one length.
pub struct CenteredFft {
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
}

impl CenteredFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(n);
        let backward = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(backward.get_inplace_scratch_len());
        Self {
            forward,
            backward,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn process(&mut self, data: &mut [Complex64], sign: Sign) {
        let n = data.len();
        let fft = match sign {
            Sign::Negative => &self.forward,
            Sign::Positive => &self.backward,
        };
        data.rotate_left(n / 2);
        fft.process_with_scratch(data, &mut self.scratch);
        data.rotate_right(n / 2);
    }
}

pub fn centered_dft_owned(data: &[Complex64], sign: Sign) -> Vec<Complex64> {
    let mut out = data.to_vec();
    centered_dft(&mut out, sign);
    out
}
