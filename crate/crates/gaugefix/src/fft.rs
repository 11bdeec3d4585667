//! `rustfft`-backed line transforms for [`SpectralWorkspace`].

use std::sync::Arc;

use gaugefix_core::spectral::{Direction, FftBackend, SpectralWorkspace};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Plans are cached per length and direction; the scratch buffer is reused.
pub struct RustFftBackend {
    planner: FftPlanner<f64>,
    forward: Option<Arc<dyn Fft<f64>>>,
    inverse: Option<Arc<dyn Fft<f64>>>,
    scratch: Vec<Complex64>,
}

impl Default for RustFftBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl RustFftBackend {
    pub fn new() -> Self {
        Self {
            planner: FftPlanner::new(),
            forward: None,
            inverse: None,
            scratch: Vec::new(),
        }
    }

    fn plan(&mut self, len: usize, direction: Direction) -> Arc<dyn Fft<f64>> {
        let slot = match direction {
            Direction::Forward => &mut self.forward,
            Direction::Inverse => &mut self.inverse,
        };
        match slot {
            Some(plan) if plan.len() == len => Arc::clone(plan),
            _ => {
                let plan = match direction {
                    Direction::Forward => self.planner.plan_fft_forward(len),
                    Direction::Inverse => self.planner.plan_fft_inverse(len),
                };
                *slot = Some(Arc::clone(&plan));
                plan
            }
        }
    }
}

impl FftBackend for RustFftBackend {
    fn transform_line(&mut self, line: &mut [Complex64], direction: Direction) {
        let plan = self.plan(line.len(), direction);
        let need = plan.get_inplace_scratch_len();
        if self.scratch.len() < need {
            self.scratch.resize(need, Complex64::new(0.0, 0.0));
        }
        plan.process_with_scratch(line, &mut self.scratch[..need]);
    }
}

/// A workspace on the fast backend.
pub fn workspace(grid_n: usize, domain_length: f64) -> gaugefix_core::Result<SpectralWorkspace> {
    SpectralWorkspace::with_backend(grid_n, domain_length, Box::new(RustFftBackend::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaugefix_core::spectral::DirectDft;

    #[test]
    fn agrees_with_direct_dft() {
        for n in [4, 5, 8, 12] {
            let input: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64).sin(), (j * j) as f64 * 0.1)).collect();
            for direction in [Direction::Forward, Direction::Inverse] {
                let mut fast = input.clone();
                let mut slow = input.clone();
                RustFftBackend::new().transform_line(&mut fast, direction);
                DirectDft::new().transform_line(&mut slow, direction);
                let err = fast.iter().zip(&slow).fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
                assert!(err < 1e-12, "n = {n}: {err}");
            }
        }
    }

    #[test]
    fn workspace_round_trip() {
        let mut ws = workspace(8, 2.0).unwrap();
        let field: Vec<f64> = (0..ws.len()).map(|i| ((i * 31) % 17) as f64 - 8.0).collect();
        let spectrum = ws.forward(&field).unwrap();
        let back = ws.inverse(spectrum).unwrap();
        let err = field.iter().zip(&back).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12);
    }
}
