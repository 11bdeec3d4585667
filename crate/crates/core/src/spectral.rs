//! Periodic spectral grid: 3-D transforms over a pluggable 1-D FFT backend,
//! the wavenumber tables and Fourier-space multipliers.
//!
//! Grids are `N^3` row-major with `index = (ix * N + iy) * N + iz` and
//! coordinates `x = i * L / N`. The forward transform is unnormalized with
//! kernel `exp(-i k.x)`; the inverse carries the `1 / N^3`.
//!
//! Wavenumbers along an axis are `2 pi m / L` with `m` in
//! `-N/2 + 1 ..= N/2 - 1`; for even `N` the unpaired Nyquist index gets
//! wavenumber 0 so every derivative of a real field stays real.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X_k = sum_j x_j exp(-2 pi i j k / n)`
    Forward,
    /// `x_j = sum_k X_k exp(+2 pi i j k / n)`, unnormalized
    Inverse,
}

/// In-place 1-D complex DFT of arbitrary length.
pub trait FftBackend {
    fn transform_line(&mut self, line: &mut [Complex64], direction: Direction);
}

/// Textbook `O(n^2)` DFT with a cached twiddle table. Exact enough for
/// verification and small grids.
#[derive(Debug, Clone, Default)]
pub struct DirectDft {
    twiddles: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl DirectDft {
    pub fn new() -> Self {
        Self::default()
    }
}

impl FftBackend for DirectDft {
    fn transform_line(&mut self, line: &mut [Complex64], direction: Direction) {
        let n = line.len();
        if n <= 1 {
            return;
        }
        if self.twiddles.len() != n {
            self.twiddles = (0..n)
                .map(|j| {
                    let angle = -2.0 * PI * j as f64 / n as f64;
                    Complex64::new(angle.cos(), angle.sin())
                })
                .collect();
        }
        self.scratch.clear();
        self.scratch.extend_from_slice(line);
        for (k, out) in line.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in self.scratch.iter().enumerate() {
                let w = self.twiddles[(j * k) % n];
                acc += x * if direction == Direction::Forward { w } else { w.conj() };
            }
            *out = acc;
        }
    }
}

/// Spectral operators on one periodic `N^3` grid of side `L`.
///
/// Holds scratch buffers, so a workspace serves one thread at a time.
pub struct SpectralWorkspace {
    n: usize,
    length: f64,
    backend: Box<dyn FftBackend + Send>,
    wavenumbers: Vec<f64>,
    k_vectors: Vec<[f64; 3]>,
    k_squared: Vec<f64>,
    line: Vec<Complex64>,
}

impl core::fmt::Debug for SpectralWorkspace {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SpectralWorkspace")
            .field("n", &self.n)
            .field("length", &self.length)
            .finish_non_exhaustive()
    }
}

/// Smallest grid accepted.
pub const MIN_GRID: usize = 4;

impl SpectralWorkspace {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        Self::with_backend(n, length, Box::new(DirectDft::new()))
    }

    pub fn with_backend(n: usize, length: f64, backend: Box<dyn FftBackend + Send>) -> Result<Self> {
        if n < MIN_GRID {
            return Err(Error::InvalidParameter(alloc::format!("grid size must be at least {MIN_GRID}, got {n}")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("domain length must be positive, got {length}")));
        }
        let wavenumbers: Vec<f64> = (0..n).map(|m| 2.0 * PI * signed_index(m, n) as f64 / length).collect();
        let mut k_vectors = Vec::with_capacity(n * n * n);
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    k_vectors.push([wavenumbers[ix], wavenumbers[iy], wavenumbers[iz]]);
                }
            }
        }
        let k_squared = k_vectors.iter().map(|k| k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).collect();
        Ok(Self {
            n,
            length,
            backend,
            wavenumbers,
            k_vectors,
            k_squared,
            line: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    pub fn grid_n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        let h = self.length / self.n as f64;
        h * h * h
    }

    /// Grid coordinate along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        i as f64 * self.length / self.n as f64
    }

    /// Wavenumber table of one axis, indexed by FFT position.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn k_vector(&self, index: usize) -> [f64; 3] {
        self.k_vectors[index]
    }

    /// Wave vectors of all grid modes, in grid order.
    pub fn k_vectors(&self) -> &[[f64; 3]] {
        &self.k_vectors
    }

    pub fn k_squared(&self) -> &[f64] {
        &self.k_squared
    }

    /// Fourier multiplier of `1 / laplacian`: `-1/|k|^2`, and 0 where `k = 0`.
    pub fn inverse_laplacian_symbol(&self, index: usize) -> f64 {
        let k2 = self.k_squared[index];
        if k2 == 0.0 {
            0.0
        } else {
            -1.0 / k2
        }
    }

    pub fn check_len(&self, found: usize) -> Result<()> {
        if found != self.len() {
            let side = (found as f64).cbrt().round() as usize;
            return Err(Error::GridMismatch {
                expected: self.n,
                found: if side * side * side == found { side } else { found },
            });
        }
        Ok(())
    }

    pub fn forward(&mut self, field: &[f64]) -> Result<Vec<Complex64>> {
        self.check_len(field.len())?;
        let mut data: Vec<Complex64> = field.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.transform_3d(&mut data, Direction::Forward);
        Ok(data)
    }

    /// Normalized inverse transform, keeping the real part.
    pub fn inverse(&mut self, mut spectrum: Vec<Complex64>) -> Result<Vec<f64>> {
        self.check_len(spectrum.len())?;
        self.transform_3d(&mut spectrum, Direction::Inverse);
        let scale = 1.0 / self.len() as f64;
        Ok(spectrum.into_iter().map(|c| c.re * scale).collect())
    }

    pub fn transform_3d(&mut self, data: &mut [Complex64], direction: Direction) {
        let n = self.n;
        for stride in [1, n, n * n] {
            for start in line_starts(n, stride) {
                for (j, slot) in self.line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                self.backend.transform_line(&mut self.line, direction);
                for (j, slot) in self.line.iter().enumerate() {
                    data[start + j * stride] = *slot;
                }
            }
        }
    }

    /// `sqrt(sum f^2 dV)`, the grid approximation of the continuum L2 norm.
    pub fn l2_norm(&self, field: &[f64]) -> f64 {
        (field.iter().map(|x| x * x).sum::<f64>() * self.cell_volume()).sqrt()
    }

    /// The continuum L2 norm computed from a forward spectrum by Parseval.
    pub fn spectral_l2_norm(&self, spectrum: &[Complex64]) -> f64 {
        (spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.cell_volume() / self.len() as f64).sqrt()
    }
}

fn signed_index(m: usize, n: usize) -> i64 {
    if 2 * m == n {
        0
    } else if 2 * m < n {
        m as i64
    } else {
        m as i64 - n as i64
    }
}

/// Integer mode number of an FFT position with the Nyquist convention above.
pub fn mode_number(m: usize, n: usize) -> i64 {
    signed_index(m, n)
}

fn line_starts(n: usize, stride: usize) -> impl Iterator<Item = usize> {
    let total = n * n * n;
    (0..total).filter(move |&i| (i / stride) % n == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn direct_dft_of_impulse_and_constant() {
        let mut dft = DirectDft::new();
        let mut line = vec![Complex64::new(0.0, 0.0); 5];
        line[0] = Complex64::new(1.0, 0.0);
        dft.transform_line(&mut line, Direction::Forward);
        assert!(line.iter().all(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        dft.transform_line(&mut line, Direction::Forward);
        assert!((line[0].re - 5.0).abs() < 1e-14);
    }

    #[test]
    fn round_trip() {
        let mut ws = SpectralWorkspace::new(6, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let field: Vec<f64> = (0..ws.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let back = {
            let s = ws.forward(&field).unwrap();
            ws.inverse(s).unwrap()
        };
        let err = field.iter().zip(&back).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn single_mode_lands_on_its_wavenumber() {
        let n = 8;
        let mut ws = SpectralWorkspace::new(n, 2.0 * PI).unwrap();
        let mut field = vec![0.0; ws.len()];
        for ix in 0..n {
            for iy in 0..n {
                for iz in 0..n {
                    field[(ix * n + iy) * n + iz] = (2.0 * ws.coordinate(iy)).cos();
                }
            }
        }
        let s = ws.forward(&field).unwrap();
        let peak = (0..ws.len()).max_by(|&a, &b| s[a].norm().total_cmp(&s[b].norm())).unwrap();
        let k = ws.k_vector(peak);
        assert_eq!(k[0], 0.0);
        assert!((k[1].abs() - 2.0).abs() < 1e-14);
        assert!((s[peak].re - (n * n * n) as f64 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn nyquist_and_zero_mode_conventions() {
        let ws = SpectralWorkspace::new(8, 2.0 * PI).unwrap();
        assert_eq!(ws.wavenumbers()[4], 0.0);
        assert_eq!(ws.wavenumbers()[5], -3.0);
        assert_eq!(ws.inverse_laplacian_symbol(0), 0.0);
        assert_eq!(ws.inverse_laplacian_symbol(1), -1.0);
        let odd = SpectralWorkspace::new(5, 2.0 * PI).unwrap();
        assert_eq!(odd.wavenumbers(), &[0.0, 1.0, 2.0, -2.0, -1.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralWorkspace::new(3, 1.0).is_err());
        assert!(SpectralWorkspace::new(8, 0.0).is_err());
        let mut ws = SpectralWorkspace::new(4, 1.0).unwrap();
        assert!(matches!(ws.forward(&[0.0; 125]), Err(Error::GridMismatch { expected: 4, found: 5 })));
    }

    #[test]
    fn parseval_matches_grid_norm() {
        let mut ws = SpectralWorkspace::new(5, 3.0).unwrap();
        let field: Vec<f64> = (0..ws.len()).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let s = ws.forward(&field).unwrap();
        assert!((ws.l2_norm(&field) - ws.spectral_l2_norm(&s)).abs() < 1e-12 * ws.l2_norm(&field));
    }
}
