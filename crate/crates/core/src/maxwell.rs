//! Vacuum electrodynamics on the periodic 3-torus, reduced to the pairs
//! `(A_i, pi^i)` with `pi = E`.
//!
//! Canonical flow: `A' = pi`, `pi' = lap A - grad div A`.
//! Coulomb-gauge-fixed flow: `A' = pi - grad (1/lap) div pi` (the transverse
//! part of `pi`), same `pi'`. All operators act as Fourier multipliers; the
//! `k = 0` mode is never touched by projections or the inverse Laplacian.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::spectral::{mode_number, SpectralWorkspace, MIN_GRID};
use crate::{Error, Result};

pub type VectorField = [Vec<f64>; 3];
/// Fourier coefficients of the three components, in workspace order.
pub type VectorSpectrum = [Vec<Complex64>; 3];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulationKind {
    Canonical,
    GaugeFixed,
}

impl FormulationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Canonical => "canonical",
            Self::GaugeFixed => "gauge-fixed",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "canonical" => Some(Self::Canonical),
            "gauge-fixed" | "gauge_fixed" => Some(Self::GaugeFixed),
            _ => None,
        }
    }
}

/// Vector potential and conjugate momentum on an `N^3` periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    a: VectorField,
    pi: VectorField,
    grid_n: usize,
    domain_length: f64,
}

impl FieldState {
    pub fn new(a: VectorField, pi: VectorField, grid_n: usize, domain_length: f64) -> Result<Self> {
        if grid_n < MIN_GRID {
            return Err(Error::InvalidParameter(alloc::format!("grid size must be at least {MIN_GRID}, got {grid_n}")));
        }
        if !(domain_length > 0.0) || !domain_length.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("domain length must be positive, got {domain_length}")));
        }
        let len = grid_n * grid_n * grid_n;
        for g in a.iter().chain(pi.iter()) {
            if g.len() != len {
                return Err(Error::DimensionMismatch {
                    expected: len,
                    found: g.len(),
                });
            }
        }
        let state = Self {
            a,
            pi,
            grid_n,
            domain_length,
        };
        if !state.is_finite() {
            return Err(Error::NonFinite("field state"));
        }
        Ok(state)
    }

    pub fn zeros(grid_n: usize, domain_length: f64) -> Result<Self> {
        let len = grid_n * grid_n * grid_n;
        let zero = || [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        Self::new(zero(), zero(), grid_n, domain_length)
    }

    pub fn a(&self) -> &VectorField {
        &self.a
    }

    pub fn pi(&self) -> &VectorField {
        &self.pi
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    pub fn domain_length(&self) -> f64 {
        self.domain_length
    }

    pub fn into_parts(self) -> (VectorField, VectorField) {
        (self.a, self.pi)
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(self.pi.iter()).all(|g| g.iter().all(|x| x.is_finite()))
    }

    /// `self + scale * (da, dpi)`. Finiteness is not re-checked here.
    pub fn add_scaled(&self, scale: f64, da: &VectorField, dpi: &VectorField) -> FieldState {
        let step = |base: &VectorField, inc: &VectorField| -> VectorField {
            core::array::from_fn(|c| base[c].iter().zip(&inc[c]).map(|(x, d)| x + scale * d).collect())
        };
        FieldState {
            a: step(&self.a, da),
            pi: step(&self.pi, dpi),
            grid_n: self.grid_n,
            domain_length: self.domain_length,
        }
    }

    /// Largest absolute difference over all six grids.
    pub fn max_abs_diff(&self, other: &FieldState) -> f64 {
        self.a
            .iter()
            .chain(self.pi.iter())
            .zip(other.a.iter().chain(other.pi.iter()))
            .flat_map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest absolute grid value.
    pub fn max_abs(&self) -> f64 {
        self.a.iter().chain(self.pi.iter()).flat_map(|g| g.iter()).fold(0.0, |m, x| m.max(x.abs()))
    }
}

pub(crate) fn check_workspace(ws: &SpectralWorkspace, s: &FieldState) -> Result<()> {
    if ws.grid_n() != s.grid_n {
        return Err(Error::GridMismatch {
            expected: ws.grid_n(),
            found: s.grid_n,
        });
    }
    if (ws.length() - s.domain_length).abs() > 1e-12 * ws.length() {
        return Err(Error::InvalidParameter(alloc::format!(
            "domain length {} does not match workspace length {}",
            s.domain_length,
            ws.length()
        )));
    }
    Ok(())
}

fn forward_vector(ws: &mut SpectralWorkspace, v: &VectorField) -> Result<VectorSpectrum> {
    Ok([ws.forward(&v[0])?, ws.forward(&v[1])?, ws.forward(&v[2])?])
}

fn inverse_vector(ws: &mut SpectralWorkspace, v: VectorSpectrum) -> Result<VectorField> {
    let [x, y, z] = v;
    Ok([ws.inverse(x)?, ws.inverse(y)?, ws.inverse(z)?])
}

#[inline]
fn dot(k: [f64; 3], v: [Complex64; 3]) -> Complex64 {
    v[0] * k[0] + v[1] * k[1] + v[2] * k[2]
}

#[inline]
fn at(v: &VectorSpectrum, i: usize) -> [Complex64; 3] {
    [v[0][i], v[1][i], v[2][i]]
}

/// `(delta_ij - k_i k_j / |k|^2) v_j` for one mode; identity at `k = 0`.
#[inline]
pub fn project_mode(k: [f64; 3], v: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    if k2 == 0.0 {
        return v;
    }
    let c = dot(k, v) / k2;
    [v[0] - c * k[0], v[1] - c * k[1], v[2] - c * k[2]]
}

fn map_modes(
    ws: &SpectralWorkspace,
    v: &VectorSpectrum,
    f: impl Fn([f64; 3], [Complex64; 3]) -> [Complex64; 3],
) -> VectorSpectrum {
    let len = ws.len();
    let mut out: VectorSpectrum = core::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); len]);
    for (i, &k) in ws.k_vectors().iter().enumerate() {
        let r = f(k, at(v, i));
        for c in 0..3 {
            out[c][i] = r[c];
        }
    }
    out
}

fn check_field(ws: &SpectralWorkspace, v: &VectorField) -> Result<()> {
    for g in v {
        ws.check_len(g.len())?;
    }
    Ok(())
}

/// Spectral divergence.
pub fn div(ws: &mut SpectralWorkspace, v: &VectorField) -> Result<Vec<f64>> {
    check_field(ws, v)?;
    let s = forward_vector(ws, v)?;
    let out = (0..ws.len()).map(|i| Complex64::i() * dot(ws.k_vector(i), at(&s, i))).collect();
    ws.inverse(out)
}

/// Spectral gradient of a scalar grid.
pub fn gradient(ws: &mut SpectralWorkspace, f: &[f64]) -> Result<VectorField> {
    let s = ws.forward(f)?;
    let spec: VectorSpectrum =
        core::array::from_fn(|c| (0..ws.len()).map(|i| Complex64::i() * ws.k_vector(i)[c] * s[i]).collect());
    inverse_vector(ws, spec)
}

/// Spectral curl.
pub fn curl(ws: &mut SpectralWorkspace, v: &VectorField) -> Result<VectorField> {
    check_field(ws, v)?;
    let s = forward_vector(ws, v)?;
    let spec = map_modes(ws, &s, |k, a| {
        let i = Complex64::i();
        [
            i * (a[2] * k[1] - a[1] * k[2]),
            i * (a[0] * k[2] - a[2] * k[0]),
            i * (a[1] * k[0] - a[0] * k[1]),
        ]
    });
    inverse_vector(ws, spec)
}

/// Transverse (divergence-free) part; the `k = 0` mode passes through.
pub fn transverse_project(ws: &mut SpectralWorkspace, v: &VectorField) -> Result<VectorField> {
    check_field(ws, v)?;
    let s = forward_vector(ws, v)?;
    let spec = map_modes(ws, &s, project_mode);
    inverse_vector(ws, spec)
}

/// Longitudinal (curl-free, zero-mean) part: `v - transverse_project(v) - mean`.
pub fn longitudinal_part(ws: &mut SpectralWorkspace, v: &VectorField) -> Result<VectorField> {
    check_field(ws, v)?;
    let s = forward_vector(ws, v)?;
    let spec = map_modes(ws, &s, |k, a| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if k2 == 0.0 {
            return [Complex64::new(0.0, 0.0); 3];
        }
        let c = dot(k, a) / k2;
        [c * k[0], c * k[1], c * k[2]]
    });
    inverse_vector(ws, spec)
}

/// `lap A - grad div A` in Fourier space: `-|k|^2 A + k (k.A)`.
fn curl_curl_spectrum(ws: &SpectralWorkspace, a: &VectorSpectrum) -> VectorSpectrum {
    map_modes(ws, a, mode_momentum_rate)
}

/// The `A'` part of the flow: `pi` (canonical) or its transverse part
/// (gauge-fixed).
pub fn potential_rate(ws: &mut SpectralWorkspace, pi: &VectorField, kind: FormulationKind) -> Result<VectorField> {
    check_field(ws, pi)?;
    match kind {
        FormulationKind::Canonical => Ok(pi.clone()),
        FormulationKind::GaugeFixed => {
            let pi_hat = forward_vector(ws, pi)?;
            inverse_vector(ws, spectral_potential_rate(ws, &pi_hat, kind))
        }
    }
}

/// The `pi'` part of the flow, `lap A - grad div A`, shared by both
/// formulations.
pub fn momentum_rate(ws: &mut SpectralWorkspace, a: &VectorField) -> Result<VectorField> {
    check_field(ws, a)?;
    let a_hat = forward_vector(ws, a)?;
    inverse_vector(ws, spectral_momentum_rate(ws, &a_hat))
}

/// [`potential_rate`] on Fourier coefficients.
pub fn spectral_potential_rate(ws: &SpectralWorkspace, pi_hat: &VectorSpectrum, kind: FormulationKind) -> VectorSpectrum {
    match kind {
        FormulationKind::Canonical => pi_hat.clone(),
        FormulationKind::GaugeFixed => map_modes(ws, pi_hat, project_mode),
    }
}

/// [`momentum_rate`] on Fourier coefficients.
pub fn spectral_momentum_rate(ws: &SpectralWorkspace, a_hat: &VectorSpectrum) -> VectorSpectrum {
    curl_curl_spectrum(ws, a_hat)
}

/// `(A', pi')` of a single mode.
#[inline]
pub fn mode_rate(
    k: [f64; 3],
    kind: FormulationKind,
    a: [Complex64; 3],
    pi: [Complex64; 3],
) -> ([Complex64; 3], [Complex64; 3]) {
    let da = match kind {
        FormulationKind::Canonical => pi,
        FormulationKind::GaugeFixed => project_mode(k, pi),
    };
    (da, mode_momentum_rate(k, a))
}

#[inline]
fn mode_momentum_rate(k: [f64; 3], a: [Complex64; 3]) -> [Complex64; 3] {
    let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let ka = dot(k, a);
    [ka * k[0] - a[0] * k2, ka * k[1] - a[1] * k2, ka * k[2] - a[2] * k2]
}

/// Both halves of a state in Fourier space. The flows are linear with
/// real, even multipliers, so they can be stepped entirely on coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpectrum {
    pub a: VectorSpectrum,
    pub pi: VectorSpectrum,
}

impl FieldSpectrum {
    pub fn from_state(ws: &mut SpectralWorkspace, s: &FieldState) -> Result<Self> {
        check_workspace(ws, s)?;
        Ok(Self {
            a: forward_vector(ws, &s.a)?,
            pi: forward_vector(ws, &s.pi)?,
        })
    }

    pub fn to_state(&self, ws: &mut SpectralWorkspace) -> Result<FieldState> {
        let a = inverse_vector(ws, self.a.clone())?;
        let pi = inverse_vector(ws, self.pi.clone())?;
        FieldState::new(a, pi, ws.grid_n(), ws.length())
    }

    /// `self + scale * (da, dpi)`.
    pub fn add_scaled(&self, scale: f64, da: &VectorSpectrum, dpi: &VectorSpectrum) -> Self {
        let step = |base: &VectorSpectrum, inc: &VectorSpectrum| -> VectorSpectrum {
            core::array::from_fn(|c| base[c].iter().zip(&inc[c]).map(|(x, d)| x + d * scale).collect())
        };
        Self {
            a: step(&self.a, da),
            pi: step(&self.pi, dpi),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.iter().chain(self.pi.iter()).all(|g| g.iter().all(|z| z.re.is_finite() && z.im.is_finite()))
    }

    /// Transverse projection of both halves.
    pub fn project(&self, ws: &SpectralWorkspace) -> Self {
        Self {
            a: map_modes(ws, &self.a, project_mode),
            pi: map_modes(ws, &self.pi, project_mode),
        }
    }
}

pub fn canonical_rhs(ws: &mut SpectralWorkspace, s: &FieldState) -> Result<(VectorField, VectorField)> {
    rhs(ws, s, FormulationKind::Canonical)
}

pub fn gauge_fixed_rhs(ws: &mut SpectralWorkspace, s: &FieldState) -> Result<(VectorField, VectorField)> {
    rhs(ws, s, FormulationKind::GaugeFixed)
}

pub fn rhs(ws: &mut SpectralWorkspace, s: &FieldState, kind: FormulationKind) -> Result<(VectorField, VectorField)> {
    check_workspace(ws, s)?;
    let dpi = momentum_rate(ws, &s.a)?;
    let da = potential_rate(ws, &s.pi, kind)?;
    Ok((da, dpi))
}

/// Energy, constraint norms and longitudinal norms from one pair of spectra.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldDiagnostics {
    pub energy: f64,
    pub norm_div_a: f64,
    pub norm_div_pi: f64,
    pub norm_a_l: f64,
    pub norm_pi_l: f64,
}

pub fn diagnostics(ws: &mut SpectralWorkspace, s: &FieldState) -> Result<FieldDiagnostics> {
    let spectrum = FieldSpectrum::from_state(ws, s)?;
    Ok(spectral_diagnostics(ws, &spectrum))
}

/// [`diagnostics`] from Fourier coefficients, by Parseval.
pub fn spectral_diagnostics(ws: &SpectralWorkspace, s: &FieldSpectrum) -> FieldDiagnostics {
    let mut sums = [0.0_f64; 6];
    for (i, (&k, &k2)) in ws.k_vectors().iter().zip(ws.k_squared()).enumerate() {
        let (a, p) = (at(&s.a, i), at(&s.pi, i));
        let ka = dot(k, a).norm_sqr();
        let kp = dot(k, p).norm_sqr();
        let a2: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        let p2: f64 = p.iter().map(|c| c.norm_sqr()).sum();
        sums[0] += p2;
        sums[1] += k2 * a2 - ka;
        sums[2] += ka;
        sums[3] += kp;
        if k2 > 0.0 {
            sums[4] += ka / k2;
            sums[5] += kp / k2;
        }
    }
    let w = ws.cell_volume() / ws.len() as f64;
    FieldDiagnostics {
        energy: 0.5 * w * (sums[0] + sums[1].max(0.0)),
        norm_div_a: (w * sums[2]).sqrt(),
        norm_div_pi: (w * sums[3]).sqrt(),
        norm_a_l: (w * sums[4]).sqrt(),
        norm_pi_l: (w * sums[5]).sqrt(),
    }
}

/// L2 norms of `div A` and `div pi`.
pub fn constraint_norms(ws: &mut SpectralWorkspace, s: &FieldState) -> Result<(f64, f64)> {
    let d = diagnostics(ws, s)?;
    Ok((d.norm_div_a, d.norm_div_pi))
}

/// `1/2 int (pi.pi + |curl A|^2)`.
pub fn energy(ws: &mut SpectralWorkspace, s: &FieldState) -> Result<f64> {
    Ok(diagnostics(ws, s)?.energy)
}

/// L2 norms of the longitudinal parts of `A` and `pi`.
pub fn longitudinal_norms(ws: &mut SpectralWorkspace, s: &FieldState) -> Result<(f64, f64)> {
    let d = diagnostics(ws, s)?;
    Ok((d.norm_a_l, d.norm_pi_l))
}

/// Replaces barred data by its transverse part in both `A` and `pi`.
pub fn correct_initial_data(ws: &mut SpectralWorkspace, barred: &FieldState) -> Result<FieldState> {
    check_workspace(ws, barred)?;
    let a = transverse_project(ws, &barred.a)?;
    let pi = transverse_project(ws, &barred.pi)?;
    FieldState::new(a, pi, barred.grid_n, barred.domain_length)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheck {
    pub passed: bool,
    /// Largest `|K_ij(k) - (delta_ij - k_i k_j / |k|^2)|` over nonzero modes.
    pub max_deviation: f64,
    pub max_trace_defect: f64,
    pub max_longitudinal_residual: f64,
    pub modes_checked: usize,
}

/// Measures the bracket kernel `[A_i(x), pi^j(y)]` of the gauge-fixed
/// formulation on the grid: the projector is applied to a point source in
/// each direction and the result is compared mode by mode against
/// `delta_ij - k_i k_j / |k|^2`.
pub fn dirac_kernel_check(ws: &mut SpectralWorkspace, tol: f64) -> Result<KernelCheck> {
    let len = ws.len();
    let mut responses: Vec<VectorSpectrum> = Vec::with_capacity(3);
    for j in 0..3 {
        let mut source: VectorField = core::array::from_fn(|_| vec![0.0; len]);
        source[j][0] = 1.0;
        let projected = transverse_project(ws, &source)?;
        responses.push(forward_vector(ws, &projected)?);
    }
    let mut max_deviation = 0.0_f64;
    let mut max_trace_defect = 0.0_f64;
    let mut max_longitudinal_residual = 0.0_f64;
    let mut modes_checked = 0;
    for idx in 0..len {
        let k2 = ws.k_squared()[idx];
        if k2 == 0.0 {
            continue;
        }
        modes_checked += 1;
        let k = ws.k_vector(idx);
        let mut trace = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            for i in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 } - k[i] * k[j] / k2;
                max_deviation = max_deviation.max((responses[j][i][idx] - expected).norm());
            }
            trace += responses[j][j][idx];
        }
        max_trace_defect = max_trace_defect.max((trace - 2.0).norm());
        let kn = k2.sqrt();
        let along: [Complex64; 3] = core::array::from_fn(|c| Complex64::new(k[c] / kn, 0.0));
        let residual = project_mode(k, along).iter().map(|c| c.norm()).fold(0.0, f64::max);
        max_longitudinal_residual = max_longitudinal_residual.max(residual);
    }
    Ok(KernelCheck {
        passed: max_deviation <= tol && max_trace_defect <= tol && max_longitudinal_residual <= tol,
        max_deviation,
        max_trace_defect,
        max_longitudinal_residual,
        modes_checked,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlaneWaveKind {
    Transverse,
    /// Adds `pi += grad chi` with `chi = strength * sin(2 pi x / L)`.
    LongitudinalContaminated { strength: f64 },
}

/// Phase `k.x` at a grid point, reduced exactly in integer arithmetic.
fn mode_phase(mode: [i64; 3], n: usize, ix: usize, iy: usize, iz: usize) -> f64 {
    let n_i = n as i64;
    let m = (mode[0] * ix as i64 + mode[1] * iy as i64 + mode[2] * iz as i64).rem_euclid(n_i);
    2.0 * PI * m as f64 / n as f64
}

fn check_plane_wave(mode: [i64; 3], polarization: [f64; 3], transverse: bool) -> Result<()> {
    if mode == [0, 0, 0] {
        return Err(Error::InvalidParameter("plane-wave mode must be nonzero".into()));
    }
    let e_norm = polarization.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (e_norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(alloc::format!("polarization must be a unit vector, |e| = {e_norm}")));
    }
    if transverse {
        let m_norm = mode.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
        let e_dot_m: f64 = polarization.iter().zip(mode).map(|(e, m)| e * m as f64).sum();
        if e_dot_m.abs() > 1e-12 * m_norm {
            return Err(Error::NonTransversePolarization(e_dot_m / m_norm));
        }
    }
    Ok(())
}

fn plane_wave_grid(n: usize, mode: [i64; 3], f: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; n * n * n];
    for ix in 0..n {
        for iy in 0..n {
            for iz in 0..n {
                out[(ix * n + iy) * n + iz] = f(mode_phase(mode, n, ix, iy, iz));
            }
        }
    }
    out
}

/// `A = amplitude * e * cos(k.x)` with `k = 2 pi m / L`, `pi = 0`, plus the
/// optional longitudinal momentum contamination.
pub fn plane_wave_initial_data(
    grid_n: usize,
    domain_length: f64,
    mode: [i64; 3],
    polarization: [f64; 3],
    amplitude: f64,
    kind: PlaneWaveKind,
) -> Result<FieldState> {
    check_plane_wave(mode, polarization, kind == PlaneWaveKind::Transverse)?;
    let profile = plane_wave_grid(grid_n, mode, |phase| phase.cos());
    let a: VectorField = core::array::from_fn(|c| profile.iter().map(|x| amplitude * polarization[c] * x).collect());
    let mut pi: VectorField = core::array::from_fn(|_| vec![0.0; profile.len()]);
    if let PlaneWaveKind::LongitudinalContaminated { strength } = kind {
        let k = 2.0 * PI / domain_length;
        pi[0] = plane_wave_grid(grid_n, [1, 0, 0], |phase| strength * k * phase.cos());
    }
    FieldState::new(a, pi, grid_n, domain_length)
}

/// Exact transverse solution `A = a e cos(|k| t) cos(k.x)`,
/// `pi = -a e |k| sin(|k| t) cos(k.x)`.
pub fn exact_plane_wave(
    grid_n: usize,
    domain_length: f64,
    mode: [i64; 3],
    polarization: [f64; 3],
    amplitude: f64,
    t: f64,
) -> Result<FieldState> {
    check_plane_wave(mode, polarization, true)?;
    let k_norm = 2.0 * PI / domain_length * mode.iter().map(|&m| (m * m) as f64).sum::<f64>().sqrt();
    let profile = plane_wave_grid(grid_n, mode, |phase| phase.cos());
    let (ca, cp) = (amplitude * (k_norm * t).cos(), -amplitude * k_norm * (k_norm * t).sin());
    let a: VectorField = core::array::from_fn(|c| profile.iter().map(|x| ca * polarization[c] * x).collect());
    let pi: VectorField = core::array::from_fn(|c| profile.iter().map(|x| cp * polarization[c] * x).collect());
    FieldState::new(a, pi, grid_n, domain_length)
}

/// Band-limited random state: every mode with `|m_i| <= max_mode` on all
/// axes gets a seeded random complex amplitude with Gaussian roll-off; the
/// real part of the synthesized field is kept.
pub fn random_smooth_state(ws: &mut SpectralWorkspace, seed: u64, max_mode: usize) -> Result<FieldState> {
    let n = ws.grid_n();
    if 2 * max_mode >= n {
        return Err(Error::InvalidParameter(alloc::format!(
            "max_mode {max_mode} must stay below the Nyquist index {}",
            n / 2
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = ws.len();
    let width = (max_mode.max(1) * max_mode.max(1)) as f64;
    let mut components: Vec<Vec<f64>> = Vec::with_capacity(6);
    for _ in 0..6 {
        let mut spec = vec![Complex64::new(0.0, 0.0); len];
        for (idx, slot) in spec.iter_mut().enumerate() {
            let m = [mode_number(idx / (n * n), n), mode_number((idx / n) % n, n), mode_number(idx % n, n)];
            if m.iter().any(|&x| x.unsigned_abs() as usize > max_mode) {
                continue;
            }
            let r2 = m.iter().map(|&x| (x * x) as f64).sum::<f64>();
            let envelope = (-r2 / width).exp() * len as f64;
            *slot = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * envelope;
        }
        components.push(ws.inverse(spec)?);
    }
    let mut it = components.into_iter();
    let mut next = || it.next().expect("six components");
    let a = [next(), next(), next()];
    let pi = [next(), next(), next()];
    FieldState::new(a, pi, n, ws.length())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_abs(v: &[f64]) -> f64 {
        v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    #[test]
    fn divergence_of_sine() {
        let (n, l) = (8, 3.0);
        let mut ws = SpectralWorkspace::new(n, l).unwrap();
        let k = 2.0 * PI / l;
        let mut v: VectorField = core::array::from_fn(|_| vec![0.0; n * n * n]);
        v[0] = plane_wave_grid(n, [1, 0, 0], |p| p.sin());
        let d = div(&mut ws, &v).unwrap();
        let expected = plane_wave_grid(n, [1, 0, 0], |p| k * p.cos());
        let err = d.iter().zip(&expected).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-12, "{err}");
        let mean: f64 = d.iter().sum::<f64>() / d.len() as f64;
        assert!(mean.abs() < 1e-15);
    }

    #[test]
    fn constant_field_has_no_divergence_and_no_force() {
        let n = 4;
        let mut ws = SpectralWorkspace::new(n, 1.0).unwrap();
        let c: VectorField = [vec![1.5; 64], vec![-2.0; 64], vec![0.25; 64]];
        assert!(max_abs(&div(&mut ws, &c).unwrap()) < 1e-14);
        let s = FieldState::new(c.clone(), c, n, 1.0).unwrap();
        let (_, dpi) = canonical_rhs(&mut ws, &s).unwrap();
        assert!(dpi.iter().all(|g| max_abs(g) < 1e-13));
    }

    #[test]
    fn transverse_wave_force_is_minus_k_squared_a() {
        let (n, l) = (8, 2.0 * PI);
        let mut ws = SpectralWorkspace::new(n, l).unwrap();
        let s = plane_wave_initial_data(n, l, [1, 2, 0], [0.0, 0.0, 1.0], 0.7, PlaneWaveKind::Transverse).unwrap();
        let (_, dpi) = canonical_rhs(&mut ws, &s).unwrap();
        for c in 0..3 {
            for (f, a) in dpi[c].iter().zip(&s.a()[c]) {
                assert!((f + 5.0 * a).abs() < 1e-12);
            }
        }
        let (da_g, dpi_g) = gauge_fixed_rhs(&mut ws, &s).unwrap();
        let (da_c, _) = canonical_rhs(&mut ws, &s).unwrap();
        for c in 0..3 {
            assert!(max_abs(&da_g[c]) < 1e-14 && max_abs(&da_c[c]) == 0.0);
            assert!(dpi_g[c].iter().zip(&dpi[c]).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn gradient_momentum_is_frozen_in_gauge_fixed_flow() {
        let (n, l) = (8, 2.0);
        let mut ws = SpectralWorkspace::new(n, l).unwrap();
        let chi = plane_wave_grid(n, [1, -1, 2], |p| p.sin() + 0.3 * (2.0 * p).cos());
        let grad = gradient(&mut ws, &chi).unwrap();
        let zero: VectorField = core::array::from_fn(|_| vec![0.0; n * n * n]);
        let s = FieldState::new(zero, grad, n, l).unwrap();
        let (da, _) = gauge_fixed_rhs(&mut ws, &s).unwrap();
        assert!(da.iter().all(|g| max_abs(g) < 1e-12));
    }

    #[test]
    fn div_of_curl_and_projector_algebra() {
        let mut ws = SpectralWorkspace::new(8, 2.0).unwrap();
        let s = random_smooth_state(&mut ws, 11, 3).unwrap();
        let c = curl(&mut ws, s.a()).unwrap();
        assert!(max_abs(&div(&mut ws, &c).unwrap()) < 1e-12 * (1.0 + s.max_abs()));
        let p = transverse_project(&mut ws, s.pi()).unwrap();
        let pp = transverse_project(&mut ws, &p).unwrap();
        for comp in 0..3 {
            assert!(p[comp].iter().zip(&pp[comp]).all(|(x, y)| (x - y).abs() < 1e-12));
        }
        assert!(max_abs(&div(&mut ws, &p).unwrap()) < 1e-12 * (1.0 + s.max_abs()));
        let cp = transverse_project(&mut ws, &c).unwrap();
        for comp in 0..3 {
            assert!(cp[comp].iter().zip(&c[comp]).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn energy_of_cosine_mode() {
        let (n, l) = (8, 2.0);
        let mut ws = SpectralWorkspace::new(n, l).unwrap();
        let a = 0.8;
        let s = plane_wave_initial_data(n, l, [1, 0, 0], [0.0, 1.0, 0.0], a, PlaneWaveKind::Transverse).unwrap();
        let k = 2.0 * PI / l;
        let e = energy(&mut ws, &s).unwrap();
        assert!((e - 0.25 * a * a * k * k * l * l * l).abs() < 1e-12 * e);
        assert_eq!(energy(&mut ws, &FieldState::zeros(n, l).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn contaminated_divergence_norm() {
        let (n, l) = (8, 2.0);
        let mut ws = SpectralWorkspace::new(n, l).unwrap();
        let s = plane_wave_initial_data(
            n,
            l,
            [0, 1, 0],
            [1.0, 0.0, 0.0],
            0.5,
            PlaneWaveKind::LongitudinalContaminated { strength: 1.0 },
        )
        .unwrap();
        let (div_a, div_pi) = constraint_norms(&mut ws, &s).unwrap();
        let k = 2.0 * PI / l;
        let sin_norm = (l * l * l / 2.0).sqrt();
        assert!(div_a < 1e-12);
        assert!((div_pi - k * k * sin_norm).abs() < 1e-12 * div_pi);
        let (a_l, pi_l) = longitudinal_norms(&mut ws, &s).unwrap();
        assert!(a_l < 1e-12);
        assert!((pi_l - k * sin_norm).abs() < 1e-12 * pi_l);
    }

    #[test]
    fn transverse_polarization_is_enforced() {
        let err = plane_wave_initial_data(8, 1.0, [1, 0, 0], [1.0, 0.0, 0.0], 1.0, PlaneWaveKind::Transverse);
        assert!(matches!(err, Err(Error::NonTransversePolarization(_))));
        let zero = plane_wave_initial_data(8, 1.0, [1, 0, 0], [0.0, 1.0, 0.0], 0.0, PlaneWaveKind::Transverse).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn kernel_check_on_small_grid() {
        let mut ws = SpectralWorkspace::new(6, 2.0 * PI).unwrap();
        let report = dirac_kernel_check(&mut ws, 1e-12).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.modes_checked > 0);
    }

    #[test]
    fn initial_data_correction() {
        let mut ws = SpectralWorkspace::new(8, 2.0).unwrap();
        let barred = random_smooth_state(&mut ws, 5, 3).unwrap();
        let fixed = correct_initial_data(&mut ws, &barred).unwrap();
        let (da, dp) = constraint_norms(&mut ws, &fixed).unwrap();
        assert!(da < 1e-11 && dp < 1e-11, "{da} {dp}");
        let twice = correct_initial_data(&mut ws, &fixed).unwrap();
        assert!(twice.max_abs_diff(&fixed) < 1e-12);
    }

    #[test]
    fn translation_leaves_constraint_norms_unchanged() {
        let n = 8;
        let mut ws = SpectralWorkspace::new(n, 2.0).unwrap();
        let s = random_smooth_state(&mut ws, 3, 3).unwrap();
        let shift = |g: &Vec<f64>| -> Vec<f64> {
            (0..g.len())
                .map(|i| {
                    let (ix, rest) = (i / (n * n), i % (n * n));
                    g[((ix + 3) % n) * n * n + rest]
                })
                .collect()
        };
        let (a, pi) = s.clone().into_parts();
        let moved = FieldState::new(
            [shift(&a[0]), shift(&a[1]), shift(&a[2])],
            [shift(&pi[0]), shift(&pi[1]), shift(&pi[2])],
            n,
            2.0,
        )
        .unwrap();
        let before = constraint_norms(&mut ws, &s).unwrap();
        let after = constraint_norms(&mut ws, &moved).unwrap();
        assert!((before.0 - after.0).abs() < 1e-12 * (1.0 + before.0));
        assert!((before.1 - after.1).abs() < 1e-12 * (1.0 + before.1));
    }

    #[test]
    fn workspace_mismatch_is_rejected() {
        let mut ws = SpectralWorkspace::new(4, 1.0).unwrap();
        let s = FieldState::zeros(6, 1.0).unwrap();
        assert!(matches!(canonical_rhs(&mut ws, &s), Err(Error::GridMismatch { expected: 4, found: 6 })));
    }
}
