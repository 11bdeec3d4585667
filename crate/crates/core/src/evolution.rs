//! Time integration: RK4 and kick-drift-kick Stormer-Verlet for the Maxwell
//! field flows, RK4 for finite-dimensional Hamiltonian flows, with
//! per-step diagnostics and optional re-projection onto the constraint
//! surface.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::constraint::{extended_flow, ConstraintSet};
use crate::maxwell::{
    check_workspace, mode_rate, spectral_diagnostics, FieldSpectrum, FieldState, FormulationKind,
};
use crate::phase::{hamiltonian_flow, HamiltonianSystem, PhaseVector};
use crate::spectral::SpectralWorkspace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepperKind {
    Rk4,
    /// Kick-drift-kick; needs `A'` to depend on `pi` only and `pi'` on `A`
    /// only, which holds for both Maxwell formulations.
    StormerVerlet,
}

impl StepperKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Rk4 => "rk4",
            Self::StormerVerlet => "stormer_verlet",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "rk4" => Some(Self::Rk4),
            "stormer_verlet" | "stormer-verlet" | "verlet" => Some(Self::StormerVerlet),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: f64,
    pub norm_div_a: f64,
    pub norm_div_pi: f64,
    pub norm_a_l: f64,
    pub norm_pi_l: f64,
    /// L2 distance of `A` from a reference solution, when one is given.
    pub l2_error: Option<f64>,
}

impl DiagnosticsRow {
    fn is_finite(&self) -> bool {
        [self.t, self.energy, self.norm_div_a, self.norm_div_pi, self.norm_a_l, self.norm_pi_l]
            .iter()
            .chain(self.l2_error.iter())
            .all(|x| x.is_finite())
    }
}

/// Rows with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiagnosticsSeries {
    rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: DiagnosticsRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(Error::InvalidParameter(alloc::format!(
                    "diagnostics time {} does not follow {}",
                    row.t,
                    last.t
                )));
            }
        }
        if !row.is_finite() {
            return Err(Error::NonFinite("diagnostics row"));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&DiagnosticsRow> {
        self.rows.last()
    }

    pub fn column(&self, f: impl Fn(&DiagnosticsRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

/// Grids above this size record diagnostics every 10 steps by default.
pub const DENSE_DIAGNOSTICS_MAX_GRID: usize = 32;

pub fn default_stride(grid_n: usize) -> usize {
    if grid_n <= DENSE_DIAGNOSTICS_MAX_GRID {
        1
    } else {
        10
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    pub formulation: FormulationKind,
    pub stepper: StepperKind,
    pub dt: f64,
    pub t_end: f64,
    /// Apply the transverse projection every this many steps.
    pub reproject_every: Option<usize>,
    /// Diagnostics stride in steps; `None` picks [`default_stride`].
    pub stride: Option<usize>,
}

impl EvolveOptions {
    pub fn new(formulation: FormulationKind, stepper: StepperKind, dt: f64, t_end: f64) -> Self {
        Self {
            formulation,
            stepper,
            dt,
            t_end,
            reproject_every: None,
            stride: None,
        }
    }

    /// Step count `round(t_end / dt)` (at least 1); the step actually taken
    /// is `t_end / steps`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "t_end must be at least dt, got t_end = {} and dt = {}",
                self.t_end,
                self.dt
            )));
        }
        if self.reproject_every == Some(0) || self.stride == Some(0) {
            return Err(Error::InvalidParameter("reprojection interval and stride must be positive".into()));
        }
        Ok(((self.t_end / self.dt).round() as usize).max(1))
    }
}

pub type ReferenceSolution<'a> = &'a dyn Fn(f64) -> Result<FieldState>;

#[derive(Debug, Clone)]
pub struct Evolution {
    pub series: DiagnosticsSeries,
    pub final_state: FieldState,
}

fn row_for(
    ws: &mut SpectralWorkspace,
    s: &FieldSpectrum,
    t: f64,
    reference: Option<ReferenceSolution<'_>>,
) -> Result<DiagnosticsRow> {
    let d = spectral_diagnostics(ws, s);
    let l2_error = match reference {
        Some(f) => {
            let exact = f(t)?;
            check_workspace(ws, &exact)?;
            // Parseval on the difference of the A spectra
            let mut sq = 0.0;
            for c in 0..3 {
                let exact_hat = ws.forward(&exact.a()[c])?;
                sq += s.a[c].iter().zip(&exact_hat).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>();
            }
            Some((sq * ws.cell_volume() / ws.len() as f64).sqrt())
        }
        None => None,
    };
    Ok(DiagnosticsRow {
        t,
        energy: d.energy,
        norm_div_a: d.norm_div_a,
        norm_div_pi: d.norm_div_pi,
        norm_a_l: d.norm_a_l,
        norm_pi_l: d.norm_pi_l,
        l2_error,
    })
}

type Mode = ([Complex64; 3], [Complex64; 3]);

fn shifted(base: &Mode, scale: f64, rate: &Mode) -> Mode {
    (
        core::array::from_fn(|c| base.0[c] + rate.0[c] * scale),
        core::array::from_fn(|c| base.1[c] + rate.1[c] * scale),
    )
}

/// Applies a per-mode update to every mode of `s`.
fn map_state(ws: &SpectralWorkspace, s: &FieldSpectrum, step: impl Fn([f64; 3], Mode) -> Mode) -> FieldSpectrum {
    let mut out = s.clone();
    for (i, &k) in ws.k_vectors().iter().enumerate() {
        let mode = (
            [s.a[0][i], s.a[1][i], s.a[2][i]],
            [s.pi[0][i], s.pi[1][i], s.pi[2][i]],
        );
        let (a, pi) = step(k, mode);
        for c in 0..3 {
            out.a[c][i] = a[c];
            out.pi[c][i] = pi[c];
        }
    }
    out
}

/// One classical RK4 step on Fourier coefficients. The flows act mode by
/// mode, so the four stages are evaluated per mode.
pub fn rk4_spectral_step(ws: &SpectralWorkspace, s: &FieldSpectrum, kind: FormulationKind, dt: f64) -> FieldSpectrum {
    map_state(ws, s, |k, z| {
        let rate = |m: &Mode| mode_rate(k, kind, m.0, m.1);
        let k1 = rate(&z);
        let k2 = rate(&shifted(&z, 0.5 * dt, &k1));
        let k3 = rate(&shifted(&z, 0.5 * dt, &k2));
        let k4 = rate(&shifted(&z, dt, &k3));
        let sum = |f: fn(&Mode) -> &[Complex64; 3]| -> [Complex64; 3] {
            core::array::from_fn(|c| f(&k1)[c] + f(&k2)[c] * 2.0 + f(&k3)[c] * 2.0 + f(&k4)[c])
        };
        shifted(&z, dt / 6.0, &(sum(|m| &m.0), sum(|m| &m.1)))
    })
}

/// One kick-drift-kick step on Fourier coefficients.
pub fn verlet_spectral_step(
    ws: &SpectralWorkspace,
    s: &FieldSpectrum,
    kind: FormulationKind,
    dt: f64,
) -> FieldSpectrum {
    let zero = [Complex64::new(0.0, 0.0); 3];
    map_state(ws, s, |k, z| {
        let half = shifted(&z, 0.5 * dt, &(zero, mode_rate(k, kind, z.0, z.1).1));
        let moved = shifted(&half, dt, &(mode_rate(k, kind, half.0, half.1).0, zero));
        shifted(&moved, 0.5 * dt, &(zero, mode_rate(k, kind, moved.0, moved.1).1))
    })
}

pub fn rk4_field_step(ws: &mut SpectralWorkspace, s: &FieldState, kind: FormulationKind, dt: f64) -> Result<FieldState> {
    let spectrum = FieldSpectrum::from_state(ws, s)?;
    rk4_spectral_step(ws, &spectrum, kind, dt).to_state(ws)
}

pub fn verlet_field_step(
    ws: &mut SpectralWorkspace,
    s: &FieldState,
    kind: FormulationKind,
    dt: f64,
) -> Result<FieldState> {
    let spectrum = FieldSpectrum::from_state(ws, s)?;
    verlet_spectral_step(ws, &spectrum, kind, dt).to_state(ws)
}

/// Integrates a Maxwell formulation from `initial` to `t_end`.
///
/// The state is carried as Fourier coefficients between the initial and
/// final transforms. A non-finite state aborts with [`Error::Diverged`],
/// carrying the series recorded so far.
pub fn evolve(
    ws: &mut SpectralWorkspace,
    initial: &FieldState,
    options: &EvolveOptions,
    reference: Option<ReferenceSolution<'_>>,
) -> Result<Evolution> {
    check_workspace(ws, initial)?;
    let steps = options.steps()?;
    let dt = options.t_end / steps as f64;
    let stride = options.stride.unwrap_or_else(|| default_stride(initial.grid_n()));
    let mut series = DiagnosticsSeries::new();
    let mut state = FieldSpectrum::from_state(ws, initial)?;
    series.push(row_for(ws, &state, 0.0, reference)?)?;
    let mut last_good = 0.0;
    for step in 1..=steps {
        let t = step as f64 * dt;
        let next = match options.stepper {
            StepperKind::Rk4 => rk4_spectral_step(ws, &state, options.formulation, dt),
            StepperKind::StormerVerlet => verlet_spectral_step(ws, &state, options.formulation, dt),
        };
        if !next.is_finite() {
            return Err(Error::Diverged {
                last_good_time: last_good,
                series: Box::new(series),
            });
        }
        state = match options.reproject_every {
            Some(every) if step % every == 0 => next.project(ws),
            _ => next,
        };
        if step % stride == 0 || step == steps {
            let row = row_for(ws, &state, t, reference)?;
            if !row.is_finite() {
                return Err(Error::Diverged {
                    last_good_time: last_good,
                    series: Box::new(series),
                });
            }
            series.push(row)?;
        }
        last_good = t;
    }
    Ok(Evolution {
        series,
        final_state: state.to_state(ws)?,
    })
}

/// Flow driving a finite-dimensional trajectory.
#[derive(Debug, Clone, Copy)]
pub enum FiniteFlow<'a> {
    /// `z' = J dH`.
    Hamiltonian(&'a HamiltonianSystem),
    /// `z' = J d(H + lambda . C)` with multipliers re-solved at every stage.
    GaugeFixed(&'a HamiltonianSystem, &'a ConstraintSet),
}

impl FiniteFlow<'_> {
    fn system(&self) -> &HamiltonianSystem {
        match self {
            Self::Hamiltonian(s) | Self::GaugeFixed(s, _) => s,
        }
    }

    fn rate(&self, z: &PhaseVector) -> Result<PhaseVector> {
        match self {
            Self::Hamiltonian(s) => hamiltonian_flow(s, z),
            Self::GaugeFixed(s, c) => extended_flow(c, s, z),
        }
    }

    fn constraint_values(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Self::Hamiltonian(_) => Vec::new(),
            Self::GaugeFixed(_, c) => c.values(z),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSample {
    pub t: f64,
    pub z: PhaseVector,
    pub energy: f64,
    pub constraints: Vec<f64>,
}

pub fn rk4_phase_step(flow: &FiniteFlow<'_>, z: &PhaseVector, dt: f64) -> Result<PhaseVector> {
    let k1 = flow.rate(z)?;
    let k2 = flow.rate(&z.add_scaled(0.5 * dt, &k1)?)?;
    let k3 = flow.rate(&z.add_scaled(0.5 * dt, &k2)?)?;
    let k4 = flow.rate(&z.add_scaled(dt, &k3)?)?;
    let mut out = z.clone();
    for (k, w) in [(&k1, 1.0), (&k2, 2.0), (&k3, 2.0), (&k4, 1.0)] {
        out = out.add_scaled(w * dt / 6.0, k)?;
    }
    Ok(out)
}

/// RK4 trajectory with the Hamiltonian and constraint values at every step.
pub fn evolve_finite(flow: FiniteFlow<'_>, z0: &PhaseVector, dt: f64, t_end: f64) -> Result<Vec<FiniteSample>> {
    let steps = EvolveOptions::new(FormulationKind::Canonical, StepperKind::Rk4, dt, t_end).steps()?;
    if z0.dim() != 2 * flow.system().n_dof() {
        return Err(Error::DimensionMismatch {
            expected: 2 * flow.system().n_dof(),
            found: z0.dim(),
        });
    }
    let h = t_end / steps as f64;
    let sample = |t: f64, z: PhaseVector| FiniteSample {
        t,
        energy: flow.system().energy(&z),
        constraints: flow.constraint_values(&z),
        z,
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(sample(0.0, z0.clone()));
    let mut z = z0.clone();
    for step in 1..=steps {
        let last_good_time = (step - 1) as f64 * h;
        z = match rk4_phase_step(&flow, &z, h) {
            Ok(next) => next,
            Err(Error::NonFinite(_)) => return Err(Error::TrajectoryDiverged { last_good_time }),
            Err(e) => return Err(e),
        };
        out.push(sample(step as f64 * h, z.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maxwell::{exact_plane_wave, plane_wave_initial_data, PlaneWaveKind};
    use crate::toys;
    use core::f64::consts::PI;

    #[test]
    fn zero_state_stays_zero() {
        let mut ws = SpectralWorkspace::new(4, 1.0).unwrap();
        let s = FieldState::zeros(4, 1.0).unwrap();
        let opts = EvolveOptions::new(FormulationKind::GaugeFixed, StepperKind::Rk4, 0.1, 0.5);
        let run = evolve(&mut ws, &s, &opts, None).unwrap();
        assert_eq!(run.series.len(), 6);
        for r in run.series.rows() {
            assert_eq!([r.energy, r.norm_div_a, r.norm_div_pi, r.norm_a_l, r.norm_pi_l], [0.0; 5]);
        }
    }

    #[test]
    fn plane_wave_follows_exact_solution() {
        let (n, l) = (8, 2.0 * PI);
        let mut ws = SpectralWorkspace::new(n, l).unwrap();
        let (m, e) = ([1, 0, 0], [0.0, 1.0, 0.0]);
        let s = plane_wave_initial_data(n, l, m, e, 1.0, PlaneWaveKind::Transverse).unwrap();
        let exact = |t: f64| exact_plane_wave(n, l, m, e, 1.0, t);
        let period = 2.0 * PI;
        for stepper in [StepperKind::Rk4, StepperKind::StormerVerlet] {
            let opts = EvolveOptions::new(FormulationKind::GaugeFixed, stepper, period / 400.0, period);
            let run = evolve(&mut ws, &s, &opts, Some(&exact)).unwrap();
            let err = run.series.last().unwrap().l2_error.unwrap();
            assert!(err < 1e-3, "{stepper:?}: {err}");
        }
    }

    #[test]
    fn spectral_step_matches_real_space_rk4() {
        use crate::maxwell::{random_smooth_state, rhs};
        let mut ws = SpectralWorkspace::new(6, 2.5).unwrap();
        let s = random_smooth_state(&mut ws, 11, 2).unwrap();
        let dt = 0.05;
        for kind in [FormulationKind::Canonical, FormulationKind::GaugeFixed] {
            let (a1, p1) = rhs(&mut ws, &s, kind).unwrap();
            let s2 = s.add_scaled(0.5 * dt, &a1, &p1);
            let (a2, p2) = rhs(&mut ws, &s2, kind).unwrap();
            let s3 = s.add_scaled(0.5 * dt, &a2, &p2);
            let (a3, p3) = rhs(&mut ws, &s3, kind).unwrap();
            let s4 = s.add_scaled(dt, &a3, &p3);
            let (a4, p4) = rhs(&mut ws, &s4, kind).unwrap();
            let mut expected = s.clone();
            for (w, da, dp) in [(1.0, &a1, &p1), (2.0, &a2, &p2), (2.0, &a3, &p3), (1.0, &a4, &p4)] {
                expected = expected.add_scaled(w * dt / 6.0, da, dp);
            }
            let got = rk4_field_step(&mut ws, &s, kind, dt).unwrap();
            assert!(got.max_abs_diff(&expected) < 1e-12 * s.max_abs(), "{kind:?}");
        }
    }

    #[test]
    fn invalid_step_parameters() {
        let mut ws = SpectralWorkspace::new(4, 1.0).unwrap();
        let s = FieldState::zeros(4, 1.0).unwrap();
        for (dt, t_end) in [(0.0, 1.0), (0.5, 0.1), (f64::NAN, 1.0)] {
            let opts = EvolveOptions::new(FormulationKind::Canonical, StepperKind::Rk4, dt, t_end);
            assert!(matches!(evolve(&mut ws, &s, &opts, None), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn diverging_run_reports_last_good_time() {
        let (n, l) = (8, 2.0 * PI);
        let mut ws = SpectralWorkspace::new(n, l).unwrap();
        let s = plane_wave_initial_data(n, l, [3, 0, 0], [0.0, 1.0, 0.0], 1.0, PlaneWaveKind::Transverse).unwrap();
        // far beyond the RK4 stability limit for |k| = 3
        let opts = EvolveOptions::new(FormulationKind::Canonical, StepperKind::Rk4, 2.0, 4000.0);
        match evolve(&mut ws, &s, &opts, None) {
            Err(Error::Diverged { last_good_time, series }) => {
                assert!(last_good_time > 0.0);
                assert!(!series.is_empty());
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn series_rejects_non_increasing_time() {
        let mut s = DiagnosticsSeries::new();
        s.push(DiagnosticsRow::default()).unwrap();
        assert!(s.push(DiagnosticsRow::default()).is_err());
    }

    #[test]
    fn oscillator_energy_is_conserved() {
        let sys = toys::harmonic_oscillator();
        let z0 = PhaseVector::new(alloc::vec![1.0, 0.0]).unwrap();
        let traj = evolve_finite(FiniteFlow::Hamiltonian(&sys), &z0, 1e-3, 10.0).unwrap();
        let h0 = traj[0].energy;
        let drift = traj.iter().fold(0.0_f64, |m, s| m.max((s.energy - h0).abs() / h0));
        assert!(drift < 1e-9, "{drift}");
        assert_eq!(traj.len(), 10_001);
    }

    #[test]
    fn equilibrium_is_stationary() {
        let sys = toys::harmonic_oscillator();
        let z0 = PhaseVector::zeros(1);
        let traj = evolve_finite(FiniteFlow::Hamiltonian(&sys), &z0, 0.1, 1.0).unwrap();
        assert!(traj.iter().all(|s| s.z.max_abs() == 0.0));
    }

    #[test]
    fn gauge_fixed_toy_holds_its_constraints() {
        let (sys, set) = toys::coulomb_mode([1.0, 0.5, -0.5], toys::MagneticEnergy::Curl);
        let z0 = PhaseVector::new(alloc::vec![0.0, 1.0, 1.0, 0.3, 0.0, 0.6]).unwrap();
        assert!(set.max_violation(&z0) < 1e-15);
        let traj = evolve_finite(FiniteFlow::GaugeFixed(&sys, &set), &z0, 1e-2, 10.0).unwrap();
        let drift = traj.iter().flat_map(|s| s.constraints.iter()).fold(0.0_f64, |m, c| m.max(c.abs()));
        assert!(drift < 1e-10, "{drift}");
    }
}
