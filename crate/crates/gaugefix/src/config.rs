//! Run configuration for the `evolve` command.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use gaugefix_core::evolution::{EvolveOptions, StepperKind};
use gaugefix_core::maxwell::{
    correct_initial_data, exact_plane_wave, plane_wave_initial_data, random_smooth_state, FieldState,
    FormulationKind, PlaneWaveKind,
};
use gaugefix_core::spectral::{SpectralWorkspace, MIN_GRID};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Transverse `A = amplitude e cos(k.x)`, `pi = 0`; compared against the
    /// exact solution.
    PlaneWave,
    /// The plane wave plus a longitudinal momentum `contamination * grad sin(2 pi x / L)`.
    ContaminatedPlaneWave,
    /// Seeded band-limited random fields, optionally made transverse.
    RandomSmooth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "canonical")]
    Canonical,
    #[serde(rename = "gauge-fixed")]
    GaugeFixed,
}

impl From<Formulation> for FormulationKind {
    fn from(f: Formulation) -> Self {
        match f {
            Formulation::Canonical => FormulationKind::Canonical,
            Formulation::GaugeFixed => FormulationKind::GaugeFixed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    Rk4,
    StormerVerlet,
}

impl From<Stepper> for StepperKind {
    fn from(s: Stepper) -> Self {
        match s {
            Stepper::Rk4 => StepperKind::Rk4,
            Stepper::StormerVerlet => StepperKind::StormerVerlet,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Diagnostics CSV; standard output when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Snapshot of the final state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_snapshot: Option<PathBuf>,
}

fn default_grid() -> usize {
    32
}

fn default_length() -> f64 {
    2.0 * PI
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_formulation() -> Formulation {
    Formulation::GaugeFixed
}

fn default_stepper() -> Stepper {
    Stepper::Rk4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default = "default_length")]
    pub domain_length: f64,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_formulation")]
    pub formulation: Formulation,
    #[serde(default = "default_stepper")]
    pub stepper: Stepper,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproject_every: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics_stride: Option<usize>,
    /// Integer wave vector `m`, with `k = 2 pi m / L`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<[i64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarization: Option<[f64; 3]>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub contamination: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Highest mode number per axis for `random_smooth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_mode: Option<usize>,
    /// Project random fields onto the constraint surface before evolving.
    #[serde(default)]
    pub project_initial: bool,
    #[serde(default)]
    pub output: Outputs,
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn evolve_options(&self) -> EvolveOptions {
        EvolveOptions {
            formulation: self.formulation.into(),
            stepper: self.stepper.into(),
            dt: self.dt,
            t_end: self.t_end,
            reproject_every: self.reproject_every,
            stride: self.diagnostics_stride,
        }
    }

    /// Checks every field the chosen scenario needs.
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < MIN_GRID {
            return Err(bad(format!("grid_n must be at least {MIN_GRID}, got {}", self.grid_n)));
        }
        if !(self.domain_length > 0.0 && self.domain_length.is_finite()) {
            return Err(bad(format!("domain_length must be positive, got {}", self.domain_length)));
        }
        self.evolve_options().steps().map_err(|e| bad(e.to_string()))?;
        if !self.amplitude.is_finite() || !self.contamination.is_finite() {
            return Err(bad("amplitude and contamination must be finite"));
        }
        match self.scenario {
            Scenario::PlaneWave | Scenario::ContaminatedPlaneWave => {
                let mode = self.mode.ok_or_else(|| bad("plane-wave scenarios need `mode`"))?;
                let e = self.polarization.ok_or_else(|| bad("plane-wave scenarios need `polarization`"))?;
                let nyquist = (self.grid_n / 2) as i64;
                if mode.iter().any(|m| m.abs() >= nyquist) {
                    return Err(bad(format!("mode {mode:?} must stay below the Nyquist index {nyquist}")));
                }
                // every plane-wave scenario starts from transverse A
                plane_wave_initial_data(MIN_GRID, 1.0, mode, e, 1.0, PlaneWaveKind::Transverse)
                    .map_err(|err| bad(err.to_string()))?;
                if self.scenario == Scenario::ContaminatedPlaneWave && self.contamination == 0.0 {
                    return Err(bad("contaminated_plane_wave needs a nonzero `contamination`"));
                }
            }
            Scenario::RandomSmooth => {
                if self.seed.is_none() {
                    return Err(bad("random_smooth needs a `seed`"));
                }
                let max_mode = self.max_mode.ok_or_else(|| bad("random_smooth needs `max_mode`"))?;
                if 2 * max_mode >= self.grid_n {
                    return Err(bad(format!("max_mode {max_mode} must stay below grid_n / 2")));
                }
            }
        }
        Ok(())
    }

    pub fn initial_state(&self, ws: &mut SpectralWorkspace) -> Result<FieldState> {
        self.validate()?;
        let state = match self.scenario {
            Scenario::PlaneWave | Scenario::ContaminatedPlaneWave => {
                let kind = if self.scenario == Scenario::PlaneWave {
                    PlaneWaveKind::Transverse
                } else {
                    PlaneWaveKind::LongitudinalContaminated {
                        strength: self.contamination,
                    }
                };
                plane_wave_initial_data(
                    self.grid_n,
                    self.domain_length,
                    self.mode.expect("validated"),
                    self.polarization.expect("validated"),
                    self.amplitude,
                    kind,
                )?
            }
            Scenario::RandomSmooth => {
                let raw = random_smooth_state(ws, self.seed.expect("validated"), self.max_mode.expect("validated"))?;
                if self.project_initial {
                    correct_initial_data(ws, &raw)?
                } else {
                    raw
                }
            }
        };
        Ok(state)
    }

    /// Exact solution for the transverse plane wave; none otherwise.
    pub fn reference(&self) -> Option<impl Fn(f64) -> gaugefix_core::Result<FieldState> + '_> {
        (self.scenario == Scenario::PlaneWave).then(|| {
            move |t| {
                exact_plane_wave(
                    self.grid_n,
                    self.domain_length,
                    self.mode.expect("validated"),
                    self.polarization.expect("validated"),
                    self.amplitude,
                    t,
                )
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANE_WAVE: &str = r#"{
        "scenario": "plane_wave",
        "grid_n": 16,
        "dt": 0.01,
        "t_end": 1.0,
        "formulation": "gauge-fixed",
        "mode": [1, 0, 0],
        "polarization": [0, 1, 0]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(PLANE_WAVE).unwrap();
        assert_eq!(c.domain_length, 2.0 * PI);
        assert_eq!(c.stepper, Stepper::Rk4);
        assert_eq!(c.amplitude, 1.0);
        c.validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = PLANE_WAVE.replace("\"dt\"", "\"typo\": 1, \"dt\"");
        let err = RunConfig::from_json(&text).unwrap_err();
        assert!(err.to_string().contains("typo"), "{err}");
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::from_json(PLANE_WAVE).unwrap();
        assert_eq!(RunConfig::from_json(&c.to_json().unwrap()).unwrap(), c);
    }

    #[test]
    fn scenario_requirements() {
        let mut c = RunConfig::from_json(PLANE_WAVE).unwrap();
        c.polarization = Some([1.0, 0.0, 0.0]);
        assert!(c.validate().unwrap_err().to_string().contains("transverse"));
        c.polarization = None;
        assert!(c.validate().is_err());
        let mut r = RunConfig::from_json(PLANE_WAVE).unwrap();
        r.scenario = Scenario::RandomSmooth;
        r.max_mode = Some(3);
        assert!(r.validate().unwrap_err().to_string().contains("seed"));
        r.seed = Some(1);
        r.validate().unwrap();
        r.max_mode = Some(8);
        assert!(r.validate().is_err());
        let mut w = RunConfig::from_json(PLANE_WAVE).unwrap();
        w.scenario = Scenario::ContaminatedPlaneWave;
        assert!(w.validate().is_err());
        w.contamination = 0.1;
        w.validate().unwrap();
        w.t_end = 0.001;
        assert!(w.validate().is_err());
    }
}
