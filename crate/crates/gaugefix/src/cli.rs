//! Command-line interface. Each command returns `Ok` on success; the binary
//! maps errors to exit codes through [`HarnessError::exit_code`].

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use gaugefix_core::evolution::{evolve, ReferenceSolution};
use gaugefix_core::maxwell::{correct_initial_data, diagnostics, FieldDiagnostics, FieldState};
use gaugefix_core::spectral::SpectralWorkspace;
use gaugefix_core::symbol::{identity_symbol, maxwell_canonical_symbol, maxwell_gauge_fixed_symbol, AnalysisOptions};
use gaugefix_core::toys::ToyModel;
use gaugefix_core::Error as CoreError;

use crate::config::{Formulation, RunConfig};
use crate::error::{HarnessError, Result};
use crate::report::{analyze_symbol_parallel, constraints_report, SymbolReportJson};
use crate::{fft, series, snapshot};

#[derive(Debug, Parser)]
#[command(name = "gaugefix", version, about = "Gauge-fixed versus canonical Maxwell evolution and Dirac constraint analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormulationArg {
    Canonical,
    GaugeFixed,
    /// 6x6 identity test symbol (`symbol` only).
    Identity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evolve a field configuration and write the diagnostics CSV.
    Evolve {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        /// Overrides the configured formulation.
        #[arg(long, value_enum)]
        formulation: Option<FormulationArg>,
        /// Overrides the configured CSV path.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Classify the principal symbol of a formulation and write a JSON report.
    Symbol {
        #[arg(long, value_enum)]
        formulation: FormulationArg,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Largest imaginary part still counted as real.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random directions on top of the axes and face diagonals.
        #[arg(long, default_value_t = 64)]
        directions: usize,
        #[arg(long, default_value_t = 1e8)]
        cond_bound: f64,
    },
    /// Project a field snapshot onto the constraint surface.
    Project {
        #[arg(value_name = "INPUT")]
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Relative constraint norm the result is checked against (report only).
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run the constraint algorithm on a toy Lagrangian and write a JSON report.
    Constraints {
        /// chain-demo, second-class-demo or regular-demo
        model: String,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
        /// Weak-vanishing tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| HarnessError::io(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| HarnessError::io("<stdout>", e))
        }
    }
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Caps the rayon pool at `GAUGEFIX_THREADS` when set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GAUGEFIX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| HarnessError::Config(format!("GAUGEFIX_THREADS must be a positive integer, got {raw:?}")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve {
            config,
            formulation,
            out,
            seed,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            match formulation {
                Some(FormulationArg::Canonical) => cfg.formulation = Formulation::Canonical,
                Some(FormulationArg::GaugeFixed) => cfg.formulation = Formulation::GaugeFixed,
                Some(FormulationArg::Identity) => {
                    return Err(HarnessError::Config("the identity symbol has no field evolution".into()))
                }
                None => {}
            }
            if seed.is_some() {
                cfg.seed = seed;
            }
            if out.is_some() {
                cfg.output.csv = out;
            }
            run_evolve(&cfg)
        }
        Command::Symbol {
            formulation,
            out,
            tol,
            seed,
            directions,
            cond_bound,
        } => {
            let sym = match formulation {
                FormulationArg::Canonical => maxwell_canonical_symbol(),
                FormulationArg::GaugeFixed => maxwell_gauge_fixed_symbol(),
                FormulationArg::Identity => identity_symbol(6)?,
            };
            let options = AnalysisOptions {
                n_random: directions,
                tol_imag: tol,
                cond_bound,
                seed,
            };
            let report = analyze_symbol_parallel(&sym, &options)?;
            write_output(out.as_deref(), &json_bytes(&SymbolReportJson::new(&sym, &report))?)
        }
        Command::Project { input, out, tol } => {
            let summary = run_project(&input, &out, tol)?;
            println!("{summary}");
            Ok(())
        }
        Command::Constraints { model, out, tol, seed } => {
            let toy = ToyModel::from_name(&model).ok_or_else(|| {
                let known: Vec<_> = ToyModel::ALL.iter().map(|m| m.name()).collect();
                HarnessError::Config(format!("unknown model {model:?}; expected one of {}", known.join(", ")))
            })?;
            let report = constraints_report(toy, tol, seed)?;
            write_output(out.as_deref(), &json_bytes(&report)?)
        }
    }
}

/// Runs a validated configuration. A diverged run still writes the rows
/// recorded before the blow-up.
pub fn run_evolve(cfg: &RunConfig) -> Result<()> {
    cfg.validate()?;
    let mut ws = fft::workspace(cfg.grid_n, cfg.domain_length)?;
    let initial = cfg.initial_state(&mut ws)?;
    let exact = cfg.reference();
    let reference: Option<ReferenceSolution<'_>> = exact.as_ref().map(|f| f as ReferenceSolution<'_>);
    let write_series = |s: &gaugefix_core::evolution::DiagnosticsSeries| -> Result<()> {
        let mut buf = Vec::new();
        series::write_csv(&mut buf, s)?;
        write_output(cfg.output.csv.as_deref(), &buf)
    };
    match evolve(&mut ws, &initial, &cfg.evolve_options(), reference) {
        Ok(run) => {
            write_series(&run.series)?;
            if let Some(path) = &cfg.output.final_snapshot {
                snapshot::write(path, &run.final_state)?;
            }
            Ok(())
        }
        Err(CoreError::Diverged { last_good_time, series }) => {
            write_series(&series)?;
            Err(HarnessError::Core(CoreError::Diverged { last_good_time, series }))
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionSummary {
    pub before: FieldDiagnostics,
    pub after: FieldDiagnostics,
    pub scale_a: f64,
    pub scale_pi: f64,
    pub tol: f64,
}

impl ProjectionSummary {
    pub fn relative_after(&self) -> (f64, f64) {
        (rel(self.after.norm_div_a, self.scale_a), rel(self.after.norm_div_pi, self.scale_pi))
    }

    pub fn within_tolerance(&self) -> bool {
        let (a, p) = self.relative_after();
        a <= self.tol && p <= self.tol
    }
}

fn rel(x: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        x / scale
    } else {
        x
    }
}

impl std::fmt::Display for ProjectionSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "before: norm_divA={:e} norm_divPi={:e}", self.before.norm_div_a, self.before.norm_div_pi)?;
        writeln!(f, "after:  norm_divA={:e} norm_divPi={:e}", self.after.norm_div_a, self.after.norm_div_pi)?;
        let (a, p) = self.relative_after();
        write!(
            f,
            "relative after: divA={a:e} divPi={p:e} ({} tol {:e})",
            if self.within_tolerance() { "within" } else { "ABOVE" },
            self.tol
        )
    }
}

fn l2_scale(ws: &SpectralWorkspace, field: &[Vec<f64>; 3]) -> f64 {
    field.iter().map(|g| ws.l2_norm(g).powi(2)).sum::<f64>().sqrt()
}

/// Reads, projects and writes a snapshot. The projection is exact, so
/// `tol` only grades the result.
pub fn run_project(input: &Path, output: &Path, tol: f64) -> Result<ProjectionSummary> {
    if !(tol >= 0.0) {
        return Err(HarnessError::Config(format!("tol must be non-negative, got {tol}")));
    }
    let state = snapshot::read(input)?;
    let mut ws = fft::workspace(state.grid_n(), state.domain_length()).map_err(|e| HarnessError::Snapshot {
        path: input.to_path_buf(),
        reason: e.to_string(),
    })?;
    let projected: FieldState = correct_initial_data(&mut ws, &state)?;
    let summary = ProjectionSummary {
        before: diagnostics(&mut ws, &state)?,
        after: diagnostics(&mut ws, &projected)?,
        scale_a: l2_scale(&ws, state.a()),
        scale_pi: l2_scale(&ws, state.pi()),
        tol,
    };
    snapshot::write(output, &projected)?;
    Ok(summary)
}
