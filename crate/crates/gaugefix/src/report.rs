//! JSON reports for the `symbol` and `constraints` commands.

use gaugefix_core::constraint::{
    classify_constraints, commutation_matrix, consistency_chain, dirac_bracket, ConstraintClass, ConstraintOrigin,
    ConstraintSet, NewtonSampler, SurfaceSampler,
};
use gaugefix_core::phase::{poisson_bracket, PhaseFunction};
use gaugefix_core::symbol::{
    analyze_direction, assemble_report, check_options, sample_directions, AnalysisOptions, PrincipalSymbol,
    SymbolReport,
};
use gaugefix_core::toys::ToyModel;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

/// Same result as the sequential analysis, with directions spread over the
/// rayon pool.
pub fn analyze_symbol_parallel(sym: &PrincipalSymbol, options: &AnalysisOptions) -> Result<SymbolReport> {
    check_options(options)?;
    let samples = sample_directions(options.n_random, options.seed)
        .into_par_iter()
        .map(|n| analyze_direction(sym, n, options.cond_bound))
        .collect();
    Ok(assemble_report(samples, options.tol_imag))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolSampleJson {
    pub n: [f64; 3],
    pub eigenvalues_re: Vec<f64>,
    pub eigenvalues_im: Vec<f64>,
    /// `null` when the eigenvector matrix is singular.
    pub cond: Option<f64>,
    pub eigenvector_rank: usize,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolReportJson {
    pub symbol: String,
    pub classification: &'static str,
    pub normalized_frequencies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub samples: Vec<SymbolSampleJson>,
}

impl SymbolReportJson {
    pub fn new(symbol: &PrincipalSymbol, report: &SymbolReport) -> Self {
        Self {
            symbol: symbol.label().to_string(),
            classification: report.classification.as_str(),
            normalized_frequencies: report.normalized_frequencies.clone(),
            message: report.message.clone(),
            samples: report
                .samples
                .iter()
                .map(|s| SymbolSampleJson {
                    n: s.n,
                    eigenvalues_re: s.eigenvalues.iter().map(|z| z.re).collect(),
                    eigenvalues_im: s.eigenvalues.iter().map(|z| z.im).collect(),
                    cond: s.condition.is_finite().then_some(s.condition),
                    eigenvector_rank: s.eigenvector_rank,
                    complete: s.complete,
                    failure: s.failure.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainEntry {
    pub label: String,
    pub origin: &'static str,
    /// Gradient at `sample_point`; identifies the constraint independently of
    /// its label.
    pub gradient: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassEntry {
    pub label: String,
    pub class: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketCheck {
    pub f: String,
    pub g: String,
    pub poisson: f64,
    pub dirac: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintsReport {
    pub model: &'static str,
    pub primaries: Vec<String>,
    pub chain: Vec<ChainEntry>,
    pub classification: Vec<ClassEntry>,
    pub sample_point: Vec<f64>,
    /// Brackets of all chain members at `sample_point`.
    pub commutation_matrix: Vec<Vec<f64>>,
    /// Labels of the second-class members the Dirac bracket is built from.
    pub dirac_constraints: Vec<String>,
    pub dirac_bracket_checks: Vec<BracketCheck>,
}

fn origin_name(o: ConstraintOrigin) -> &'static str {
    match o {
        ConstraintOrigin::Primary => "primary",
        ConstraintOrigin::Consistency => "consistency",
        ConstraintOrigin::GaugeFixing => "gauge_fixing",
    }
}

/// The Dirac bracket over the second-class members; the plain Poisson
/// bracket when there are none.
pub fn reduced_bracket(
    f: &PhaseFunction,
    g: &PhaseFunction,
    second_class: &ConstraintSet,
    z: &[f64],
    form: &gaugefix_core::phase::CosymplecticForm,
) -> gaugefix_core::Result<f64> {
    if second_class.is_empty() {
        poisson_bracket(f, g, z, form)
    } else {
        dirac_bracket(f, g, second_class, z, form)
    }
}

/// Runs chain, classification and bracket spot checks on a named toy.
pub fn constraints_report(model: ToyModel, tol_weak: f64, seed: u64) -> Result<ConstraintsReport> {
    let system = model.hamiltonian();
    let form = system.form();
    let primaries = model.primaries();
    let chain = consistency_chain(&system, &primaries, &mut NewtonSampler::new(seed), tol_weak, 8)?;
    let classified = classify_constraints(&chain, &mut NewtonSampler::new(seed.wrapping_add(1)), form, tol_weak)?;
    let point = NewtonSampler::new(seed.wrapping_add(2)).with_count(1).sample(&chain)?.remove(0);
    let d = commutation_matrix(&chain, &point, form)?;
    let second: Vec<_> = classified
        .iter()
        .filter(|c| c.class_label == ConstraintClass::SecondClass)
        .cloned()
        .collect();
    let second = ConstraintSet::new(chain.dim(), second)?;
    let n = system.n_dof();
    let coordinate = |i: usize| {
        let name = if i < n { format!("q{}", i + 1) } else { format!("p{}", i - n + 1) };
        PhaseFunction::coordinate(i, 2 * n, name)
    };
    let mut checks = Vec::new();
    for (i, j) in (0..n).flat_map(|i| [(i, n + i), (n + i, i)]).chain((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))) {
        let (f, g) = (coordinate(i), coordinate(j));
        checks.push(BracketCheck {
            f: f.label().to_string(),
            g: g.label().to_string(),
            poisson: poisson_bracket(&f, &g, &point, form)?,
            dirac: reduced_bracket(&f, &g, &second, &point, form)?,
        });
    }
    Ok(ConstraintsReport {
        model: model.name(),
        primaries: primaries.labels(),
        chain: chain
            .iter()
            .map(|c| ChainEntry {
                label: c.label().to_string(),
                origin: origin_name(c.origin),
                gradient: c.function.gradient(&point),
            })
            .collect(),
        classification: classified
            .iter()
            .map(|c| ClassEntry {
                label: c.label().to_string(),
                class: c.class_label.as_str(),
            })
            .collect(),
        sample_point: point.as_slice().to_vec(),
        commutation_matrix: d.entries().row_iter().map(|r| r.iter().copied().collect()).collect(),
        dirac_constraints: second.labels(),
        dirac_bracket_checks: checks,
    })
}
