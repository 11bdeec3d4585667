//! Dirac-Bergmann constraint machinery for finite-dimensional systems.
//!
//! Sign conventions: `D_AB = [C_A, C_B]`; the gauge-fixed multipliers solve
//! `D . lambda = [H, C]`, so that the extended flow `J . d(H + lambda . C)`
//! leaves every constraint stationary; the error-correction step solves
//! `D . eps = C(z_bar)` and moves along `-eps_A J dC_A`, which changes each
//! constraint by `-C_A(z_bar)` to first order.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{self, CheckedInverse};
use crate::phase::{
    bracket_function, poisson_bracket, CosymplecticForm, HamiltonianSystem, PhaseFunction, PhaseVector,
};
use crate::{Error, Result};

/// Relative singular-value threshold below which `D` counts as singular.
pub const DEFAULT_INVERTIBILITY_TOL: f64 = 1e-10;
/// A chain candidate is new when its gradient leaves the span of the current
/// gradients by more than this relative residual.
pub const SPAN_RESIDUAL_TOL: f64 = 1e-8;
/// Number of on-surface points used for weak-vanishing decisions.
pub const DEFAULT_SAMPLE_COUNT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintOrigin {
    Primary,
    Consistency,
    GaugeFixing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintClass {
    Unknown,
    FirstClass,
    SecondClass,
}

impl ConstraintClass {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Unknown => "unknown",
            Self::FirstClass => "first_class",
            Self::SecondClass => "second_class",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub function: PhaseFunction,
    pub origin: ConstraintOrigin,
    pub class_label: ConstraintClass,
}

impl Constraint {
    pub fn new(function: PhaseFunction, origin: ConstraintOrigin) -> Self {
        Self {
            function,
            origin,
            class_label: ConstraintClass::Unknown,
        }
    }

    pub fn primary(function: PhaseFunction) -> Self {
        Self::new(function, ConstraintOrigin::Primary)
    }

    pub fn gauge_fixing(function: PhaseFunction) -> Self {
        Self::new(function, ConstraintOrigin::GaugeFixing)
    }

    pub fn label(&self) -> &str {
        self.function.label()
    }
}

/// Ordered constraints living on a phase space of dimension `dim`.
#[derive(Debug, Clone)]
pub struct ConstraintSet {
    dim: usize,
    constraints: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(dim: usize, constraints: Vec<Constraint>) -> Result<Self> {
        if dim == 0 || dim % 2 != 0 {
            return Err(Error::OddDimension(dim));
        }
        Ok(Self { dim, constraints })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn iter(&self) -> core::slice::Iter<'_, Constraint> {
        self.constraints.iter()
    }

    pub fn push(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn labels(&self) -> Vec<String> {
        self.constraints.iter().map(|c| String::from(c.label())).collect()
    }

    pub fn classes(&self) -> Vec<ConstraintClass> {
        self.constraints.iter().map(|c| c.class_label).collect()
    }

    pub fn values(&self, z: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| c.function.value(z)).collect()
    }

    pub fn max_violation(&self, z: &[f64]) -> f64 {
        self.values(z).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Constraint gradients as rows.
    pub fn gradient_matrix(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(z)?;
        let mut g = DMatrix::zeros(self.len(), self.dim);
        for (a, c) in self.constraints.iter().enumerate() {
            let grad = c.function.gradient(z);
            if grad.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: grad.len(),
                });
            }
            for (k, v) in grad.into_iter().enumerate() {
                g[(a, k)] = v;
            }
        }
        Ok(g)
    }

    /// Errors unless the constraint gradients are linearly independent at `z`.
    pub fn check_irreducible(&self, z: &[f64]) -> Result<()> {
        if self.is_empty() {
            return Ok(());
        }
        let g = self.gradient_matrix(z)?;
        let rank = linalg::rank(&g, SPAN_RESIDUAL_TOL);
        if rank < self.len() {
            return Err(Error::InvalidParameter(format!(
                "constraint gradients are dependent (rank {rank} for {} constraints)",
                self.len()
            )));
        }
        Ok(())
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: z.len(),
            });
        }
        Ok(())
    }

    fn check_form(&self, form: &CosymplecticForm) -> Result<()> {
        if form.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: form.dim(),
            });
        }
        Ok(())
    }
}

/// `D_AB = [C_A, C_B]` at one phase-space point.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationMatrix {
    entries: DMatrix<f64>,
}

impl CommutationMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn antisymmetry_defect(&self) -> f64 {
        if self.entries.is_empty() {
            return 0.0;
        }
        (&self.entries + self.entries.transpose()).amax()
    }

    /// Singular values, largest first.
    pub fn singular_values(&self) -> Vec<f64> {
        linalg::singular_values(&self.entries)
    }

    pub fn is_invertible(&self, rel_tol: f64) -> bool {
        self.factorize(rel_tol).is_ok()
    }

    pub fn factorize(&self, rel_tol: f64) -> Result<CommutationFactor> {
        Ok(CommutationFactor {
            inverse: CheckedInverse::new(&self.entries, rel_tol)?,
        })
    }
}

/// Checked factorization of an invertible commutation matrix.
#[derive(Debug, Clone)]
pub struct CommutationFactor {
    inverse: CheckedInverse,
}

impl CommutationFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.inverse.solve(&DVector::from_column_slice(rhs)).iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionReport {
    pub iterations: usize,
    /// Largest `|C_A|` before the first step.
    pub initial_norm: f64,
    pub final_norm: f64,
    pub converged: bool,
    /// Largest `|C_A|` before each step and after the last one.
    pub residual_history: Vec<f64>,
}

pub fn commutation_matrix(set: &ConstraintSet, z: &[f64], form: &CosymplecticForm) -> Result<CommutationMatrix> {
    set.check_form(form)?;
    let g = set.gradient_matrix(z)?;
    let m = set.len();
    let flows: Vec<Vec<f64>> = (0..m)
        .map(|b| form.apply(z, g.row(b).transpose().as_slice()))
        .collect::<Result<_>>()?;
    let mut d = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            d[(a, b)] = g.row(a).iter().zip(&flows[b]).map(|(x, y)| x * y).sum();
        }
    }
    Ok(CommutationMatrix { entries: d })
}

/// `[f, g]_D = [f, g] - [f, C_A] (D^-1)^{AB} [C_B, g]`.
pub fn dirac_bracket(
    f: &PhaseFunction,
    g: &PhaseFunction,
    set: &ConstraintSet,
    z: &[f64],
    form: &CosymplecticForm,
) -> Result<f64> {
    let d = commutation_matrix(set, z, form)?;
    let factor = d.factorize(DEFAULT_INVERTIBILITY_TOL)?;
    let grad_f = f.gradient(z);
    let grad_g = g.gradient(z);
    let plain = form.contract(z, &grad_f, &grad_g)?;
    let grads = set.gradient_matrix(z)?;
    let mut left = Vec::with_capacity(set.len());
    let mut right = Vec::with_capacity(set.len());
    for a in 0..set.len() {
        let ga: Vec<f64> = grads.row(a).iter().copied().collect();
        left.push(form.contract(z, &grad_f, &ga)?);
        right.push(form.contract(z, &ga, &grad_g)?);
    }
    let x = factor.solve(&right);
    Ok(plain - left.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>())
}

/// The Dirac bracket packaged as a cosymplectic form,
/// `J_D = J - (J G^T) D^-1 (G J)` with `G` the constraint gradients.
/// Where `D` is singular the form evaluates to NaN and `matrix_at` fails.
pub fn dirac_form(set: &ConstraintSet, form: &CosymplecticForm) -> Result<CosymplecticForm> {
    set.check_form(form)?;
    let (set, form) = (set.clone(), form.clone());
    let dim = set.dim();
    Ok(CosymplecticForm::general(dim, move |z| {
        let nan = || DMatrix::from_element(dim, dim, f64::NAN);
        let (Ok(j), Ok(g), Ok(d)) = (form.matrix_at(z), set.gradient_matrix(z), commutation_matrix(&set, z, &form))
        else {
            return nan();
        };
        let Ok(factor) = d.factorize(DEFAULT_INVERTIBILITY_TOL) else {
            return nan();
        };
        let gj = &g * &j;
        let mut dinv_gj = DMatrix::zeros(g.nrows(), dim);
        for col in 0..dim {
            let sol = factor.solve(gj.column(col).as_slice());
            for (row, v) in sol.into_iter().enumerate() {
                dinv_gj[(row, col)] = v;
            }
        }
        let correction = (&j * g.transpose()) * dinv_gj;
        let mut out = j - correction;
        // restore exact antisymmetry lost to rounding
        let sym = (&out - out.transpose()) * 0.5;
        out.copy_from(&sym);
        out
    }))
}

/// `lambda` solving `D . lambda = [H, C]`.
pub fn gauge_fixed_multipliers(set: &ConstraintSet, system: &HamiltonianSystem, z: &[f64]) -> Result<Vec<f64>> {
    let form = system.form();
    let d = commutation_matrix(set, z, form)?;
    let factor = d.factorize(DEFAULT_INVERTIBILITY_TOL)?;
    let rhs: Vec<f64> = set
        .iter()
        .map(|c| poisson_bracket(system.hamiltonian(), &c.function, z, form))
        .collect::<Result<_>>()?;
    Ok(factor.solve(&rhs))
}

/// `J . d(H + lambda . C)` with the multipliers frozen at `z`.
pub fn extended_flow(set: &ConstraintSet, system: &HamiltonianSystem, z: &[f64]) -> Result<PhaseVector> {
    let lambda = gauge_fixed_multipliers(set, system, z)?;
    let mut grad = system.hamiltonian().gradient(z);
    let grads = set.gradient_matrix(z)?;
    for (a, l) in lambda.iter().enumerate() {
        for (k, g) in grad.iter_mut().enumerate() {
            *g += l * grads[(a, k)];
        }
    }
    if grad.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("extended Hamiltonian gradient"));
    }
    PhaseVector::new(system.form().apply(z, &grad)?)
}

/// Second-order error coefficients
/// `eps2 = D^-1 [[C, H], H] + 1/2 D^-1 [D, H] D^-1 [C, H]`
/// at `z`. They vanish for linear constraints with constant brackets except
/// through the first term.
pub fn second_order_error_coefficients(set: &ConstraintSet, system: &HamiltonianSystem, z: &[f64]) -> Result<Vec<f64>> {
    let form = system.form();
    let h = system.hamiltonian();
    let d = commutation_matrix(set, z, form)?;
    let factor = d.factorize(DEFAULT_INVERTIBILITY_TOL)?;
    let m = set.len();
    let mut first = Vec::with_capacity(m);
    let mut drift = Vec::with_capacity(m);
    for c in set.iter() {
        let ch = bracket_function(&c.function, h, form);
        drift.push(ch.value(z));
        first.push(poisson_bracket(&ch, h, z, form)?);
    }
    let mut dd = DMatrix::zeros(m, m);
    for (s, cs) in set.iter().enumerate() {
        for (t, ct) in set.iter().enumerate() {
            let st = bracket_function(&cs.function, &ct.function, form);
            dd[(s, t)] = poisson_bracket(&st, h, z, form)?;
        }
    }
    let x = factor.solve(&drift);
    let dx = &dd * DVector::from_vec(x);
    let y = factor.solve(dx.as_slice());
    let base = factor.solve(&first);
    Ok(base.iter().zip(&y).map(|(a, b)| a + 0.5 * b).collect())
}

/// One first-order error-correction transformation evaluated at `z_bar`.
pub fn error_correction_step(
    set: &ConstraintSet,
    z_bar: &PhaseVector,
    form: &CosymplecticForm,
) -> Result<(PhaseVector, ProjectionReport)> {
    set.check_form(form)?;
    let values = set.values(z_bar);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("constraint values"));
    }
    let initial_norm = max_abs(&values);
    if initial_norm == 0.0 {
        let report = ProjectionReport {
            iterations: 0,
            initial_norm,
            final_norm: 0.0,
            converged: true,
            residual_history: vec![0.0],
        };
        return Ok((PhaseVector::zeros(z_bar.n_dof()), report));
    }
    let d = commutation_matrix(set, z_bar, form)?;
    let eps = d.factorize(DEFAULT_INVERTIBILITY_TOL)?.solve(&values);
    let grads = set.gradient_matrix(z_bar)?;
    let mut generator = vec![0.0; set.dim()];
    for (a, e) in eps.iter().enumerate() {
        for (k, g) in generator.iter_mut().enumerate() {
            *g -= e * grads[(a, k)];
        }
    }
    let delta = PhaseVector::new(form.apply(z_bar, &generator)?)?;
    let final_norm = set.max_violation(&z_bar.add_scaled(1.0, &delta)?);
    let report = ProjectionReport {
        iterations: 1,
        initial_norm,
        final_norm,
        converged: final_norm <= initial_norm,
        residual_history: vec![initial_norm, final_norm],
    };
    Ok((delta, report))
}

/// Iterates [`error_correction_step`] until `max |C_A| < tol`. Running out of
/// iterations is reported through `converged = false`, not as an error.
pub fn project_to_constraint_surface(
    set: &ConstraintSet,
    z_bar: &PhaseVector,
    form: &CosymplecticForm,
    tol: f64,
    max_iter: usize,
) -> Result<(PhaseVector, ProjectionReport)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("projection tolerance must be positive, got {tol}")));
    }
    let mut z = z_bar.clone();
    let mut history = vec![set.max_violation(&z)];
    let mut iterations = 0;
    loop {
        let current = *history.last().expect("history starts non-empty");
        if !current.is_finite() {
            return Err(Error::NonFinite("constraint values"));
        }
        if current < tol || iterations == max_iter {
            break;
        }
        let (delta, step) = error_correction_step(set, &z, form)?;
        z = z.add_scaled(1.0, &delta)?;
        iterations += 1;
        history.push(step.final_norm);
    }
    let final_norm = *history.last().expect("non-empty");
    let report = ProjectionReport {
        iterations,
        initial_norm: history[0],
        final_norm,
        converged: final_norm < tol,
        residual_history: history,
    };
    Ok((z, report))
}

/// Produces points lying on the surface of a constraint set.
pub trait SurfaceSampler {
    fn sample(&mut self, set: &ConstraintSet) -> Result<Vec<PhaseVector>>;
}

/// Draws uniform seeds in `[-spread, spread]^dim` and pulls each onto the
/// surface with minimum-norm Gauss-Newton steps `z <- z - G^+ C(z)`. This
/// works for first- and second-class sets alike.
#[derive(Debug, Clone)]
pub struct NewtonSampler {
    rng: ChaCha8Rng,
    pub count: usize,
    pub spread: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_attempts: usize,
}

impl NewtonSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            count: DEFAULT_SAMPLE_COUNT,
            spread: 1.0,
            tol: 1e-12,
            max_iter: 50,
            max_attempts: 8,
        }
    }

    pub fn with_count(mut self, count: usize) -> Self {
        self.count = count;
        self
    }

    pub fn with_spread(mut self, spread: f64) -> Self {
        self.spread = spread;
        self
    }

    fn pull_to_surface(&self, set: &ConstraintSet, mut z: Vec<f64>) -> Option<Vec<f64>> {
        for _ in 0..=self.max_iter {
            let c = DVector::from_vec(set.values(&z));
            let violation = c.amax();
            if !violation.is_finite() {
                return None;
            }
            if violation < self.tol {
                return Some(z);
            }
            let g = set.gradient_matrix(&z).ok()?;
            let step = g.try_svd(true, true, f64::EPSILON, 10_000)?.solve(&c, 1e-14).ok()?;
            for (zk, s) in z.iter_mut().zip(step.iter()) {
                *zk -= s;
            }
        }
        None
    }
}

impl SurfaceSampler for NewtonSampler {
    fn sample(&mut self, set: &ConstraintSet) -> Result<Vec<PhaseVector>> {
        let mut out = Vec::with_capacity(self.count);
        while out.len() < self.count {
            let mut found = None;
            for _ in 0..self.max_attempts {
                let seed: Vec<f64> = (0..set.dim()).map(|_| self.rng.random_range(-self.spread..=self.spread)).collect();
                if set.is_empty() {
                    found = Some(seed);
                    break;
                }
                if let Some(z) = self.pull_to_surface(set, seed) {
                    found = Some(z);
                    break;
                }
            }
            let z = found.ok_or_else(|| {
                Error::SamplerFailed(format!(
                    "no on-surface point after {} attempts (sample {})",
                    self.max_attempts,
                    out.len()
                ))
            })?;
            out.push(PhaseVector::new(z)?);
        }
        Ok(out)
    }
}

fn gradient_norm(f: &PhaseFunction, z: &[f64]) -> f64 {
    f.gradient(z).iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Runs the consistency algorithm. Each generation looks at the
/// combinations `w . [C, H]` that the primary multipliers cannot absorb
/// (`w` in the left kernel of `[C_A, phi_b]`) and adds those that do not
/// vanish on the current surface as new constraints.
pub fn consistency_chain(
    system: &HamiltonianSystem,
    primaries: &ConstraintSet,
    sampler: &mut dyn SurfaceSampler,
    tol_weak: f64,
    max_generations: usize,
) -> Result<ConstraintSet> {
    if !(tol_weak > 0.0) {
        return Err(Error::InvalidParameter(format!("weak tolerance must be positive, got {tol_weak}")));
    }
    let form = system.form();
    primaries.check_form(form)?;
    let mut set = primaries.clone();
    if set.is_empty() {
        return Ok(set);
    }
    let h = system.hamiltonian();
    for _ in 0..max_generations {
        let samples = sampler.sample(&set)?;
        let Some(first) = samples.first() else {
            return Err(Error::SamplerFailed("sampler returned no points".into()));
        };
        let kernel = multiplier_kernel(&set, primaries, &samples, form, tol_weak)?;
        let drifts: Vec<PhaseFunction> = set.iter().map(|c| bracket_function(&c.function, h, form)).collect();
        let mut added = Vec::new();
        for w in kernel {
            let candidate = combine(&drifts, &w, set.dim());
            let worst = samples
                .iter()
                .map(|z| (candidate.value(z).abs() / (1.0 + gradient_norm(&candidate, z)), z))
                .fold((0.0_f64, first), |acc, x| if x.0 > acc.0 { x } else { acc });
            if worst.0 < tol_weak {
                continue;
            }
            let grad = DVector::from_vec(candidate.gradient(worst.1));
            let rows = set.gradient_matrix(worst.1)?;
            let rows = stack_rows(&rows, &added, worst.1);
            if linalg::span_residual(&rows, &grad, SPAN_RESIDUAL_TOL) <= SPAN_RESIDUAL_TOL {
                return Err(Error::InconsistentDynamics(format!(
                    "`{}` does not vanish on the surface but adds no independent direction",
                    candidate.label()
                )));
            }
            added.push(candidate);
        }
        if added.is_empty() {
            return Ok(set);
        }
        for f in added {
            set.push(Constraint::new(f, ConstraintOrigin::Consistency));
        }
    }
    Err(Error::ChainDidNotTerminate(max_generations))
}

fn stack_rows(rows: &DMatrix<f64>, extra: &[PhaseFunction], z: &[f64]) -> DMatrix<f64> {
    let mut out = rows.clone().resize_vertically(rows.nrows() + extra.len(), 0.0);
    for (i, f) in extra.iter().enumerate() {
        for (k, v) in f.gradient(z).into_iter().enumerate() {
            out[(rows.nrows() + i, k)] = v;
        }
    }
    out
}

fn combine(drifts: &[PhaseFunction], w: &[f64], dim: usize) -> PhaseFunction {
    let terms: Vec<(f64, PhaseFunction)> = w
        .iter()
        .zip(drifts)
        .filter(|(c, _)| c.abs() > 1e-14)
        .map(|(c, f)| (*c, f.clone()))
        .collect();
    let label = match terms.as_slice() {
        [(c, f)] if (c - 1.0).abs() < 1e-14 => String::from(f.label()),
        _ => {
            let parts: Vec<String> = terms.iter().map(|(c, f)| format!("{c:.6}*{}", f.label())).collect();
            parts.join(" + ")
        }
    };
    if terms.is_empty() {
        return PhaseFunction::constant(0.0, dim).with_label(label);
    }
    PhaseFunction::finite_difference(label, move |z| terms.iter().map(|(c, f)| c * f.value(z)).sum())
}

/// Left kernel of `M_Ab = [C_A, phi_b]`, computed at the first sample and
/// checked at the others.
fn multiplier_kernel(
    set: &ConstraintSet,
    primaries: &ConstraintSet,
    samples: &[PhaseVector],
    form: &CosymplecticForm,
    tol_weak: f64,
) -> Result<Vec<Vec<f64>>> {
    let mixed = |z: &[f64]| -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(set.len(), primaries.len());
        for (a, c) in set.iter().enumerate() {
            for (b, p) in primaries.iter().enumerate() {
                m[(a, b)] = poisson_bracket(&c.function, &p.function, z, form)?;
            }
        }
        Ok(m)
    };
    let m0 = mixed(&samples[0])?;
    let kernel = linalg::null_space(&m0.transpose(), SPAN_RESIDUAL_TOL);
    let scale = 1.0 + m0.amax();
    for z in &samples[1..] {
        let m = mixed(z)?;
        for w in &kernel {
            let defect = (w.transpose() * &m).amax();
            if defect > tol_weak * scale {
                return Err(Error::InconsistentDynamics(format!(
                    "multiplier structure changes across the surface (defect {defect:e})"
                )));
            }
        }
    }
    Ok(kernel.into_iter().map(|w| w.iter().copied().collect()).collect())
}

/// Labels each member first class iff all its brackets with the other
/// members vanish on sampled surface points. Bracket magnitudes are scaled
/// by `1 + |dC_A| |dC_B|`; a magnitude within a factor 10 of `tol_weak` is
/// rejected as ambiguous.
pub fn classify_constraints(
    set: &ConstraintSet,
    sampler: &mut dyn SurfaceSampler,
    form: &CosymplecticForm,
    tol_weak: f64,
) -> Result<ConstraintSet> {
    if !(tol_weak > 0.0) {
        return Err(Error::InvalidParameter(format!("weak tolerance must be positive, got {tol_weak}")));
    }
    set.check_form(form)?;
    let mut out = set.clone();
    if set.is_empty() {
        return Ok(out);
    }
    let samples = sampler.sample(set)?;
    for z in &samples {
        set.check_irreducible(z)?;
    }
    let m = set.len();
    let mut magnitude = vec![vec![0.0_f64; m]; m];
    for z in &samples {
        let d = commutation_matrix(set, z, form)?;
        let norms: Vec<f64> = set.iter().map(|c| gradient_norm(&c.function, z)).collect();
        for a in 0..m {
            for b in 0..m {
                let scaled = d.entries()[(a, b)].abs() / (1.0 + norms[a] * norms[b]);
                magnitude[a][b] = magnitude[a][b].max(scaled);
            }
        }
    }
    for a in 0..m {
        let worst = (0..m).filter(|&b| b != a).map(|b| magnitude[a][b]).fold(0.0, f64::max);
        if worst >= tol_weak / 10.0 && worst < tol_weak * 10.0 {
            return Err(Error::AmbiguousClassification {
                label: String::from(set.constraints[a].label()),
                magnitude: worst,
                tolerance: tol_weak,
            });
        }
        out.constraints[a].class_label = if worst < tol_weak {
            ConstraintClass::FirstClass
        } else {
            ConstraintClass::SecondClass
        };
    }
    Ok(out)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
