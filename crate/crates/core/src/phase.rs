//! Phase-space kernel: points, scalar phase functions with gradients, the
//! cosymplectic form, Poisson brackets, Hamiltonian flow and the rank of the
//! velocity Hessian of a Lagrangian.
//!
//! Coordinates are stored as `z = (q^1..q^N, p_1..p_N)`. With the canonical
//! form `J = [[0, I], [-I, 0]]` the bracket is `[f, g] = df . J . dg`, so
//! `[q^a, p_b] = delta^a_b`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Deref;

use nalgebra::DMatrix;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg;
use crate::{Error, Result};

/// A point of the 2N-dimensional phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector(Vec<f64>);

impl PhaseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() || entries.len() % 2 != 0 {
            return Err(Error::OddDimension(entries.len()));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("phase vector"));
        }
        Ok(Self(entries))
    }

    pub fn from_qp(q: &[f64], p: &[f64]) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        let mut z = Vec::with_capacity(2 * q.len());
        z.extend_from_slice(q);
        z.extend_from_slice(p);
        Self::new(z)
    }

    pub fn zeros(n_dof: usize) -> Self {
        Self(vec![0.0; 2 * n_dof])
    }

    pub fn n_dof(&self) -> usize {
        self.0.len() / 2
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.0[..self.n_dof()]
    }

    pub fn p(&self) -> &[f64] {
        &self.0[self.n_dof()..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// `self + scale * other`; the result is re-validated for finiteness.
    pub fn add_scaled(&self, scale: f64, other: &PhaseVector) -> Result<PhaseVector> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        PhaseVector::new(self.0.iter().zip(&other.0).map(|(a, b)| a + scale * b).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl Deref for PhaseVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradientFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A differentiable scalar function on phase space.
///
/// Analytic gradients are the normal case. Functions built with
/// [`PhaseFunction::finite_difference`] fall back to central differences and
/// report it through [`PhaseFunction::has_analytic_gradient`].
#[derive(Clone)]
pub struct PhaseFunction {
    label: String,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhaseFunction")
            .field("label", &self.label)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

impl PhaseFunction {
    pub fn new(
        label: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            gradient: Some(Arc::new(gradient)),
        }
    }

    pub fn finite_difference(
        label: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(value),
            gradient: None,
        }
    }

    /// The coordinate `z^index` of a `dim`-dimensional phase space.
    pub fn coordinate(index: usize, dim: usize, label: impl Into<String>) -> Self {
        Self::new(
            label,
            move |z| z[index],
            move |_| {
                let mut g = vec![0.0; dim];
                g[index] = 1.0;
                g
            },
        )
    }

    /// `offset + coeffs . z`.
    pub fn linear(coeffs: Vec<f64>, offset: f64, label: impl Into<String>) -> Self {
        let c = coeffs.clone();
        Self::new(
            label,
            move |z| offset + c.iter().zip(z).map(|(a, b)| a * b).sum::<f64>(),
            move |_| coeffs.clone(),
        )
    }

    pub fn constant(value: f64, dim: usize) -> Self {
        Self::new("const", move |_| value, move |_| vec![0.0; dim])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn value(&self, z: &[f64]) -> f64 {
        (self.value)(z)
    }

    pub fn gradient(&self, z: &[f64]) -> Vec<f64> {
        match &self.gradient {
            Some(g) => g(z),
            None => central_difference(&*self.value, z),
        }
    }

    /// Largest relative deviation between the gradient and central finite
    /// differences of the value at `z`.
    pub fn gradient_defect(&self, z: &[f64]) -> f64 {
        let analytic = self.gradient(z);
        let numeric = central_difference(&*self.value, z);
        let scale = numeric.iter().chain(&analytic).fold(1.0_f64, |m, x| m.max(x.abs()));
        analytic
            .iter()
            .zip(&numeric)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs() / scale))
    }

    /// `c * self`.
    pub fn scaled(&self, c: f64) -> Self {
        let f = self.clone();
        let g = self.clone();
        let label = alloc::format!("{c}*({})", self.label);
        if self.gradient.is_some() {
            Self::new(
                label,
                move |z| c * f.value(z),
                move |z| g.gradient(z).into_iter().map(|x| c * x).collect(),
            )
        } else {
            Self::finite_difference(label, move |z| c * f.value(z))
        }
    }
}

/// Central differences with step `cbrt(eps) * max(1, |z_K|)`.
pub fn central_difference(f: &(dyn Fn(&[f64]) -> f64 + Send + Sync), z: &[f64]) -> Vec<f64> {
    let base = f64::EPSILON.cbrt();
    let mut work = z.to_vec();
    let mut grad = Vec::with_capacity(z.len());
    for k in 0..z.len() {
        let h = base * z[k].abs().max(1.0);
        let orig = work[k];
        work[k] = orig + h;
        let plus = f(&work);
        work[k] = orig - h;
        let minus = f(&work);
        work[k] = orig;
        grad.push((plus - minus) / (2.0 * h));
    }
    grad
}

type MatrixFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;

/// The antisymmetric tensor `J^{LK}` defining the bracket.
#[derive(Clone)]
pub enum CosymplecticForm {
    Canonical { n_dof: usize },
    General { dim: usize, matrix: Arc<MatrixFn> },
}

impl fmt::Debug for CosymplecticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Canonical { n_dof } => write!(f, "Canonical {{ n_dof: {n_dof} }}"),
            Self::General { dim, .. } => write!(f, "General {{ dim: {dim} }}"),
        }
    }
}

const ANTISYMMETRY_TOL: f64 = 1e-12;

impl CosymplecticForm {
    pub fn canonical(n_dof: usize) -> Self {
        Self::Canonical { n_dof }
    }

    pub fn general(dim: usize, matrix: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Self::General {
            dim,
            matrix: Arc::new(matrix),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Canonical { n_dof } => 2 * n_dof,
            Self::General { dim, .. } => *dim,
        }
    }

    pub fn matrix_at(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        match self {
            Self::Canonical { n_dof } => {
                let n = *n_dof;
                let mut j = DMatrix::zeros(2 * n, 2 * n);
                for a in 0..n {
                    j[(a, n + a)] = 1.0;
                    j[(n + a, a)] = -1.0;
                }
                Ok(j)
            }
            Self::General { dim, matrix } => {
                let j = matrix(z);
                if j.shape() != (*dim, *dim) {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        found: j.nrows(),
                    });
                }
                if j.iter().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("cosymplectic form"));
                }
                let scale = j.amax().max(1.0);
                let defect = (&j + j.transpose()).amax();
                if defect > ANTISYMMETRY_TOL * scale {
                    return Err(Error::NotAntisymmetric(defect));
                }
                Ok(j)
            }
        }
    }

    /// `J(z) . v`, the Hamiltonian vector field of a function with gradient `v`.
    pub fn apply(&self, z: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_len(v.len())?;
        match self {
            Self::Canonical { n_dof } => {
                let n = *n_dof;
                let mut out = vec![0.0; 2 * n];
                for a in 0..n {
                    out[a] = v[n + a];
                    out[n + a] = -v[a];
                }
                Ok(out)
            }
            Self::General { .. } => {
                let j = self.matrix_at(z)?;
                Ok((j * nalgebra::DVector::from_column_slice(v)).iter().copied().collect())
            }
        }
    }

    /// `a . J(z) . b`.
    pub fn contract(&self, z: &[f64], a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_len(a.len())?;
        let jb = self.apply(z, b)?;
        Ok(a.iter().zip(&jb).map(|(x, y)| x * y).sum())
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

/// `[f, g](z) = df . J . dg`.
pub fn poisson_bracket(f: &PhaseFunction, g: &PhaseFunction, z: &[f64], form: &CosymplecticForm) -> Result<f64> {
    form.contract(z, &f.gradient(z), &g.gradient(z))
}

/// The bracket `[f, g]` as a new phase function. Its gradient is taken by
/// finite differences, so nested brackets carry roughly `1e-10` relative
/// error.
pub fn bracket_function(f: &PhaseFunction, g: &PhaseFunction, form: &CosymplecticForm) -> PhaseFunction {
    let (f, g, form) = (f.clone(), g.clone(), form.clone());
    let label = alloc::format!("[{}, {}]", f.label(), g.label());
    PhaseFunction::finite_difference(label, move |z| poisson_bracket(&f, &g, z, &form).unwrap_or(f64::NAN))
}

#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    n_dof: usize,
    hamiltonian: PhaseFunction,
    form: CosymplecticForm,
}

impl HamiltonianSystem {
    pub fn new(n_dof: usize, hamiltonian: PhaseFunction, form: CosymplecticForm) -> Result<Self> {
        if n_dof == 0 {
            return Err(Error::EmptyConfiguration);
        }
        if form.dim() != 2 * n_dof {
            return Err(Error::DimensionMismatch {
                expected: 2 * n_dof,
                found: form.dim(),
            });
        }
        Ok(Self {
            n_dof,
            hamiltonian,
            form,
        })
    }

    pub fn canonical(n_dof: usize, hamiltonian: PhaseFunction) -> Result<Self> {
        Self::new(n_dof, hamiltonian, CosymplecticForm::canonical(n_dof))
    }

    pub fn n_dof(&self) -> usize {
        self.n_dof
    }

    pub fn hamiltonian(&self) -> &PhaseFunction {
        &self.hamiltonian
    }

    pub fn form(&self) -> &CosymplecticForm {
        &self.form
    }

    pub fn energy(&self, z: &[f64]) -> f64 {
        self.hamiltonian.value(z)
    }
}

/// `z_dot = J . dH`.
pub fn hamiltonian_flow(system: &HamiltonianSystem, z: &PhaseVector) -> Result<PhaseVector> {
    if z.dim() != 2 * system.n_dof {
        return Err(Error::DimensionMismatch {
            expected: 2 * system.n_dof,
            found: z.dim(),
        });
    }
    let grad = system.hamiltonian.gradient(z);
    if grad.len() != z.dim() {
        return Err(Error::DimensionMismatch {
            expected: z.dim(),
            found: grad.len(),
        });
    }
    if grad.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Hamiltonian gradient"));
    }
    PhaseVector::new(system.form.apply(z, &grad)?)
}

type LagrangianFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;
type HessianFn = dyn Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync;

/// `L(q, q_dot)` with an optional analytic velocity Hessian.
#[derive(Clone)]
pub struct LagrangianSystem {
    n_config: usize,
    lagrangian: Arc<LagrangianFn>,
    hessian: Option<Arc<HessianFn>>,
}

impl fmt::Debug for LagrangianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LagrangianSystem")
            .field("n_config", &self.n_config)
            .field("analytic_hessian", &self.hessian.is_some())
            .finish()
    }
}

const HESSIAN_SYMMETRY_TOL: f64 = 1e-10;

impl LagrangianSystem {
    pub fn new(n_config: usize, lagrangian: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            n_config,
            lagrangian: Arc::new(lagrangian),
            hessian: None,
        }
    }

    pub fn with_hessian(mut self, hessian: impl Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    pub fn n_config(&self) -> usize {
        self.n_config
    }

    pub fn value(&self, q: &[f64], qdot: &[f64]) -> f64 {
        (self.lagrangian)(q, qdot)
    }

    /// `T_ab = d^2 L / d qdot^a d qdot^b`, analytic when available, otherwise
    /// central second differences (accurate to about `1e-8` relative).
    pub fn velocity_hessian(&self, q: &[f64], qdot: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.n_config;
        if q.len() != n || qdot.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if q.len() != n { q.len() } else { qdot.len() },
            });
        }
        if let Some(h) = &self.hessian {
            let t = h(q, qdot);
            if t.shape() != (n, n) {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: t.nrows(),
                });
            }
            let scale = t.amax().max(f64::MIN_POSITIVE);
            let defect = (&t - t.transpose()).amax() / scale;
            if defect > HESSIAN_SYMMETRY_TOL {
                return Err(Error::AsymmetricHessian(defect));
            }
            return Ok(t);
        }
        let base = f64::EPSILON.powf(0.25);
        let steps: Vec<f64> = qdot.iter().map(|v| base * v.abs().max(1.0)).collect();
        let mut v = qdot.to_vec();
        let mut eval = |da: f64, a: usize, db: f64, b: usize| {
            v[a] += da;
            v[b] += db;
            let out = (self.lagrangian)(q, &v);
            v[a] -= da;
            v[b] -= db;
            out
        };
        let mut t = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in a..n {
                let (ha, hb) = (steps[a], steps[b]);
                let value = (eval(ha, a, hb, b) - eval(ha, a, -hb, b) - eval(-ha, a, hb, b) + eval(-ha, a, -hb, b))
                    / (4.0 * ha * hb);
                t[(a, b)] = value;
                t[(b, a)] = value;
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HessianRank {
    pub rank: usize,
    /// Orthonormal basis of the kernel of the velocity Hessian.
    pub null_directions: Vec<Vec<f64>>,
    pub singular_values: Vec<f64>,
}

/// Default relative threshold for the Hessian rank decision.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Smallest relative rank threshold used with a finite-difference Hessian,
/// whose entries carry roundoff near `1e-8` relative.
pub const FINITE_DIFFERENCE_RANK_TOL: f64 = 1e-6;

/// Rank and kernel of the velocity Hessian; singular values at or below
/// `tol * largest` count as zero. Without an analytic Hessian the threshold
/// is raised to [`FINITE_DIFFERENCE_RANK_TOL`].
pub fn hessian_rank(lag: &LagrangianSystem, q: &[f64], qdot: &[f64], tol: f64) -> Result<HessianRank> {
    if lag.n_config == 0 {
        return Err(Error::EmptyConfiguration);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("rank tolerance must be positive, got {tol}")));
    }
    let t = lag.velocity_hessian(q, qdot)?;
    let tol = if lag.hessian.is_some() { tol } else { tol.max(FINITE_DIFFERENCE_RANK_TOL) };
    let (singular_values, v) = linalg::full_svd(&t);
    let max = singular_values[0];
    let rank = singular_values.iter().filter(|&&s| s > tol * max).count();
    let null_directions = (rank..lag.n_config)
        .map(|i| linalg::canonical_sign(v.column(i).into_owned()).iter().copied().collect())
        .collect();
    Ok(HessianRank {
        rank,
        null_directions,
        singular_values,
    })
}

/// [`hessian_rank`] evaluated at several tangent-bundle points; the rank must
/// agree at all of them.
pub fn constant_hessian_rank(lag: &LagrangianSystem, samples: &[(Vec<f64>, Vec<f64>)], tol: f64) -> Result<HessianRank> {
    let mut first: Option<HessianRank> = None;
    let (mut min, mut max) = (usize::MAX, 0);
    for (q, qdot) in samples {
        let r = hessian_rank(lag, q, qdot, tol)?;
        min = min.min(r.rank);
        max = max.max(r.rank);
        first.get_or_insert(r);
    }
    if min != max {
        return Err(Error::RankNotConstant { min, max });
    }
    first.ok_or_else(|| Error::InvalidParameter("no samples given".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(i: usize, n: usize) -> PhaseFunction {
        PhaseFunction::coordinate(i, 2 * n, alloc::format!("q{}", i + 1))
    }

    fn p(i: usize, n: usize) -> PhaseFunction {
        PhaseFunction::coordinate(n + i, 2 * n, alloc::format!("p{}", i + 1))
    }

    #[test]
    fn canonical_pairs() {
        let form = CosymplecticForm::canonical(2);
        let z = [0.3, -1.2, 2.0, 0.7];
        assert_eq!(poisson_bracket(&q(0, 2), &p(0, 2), &z, &form).unwrap(), 1.0);
        assert_eq!(poisson_bracket(&q(0, 2), &q(1, 2), &z, &form).unwrap(), 0.0);
        assert_eq!(poisson_bracket(&p(0, 2), &q(0, 2), &z, &form).unwrap(), -1.0);
    }

    #[test]
    fn chain_rule_bracket() {
        let form = CosymplecticForm::canonical(1);
        let q_sq = PhaseFunction::new("q^2", |z| z[0] * z[0], |z| vec![2.0 * z[0], 0.0]);
        let z = [3.0, 0.5];
        assert_eq!(poisson_bracket(&q_sq, &p(0, 1), &z, &form).unwrap(), 6.0);
    }

    #[test]
    fn bracket_dimension_mismatch() {
        let form = CosymplecticForm::canonical(2);
        let err = poisson_bracket(&q(0, 1), &p(0, 1), &[0.0, 0.0], &form).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, found: 2 }));
    }

    #[test]
    fn canonical_form_block_structure() {
        let j = CosymplecticForm::canonical(2).matrix_at(&[0.0; 4]).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[0., 0., 1., 0., 0., 0., 0., 1., -1., 0., 0., 0., 0., -1., 0., 0.],
        );
        assert_eq!(j, expected);
        assert_eq!((&j + j.transpose()).amax(), 0.0);
    }

    #[test]
    fn general_form_must_be_antisymmetric() {
        let bad = CosymplecticForm::general(2, |_| DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert!(matches!(bad.matrix_at(&[0.0, 0.0]), Err(Error::NotAntisymmetric(_))));
        let scaled = CosymplecticForm::general(2, |z: &[f64]| {
            let s = 1.0 + z[0] * z[0];
            DMatrix::from_row_slice(2, 2, &[0.0, s, -s, 0.0])
        });
        let z = [2.0, 0.0];
        assert_eq!(poisson_bracket(&q(0, 1), &p(0, 1), &z, &scaled).unwrap(), 5.0);
    }

    #[test]
    fn harmonic_oscillator_flow() {
        let h = PhaseFunction::new("H", |z| 0.5 * (z[0] * z[0] + z[1] * z[1]), |z| vec![z[0], z[1]]);
        let sys = HamiltonianSystem::canonical(1, h).unwrap();
        let flow = hamiltonian_flow(&sys, &PhaseVector::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(flow.as_slice(), &[0.0, -1.0]);
    }

    #[test]
    fn constant_hamiltonian_has_no_flow() {
        let sys = HamiltonianSystem::canonical(2, PhaseFunction::constant(4.2, 4)).unwrap();
        let flow = hamiltonian_flow(&sys, &PhaseVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap()).unwrap();
        assert!(flow.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn dilation_flow() {
        let h = PhaseFunction::new("qp", |z| z[0] * z[1], |z| vec![z[1], z[0]]);
        let sys = HamiltonianSystem::canonical(1, h).unwrap();
        let z = PhaseVector::new(vec![2.0, 3.0]).unwrap();
        let flow = hamiltonian_flow(&sys, &z).unwrap();
        assert_eq!(flow.as_slice(), &[2.0, -3.0]);
        let grad = sys.hamiltonian().gradient(&z);
        let dh: f64 = grad.iter().zip(flow.iter()).map(|(a, b)| a * b).sum();
        assert_eq!(dh, 0.0);
    }

    #[test]
    fn flow_rejects_non_finite_gradient() {
        let h = PhaseFunction::new("bad", |_| 0.0, |_| vec![f64::NAN, 0.0]);
        let sys = HamiltonianSystem::canonical(1, h).unwrap();
        assert!(matches!(
            hamiltonian_flow(&sys, &PhaseVector::zeros(1)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn phase_vector_validation() {
        assert!(matches!(PhaseVector::new(vec![1.0, 2.0, 3.0]), Err(Error::OddDimension(3))));
        assert!(matches!(PhaseVector::new(vec![1.0, f64::INFINITY]), Err(Error::NonFinite(_))));
        let z = PhaseVector::from_qp(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(z.q(), &[1.0, 2.0]);
        assert_eq!(z.p(), &[3.0, 4.0]);
    }

    #[test]
    fn finite_difference_gradient_is_flagged_and_accurate() {
        let f = PhaseFunction::finite_difference("cubic", |z| z[0] * z[0] * z[1] + z[1].sin());
        assert!(!f.has_analytic_gradient());
        let g = f.gradient(&[1.5, -0.4]);
        assert!((g[0] - 2.0 * 1.5 * -0.4).abs() < 1e-9);
        assert!((g[1] - (1.5 * 1.5 + (-0.4_f64).cos())).abs() < 1e-9);
    }

    fn diag_hessian(d: [f64; 2]) -> impl Fn(&[f64], &[f64]) -> DMatrix<f64> + Send + Sync {
        move |_, _| DMatrix::from_row_slice(2, 2, &[d[0], 0.0, 0.0, d[1]])
    }

    #[test]
    fn regular_lagrangian_has_full_rank() {
        let lag = LagrangianSystem::new(2, |_, v| 0.5 * (v[0] * v[0] + v[1] * v[1])).with_hessian(diag_hessian([1.0, 1.0]));
        let r = hessian_rank(&lag, &[0.1, 0.2], &[0.3, 0.4], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.null_directions.is_empty());
    }

    #[test]
    fn single_velocity_lagrangian_kernel_is_second_axis() {
        let lag = LagrangianSystem::new(2, |_, v| 0.5 * v[0] * v[0]).with_hessian(diag_hessian([1.0, 0.0]));
        let r = hessian_rank(&lag, &[0.0, 0.0], &[1.0, -2.0], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(r.rank, 1);
        assert_eq!(r.null_directions.len(), 1);
        let k = &r.null_directions[0];
        assert!(k[0].abs() < 1e-14 && (k[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn finite_difference_hessian_of_shifted_velocity() {
        // L = (qdot1 - q2)^2 / 2, Hessian diag(1, 0)
        let lag = LagrangianSystem::new(2, |q, v| 0.5 * (v[0] - q[1]) * (v[0] - q[1]));
        let t = lag.velocity_hessian(&[0.3, 0.7], &[1.1, -0.2]).unwrap();
        assert!((t[(0, 0)] - 1.0).abs() < 1e-6);
        assert!(t[(0, 1)].abs() < 1e-6 && t[(1, 1)].abs() < 1e-6);
        let r = hessian_rank(&lag, &[0.3, 0.7], &[1.1, -2.0], 1e-5).unwrap();
        assert_eq!(r.rank, 1);
    }

    #[test]
    fn hessian_rank_errors() {
        let empty = LagrangianSystem::new(0, |_, _| 0.0);
        assert!(matches!(hessian_rank(&empty, &[], &[], 1e-10), Err(Error::EmptyConfiguration)));
        let lag = LagrangianSystem::new(1, |_, v| v[0] * v[0]);
        assert!(matches!(hessian_rank(&lag, &[0.0], &[0.0], 0.0), Err(Error::InvalidParameter(_))));
        let asym = LagrangianSystem::new(2, |_, _| 0.0)
            .with_hessian(|_, _| DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]));
        assert!(matches!(
            hessian_rank(&asym, &[0.0; 2], &[0.0; 2], 1e-10),
            Err(Error::AsymmetricHessian(_))
        ));
    }

    #[test]
    fn rank_constancy_is_enforced() {
        // Hessian diag(1, q1^2): rank drops where q1 = 0.
        let lag = LagrangianSystem::new(2, |q, v| 0.5 * (v[0] * v[0] + q[0] * q[0] * v[1] * v[1]))
            .with_hessian(|q, _| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, q[0] * q[0]]));
        let samples = vec![(vec![1.0, 0.0], vec![0.0, 0.0]), (vec![0.0, 0.0], vec![0.0, 0.0])];
        assert!(matches!(
            constant_hessian_rank(&lag, &samples, 1e-10),
            Err(Error::RankNotConstant { min: 1, max: 2 })
        ));
        let r = constant_hessian_rank(&lag, &samples[..1], 1e-10).unwrap();
        assert_eq!(r.rank, 2);
    }
}
