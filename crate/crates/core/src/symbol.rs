//! Principal symbols of first-order evolution systems and their
//! hyperbolicity classification over the unit sphere of wave directions.
//!
//! A symbol maps a unit direction `n` to the real matrix whose eigenvalues
//! are the normalized frequencies `kappa = omega / |k|`. Strong hyperbolicity
//! needs real eigenvalues and a complete, uniformly conditioned eigenvector
//! set at every direction.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};
use core::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

type SymbolFn = dyn Fn([f64; 3]) -> DMatrix<f64> + Send + Sync;

#[derive(Clone)]
pub struct PrincipalSymbol {
    size: usize,
    label: String,
    eval: Arc<SymbolFn>,
}

impl core::fmt::Debug for PrincipalSymbol {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PrincipalSymbol")
            .field("size", &self.size)
            .field("label", &self.label)
            .finish()
    }
}

impl PrincipalSymbol {
    pub fn new(
        size: usize,
        label: impl Into<String>,
        eval: impl Fn([f64; 3]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if size == 0 || size % 2 != 0 {
            return Err(Error::OddDimension(size));
        }
        Ok(Self {
            size,
            label: label.into(),
            eval: Arc::new(eval),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, n: [f64; 3]) -> Result<DMatrix<f64>> {
        let m = (self.eval)(n);
        if m.shape() != (self.size, self.size) {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: m.nrows(),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("principal symbol"));
        }
        Ok(m)
    }
}

fn unit(n: [f64; 3]) -> Vector3<f64> {
    let v = Vector3::from(n);
    let norm = v.norm();
    if norm > 0.0 {
        v / norm
    } else {
        v
    }
}

fn transverse_projector(n: [f64; 3]) -> Matrix3<f64> {
    let n = unit(n);
    Matrix3::identity() - n * n.transpose()
}

fn blocks(upper_right: Matrix3<f64>, lower_left: Matrix3<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(6, 6);
    m.view_mut((0, 3), (3, 3)).copy_from(&upper_right);
    m.view_mut((3, 0), (3, 3)).copy_from(&lower_left);
    m
}

/// Canonical Maxwell on `(A, pi)`: `[[0, I], [P(n), 0]]`.
pub fn maxwell_canonical_symbol() -> PrincipalSymbol {
    PrincipalSymbol::new(6, "maxwell-canonical", |n| blocks(Matrix3::identity(), transverse_projector(n)))
        .expect("even size")
}

/// Coulomb-gauge-fixed Maxwell on `(A, pi)`: `[[0, P(n)], [P(n), 0]]`.
pub fn maxwell_gauge_fixed_symbol() -> PrincipalSymbol {
    PrincipalSymbol::new(6, "maxwell-gauge-fixed", |n| {
        let p = transverse_projector(n);
        blocks(p, p)
    })
    .expect("even size")
}

pub fn identity_symbol(size: usize) -> Result<PrincipalSymbol> {
    PrincipalSymbol::new(size, "identity", move |_| DMatrix::identity(size, size))
}

/// Orthonormal frame `(n, t1, t2)` as matrix columns.
pub fn adapted_frame(n: [f64; 3]) -> Matrix3<f64> {
    let n = unit(n);
    let helper = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let t1 = (helper - n * n.dot(&helper)).normalize();
    let t2 = n.cross(&t1);
    Matrix3::from_columns(&[n, t1, t2])
}

/// A 6x6 `(A, pi)` symbol rewritten in the frame adapted to `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedBlocks {
    /// Acting on `(A_L, pi_L)`.
    pub longitudinal: Matrix2<f64>,
    /// Acting on `(A_t, pi_t)` for the two transverse directions.
    pub transverse: [Matrix2<f64>; 2],
    /// Largest entry coupling different directions; 0 for a clean split.
    pub coupling: f64,
}

pub fn adapted_blocks(sym: &PrincipalSymbol, n: [f64; 3]) -> Result<AdaptedBlocks> {
    if sym.size() != 6 {
        return Err(Error::DimensionMismatch {
            expected: 6,
            found: sym.size(),
        });
    }
    let m = sym.eval(n)?;
    let frame = adapted_frame(n);
    let mut rotation = DMatrix::zeros(6, 6);
    rotation.view_mut((0, 0), (3, 3)).copy_from(&frame);
    rotation.view_mut((3, 3), (3, 3)).copy_from(&frame);
    let r = rotation.transpose() * m * &rotation;
    let block = |d: usize| Matrix2::new(r[(d, d)], r[(d, d + 3)], r[(d + 3, d)], r[(d + 3, d + 3)]);
    let mut coupling = 0.0_f64;
    for i in 0..6 {
        for j in 0..6 {
            if i % 3 != j % 3 {
                coupling = coupling.max(r[(i, j)].abs());
            }
        }
    }
    Ok(AdaptedBlocks {
        longitudinal: block(0),
        transverse: [block(1), block(2)],
        coupling,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCluster {
    pub value: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenStructure {
    /// Eigenvalues with each cluster replaced by its mean, sorted by real
    /// then imaginary part.
    pub eigenvalues: Vec<Complex64>,
    pub clusters: Vec<EigenCluster>,
    /// Numerical rank of the assembled eigenvector matrix.
    pub eigenvector_rank: usize,
    /// `sigma_max / sigma_min` of the eigenvector matrix; infinite when it
    /// is rank deficient.
    pub condition: f64,
}

impl EigenStructure {
    pub fn is_complete(&self, size: usize) -> bool {
        self.eigenvector_rank == size
    }
}

/// Relative spread under which computed eigenvalues are merged.
pub const CLUSTER_TOL: f64 = 1e-6;
/// Relative singular-value threshold for eigenvector counting and rank.
pub const NULLITY_TOL: f64 = 1e-8;
const SCHUR_MAX_ITER: usize = 10_000;
const SVD_MAX_ITER: usize = 10_000;

fn svd_failed() -> Error {
    Error::InvalidParameter("SVD iteration did not converge".into())
}

/// Right null vectors of `m - shift I` with singular values at most
/// `threshold`. Real shifts stay in real arithmetic.
fn null_vectors(m: &DMatrix<f64>, shift: Complex64, real: bool, threshold: f64) -> Result<Vec<DVector<Complex64>>> {
    let size = m.nrows();
    if real {
        let shifted = m - DMatrix::identity(size, size) * shift.re;
        let (sigma, v) = crate::linalg::full_svd(&shifted);
        Ok((0..size)
            .filter(|&i| sigma[i] <= threshold)
            .map(|i| v.column(i).map(|x| Complex64::new(x, 0.0)))
            .collect())
    } else {
        let shifted = DMatrix::from_fn(size, size, |i, j| {
            Complex64::new(m[(i, j)], 0.0) - if i == j { shift } else { Complex64::new(0.0, 0.0) }
        });
        let svd = shifted.try_svd(false, true, f64::EPSILON, SVD_MAX_ITER).ok_or_else(svd_failed)?;
        let v_t = svd.v_t.expect("right singular vectors requested");
        Ok((0..size)
            .filter(|&i| svd.singular_values[i] <= threshold)
            .map(|i| v_t.row(i).adjoint())
            .collect())
    }
}

/// Eigenvalues of a real quasi-upper-triangular Schur factor: diagonal
/// entries, plus a conjugate or real pair for each 2x2 bump.
fn quasi_triangular_eigenvalues(t: &DMatrix<f64>) -> Vec<Complex64> {
    let n = t.nrows();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, c, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mid = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let disc = half * half + b * c;
            if disc >= 0.0 {
                let root = disc.sqrt();
                out.push(Complex64::new(mid + root, 0.0));
                out.push(Complex64::new(mid - root, 0.0));
            } else {
                let root = (-disc).sqrt();
                out.push(Complex64::new(mid, root));
                out.push(Complex64::new(mid, -root));
            }
            i += 2;
        } else {
            out.push(Complex64::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out
}

/// Singular values of a complex matrix, descending. Computed in real
/// arithmetic, through the `[[Re, -Im], [Im, Re]]` embedding when needed,
/// which repeats every singular value twice.
fn complex_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    let (real, repeat) = if m.iter().all(|z| z.im == 0.0) {
        (m.map(|z| z.re), 1)
    } else {
        let embedded = DMatrix::from_fn(2 * rows, 2 * cols, |i, j| {
            let z = m[(i % rows, j % cols)];
            match (i < rows, j < cols) {
                (true, false) => -z.im,
                (false, true) => z.im,
                _ => z.re,
            }
        });
        (embedded, 2)
    };
    crate::linalg::singular_values(&real).into_iter().step_by(repeat).collect()
}

/// Eigenvalues, geometric multiplicities and eigenvector conditioning of a
/// real square matrix.
pub fn eigen_structure(m: &DMatrix<f64>) -> Result<EigenStructure> {
    let size = m.nrows();
    if size == 0 || m.ncols() != size {
        return Err(Error::DimensionMismatch {
            expected: size,
            found: m.ncols(),
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::InvalidParameter("Schur iteration did not converge".into()))?;
    let raw = quasi_triangular_eigenvalues(&schur.unpack().1);
    if raw.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter("non-finite eigenvalue".into()));
    }
    let sigma_max = crate::linalg::singular_values(m).first().copied().unwrap_or(0.0);
    let scale = sigma_max.max(1.0);

    let mut clusters: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for z in raw {
        match clusters.iter_mut().find(|(_, members)| members.iter().any(|w| (w - z).norm() <= CLUSTER_TOL * scale)) {
            Some((_, members)) => members.push(z),
            None => clusters.push((z, vec![z])),
        }
    }
    // same scale as the clustering, so a roundoff-level block counts as zero
    let threshold = NULLITY_TOL * scale;
    let mut summary = Vec::with_capacity(clusters.len());
    let mut eigenvalues = Vec::with_capacity(size);
    let mut columns: Vec<DVector<Complex64>> = Vec::with_capacity(size);
    for (_, members) in &clusters {
        let mean = members.iter().sum::<Complex64>() / members.len() as f64;
        let mut null = null_vectors(m, mean, mean.im.abs() <= CLUSTER_TOL * scale, threshold)?;
        let geometric = null.len();
        null.truncate(members.len());
        columns.extend(null);
        summary.push(EigenCluster {
            value: mean,
            algebraic: members.len(),
            geometric,
        });
        eigenvalues.extend(core::iter::repeat_n(mean, members.len()));
    }
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    summary.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));

    let (eigenvector_rank, condition) = if columns.is_empty() {
        (0, f64::INFINITY)
    } else {
        let s = complex_singular_values(&DMatrix::from_columns(&columns));
        let (max, min) = (s[0], s[s.len() - 1]);
        let rank = s.iter().filter(|&&x| x > NULLITY_TOL * max).count();
        let cond = if columns.len() < size || min == 0.0 { f64::INFINITY } else { max / min };
        (rank, cond)
    };
    Ok(EigenStructure {
        eigenvalues,
        clusters: summary,
        eigenvector_rank,
        condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hyperbolicity {
    StronglyHyperbolic,
    WeaklyHyperbolic,
    NotHyperbolic,
    /// The eigen-solver failed at some sample.
    Indeterminate,
}

impl Hyperbolicity {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::StronglyHyperbolic => "strongly_hyperbolic",
            Self::WeaklyHyperbolic => "weakly_hyperbolic",
            Self::NotHyperbolic => "not_hyperbolic",
            Self::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub n: [f64; 3],
    pub eigenvalues: Vec<Complex64>,
    pub condition: f64,
    pub eigenvector_rank: usize,
    pub complete: bool,
    /// Set when the eigen-solver failed at this direction.
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolReport {
    pub classification: Hyperbolicity,
    pub samples: Vec<SampleRecord>,
    /// Distinct real parts of the eigenvalues over all samples.
    pub normalized_frequencies: Vec<f64>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    /// Random directions added to the 3 axes and 3 face diagonals.
    pub n_random: usize,
    pub tol_imag: f64,
    pub cond_bound: f64,
    pub seed: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            n_random: 64,
            tol_imag: 1e-6,
            cond_bound: 1e8,
            seed: 0,
        }
    }
}

/// Axes, face diagonals, then `n_random` seeded uniform directions.
pub fn sample_directions(n_random: usize, seed: u64) -> Vec<[f64; 3]> {
    let d = FRAC_1_SQRT_2;
    let mut out = vec![
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [d, d, 0.0],
        [d, 0.0, d],
        [0.0, d, d],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < 6 + n_random {
        let v: [f64; 3] = core::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-4 && r2 <= 1.0 {
            let r = r2.sqrt();
            out.push([v[0] / r, v[1] / r, v[2] / r]);
        }
    }
    out
}

/// Eigen-analysis of the symbol at one direction; solver failures are
/// recorded rather than propagated.
pub fn analyze_direction(sym: &PrincipalSymbol, n: [f64; 3], cond_bound: f64) -> SampleRecord {
    let result = sym.eval(n).and_then(|m| eigen_structure(&m));
    match result {
        Ok(es) => SampleRecord {
            n,
            complete: es.is_complete(sym.size()) && es.condition < cond_bound,
            eigenvalues: es.eigenvalues,
            condition: es.condition,
            eigenvector_rank: es.eigenvector_rank,
            failure: None,
        },
        Err(e) => SampleRecord {
            n,
            eigenvalues: Vec::new(),
            condition: f64::INFINITY,
            eigenvector_rank: 0,
            complete: false,
            failure: Some(format!("{e}")),
        },
    }
}

/// Classification from per-direction records (kept in the given order).
pub fn assemble_report(samples: Vec<SampleRecord>, tol_imag: f64) -> SymbolReport {
    let mut frequencies: Vec<f64> = Vec::new();
    for s in &samples {
        for z in &s.eigenvalues {
            if !frequencies.iter().any(|f| (f - z.re).abs() <= 1e-9 * (1.0 + z.re.abs())) {
                frequencies.push(z.re);
            }
        }
    }
    frequencies.sort_by(f64::total_cmp);
    let failed = samples.iter().find(|s| s.failure.is_some());
    let (classification, message) = if let Some(s) = failed {
        (
            Hyperbolicity::Indeterminate,
            Some(format!("eigen-solver failed at n = {:?}: {}", s.n, s.failure.as_deref().unwrap_or(""))),
        )
    } else if samples.iter().any(|s| s.eigenvalues.iter().any(|z| z.im.abs() > tol_imag)) {
        (Hyperbolicity::NotHyperbolic, None)
    } else if samples.iter().any(|s| !s.complete) {
        (Hyperbolicity::WeaklyHyperbolic, None)
    } else {
        (Hyperbolicity::StronglyHyperbolic, None)
    };
    SymbolReport {
        classification,
        samples,
        normalized_frequencies: frequencies,
        message,
    }
}

pub fn analyze_symbol(sym: &PrincipalSymbol, options: &AnalysisOptions) -> Result<SymbolReport> {
    check_options(options)?;
    let samples = sample_directions(options.n_random, options.seed)
        .into_iter()
        .map(|n| analyze_direction(sym, n, options.cond_bound))
        .collect();
    Ok(assemble_report(samples, options.tol_imag))
}

pub fn check_options(options: &AnalysisOptions) -> Result<()> {
    if options.n_random == 0 {
        return Err(Error::InvalidParameter("at least one random direction is required".into()));
    }
    if !(options.tol_imag > 0.0) || !(options.cond_bound > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "need tol_imag > 0 and cond_bound > 1, got {} and {}",
            options.tol_imag, options.cond_bound
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> AnalysisOptions {
        AnalysisOptions {
            n_random: 16,
            ..AnalysisOptions::default()
        }
    }

    #[test]
    fn canonical_is_weakly_hyperbolic() {
        let r = analyze_symbol(&maxwell_canonical_symbol(), &opts()).unwrap();
        assert_eq!(r.classification, Hyperbolicity::WeaklyHyperbolic);
        assert!(r.samples.iter().all(|s| !s.complete && s.eigenvector_rank == 5));
    }

    #[test]
    fn gauge_fixed_is_strongly_hyperbolic() {
        let r = analyze_symbol(&maxwell_gauge_fixed_symbol(), &opts()).unwrap();
        assert_eq!(r.classification, Hyperbolicity::StronglyHyperbolic);
        assert_eq!(r.normalized_frequencies.len(), 3);
        for s in &r.samples {
            let expected = [-1.0, -1.0, 0.0, 0.0, 1.0, 1.0];
            for (z, e) in s.eigenvalues.iter().zip(expected) {
                assert!((z.re - e).abs() < 1e-12 && z.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_symbol_is_complete() {
        let r = analyze_symbol(&identity_symbol(2).unwrap(), &opts()).unwrap();
        assert_eq!(r.classification, Hyperbolicity::StronglyHyperbolic);
        assert_eq!(r.samples[0].eigenvalues, vec![Complex64::new(1.0, 0.0); 2]);
    }

    #[test]
    fn rotation_generator_is_not_hyperbolic() {
        let sym = PrincipalSymbol::new(2, "rotation", |_| DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).unwrap();
        let r = analyze_symbol(&sym, &opts()).unwrap();
        assert_eq!(r.classification, Hyperbolicity::NotHyperbolic);
    }

    #[test]
    fn failing_symbol_is_indeterminate() {
        let sym = PrincipalSymbol::new(2, "broken", |n| DMatrix::from_element(2, 2, if n[0] > 0.99 { f64::NAN } else { 0.0 }))
            .unwrap();
        let r = analyze_symbol(&sym, &opts()).unwrap();
        assert_eq!(r.classification, Hyperbolicity::Indeterminate);
        assert!(r.message.is_some());
    }

    #[test]
    fn adapted_blocks_of_maxwell_symbols() {
        let n = [0.3, -0.5, 0.8];
        let c = adapted_blocks(&maxwell_canonical_symbol(), n).unwrap();
        assert!(c.coupling < 1e-14);
        assert!((c.longitudinal - Matrix2::new(0.0, 1.0, 0.0, 0.0)).amax() < 1e-14);
        for t in c.transverse {
            assert!((t - Matrix2::new(0.0, 1.0, 1.0, 0.0)).amax() < 1e-14);
        }
        let g = adapted_blocks(&maxwell_gauge_fixed_symbol(), n).unwrap();
        assert!(g.longitudinal.amax() < 1e-14);
        let jordan = eigen_structure(&DMatrix::from_column_slice(2, 2, c.longitudinal.as_slice())).unwrap();
        assert_eq!((jordan.clusters[0].algebraic, jordan.eigenvector_rank), (2, 1));
        let zero = eigen_structure(&DMatrix::from_column_slice(2, 2, g.longitudinal.as_slice())).unwrap();
        assert_eq!((zero.clusters[0].algebraic, zero.eigenvector_rank), (2, 2));
    }

    #[test]
    fn traceless_and_rotation_invariant() {
        let sym = maxwell_canonical_symbol();
        let d = 3.0_f64.sqrt().recip();
        let a = eigen_structure(&sym.eval([1.0, 0.0, 0.0]).unwrap()).unwrap();
        let b = eigen_structure(&sym.eval([d, d, d]).unwrap()).unwrap();
        assert!(sym.eval([d, d, d]).unwrap().trace().abs() < 1e-15);
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn near_jordan_split_is_still_defective() {
        let m = DMatrix::from_row_slice(2, 2, &[1e-9, 1.0, 0.0, -1e-9]);
        let es = eigen_structure(&m).unwrap();
        assert_eq!(es.clusters.len(), 1);
        assert_eq!(es.eigenvector_rank, 1);
    }

    #[test]
    fn roundoff_sized_block_is_complete() {
        let m = DMatrix::from_row_slice(2, 2, &[1e-17, -2e-17, 3e-17, 0.0]);
        let es = eigen_structure(&m).unwrap();
        assert_eq!(es.clusters.len(), 1);
        assert_eq!(es.eigenvector_rank, 2);
        assert!(es.is_complete(2));
    }

    #[test]
    fn singular_values_ignore_signed_zero_imaginary_parts() {
        let m = DMatrix::from_fn(6, 6, |i, j| {
            let re = if i == j { 1.0 + i as f64 } else { 0.25 / (1.0 + (i + j) as f64) };
            Complex64::new(re, -0.0)
        });
        let s = complex_singular_values(&m);
        let expected = m.map(|z| z.re).singular_values();
        assert_eq!(s.len(), 6);
        assert!((s[0] - expected.max()).abs() < 1e-12);
        assert!((s[5] - expected.min()).abs() < 1e-12);
    }

    #[test]
    fn complex_singular_values_match_modulus_for_diagonal() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![Complex64::new(0.0, 3.0), Complex64::new(1.0, 1.0)]));
        let s = complex_singular_values(&m);
        assert_eq!(s.len(), 2);
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn quasi_triangular_blocks_give_pairs() {
        #[rustfmt::skip]
        let t = DMatrix::from_row_slice(5, 5, &[
            2.0, 1.0, 0.5, 0.0, 3.0,
            0.0, 0.0, -2.0, 1.0, 0.0,
            0.0, 0.5, 0.0, 4.0, 1.0,
            0.0, 0.0, 0.0, 1.0, 3.0,
            0.0, 0.0, 0.0, 1.0, 1.0,
        ]);
        let ev = quasi_triangular_eigenvalues(&t);
        let expected = [
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0 + 3f64.sqrt(), 0.0),
            Complex64::new(1.0 - 3f64.sqrt(), 0.0),
        ];
        for (a, b) in ev.iter().zip(expected) {
            assert!((a - b).norm() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn conjugated_canonical_symbol_has_finite_spectrum() {
        // this input once produced a NaN eigenvalue and a stalled SVD
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(6, 6, &[
            -0.0533905427134496, -0.20219635303732286, -0.26761794546182166, 0.5780348090282104, 0.03385767087343086, -0.6041681262653286,
            -0.3395118062325945, 0.40360275683243996, 0.5583413689737603, 0.5149602163740631, -0.2655146993403453, -0.06317212272454854,
            -0.11297060524143838, 0.3170098064787414, -0.7518179615862249, 0.08699164568080958, -0.32519196436032516, -0.021978981076824184,
            0.6090152512114588, 0.6017369444982534, -0.06518604612338492, 0.26264364075367297, 0.11377578594293825, 0.26671515313687566,
            -0.4338122267729197, 0.23092755068695198, -0.06236623898611755, -0.2937738574656221, -0.47707095821698964, 0.14177048638377193,
            -0.4592899750020771, -0.12553575881608545, -0.20636682365792403, 0.37234131995257796, 0.45315597935036234, 0.6160330649305512,
        ]);
        let es = eigen_structure(&m).unwrap();
        assert!(es.clusters.iter().all(|c| c.value.re.is_finite() && c.value.im.is_finite()));
    }
}
