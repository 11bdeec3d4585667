//! Small constrained systems with hand-derived constraint structure.
//!
//! Phase-space ordering is `(q1, .., qN, p1, .., pN)` throughout.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

#[allow(unused_imports)]
use num_traits::Float;

use crate::constraint::{Constraint, ConstraintSet};
use crate::phase::{HamiltonianSystem, LagrangianSystem, PhaseFunction};

/// The named toy Lagrangians exposed by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToyModel {
    /// `L = (qdot1 - q2)^2 / 2`, `H = p1^2 / 2 + q2 p1`, primary `p2`.
    ChainDemo,
    /// `L = qdot1 q2`, `H = 0`, primaries `p1 - q2` and `p2`.
    SecondClassDemo,
    /// `L = (qdot1^2 + qdot2^2) / 2`, no primaries.
    RegularDemo,
}

impl ToyModel {
    pub const ALL: [ToyModel; 3] = [Self::ChainDemo, Self::SecondClassDemo, Self::RegularDemo];

    pub fn name(self) -> &'static str {
        match self {
            Self::ChainDemo => "chain-demo",
            Self::SecondClassDemo => "second-class-demo",
            Self::RegularDemo => "regular-demo",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn lagrangian(self) -> LagrangianSystem {
        match self {
            Self::ChainDemo => LagrangianSystem::new(2, |q, v| 0.5 * (v[0] - q[1]) * (v[0] - q[1]))
                .with_hessian(|_, _| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])),
            Self::SecondClassDemo => {
                LagrangianSystem::new(2, |q, v| v[0] * q[1]).with_hessian(|_, _| DMatrix::zeros(2, 2))
            }
            Self::RegularDemo => LagrangianSystem::new(2, |_, v| 0.5 * (v[0] * v[0] + v[1] * v[1]))
                .with_hessian(|_, _| DMatrix::identity(2, 2)),
        }
    }

    pub fn hamiltonian(self) -> HamiltonianSystem {
        let h = match self {
            Self::ChainDemo => PhaseFunction::new(
                "p1^2/2 + q2 p1",
                |z| 0.5 * z[2] * z[2] + z[1] * z[2],
                |z| vec![0.0, z[2], z[2] + z[1], 0.0],
            ),
            Self::SecondClassDemo => PhaseFunction::constant(0.0, 4),
            Self::RegularDemo => PhaseFunction::new(
                "(p1^2 + p2^2)/2",
                |z| 0.5 * (z[2] * z[2] + z[3] * z[3]),
                |z| vec![0.0, 0.0, z[2], z[3]],
            ),
        };
        HamiltonianSystem::canonical(2, h).expect("two degrees of freedom")
    }

    pub fn primaries(self) -> ConstraintSet {
        let list = match self {
            Self::ChainDemo => vec![Constraint::primary(PhaseFunction::coordinate(3, 4, "p2"))],
            Self::SecondClassDemo => vec![
                Constraint::primary(PhaseFunction::linear(vec![0.0, -1.0, 1.0, 0.0], 0.0, "p1 - q2")),
                Constraint::primary(PhaseFunction::coordinate(3, 4, "p2")),
            ],
            Self::RegularDemo => Vec::new(),
        };
        ConstraintSet::new(4, list).expect("even dimension")
    }
}

/// `H = (q^2 + p^2) / 2` with one degree of freedom.
pub fn harmonic_oscillator() -> HamiltonianSystem {
    let h = PhaseFunction::new("(q^2 + p^2)/2", |z| 0.5 * (z[0] * z[0] + z[1] * z[1]), |z| vec![z[0], z[1]]);
    HamiltonianSystem::canonical(1, h).expect("one degree of freedom")
}

/// Nonlinear second-class pair on one degree of freedom:
/// `(q^2 + p^2)/2 - 1` and `atan2(p, q) - theta0` (wrapped to `(-pi, pi]`).
/// Their bracket is identically 1 away from the origin.
pub fn circle_pair(theta0: f64) -> ConstraintSet {
    let radius = PhaseFunction::new("(q^2 + p^2)/2 - 1", |z| 0.5 * (z[0] * z[0] + z[1] * z[1]) - 1.0, |z| vec![z[0], z[1]]);
    let angle = PhaseFunction::new(
        "atan2(p, q) - theta0",
        move |z| wrap_angle(z[1].atan2(z[0]) - theta0),
        |z| {
            let r2 = z[0] * z[0] + z[1] * z[1];
            vec![-z[1] / r2, z[0] / r2]
        },
    );
    ConstraintSet::new(2, vec![Constraint::primary(radius), Constraint::gauge_fixing(angle)]).expect("even dimension")
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut y = x % two_pi;
    if y > PI {
        y -= two_pi;
    } else if y <= -PI {
        y += two_pi;
    }
    y
}

/// Which magnetic energy the single-mode Coulomb surrogate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagneticEnergy {
    /// `|k|^2 |A|^2 / 2`, the vector-Laplacian form.
    Laplacian,
    /// `(|k|^2 |A|^2 - (k.A)^2) / 2 = |k x A|^2 / 2`.
    Curl,
}

/// One real Fourier mode of vacuum electrodynamics on `(A, pi)` in R^6 with
/// the Coulomb pair `C0 = k.pi`, `C1 = k.A`.
pub fn coulomb_mode(k: [f64; 3], magnetic: MagneticEnergy) -> (HamiltonianSystem, ConstraintSet) {
    let k2: f64 = k.iter().map(|x| x * x).sum();
    let dot = move |v: &[f64]| k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
    let curl_weight = if magnetic == MagneticEnergy::Curl { 1.0 } else { 0.0 };
    let h = PhaseFunction::new(
        "coulomb mode energy",
        move |z| {
            let a2: f64 = z[..3].iter().map(|x| x * x).sum();
            let p2: f64 = z[3..].iter().map(|x| x * x).sum();
            let ka = dot(&z[..3]);
            0.5 * (p2 + k2 * a2 - curl_weight * ka * ka)
        },
        move |z| {
            let ka = dot(&z[..3]);
            let mut g = vec![0.0; 6];
            for i in 0..3 {
                g[i] = k2 * z[i] - curl_weight * ka * k[i];
                g[3 + i] = z[3 + i];
            }
            g
        },
    );
    let system = HamiltonianSystem::canonical(3, h).expect("three degrees of freedom");
    let div_pi = PhaseFunction::linear(vec![0.0, 0.0, 0.0, k[0], k[1], k[2]], 0.0, "k.pi");
    let div_a = PhaseFunction::linear(vec![k[0], k[1], k[2], 0.0, 0.0, 0.0], 0.0, "k.A");
    let set = ConstraintSet::new(6, vec![Constraint::primary(div_pi), Constraint::gauge_fixing(div_a)])
        .expect("even dimension");
    (system, set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::{hessian_rank, CosymplecticForm, DEFAULT_RANK_TOL};

    #[test]
    fn names_round_trip() {
        for m in ToyModel::ALL {
            assert_eq!(ToyModel::from_name(m.name()), Some(m));
        }
        assert_eq!(ToyModel::from_name("nope"), None);
    }

    #[test]
    fn primary_count_matches_hessian_kernel() {
        for m in ToyModel::ALL {
            let r = hessian_rank(&m.lagrangian(), &[0.2, -0.3], &[0.5, 0.1], DEFAULT_RANK_TOL).unwrap();
            assert_eq!(2 - r.rank, m.primaries().len(), "{}", m.name());
        }
    }

    #[test]
    fn analytic_gradients_match_values() {
        let z = [0.3, -0.7, 1.1, 0.4];
        for m in ToyModel::ALL {
            assert!(m.hamiltonian().hamiltonian().gradient_defect(&z) < 1e-8);
            for c in m.primaries().iter() {
                assert!(c.function.gradient_defect(&z) < 1e-8);
            }
        }
        for c in circle_pair(0.4).iter() {
            assert!(c.function.gradient_defect(&[1.1, 0.3]) < 1e-8);
        }
        let (sys, set) = coulomb_mode([1.0, -2.0, 0.5], MagneticEnergy::Curl);
        let w = [0.1, 0.2, -0.3, 0.4, -0.5, 0.6];
        assert!(sys.hamiltonian().gradient_defect(&w) < 1e-8);
        for c in set.iter() {
            assert!(c.function.gradient_defect(&w) < 1e-8);
        }
    }

    #[test]
    fn circle_pair_bracket_is_one() {
        let set = circle_pair(0.0);
        let form = CosymplecticForm::canonical(1);
        let d = crate::constraint::commutation_matrix(&set, &[0.8, -1.3], &form).unwrap();
        assert!((d.entries()[(0, 1)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn angle_wraps_across_branch_cut() {
        let set = circle_pair(PI - 0.01);
        let just_past = [-(1.0_f64), -0.02];
        assert!(set.values(&just_past)[1].abs() < 0.05);
    }
}
