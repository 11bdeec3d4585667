use alloc::boxed::Box;
use alloc::string::String;

use crate::evolution::DiagnosticsSeries;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("phase space dimension must be even and nonzero, got {0}")]
    OddDimension(usize),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("cosymplectic form is not antisymmetric (defect {0:e})")]
    NotAntisymmetric(f64),

    #[error("velocity Hessian is not symmetric (relative defect {0:e})")]
    AsymmetricHessian(f64),

    #[error("configuration space is empty")]
    EmptyConfiguration,

    #[error("Hessian rank is not constant over the samples (observed {min}..={max})")]
    RankNotConstant { min: usize, max: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "commutation matrix is singular, gauge not fully fixed \
         (smallest singular value {smallest:e}, largest {largest:e})"
    )]
    GaugeNotFixed { smallest: f64, largest: f64 },

    #[error("consistency chain did not terminate within {0} generations")]
    ChainDidNotTerminate(usize),

    #[error("inconsistent dynamics: {0}")]
    InconsistentDynamics(String),

    #[error("surface sampler failed: {0}")]
    SamplerFailed(String),

    #[error(
        "ambiguous classification of `{label}`: bracket magnitude {magnitude:e} \
         lies within a decade of the tolerance {tolerance:e}"
    )]
    AmbiguousClassification {
        label: String,
        magnitude: f64,
        tolerance: f64,
    },

    #[error("grid mismatch: expected {expected} points per axis, found {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("polarization is not transverse to the mode (e.m = {0:e})")]
    NonTransversePolarization(f64),

    #[error("trajectory became non-finite; last good time t = {last_good_time}")]
    TrajectoryDiverged { last_good_time: f64 },

    #[error("state became non-finite; last good time t = {last_good_time}")]
    Diverged {
        last_good_time: f64,
        series: Box<DiagnosticsSeries>,
    },
}
