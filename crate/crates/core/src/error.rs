use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("matrix is not symmetric (residual {residual:e})")]
    NotSymmetric { residual: f64 },
    #[error("determinant {det} is not 1 within tolerance")]
    DeterminantNotOne { det: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("vector is zero; its type is undefined")]
    DegenerateVector,
    #[error("Cartan vector invalid: {0}")]
    InvalidCartanVector(&'static str),
    #[error("face {dims:?} is not a valid face of the chamber in dimension {n}")]
    InvalidFace { n: usize, dims: Vec<usize> },
    #[error("face {dims:?} is not invariant under the opposition involution")]
    NotIotaInvariant { dims: Vec<usize> },
    #[error("segment regularity margin {margin:e} is below the floor {floor:e}")]
    NearSingularMargin { margin: f64, floor: f64 },
    #[error("segment endpoints coincide")]
    DegenerateSegment,
    #[error("flags have different face types")]
    FaceMismatch,
    #[error("requested face is not a subface of the flag type")]
    NotASubface,
    #[error("frame columns are not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error("flags are not opposite (margin {margin:e})")]
    NotOpposite { margin: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("segment is not Theta-regular (root margin {margin} < {required})")]
    NotThetaRegular { margin: f64, required: f64 },
    #[error("path has {len} points; at least {required} are needed")]
    PathTooShort { len: usize, required: usize },
    #[error("flag stabilisation failed up to power {max_power}")]
    PowerStabilizationFailed { max_power: u32 },
    #[error("condition number 10^{log10_condition:.1} exceeds the limit 10^{limit:.1} at path index {index}")]
    NumericalBlowup { index: usize, log10_condition: f64, limit: f64 },
    #[error("invalid input: {0}")]
    InputError(String),
}
