//! Weyl chamber arithmetic for type A_{n-1} and the symmetric space
//! X = SL(n,R)/SO(n) realised as determinant-one positive-definite matrices.
//!
//! A group element `g` acts by `p ↦ g p gᵀ`. The vector-valued distance from
//! `p` to `q` is the descending vector of logarithms of the eigenvalues of
//! `p^{-1/2} q p^{-1/2}`; its Euclidean norm is the Riemannian distance for
//! the trace-form metric.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, sym_eigen, Mat, SymEigen};
use crate::real::{Mp, Real};
use crate::tolerance::Tolerances;

/// A face of the model Weyl chamber, given by the dimensions `k` of the
/// subspaces a flag of this type carries (a subset of `{1, …, n-1}`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FaceType {
    n: usize,
    dims: Vec<usize>,
}

impl FaceType {
    pub fn new(n: usize, dims: Vec<usize>) -> Result<Self> {
        let valid = n >= 2
            && !dims.is_empty()
            && dims.iter().all(|&k| k >= 1 && k < n)
            && dims.windows(2).all(|w| w[0] < w[1]);
        if !valid {
            return Err(Error::InvalidFace { n, dims });
        }
        Ok(FaceType { n, dims })
    }

    /// Full flags: every dimension `1..n`.
    pub fn full(n: usize) -> Self {
        FaceType { n, dims: (1..n).collect() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn is_iota_invariant(&self) -> bool {
        self.dims.iter().all(|&k| self.dims.contains(&(self.n - k)))
    }

    pub fn require_iota_invariant(&self) -> Result<()> {
        if self.is_iota_invariant() {
            Ok(())
        } else {
            Err(Error::NotIotaInvariant { dims: self.dims.clone() })
        }
    }

    /// Image under the opposition involution `k ↦ n - k`.
    pub fn iota(&self) -> FaceType {
        let mut dims: Vec<usize> = self.dims.iter().map(|&k| self.n - k).collect();
        dims.sort_unstable();
        FaceType { n: self.n, dims }
    }

    pub fn is_subface_of(&self, other: &FaceType) -> bool {
        self.n == other.n && self.dims.iter().all(|k| other.dims.contains(k))
    }

    /// Index ranges `[start, end)` of the blocks cut out by the dimensions.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.dims.len() + 1);
        let mut start = 0;
        for &k in self.dims.iter().chain(core::iter::once(&self.n)) {
            out.push((start, k));
            start = k;
        }
        out
    }

    /// Block containing coordinate `i` (0-based).
    pub fn block_of(&self, i: usize) -> usize {
        self.dims.iter().take_while(|&&k| k <= i).count()
    }

    /// Dimension of the flag manifold of this type.
    pub fn manifold_dim(&self) -> usize {
        let blocks = self.blocks();
        let mut d = 0;
        for (i, &(s0, e0)) in blocks.iter().enumerate() {
            for &(s1, e1) in &blocks[i + 1..] {
                d += (e0 - s0) * (e1 - s1);
            }
        }
        d
    }
}

impl fmt::Display for FaceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.dims)
    }
}

/// A point of the closed model Weyl chamber: a weakly descending real vector
/// with zero sum.
#[derive(Clone, Debug, PartialEq)]
pub struct CartanVector(Vec<f64>);

impl CartanVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let n = entries.len();
        if n < 2 || entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCartanVector("needs at least two finite entries"));
        }
        let scale = 1.0 + entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if entries.windows(2).any(|w| w[0] < w[1] - 1e-12 * scale) {
            return Err(Error::InvalidCartanVector("entries are not weakly descending"));
        }
        let sum: f64 = entries.iter().sum();
        if sum.abs() > 1e-9 * n as f64 * scale.max(1.0) {
            return Err(Error::InvalidCartanVector("entries do not sum to zero"));
        }
        Ok(CartanVector(entries))
    }

    /// Sorts descending and removes the mean.
    pub fn from_unsorted(mut entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidCartanVector("non-finite entry"));
        }
        entries.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
        let mean = entries.iter().sum::<f64>() / entries.len() as f64;
        entries.iter_mut().for_each(|v| *v -= mean);
        CartanVector::new(entries)
    }

    pub fn zero(n: usize) -> Self {
        CartanVector(alloc::vec![0.0; n])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum())
    }

    /// Simple-root values `a_k - a_{k+1}`, `k = 1..n-1`.
    pub fn root_values(&self) -> Vec<f64> {
        self.0.windows(2).map(|w| w[0] - w[1]).collect()
    }

    /// The type of the vector: its normalisation to unit length.
    pub fn unit(&self) -> Result<CartanVector> {
        let norm = self.norm();
        if norm == 0.0 {
            return Err(Error::DegenerateVector);
        }
        Ok(CartanVector(self.0.iter().map(|v| v / norm).collect()))
    }

    pub fn scaled(&self, s: f64) -> CartanVector {
        CartanVector(self.0.iter().map(|v| v * s).collect())
    }

    /// Euclidean distance between two chamber vectors.
    pub fn distance(&self, other: &CartanVector) -> f64 {
        libm::sqrt(self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    pub fn iota(&self) -> CartanVector {
        iota(self)
    }
}

/// The opposition involution `ι = -w₀`: `ι(a)_i = -a_{n+1-i}`.
pub fn iota(a: &CartanVector) -> CartanVector {
    CartanVector(a.0.iter().rev().map(|v| -v).collect())
}

/// Euclidean distance from a chamber vector to the union of the walls
/// `{a_k = a_{k+1}}`, `k ∈ face`.
pub fn regularity_margin(a: &CartanVector, face: &FaceType) -> f64 {
    face.dims()
        .iter()
        .map(|&k| (a.0[k - 1] - a.0[k]) / core::f64::consts::SQRT_2)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// Smallest simple-root value over the face, evaluated on the unit type.
pub fn unit_root_margin(a: &CartanVector, face: &FaceType) -> Result<f64> {
    let norm = a.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateVector);
    }
    Ok(face
        .dims()
        .iter()
        .map(|&k| (a.0[k - 1] - a.0[k]) / norm)
        .fold(f64::INFINITY, f64::min))
}

/// `Θ = { v unit in the chamber : α_k(v) ≥ margin for every k in the face }`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaSet {
    face: FaceType,
    margin: f64,
}

impl ThetaSet {
    pub fn new(face: FaceType, margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin.is_finite()) {
            return Err(Error::InputError(alloc::format!("Theta margin must be positive, got {margin}")));
        }
        face.require_iota_invariant()?;
        Ok(ThetaSet { face, margin })
    }

    pub fn face(&self) -> &FaceType {
        &self.face
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Same face, different margin.
    pub fn with_margin(&self, margin: f64) -> Result<ThetaSet> {
        ThetaSet::new(self.face.clone(), margin)
    }

    pub fn contains(&self, a: &CartanVector) -> Result<bool> {
        theta_contains(self, a)
    }
}

pub fn theta_contains(theta: &ThetaSet, a: &CartanVector) -> Result<bool> {
    Ok(unit_root_margin(a, &theta.face)? >= theta.margin)
}

/// Determinant-one symmetric positive-definite matrix, stored with its
/// eigendecomposition.
#[derive(Clone, Debug)]
pub struct Point<T: Real = f64> {
    mat: Mat<T>,
    eig: SymEigen<T>,
}

impl<T: Real> Point<T> {
    pub fn new(mat: Mat<T>, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.rows(), found: mat.cols() });
        }
        let scale = T::one().max(mat.max_abs());
        let residual = (mat.asymmetry() / &scale).to_f64();
        if residual > tol.linalg {
            return Err(Error::NotSymmetric { residual });
        }
        let point = Point::from_spd(mat);
        let min = point.eig.values.last().cloned().unwrap_or_else(T::zero);
        if !(min > T::zero()) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min.to_f64() });
        }
        let log_det: f64 = point.eig.values.iter().map(|v| v.ln().to_f64()).sum();
        if (libm::exp(log_det) - 1.0).abs() > tol.linalg {
            return Err(Error::DeterminantNotOne { det: libm::exp(log_det) });
        }
        Ok(point)
    }

    /// Row-major doubles, validated with default tolerances.
    pub fn from_rows(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        Point::new(Mat::from_row_slice(n, n, values), &Tolerances::default())
    }

    /// Symmetrises and decomposes without validation.
    pub(crate) fn from_spd(mat: Mat<T>) -> Self {
        let mat = mat.symmetrized();
        let eig = sym_eigen(&mat);
        Point { mat, eig }
    }

    pub fn identity(n: usize) -> Self {
        Point::from_spd(Mat::identity(n))
    }

    /// `exp(A)` for a traceless symmetric `A`.
    pub fn exp_of(a: &Mat<T>) -> Self {
        let e = sym_eigen(&a.symmetrized());
        Point::from_spd(e.map(Real::exp))
    }

    /// `diag(e^{d_1}, …, e^{d_n})` for log-entries summing to zero.
    pub fn from_log_diagonal(logs: &[f64]) -> Self {
        let diag: Vec<T> = logs.iter().map(|&v| T::from_f64(v).exp()).collect();
        Point::from_spd(Mat::from_diagonal(&diag))
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.mat
    }

    pub fn eigen(&self) -> &SymEigen<T> {
        &self.eig
    }

    pub fn sqrt(&self) -> Mat<T> {
        self.eig.map(Real::sqrt)
    }

    pub fn inv_sqrt(&self) -> Mat<T> {
        self.eig.map(|v| T::one() / v.sqrt())
    }

    pub fn inverse(&self) -> Mat<T> {
        self.eig.map(|v| T::one() / v)
    }

    /// `log₁₀` of the condition number.
    pub fn log10_condition(&self) -> f64 {
        let hi = self.eig.values.first().cloned().unwrap_or_else(T::one);
        let lo = self.eig.values.last().cloned().unwrap_or_else(T::one);
        (hi.ln() - lo.ln()).to_f64() / core::f64::consts::LN_10
    }

    /// `g · p = g p gᵀ`.
    pub fn translate(&self, g: &GroupElement<T>) -> Point<T> {
        Point::from_spd(g.mat.congruence(&self.mat))
    }

    pub fn to_f64(&self) -> Point<f64> {
        Point::from_spd(self.mat.to_f64())
    }

    pub fn lift<U: Real>(&self) -> Point<U> {
        Point::from_spd(self.mat.lift())
    }

    /// A group element `h = p^{1/2}` with `h · I = p`.
    pub fn sqrt_element(&self) -> GroupElement<T> {
        GroupElement { mat: self.sqrt() }
    }
}

/// Real `n × n` matrix of determinant one acting on points by congruence.
#[derive(Clone, Debug)]
pub struct GroupElement<T: Real = f64> {
    mat: Mat<T>,
}

impl<T: Real> GroupElement<T> {
    pub fn new(mat: Mat<T>, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.rows(), found: mat.cols() });
        }
        let det = linalg::determinant(&mat).to_f64();
        if !((det - 1.0).abs() <= tol.linalg) {
            return Err(Error::DeterminantNotOne { det });
        }
        Ok(GroupElement { mat })
    }

    pub fn from_rows(n: usize, values: &[f64]) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, found: values.len() });
        }
        GroupElement::new(Mat::from_row_slice(n, n, values), &Tolerances::default())
    }

    pub(crate) fn from_mat_unchecked(mat: Mat<T>) -> Self {
        GroupElement { mat }
    }

    pub fn identity(n: usize) -> Self {
        GroupElement { mat: Mat::identity(n) }
    }

    /// `diag(e^{d_1}, …, e^{d_n})`.
    pub fn from_log_diagonal(logs: &[f64]) -> Self {
        let diag: Vec<T> = logs.iter().map(|&v| T::from_f64(v).exp()).collect();
        GroupElement { mat: Mat::from_diagonal(&diag) }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn matrix(&self) -> &Mat<T> {
        &self.mat
    }

    pub fn mul(&self, other: &GroupElement<T>) -> GroupElement<T> {
        GroupElement { mat: self.mat.matmul(&other.mat) }
    }

    pub fn inverse(&self) -> GroupElement<T> {
        GroupElement { mat: linalg::inverse(&self.mat).expect("determinant-one matrix is invertible") }
    }

    pub fn transpose(&self) -> GroupElement<T> {
        GroupElement { mat: self.mat.transpose() }
    }

    /// Integer power, negative exponents through the inverse.
    pub fn pow(&self, k: i64) -> GroupElement<T> {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = GroupElement::identity(self.dim());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// `h g h⁻¹`.
    pub fn conjugate_by(&self, h: &GroupElement<T>) -> GroupElement<T> {
        h.mul(self).mul(&h.inverse())
    }

    /// `log₁₀(σ_max / σ_min)`, evaluated at 1024 bits so that conditions
    /// far beyond the precision of `T` are still resolved. `σ_min` is read
    /// off the inverse; the Gram matrix alone would square the condition.
    pub fn log10_condition(&self) -> f64 {
        let wide = self.mat.lift::<Mp<1024>>();
        let inv = linalg::inverse(&wide).expect("determinant-one matrix is invertible");
        let hi = linalg::spectral_norm(&wide);
        let inv_hi = linalg::spectral_norm(&inv);
        (hi.ln() + inv_hi.ln()).to_f64() / core::f64::consts::LN_10
    }

    pub fn act(&self, p: &Point<T>) -> Point<T> {
        p.translate(self)
    }

    pub fn to_f64(&self) -> GroupElement<f64> {
        GroupElement { mat: self.mat.to_f64() }
    }

    pub fn lift<U: Real>(&self) -> GroupElement<U> {
        GroupElement { mat: self.mat.lift() }
    }
}

/// Relative position of `q` seen from `p`: `p^{1/2}` and the eigensystem of
/// `p^{-1/2} q p^{-1/2}`.
pub(crate) struct Relative<T: Real> {
    pub p_sqrt: Mat<T>,
    pub eig: SymEigen<T>,
}

pub(crate) fn relative<T: Real>(p: &Point<T>, q: &Point<T>) -> Result<Relative<T>> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: q.dim() });
    }
    let pis = p.inv_sqrt();
    let m = pis.congruence(&q.mat);
    Ok(Relative { p_sqrt: p.sqrt(), eig: sym_eigen(&m) })
}

impl<T: Real> Relative<T> {
    /// A non-positive eigenvalue means the relative position was lost to
    /// rounding; the precision is too low for this pair.
    fn require_positive(&self) -> Result<()> {
        match self.eig.values.last() {
            Some(v) if !(v > &T::zero()) => Err(Error::NotPositiveDefinite { min_eigenvalue: v.to_f64() }),
            _ => Ok(()),
        }
    }

    pub fn log_eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_positive()?;
        Ok(self.eig.values.iter().map(|v| v.ln().to_f64()).collect())
    }

    pub fn cartan(&self) -> Result<CartanVector> {
        CartanVector::from_unsorted(self.log_eigenvalues()?)
    }

    /// `log(p^{-1/2} q p^{-1/2})`: the direction of `pq` in the frame at `p`.
    pub fn log_matrix(&self) -> Result<Mat<T>> {
        self.require_positive()?;
        Ok(self.eig.map(|v| v.ln()))
    }
}

/// Vector-valued distance `d_Δ(p, q)`.
pub fn cartan_vector<T: Real>(p: &Point<T>, q: &Point<T>) -> Result<CartanVector> {
    relative(p, q)?.cartan()
}

pub fn riemannian_distance<T: Real>(p: &Point<T>, q: &Point<T>) -> Result<f64> {
    Ok(cartan_vector(p, q)?.norm())
}

/// Point at parameter `t` on the geodesic from `p` with direction `dir`
/// (expressed in the frame at `p`): `p^{1/2} exp(t·dir) p^{1/2}`.
pub fn geodesic_point<T: Real>(p: &Point<T>, dir: &Mat<T>, t: f64) -> Point<T> {
    let step = Point::exp_of(&dir.scale(&T::from_f64(t)));
    Point::from_spd(p.sqrt().congruence(step.matrix()))
}

/// Riemannian midpoint `p^{1/2} (p^{-1/2} q p^{-1/2})^{1/2} p^{1/2}`.
pub fn midpoint<T: Real>(p: &Point<T>, q: &Point<T>) -> Result<Point<T>> {
    let rel = relative(p, q)?;
    let half = rel.eig.map(Real::sqrt);
    Ok(Point::from_spd(rel.p_sqrt.congruence(&half)))
}
