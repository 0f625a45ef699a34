//! Partial flags, opposition, shadows of segments, ζ-directions and ζ-angles.
//!
//! A flag is stored as an orthonormal frame; the subspace of dimension `k`
//! is the span of its first `k` columns. Only the dimensions listed by the
//! flag's face carry meaning.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::cartan::{relative, CartanVector, FaceType, GroupElement, Point};
use crate::error::{Error, Result};
use crate::linalg::{qr, singular_values, Mat};
use crate::real::Real;
use crate::tolerance::Tolerances;

#[derive(Clone, Debug)]
pub struct Flag<T: Real = f64> {
    frame: Mat<T>,
    face: FaceType,
}

impl<T: Real> Flag<T> {
    /// Validates that `frame` is square of the face's size with orthonormal columns.
    pub fn new(frame: Mat<T>, face: FaceType, tol: &Tolerances) -> Result<Self> {
        if !frame.is_square() || frame.rows() != face.n() {
            return Err(Error::DimensionMismatch { expected: face.n(), found: frame.cols() });
        }
        let defect = frame.orthonormality_defect().to_f64();
        if !(defect <= tol.frame) {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(Flag { frame, face })
    }

    /// Flag whose subspaces are the column-prefix spans of an invertible basis.
    pub fn from_basis(basis: &Mat<T>, face: FaceType) -> Result<Self> {
        if !basis.is_square() || basis.rows() != face.n() {
            return Err(Error::DimensionMismatch { expected: face.n(), found: basis.cols() });
        }
        let (q, _) = qr(basis).ok_or(Error::DegenerateVector)?;
        Ok(Flag { frame: q, face })
    }

    /// `span(e₁) ⊂ span(e₁, e₂) ⊂ …`.
    pub fn standard(face: FaceType) -> Self {
        Flag { frame: Mat::identity(face.n()), face }
    }

    /// `span(e_n) ⊂ span(e_n, e_{n-1}) ⊂ …`, opposite to the standard flag.
    pub fn reversed(face: FaceType) -> Self {
        Flag { frame: Mat::identity(face.n()).reverse_columns(), face }
    }

    pub fn frame(&self) -> &Mat<T> {
        &self.frame
    }

    pub fn face(&self) -> &FaceType {
        &self.face
    }

    pub fn dim(&self) -> usize {
        self.face.n()
    }

    /// Orthonormal basis of the `k`-dimensional member.
    pub fn subspace(&self, k: usize) -> Mat<T> {
        self.frame.columns(0, k)
    }

    /// `g · τ`: the column-space image, re-orthonormalised.
    pub fn translate(&self, g: &GroupElement<T>) -> Flag<T> {
        let moved = g.matrix().matmul(&self.frame);
        let (q, _) = qr(&moved).expect("invertible image of a frame");
        Flag { frame: q, face: self.face.clone() }
    }

    /// Image under a general invertible matrix, re-orthonormalised.
    pub(crate) fn transform(&self, m: &Mat<T>) -> Flag<T> {
        let (q, _) = qr(&m.matmul(&self.frame)).expect("invertible image of a frame");
        Flag { frame: q, face: self.face.clone() }
    }

    pub fn to_f64(&self) -> Flag<f64> {
        Flag { frame: self.frame.to_f64(), face: self.face.clone() }
    }

    pub fn lift<U: Real>(&self) -> Flag<U> {
        Flag { frame: self.frame.lift(), face: self.face.clone() }
    }
}

/// An ι-invariant unit type in the open face: a chamber vector constant on
/// the blocks of the face and strictly decreasing across them.
#[derive(Clone, Debug, PartialEq)]
pub struct ZetaType {
    weights: CartanVector,
    face: FaceType,
}

impl ZetaType {
    pub fn new(weights: CartanVector, face: FaceType) -> Result<Self> {
        if weights.dim() != face.n() {
            return Err(Error::DimensionMismatch { expected: face.n(), found: weights.dim() });
        }
        face.require_iota_invariant()?;
        let w = weights.entries();
        if (weights.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCartanVector("zeta type must have unit norm"));
        }
        if weights.distance(&weights.iota()) > 1e-9 {
            return Err(Error::InvalidCartanVector("zeta type must be iota-invariant"));
        }
        for (i, pair) in w.windows(2).enumerate() {
            let boundary = face.dims().contains(&(i + 1));
            let gap = pair[0] - pair[1];
            if boundary && gap <= 1e-12 || !boundary && gap.abs() > 1e-9 {
                return Err(Error::InvalidCartanVector("zeta type must be constant on blocks and decrease across them"));
            }
        }
        Ok(ZetaType { weights, face })
    }

    pub fn weights(&self) -> &CartanVector {
        &self.weights
    }

    pub fn face(&self) -> &FaceType {
        &self.face
    }

    /// Value of the type on each block of the face.
    pub fn block_values(&self) -> Vec<f64> {
        self.face.blocks().iter().map(|&(s, _)| self.weights.entries()[s]).collect()
    }
}

/// Normalised sum of the fundamental coweights `ϖ_k`, `k` in the face.
pub fn canonical_zeta(face: &FaceType) -> Result<ZetaType> {
    face.require_iota_invariant()?;
    let n = face.n();
    let mut w = alloc::vec![0.0; n];
    for &k in face.dims() {
        for (i, v) in w.iter_mut().enumerate() {
            *v += if i < k { (n - k) as f64 / n as f64 } else { -(k as f64) / n as f64 };
        }
    }
    let norm = libm::sqrt(w.iter().map(|v| v * v).sum());
    w.iter_mut().for_each(|v| *v /= norm);
    // exact ι-symmetrisation removes rounding asymmetry
    let sym: Vec<f64> = (0..n).map(|i| 0.5 * (w[i] - w[n - 1 - i])).collect();
    ZetaType::new(CartanVector::new(sym)?, face.clone())
}

/// Shadow `τ(pq)` of the segment from `p` through `q` at infinity, of the given type.
pub fn flag_shadow<T: Real>(p: &Point<T>, q: &Point<T>, face: &FaceType, tol: &Tolerances) -> Result<Flag<T>> {
    Ok(shadow_with_cartan(p, q, face, tol)?.0)
}

/// Shadow together with the Cartan vector of the segment.
pub(crate) fn shadow_with_cartan<T: Real>(
    p: &Point<T>,
    q: &Point<T>,
    face: &FaceType,
    tol: &Tolerances,
) -> Result<(Flag<T>, CartanVector)> {
    if face.n() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: face.n() });
    }
    let rel = relative(p, q)?;
    let a = rel.cartan()?;
    if a.norm() <= tol.margin_floor {
        return Err(Error::DegenerateSegment);
    }
    let margin = crate::cartan::regularity_margin(&a, face);
    if margin <= tol.margin_floor {
        return Err(Error::NearSingularMargin { margin, floor: tol.margin_floor });
    }
    let moved = rel.p_sqrt.matmul(&rel.eig.vectors);
    let (frame, _) = qr(&moved).ok_or(Error::DegenerateSegment)?;
    Ok((Flag { frame, face: face.clone() }, a))
}

/// Shadow of the orbit segment from `basepoint` to `g · basepoint`.
pub fn group_shadow<T: Real>(
    g: &GroupElement<T>,
    basepoint: &Point<T>,
    face: &FaceType,
    tol: &Tolerances,
) -> Result<Flag<T>> {
    flag_shadow(basepoint, &basepoint.translate(g), face, tol)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Opposition {
    pub opposite: bool,
    /// Smallest singular value of the pairing blocks; 1 for orthogonal complements.
    pub margin: f64,
}

fn opposition_margin<T: Real>(a: &Flag<T>, b: &Flag<T>) -> Result<f64> {
    if a.face != b.face && a.face != b.face.iota() {
        return Err(Error::FaceMismatch);
    }
    let n = a.dim();
    let mut margin = f64::INFINITY;
    for &k in a.face.dims() {
        let lead = a.frame.columns(0, k);
        let tail = b.frame.columns(n - k, n);
        let pairing = tail.tr_matmul(&lead);
        let smallest = singular_values(&pairing).last().cloned().unwrap_or_else(T::zero);
        margin = margin.min(smallest.to_f64());
    }
    Ok(margin)
}

/// Transversality `V_k(τ₁) ⊕ V_{n-k}(τ₂) = Rⁿ` for every `k` of the face.
pub fn is_opposite<T: Real>(t1: &Flag<T>, t2: &Flag<T>, tol: &Tolerances) -> Result<Opposition> {
    let margin = opposition_margin(t1, t2)?.min(opposition_margin(t2, t1)?);
    Ok(Opposition { opposite: margin > tol.flag, margin })
}

/// Forgets the subspaces not in `sub`.
pub fn face_of<T: Real>(tau: &Flag<T>, sub: &FaceType) -> Result<Flag<T>> {
    if !sub.is_subface_of(&tau.face) {
        return Err(Error::NotASubface);
    }
    Ok(Flag { frame: tau.frame.clone(), face: sub.clone() })
}

/// Largest principal angle between two subspaces with orthonormal bases.
pub(crate) fn largest_principal_angle<T: Real>(a: &Mat<T>, b: &Mat<T>) -> f64 {
    let cross = a.tr_matmul(b);
    let cos_min = singular_values(&cross).last().cloned().unwrap_or_else(T::zero).to_f64();
    let residual = b.sub(&a.matmul(&cross));
    let sin_max = singular_values(&residual).first().cloned().unwrap_or_else(T::zero).to_f64();
    libm::atan2(sin_max, cos_min)
}

/// `max_k` of the largest principal angle between `V_k(τ₁)` and `V_k(τ₂)`.
pub fn flag_distance<T: Real>(t1: &Flag<T>, t2: &Flag<T>) -> Result<f64> {
    if t1.face != t2.face {
        return Err(Error::FaceMismatch);
    }
    Ok(t1
        .face
        .dims()
        .iter()
        .map(|&k| largest_principal_angle(&t1.subspace(k), &t2.subspace(k)))
        .fold(0.0, f64::max))
}

/// Unit direction at `x` of the ray toward the ideal point of type `ζ` in `τ`,
/// in the frame at `x` normalised by `x^{1/2}` (the actual tangent vector is
/// `x^{1/2} A x^{1/2}`). Its trace-form norm is one.
pub fn zeta_direction<T: Real>(x: &Point<T>, tau: &Flag<T>, zeta: &ZetaType) -> Result<Mat<T>> {
    if tau.face != zeta.face {
        return Err(Error::FaceMismatch);
    }
    let pulled = tau.transform(&x.inv_sqrt());
    Ok(direction_in_frame(&pulled.frame, zeta))
}

/// `Σ_j c_j P_j` for the block projectors of an orthonormal frame.
pub(crate) fn direction_in_frame<T: Real>(frame: &Mat<T>, zeta: &ZetaType) -> Mat<T> {
    let diag: Vec<T> = zeta.weights.entries().iter().map(|&v| T::from_f64(v)).collect();
    frame.congruence(&Mat::from_diagonal(&diag))
}

/// Angle between two unit traceless symmetric directions under the trace
/// form, computed from chord lengths so that values near 0 and near π keep
/// full relative accuracy.
pub fn direction_angle<T: Real>(a: &Mat<T>, b: &Mat<T>) -> f64 {
    let cos = a.trace_product(b).to_f64();
    if cos >= 0.0 {
        let chord = a.sub(b).frobenius_norm().to_f64();
        2.0 * libm::asin((0.5 * chord).min(1.0))
    } else {
        PI - direction_defect(a, b)
    }
}

/// `π` minus the angle between two unit directions.
pub fn direction_defect<T: Real>(a: &Mat<T>, b: &Mat<T>) -> f64 {
    let chord = a.add(b).frobenius_norm().to_f64();
    2.0 * libm::asin((0.5 * chord).min(1.0))
}

/// ζ-angle `∠ₓ^ζ(τ₁, τ₂)`.
pub fn angle_zeta<T: Real>(x: &Point<T>, t1: &Flag<T>, t2: &Flag<T>, zeta: &ZetaType) -> Result<f64> {
    if t1.face != t2.face {
        return Err(Error::FaceMismatch);
    }
    Ok(direction_angle(&zeta_direction(x, t1, zeta)?, &zeta_direction(x, t2, zeta)?))
}

/// `π - ∠ₓ^ζ(τ₁, τ₂)`, accurate when the angle is close to `π`.
pub fn angle_zeta_defect<T: Real>(x: &Point<T>, t1: &Flag<T>, t2: &Flag<T>, zeta: &ZetaType) -> Result<f64> {
    if t1.face != t2.face {
        return Err(Error::FaceMismatch);
    }
    Ok(direction_defect(&zeta_direction(x, t1, zeta)?, &zeta_direction(x, t2, zeta)?))
}

/// Unit direction of the segment `xy` at `x` in the normalised frame.
pub fn log_direction<T: Real>(x: &Point<T>, y: &Point<T>) -> Result<Mat<T>> {
    let rel = relative(x, y)?;
    let log = rel.log_matrix()?;
    let norm = log.frobenius_norm();
    if norm.to_f64() <= 1e-300 || rel.cartan()?.norm() == 0.0 {
        return Err(Error::DegenerateSegment);
    }
    Ok(log.scale(&(T::one() / norm)))
}

/// Angle at `x` between the ray toward `ζ(τ)` and the segment `xy`.
pub fn angle_zeta_point<T: Real>(x: &Point<T>, tau: &Flag<T>, y: &Point<T>, zeta: &ZetaType) -> Result<f64> {
    let dir = log_direction(x, y)?;
    Ok(direction_angle(&zeta_direction(x, tau, zeta)?, &dir))
}
