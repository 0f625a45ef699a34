//! Infinitesimal dynamics of group elements on flag manifolds.
//!
//! The tangent space of `Flag(τ_mod)` at a flag with frame `F` is identified
//! with block-strictly-lower matrices `L` (rows in a later block than columns)
//! through the curve `F exp(s(L - Lᵀ))`, with the Frobenius norm. This metric
//! is invariant under `SO(n)`. Writing `gF = F'R` with `R` upper triangular,
//! the differential of `g` is `L ↦ blocklower(R L R⁻¹)` in the frame `F'`.

use alloc::vec::Vec;

use rand::Rng;

use crate::cartan::{CartanVector, FaceType, GroupElement, Point};
use crate::error::{Error, Result};
use crate::flags::{flag_distance, group_shadow, is_opposite, Flag};
use crate::linalg::{qr, singular_values, upper_triangular_inverse, Mat};
use crate::real::Real;
use crate::sample;
use crate::tolerance::Tolerances;
use crate::words::{Letter, Representation};

/// Matrix of the differential in the orthonormal basis `E_{rc}` of the
/// tangent spaces, together with the image flag.
#[derive(Clone, Debug)]
pub struct Differential<T: Real = f64> {
    pub matrix: Mat<T>,
    pub image: Flag<T>,
}

/// Index pairs `(r, c)` spanning the tangent space of a face.
pub fn tangent_coordinates(face: &FaceType) -> Vec<(usize, usize)> {
    let n = face.n();
    let mut out = Vec::with_capacity(face.manifold_dim());
    for c in 0..n {
        for r in c + 1..n {
            if face.block_of(r) > face.block_of(c) {
                out.push((r, c));
            }
        }
    }
    out
}

pub fn differential<T: Real>(g: &GroupElement<T>, tau: &Flag<T>) -> Differential<T> {
    let (frame, r) = qr(&g.matrix().matmul(tau.frame())).expect("invertible image of a frame");
    let r_inv = upper_triangular_inverse(&r);
    let coords = tangent_coordinates(tau.face());
    let d = coords.len();
    let matrix = Mat::from_fn(d, d, |out, inp| {
        let (i, j) = coords[out];
        let (a, b) = coords[inp];
        r[(i, a)].clone() * &r_inv[(b, j)]
    });
    let image = Flag::new(frame, tau.face().clone(), &Tolerances { frame: f64::INFINITY, ..Tolerances::default() })
        .expect("frame from a QR factorisation");
    Differential { matrix, image }
}

/// `log ε(g, τ) = -log ‖d(g⁻¹)_{gτ}‖` for the `SO(n)`-invariant metric.
pub fn log_expansion_factor<T: Real>(g: &GroupElement<T>, tau: &Flag<T>) -> f64 {
    let image = differential(g, tau).image;
    let back = differential(&g.inverse(), &image);
    let norm = singular_values(&back.matrix).into_iter().next().unwrap_or_else(T::one);
    -norm.ln().to_f64()
}

/// Expansion factor `ε(g, τ) = ‖(dg_τ)⁻¹‖⁻¹`.
pub fn expansion_factor<T: Real>(g: &GroupElement<T>, tau: &Flag<T>) -> f64 {
    libm::exp(log_expansion_factor(g, tau))
}

/// `log ε` for the metric invariant under the stabiliser of `basepoint`.
pub fn log_expansion_factor_at<T: Real>(g: &GroupElement<T>, tau: &Flag<T>, basepoint: &Point<T>) -> f64 {
    let h = basepoint.sqrt_element();
    let h_inv = GroupElement::from_mat_unchecked(basepoint.inv_sqrt());
    let conj = h_inv.mul(g).mul(&h);
    log_expansion_factor(&conj, &tau.translate(&h_inv))
}

/// Eigenvalues `e^{-(a_i - a_j)}`, `i < j` in different blocks, of the
/// differential of `exp(diag a)` at the standard flag; ascending.
pub fn transvection_spectrum(a: &CartanVector, face: &FaceType) -> Vec<f64> {
    let e = a.entries();
    let mut out: Vec<f64> = tangent_coordinates(face).iter().map(|&(r, c)| libm::exp(-(e[c] - e[r]))).collect();
    out.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionReport {
    /// `(n, log ε(ρ(q(n))⁻¹, τ))` for the prefixes `q(n)` of the ray.
    pub series: Vec<(usize, f64)>,
    pub slope: f64,
    pub intercept: f64,
    /// Whether the series never decreases.
    pub monotone: bool,
}

/// Least-squares line through `(x, y)` samples.
pub fn fit_line(points: &[(f64, f64)]) -> (f64, f64) {
    let m = points.len() as f64;
    if points.len() < 2 {
        return (0.0, points.first().map_or(0.0, |p| p.1));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Growth of expansion factors of `ρ(q(n))⁻¹` at `τ` along a word ray, with
/// the metric based at the representation's basepoint.
pub fn expansion_report<T: Real>(rep: &Representation<T>, ray: &[Letter], tau: &Flag<T>) -> Result<ExpansionReport> {
    if tau.dim() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), found: tau.dim() });
    }
    let mut inv = GroupElement::identity(rep.dim());
    let mut series = Vec::with_capacity(ray.len());
    for (i, &l) in ray.iter().enumerate() {
        if l.generator >= rep.rank() {
            return Err(Error::InputError(alloc::format!("letter {l} exceeds rank {}", rep.rank())));
        }
        inv = rep.letter(l.inv()).mul(&inv);
        series.push((i + 1, log_expansion_factor_at(&inv, tau, rep.basepoint())));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(n, v)| (n as f64, v)).collect();
    let (slope, intercept) = fit_line(&pts);
    let monotone = series.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9);
    Ok(ExpansionReport { series, slope, intercept, monotone })
}

#[derive(Clone, Debug, PartialEq)]
pub enum ContractionStatus {
    Measured {
        /// Largest pairwise distance among the images of the probes.
        image_diameter: f64,
        /// Largest distance from an image to the attracting shadow.
        shadow_agreement: f64,
    },
    /// The element is too close to singular for shadows to be read off.
    Rejected(Error),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionEntry {
    pub index: usize,
    pub status: ContractionStatus,
}

/// Minimum opposition margin of probe flags to the repelling shadow.
pub const PROBE_OPPOSITION_MARGIN: f64 = 0.1;

/// Images under each element of seeded probe flags opposite to the shadow of
/// its inverse, compared with the element's own shadow.
pub fn contraction_diagnostic<T: Real>(
    elements: &[GroupElement<T>],
    face: &FaceType,
    basepoint: &Point<T>,
    probes: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<ContractionEntry>> {
    let mut rng = sample::rng(seed);
    let mut out = Vec::with_capacity(elements.len());
    for (index, g) in elements.iter().enumerate() {
        let shadows = group_shadow(&g.inverse(), basepoint, face, tol)
            .and_then(|minus| Ok((minus, group_shadow(g, basepoint, face, tol)?)));
        let (minus, plus) = match shadows {
            Ok(pair) => pair,
            Err(e @ (Error::NearSingularMargin { .. } | Error::DegenerateSegment)) => {
                out.push(ContractionEntry { index, status: ContractionStatus::Rejected(e) });
                continue;
            }
            Err(e) => return Err(e),
        };
        let images = probe_images(g, &minus, probes, &mut rng, tol)?;
        let mut image_diameter = 0.0f64;
        let mut shadow_agreement = 0.0f64;
        for (i, a) in images.iter().enumerate() {
            shadow_agreement = shadow_agreement.max(flag_distance(a, &plus)?);
            for b in &images[i + 1..] {
                image_diameter = image_diameter.max(flag_distance(a, b)?);
            }
        }
        out.push(ContractionEntry { index, status: ContractionStatus::Measured { image_diameter, shadow_agreement } });
    }
    Ok(out)
}

fn probe_images<T: Real, R: Rng>(
    g: &GroupElement<T>,
    repelling: &Flag<T>,
    probes: usize,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<Vec<Flag<T>>> {
    let mut images = Vec::with_capacity(probes);
    let mut attempts = 0;
    while images.len() < probes {
        attempts += 1;
        if attempts > 1000 * probes.max(1) {
            return Err(Error::NoConvergence { iterations: attempts, residual: 0.0 });
        }
        let probe: Flag<T> = sample::random_flag(repelling.face(), rng).lift();
        if is_opposite(&probe, repelling, tol)?.margin >= PROBE_OPPOSITION_MARGIN {
            images.push(probe.translate(g));
        }
    }
    Ok(images)
}
