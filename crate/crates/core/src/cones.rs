//! Parallel sets of opposite flag pairs, Θ-cones and Θ-diamonds.
//!
//! For opposite flags `τ₋, τ₊` of a face with dimensions `k₁ < … < k_m`
//! the space splits as `W₁ ⊕ … ⊕ W_{m+1}` with
//! `W_j = V_{k_j}(τ₊) ∩ V_{n-k_{j-1}}(τ₋)`. A point `x` lies in the parallel
//! set exactly when these subspaces are pairwise orthogonal for the inner
//! product `⟨u, v⟩ₓ = uᵀ x⁻¹ v`, i.e. `x = B S Bᵀ` with `B` an adapted basis
//! and `S` block diagonal.

use alloc::vec::Vec;

use crate::cartan::{cartan_vector, riemannian_distance, unit_root_margin, CartanVector, FaceType, Point, ThetaSet};
use crate::error::{Error, Result};
use crate::flags::{angle_zeta_defect, flag_distance, flag_shadow, is_opposite, Flag, ZetaType};
use crate::linalg::{determinant, inverse, sym_eigen, Mat};
use crate::real::Real;
use crate::tolerance::Tolerances;

const MAX_PROJECTION_ITERATIONS: usize = 10_000;
const PROJECTION_GRADIENT_TOL: f64 = 1e-8;
const TWO_START_AGREEMENT: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ParallelSetSpec<T: Real = f64> {
    tau_minus: Flag<T>,
    tau_plus: Flag<T>,
    /// Adapted basis: the columns of block `j` span `W_j`, orthonormally.
    basis: Mat<T>,
    blocks: Vec<(usize, usize)>,
}

impl<T: Real> ParallelSetSpec<T> {
    pub fn tau_minus(&self) -> &Flag<T> {
        &self.tau_minus
    }

    pub fn tau_plus(&self) -> &Flag<T> {
        &self.tau_plus
    }

    pub fn basis(&self) -> &Mat<T> {
        &self.basis
    }

    /// Orthonormal bases of the summands `W_j`.
    pub fn decomposition(&self) -> Vec<Mat<T>> {
        self.blocks.iter().map(|&(s, e)| self.basis.columns(s, e)).collect()
    }

    pub fn face(&self) -> &FaceType {
        self.tau_plus.face()
    }

    /// Largest normalised `x⁻¹`-inner product between different summands.
    pub fn residual(&self, x: &Point<T>) -> f64 {
        let gram = x.inverse().congruence_t(&self.basis);
        let n = self.basis.cols();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                if self.block_of(r) == self.block_of(c) {
                    continue;
                }
                let denom = (gram[(r, r)].clone() * &gram[(c, c)]).sqrt();
                worst = worst.max((gram[(r, c)].clone() / denom).abs().to_f64());
            }
        }
        worst
    }

    pub fn contains(&self, x: &Point<T>) -> bool {
        self.residual(x) < 1e-8
    }

    fn block_of(&self, i: usize) -> usize {
        self.blocks.iter().position(|&(s, e)| s <= i && i < e).unwrap_or(0)
    }

    /// The point `B S Bᵀ` for block-diagonal `S`, rescaled to determinant one.
    pub fn point_from_blocks(&self, s: &Mat<T>) -> Point<T> {
        let m = self.basis.congruence(s);
        normalize_det(m)
    }

    fn block_diagonal_part(&self, m: &Mat<T>) -> Mat<T> {
        let n = m.rows();
        Mat::from_fn(n, n, |r, c| if self.block_of(r) == self.block_of(c) { m[(r, c)].clone() } else { T::zero() })
    }
}

impl<T: Real> Mat<T> {
    /// `Bᵀ S B`.
    pub(crate) fn congruence_t(&self, b: &Mat<T>) -> Mat<T> {
        b.tr_matmul(&self.matmul(b)).symmetrized()
    }
}

fn normalize_det<T: Real>(m: Mat<T>) -> Point<T> {
    let n = m.rows();
    let e = sym_eigen(&m.symmetrized());
    let log_det = e.values.iter().fold(T::zero(), |acc, v| acc + v.ln());
    let factor = (-log_det / T::from_f64(n as f64)).exp();
    Point::from_spd(m.scale(&factor))
}

/// Parallel set `P(τ₋, τ₊)` of an opposite pair of flags.
pub fn parallel_set<T: Real>(tau_minus: &Flag<T>, tau_plus: &Flag<T>, tol: &Tolerances) -> Result<ParallelSetSpec<T>> {
    if tau_minus.face() != tau_plus.face() {
        return Err(Error::FaceMismatch);
    }
    let opp = is_opposite(tau_minus, tau_plus, tol)?;
    if !opp.opposite {
        return Err(Error::NotOpposite { margin: opp.margin });
    }
    let n = tau_plus.dim();
    let face = tau_plus.face().clone();
    let mut bounds: Vec<usize> = alloc::vec![0];
    bounds.extend_from_slice(face.dims());
    bounds.push(n);
    let mut parts = Vec::new();
    let mut blocks = Vec::new();
    for j in 1..bounds.len() {
        let (lo, hi) = (bounds[j - 1], bounds[j]);
        let plus = tau_plus.subspace(hi);
        let part = if lo == 0 {
            plus
        } else {
            // null space of the pairing with the orthogonal complement of V_{n-lo}(τ₋)
            let complement = tau_minus.frame().columns(n - lo, n);
            let pairing = complement.tr_matmul(&plus);
            let e = sym_eigen(&pairing.tr_matmul(&pairing));
            plus.matmul(&e.vectors.columns(lo, hi))
        };
        blocks.push((lo, hi));
        parts.push(part);
    }
    Ok(ParallelSetSpec {
        tau_minus: tau_minus.clone(),
        tau_plus: tau_plus.clone(),
        basis: Mat::hcat(&parts),
        blocks,
    })
}

#[derive(Clone, Debug)]
pub struct Projection<T: Real = f64> {
    pub point: Point<T>,
    pub distance: f64,
    pub iterations: usize,
    /// Norm of the projected gradient at the returned point.
    pub residual: f64,
}

struct Descent<T: Real> {
    s: Mat<T>,
    objective: T,
    gradient: Mat<T>,
}

/// Nearest point of the parallel set, by Riemannian gradient descent with
/// Armijo backtracking, confirmed from a second initialisation.
pub fn project_to_parallel_set<T: Real>(x: &Point<T>, set: &ParallelSetSpec<T>) -> Result<Projection<T>> {
    let n = x.dim();
    let b_inv = inverse(&set.basis).ok_or(Error::NotOpposite { margin: 0.0 })?;
    let det_b = determinant(&set.basis).abs();
    let unit_scale = (det_b.ln() * T::from_f64(-2.0 / n as f64)).exp();
    let first = descend(x, set, &b_inv, Mat::identity(n).scale(&unit_scale))?;
    let pulled = set.block_diagonal_part(&b_inv.congruence(x.matrix()));
    let second = descend(x, set, &b_inv, pulled)?;
    let gap = riemannian_distance(&first.point, &second.point)?;
    if gap > TWO_START_AGREEMENT {
        return Err(Error::NoConvergence { iterations: first.iterations + second.iterations, residual: gap });
    }
    Ok(if second.distance < first.distance { second } else { first })
}

fn descend<T: Real>(x: &Point<T>, set: &ParallelSetSpec<T>, b_inv: &Mat<T>, s0: Mat<T>) -> Result<Projection<T>> {
    let pulled = b_inv.congruence(x.matrix());
    let evaluate = |s: Mat<T>| -> Descent<T> {
        let e = sym_eigen(&s);
        let s_inv_sqrt = e.map(|v| T::one() / v.sqrt());
        let z = s_inv_sqrt.congruence(&pulled);
        let log_z = sym_eigen(&z).map(|v| v.clone().max(T::zero()).ln());
        let objective = log_z.trace_product(&log_z) * T::from_f64(0.5);
        let gradient = set.block_diagonal_part(&log_z);
        Descent { s, objective, gradient }
    };
    let mut cur = evaluate(s0);
    let mut iterations = 0;
    let mut step = 1.0;
    loop {
        let g2 = cur.gradient.trace_product(&cur.gradient);
        let gnorm = g2.clone().sqrt().to_f64();
        // the objective is resolved only to relative precision, so the
        // gradient threshold scales with the current distance
        let scale = (2.0 * cur.objective.to_f64()).sqrt().max(1.0);
        if gnorm < PROJECTION_GRADIENT_TOL * scale {
            break;
        }
        if iterations >= MAX_PROJECTION_ITERATIONS {
            return Err(Error::NoConvergence { iterations, residual: gnorm });
        }
        iterations += 1;
        let s_sqrt = sym_eigen(&cur.s).map(|v| v.sqrt());
        let trial = |t: f64| evaluate(s_sqrt.congruence(&sym_eigen(&cur.gradient.scale(&T::from_f64(t))).map(|v| v.exp())));
        let armijo = |cand: &Descent<T>, t: f64| cand.objective <= cur.objective.clone() - g2.clone() * T::from_f64(1e-4 * t);
        let mut t = step;
        let mut next = trial(t);
        if armijo(&next, t) {
            // expand while the objective keeps dropping
            loop {
                let bigger = trial(2.0 * t);
                if bigger.objective < next.objective && t < 1e6 {
                    t *= 2.0;
                    next = bigger;
                } else {
                    break;
                }
            }
        } else {
            while !armijo(&next, t) && t >= 1e-12 {
                t *= 0.5;
                next = trial(t);
            }
        }
        step = t;
        if t < 1e-12 {
            // no further decrease is representable at this precision
            let residual = cur.gradient.frobenius_norm().to_f64();
            return if residual < 1e2 * PROJECTION_GRADIENT_TOL * scale {
                finish(x, set, cur, iterations)
            } else {
                Err(Error::NoConvergence { iterations, residual })
            };
        }
        cur = next;
    }
    finish(x, set, cur, iterations)
}

fn finish<T: Real>(x: &Point<T>, set: &ParallelSetSpec<T>, cur: Descent<T>, iterations: usize) -> Result<Projection<T>> {
    let point = set.point_from_blocks(&cur.s);
    let distance = riemannian_distance(x, &point)?;
    Ok(Projection { point, distance, iterations, residual: cur.gradient.frobenius_norm().to_f64() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeReport {
    pub inside: bool,
    pub cartan: CartanVector,
    /// Smallest simple-root value of the unit type over the Θ face.
    pub root_margin: f64,
    /// Distance from the segment's shadow to `τ`; absent when the segment is
    /// too close to a wall for a shadow to be read off.
    pub flag_distance: Option<f64>,
}

/// Membership of `y` in the Θ-cone `V(x, st_Θ(τ))`.
pub fn in_theta_cone<T: Real>(
    x: &Point<T>,
    tau: &Flag<T>,
    y: &Point<T>,
    theta: &ThetaSet,
    tol: &Tolerances,
) -> Result<ConeReport> {
    if !theta.face().is_subface_of(tau.face()) {
        return Err(Error::NotASubface);
    }
    let cartan = cartan_vector(x, y)?;
    if cartan.norm() <= tol.margin_floor {
        return Err(Error::DegenerateSegment);
    }
    let root_margin = unit_root_margin(&cartan, theta.face())?;
    let flag_distance = match flag_shadow(x, y, tau.face(), tol) {
        Ok(shadow) => Some(flag_distance(&shadow, tau)?),
        Err(Error::NearSingularMargin { .. }) => None,
        Err(e) => return Err(e),
    };
    let inside = root_margin >= theta.margin() && flag_distance.is_some_and(|d| d <= tol.flag);
    Ok(ConeReport { inside, cartan, root_margin, flag_distance })
}

#[derive(Clone, Debug)]
pub struct DiamondReport<T: Real = f64> {
    pub inside: bool,
    pub projection: Point<T>,
    pub projection_distance: f64,
    /// Cone test of the projection from `x₋` toward `τ₊`; `None` at the tip itself.
    pub from_minus: Option<ConeReport>,
    /// Cone test of the projection from `x₊` toward `τ₋`; `None` at the tip itself.
    pub from_plus: Option<ConeReport>,
}

/// Cone test that treats the apex as a member.
fn cone_or_apex<T: Real>(
    x: &Point<T>,
    tau: &Flag<T>,
    y: &Point<T>,
    theta: &ThetaSet,
    tol: &Tolerances,
) -> Result<Option<ConeReport>> {
    match in_theta_cone(x, tau, y, theta, tol) {
        Ok(r) => Ok(Some(r)),
        Err(Error::DegenerateSegment) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Whether `y` is within `max_distance` of the Θ-diamond `◊_Θ(x₋, x₊)`,
/// judged by projecting to the parallel set of the segment and testing both
/// cones at the projection.
pub fn in_diamond<T: Real>(
    x_minus: &Point<T>,
    x_plus: &Point<T>,
    y: &Point<T>,
    theta: &ThetaSet,
    max_distance: f64,
    tol: &Tolerances,
) -> Result<DiamondReport<T>> {
    let a = cartan_vector(x_minus, x_plus)?;
    if a.norm() <= tol.margin_floor {
        return Err(Error::DegenerateSegment);
    }
    let margin = unit_root_margin(&a, theta.face())?;
    if margin < theta.margin() {
        return Err(Error::NotThetaRegular { margin, required: theta.margin() });
    }
    // the test is equivariant; flags read off at x₋ = I stay well conditioned
    let back = x_minus.sqrt_element();
    let to_origin = back.inverse();
    let origin = Point::identity(x_minus.dim());
    let (x_minus, x_plus, y) = (&origin, &x_plus.translate(&to_origin), &y.translate(&to_origin));
    let face = theta.face();
    let tau_plus = flag_shadow(x_minus, x_plus, face, tol)?;
    let tau_minus = flag_shadow(x_plus, x_minus, face, tol)?;
    let set = parallel_set(&tau_minus, &tau_plus, tol)?;
    let proj = project_to_parallel_set(y, &set)?;
    let from_minus = cone_or_apex(x_minus, &tau_plus, &proj.point, theta, tol)?;
    let from_plus = cone_or_apex(x_plus, &tau_minus, &proj.point, theta, tol)?;
    let cone_ok = |r: &Option<ConeReport>| r.as_ref().is_none_or(|r| r.inside);
    let inside = proj.distance <= max_distance && cone_ok(&from_minus) && cone_ok(&from_plus);
    Ok(DiamondReport { inside, projection: proj.point.translate(&back), projection_distance: proj.distance, from_minus, from_plus })
}

/// `π - ∠ₓ^ζ(τ₋, τ₊)`: vanishes exactly on the parallel set.
pub fn angle_distance_surrogate<T: Real>(
    x: &Point<T>,
    tau_minus: &Flag<T>,
    tau_plus: &Flag<T>,
    zeta: &ZetaType,
    tol: &Tolerances,
) -> Result<f64> {
    let opp = is_opposite(tau_minus, tau_plus, tol)?;
    if !opp.opposite {
        return Err(Error::NotOpposite { margin: opp.margin });
    }
    angle_zeta_defect(x, tau_minus, tau_plus, zeta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::{geodesic_point, midpoint, GroupElement};
    use crate::flags::{canonical_zeta, zeta_direction};
    use crate::sample;
    use alloc::vec;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn coordinate_parallel_set_is_diagonal() {
        let face = FaceType::full(3);
        let set = parallel_set(&Flag::<f64>::reversed(face.clone()), &Flag::standard(face.clone()), &tol()).unwrap();
        let basis = set.basis();
        for c in 0..3 {
            for r in 0..3 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((basis[(r, c)].abs() - expect).abs() < 1e-12);
            }
        }
        assert!(set.contains(&Point::from_log_diagonal(&[0.3, 0.5, -0.8])));
        let off = Point::<f64>::from_rows(3, &[1.0, 0.1, 0.0, 0.1, 1.0, 0.0, 0.0, 0.0, 1.0 / 0.99]).unwrap();
        assert!(!set.contains(&off));
    }

    #[test]
    fn equal_flags_have_no_parallel_set() {
        let face = FaceType::full(3);
        let f = Flag::<f64>::standard(face);
        assert!(matches!(parallel_set(&f, &f, &tol()), Err(Error::NotOpposite { .. })));
    }

    #[test]
    fn random_parallel_set_accepts_block_exponentials() {
        let mut rng = sample::rng(21);
        let face = FaceType::new(4, vec![1, 3]).unwrap();
        for _ in 0..20 {
            let tp = sample::random_flag(&face, &mut rng);
            let tm = sample::random_flag(&face, &mut rng);
            let set = parallel_set(&tm, &tp, &tol()).unwrap();
            let mut s = Mat::zeros(4, 4);
            for &(lo, hi) in &face.blocks() {
                let blk = sample::random_point(hi - lo, 1.0, &mut rng);
                for r in lo..hi {
                    for c in lo..hi {
                        s[(r, c)] = blk.matrix()[(r - lo, c - lo)];
                    }
                }
            }
            let x = set.point_from_blocks(&s);
            assert!(set.contains(&x), "residual {}", set.residual(&x));
            let proj = project_to_parallel_set(&x, &set).unwrap();
            assert!(proj.distance < 1e-7);
        }
    }

    #[test]
    fn projection_of_perturbed_identity() {
        let face = FaceType::full(3);
        let set = parallel_set(&Flag::<f64>::reversed(face.clone()), &Flag::standard(face.clone()), &tol()).unwrap();
        let x = Point::exp_of(&Mat::from_row_slice(3, 3, &[0.0, 0.05, 0.02, 0.05, 0.0, -0.03, 0.02, -0.03, 0.0]));
        let proj = project_to_parallel_set(&x, &set).unwrap();
        assert!(proj.distance > 0.0);
        assert!(set.contains(&proj.point));
        // gradient-free check: no diagonal point in a small neighbourhood is closer
        let mut rng = sample::rng(4);
        for _ in 0..200 {
            let d = sample::random_traceless(3, 1e-3, &mut rng);
            let mut logs = vec![0.0; 3];
            let diag = proj.point.matrix();
            for i in 0..3 {
                logs[i] = diag[(i, i)].ln() + d[i];
            }
            let q = Point::from_log_diagonal(&logs);
            assert!(riemannian_distance(&x, &q).unwrap() >= proj.distance - 1e-12);
        }
    }

    #[test]
    fn projection_is_equivariant_under_pair_stabiliser() {
        let face = FaceType::full(3);
        let set = parallel_set(&Flag::<f64>::reversed(face.clone()), &Flag::standard(face.clone()), &tol()).unwrap();
        let mut rng = sample::rng(8);
        let x = sample::random_point(3, 0.5, &mut rng);
        let g = GroupElement::<f64>::from_log_diagonal(&[0.7, -0.2, -0.5]);
        let a = project_to_parallel_set(&x, &set).unwrap();
        let b = project_to_parallel_set(&x.translate(&g), &set).unwrap();
        assert!(riemannian_distance(&a.point.translate(&g), &b.point).unwrap() < 1e-6);
        assert!((a.distance - b.distance).abs() < 1e-6);
    }

    #[test]
    fn cone_membership_along_rays() {
        let face = FaceType::full(3);
        let zeta = canonical_zeta(&face).unwrap();
        let theta = ThetaSet::new(face.clone(), 0.3).unwrap();
        let mut rng = sample::rng(13);
        for _ in 0..10 {
            let x = sample::random_point(3, 1.0, &mut rng);
            let tau = sample::random_flag(&face, &mut rng);
            let dir = zeta_direction(&x, &tau, &zeta).unwrap();
            let y = geodesic_point(&x, &dir, 2.0);
            assert!(in_theta_cone(&x, &tau, &y, &theta, &tol()).unwrap().inside);
            let z = geodesic_point(&x, &dir, -2.0);
            let r = in_theta_cone(&x, &tau, &z, &theta, &tol()).unwrap();
            assert!(!r.inside);
        }
        let x = Point::<f64>::identity(3);
        assert_eq!(
            in_theta_cone(&x, &Flag::standard(face.clone()), &x, &theta, &tol()).unwrap_err(),
            Error::DegenerateSegment
        );
    }

    #[test]
    fn diamond_tips_and_midpoint() {
        let face = FaceType::full(3);
        let theta = ThetaSet::new(face.clone(), 0.3).unwrap();
        let mut rng = sample::rng(17);
        let g = sample::random_group_element(3, 0.5, &mut rng);
        let xm = Point::<f64>::identity(3).translate(&g);
        let xp = Point::from_log_diagonal(&[2.0, 0.2, -2.2]).translate(&g);
        let mid = midpoint(&xm, &xp).unwrap();
        for y in [&xm, &xp, &mid] {
            let r = in_diamond(&xm, &xp, y, &theta, 1e-6, &tol()).unwrap();
            assert!(r.inside && r.projection_distance < 1e-6);
            let s = in_diamond(&xp, &xm, y, &theta, 1e-6, &tol()).unwrap();
            assert_eq!(r.inside, s.inside);
        }
        let far = sample::random_point(3, 3.0, &mut rng);
        let r = in_diamond(&xm, &xp, &far, &theta, 0.1, &tol()).unwrap();
        assert!(!r.inside);
        let weak = Point::from_log_diagonal(&[1.0, 1.0, -2.0]);
        assert!(matches!(
            in_diamond(&Point::identity(3), &weak, &mid, &theta, 1.0, &tol()),
            Err(Error::NotThetaRegular { .. })
        ));
    }

    #[test]
    fn surrogate_vanishes_on_parallel_set() {
        let face = FaceType::full(3);
        let zeta = canonical_zeta(&face).unwrap();
        let (tm, tp) = (Flag::<f64>::reversed(face.clone()), Flag::standard(face.clone()));
        let on = Point::from_log_diagonal(&[0.4, -0.1, -0.3]);
        assert!(angle_distance_surrogate(&on, &tm, &tp, &zeta, &tol()).unwrap() < 1e-6);
        let off = Point::exp_of(&Mat::from_row_slice(3, 3, &[0.0, 0.3, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert!(angle_distance_surrogate(&off, &tm, &tp, &zeta, &tol()).unwrap() > 1e-3);
        assert!(angle_distance_surrogate(&on, &tp, &tp, &zeta, &tol()).is_err());
    }
}
