//! Straightness, the quadruple condition and Morse certification of
//! free-group actions.
//!
//! A sequence is `(Θ, ε)`-straight when its segments have types in `Θ` and
//! the ζ-angle at each interior point between its two neighbours is at least
//! `π - ε`; it is `l`-spaced when consecutive points are at least `l` apart.
//! The quadruple condition imposes both on the midpoint triples of
//! quadruples of path points with gaps `s`. An action is certified at the
//! first schedule entry for which every reduced word of length `3s` passes.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::cartan::{midpoint, relative, riemannian_distance, unit_root_margin, CartanVector, FaceType, GroupElement, Point, ThetaSet};
use crate::cones::{in_diamond, in_theta_cone, parallel_set, project_to_parallel_set};
use crate::error::{Error, Result};
use crate::flags::{direction_defect, direction_in_frame, flag_shadow, Flag, ZetaType};
use crate::linalg::Mat;
use crate::real::Real;
use crate::tolerance::Tolerances;
use crate::words::{checked_point, is_reduced, reduced_words, Letter, Representation, Word};

/// Ordered orbit points, optionally labelled by the letters that produced them.
#[derive(Clone, Debug)]
pub struct OrbitPath<T: Real = f64> {
    points: Vec<Point<T>>,
    labels: Option<Word>,
}

impl<T: Real> OrbitPath<T> {
    pub fn new(points: Vec<Point<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::PathTooShort { len: 0, required: 1 });
        }
        let n = points[0].dim();
        if let Some(p) = points.iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: p.dim() });
        }
        Ok(OrbitPath { points, labels: None })
    }

    /// Path with the letters `labels[i]` leading from point `i` to point `i + 1`.
    pub fn with_labels(points: Vec<Point<T>>, labels: Word) -> Result<Self> {
        if labels.len() + 1 != points.len() {
            return Err(Error::DimensionMismatch { expected: points.len().saturating_sub(1), found: labels.len() });
        }
        let mut path = OrbitPath::new(points)?;
        path.labels = Some(labels);
        Ok(path)
    }

    pub fn points(&self) -> &[Point<T>] {
        &self.points
    }

    pub fn labels(&self) -> Option<&[Letter]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same path moved by an isometry.
    pub fn translate(&self, g: &GroupElement<T>) -> OrbitPath<T> {
        OrbitPath { points: self.points.iter().map(|p| p.translate(g)).collect(), labels: self.labels.clone() }
    }

    pub fn lift<U: Real>(&self) -> OrbitPath<U> {
        OrbitPath { points: self.points.iter().map(Point::lift).collect(), labels: self.labels.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StraightnessParams {
    pub theta: ThetaSet,
    /// Allowed angle defect `ε`, in radians.
    pub eps: f64,
    /// Minimum spacing `l`.
    pub spacing: f64,
    /// Scale `s`.
    pub scale: usize,
}

impl StraightnessParams {
    pub fn new(theta: ThetaSet, eps: f64, spacing: f64, scale: usize) -> Result<Self> {
        if !(eps > 0.0 && eps < PI) {
            return Err(Error::InputError(alloc::format!("angle tolerance must lie in (0, pi), got {eps}")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InputError(alloc::format!("spacing must be positive, got {spacing}")));
        }
        if scale == 0 {
            return Err(Error::InputError("scale must be positive".into()));
        }
        Ok(StraightnessParams { theta, eps, spacing, scale })
    }
}

/// `Θ` margin `1/i`, `ε = 0.2/i`, `l = 2i`, `s = 2i` for `i = 1..=max_index`.
pub fn default_schedule(face: &FaceType, max_index: usize) -> Result<Vec<StraightnessParams>> {
    (1..=max_index)
        .map(|i| {
            let f = i as f64;
            StraightnessParams::new(ThetaSet::new(face.clone(), 1.0 / f)?, 0.2 / f, 2.0 * f, 2 * i)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    /// A segment's unit type falls short of the Θ margin.
    Regularity,
    /// The ζ-angle at an interior point is below `π - ε`.
    Angle,
    /// Consecutive points are closer than `l`.
    Spacing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Segment index for regularity and spacing, point index for angles.
    pub index: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub pass: bool,
    /// `π - ∠^ζ` at interior points `1..len-1`.
    pub angle_defects: Vec<f64>,
    /// Smallest simple-root value over the Θ face of each segment's unit type.
    pub margins: Vec<f64>,
    /// Length of each segment.
    pub spacings: Vec<f64>,
    pub worst_angle_defect: f64,
    pub worst_margin: f64,
    pub worst_spacing: f64,
    pub violations: Vec<Violation>,
}

/// A segment seen from its start: Cartan vector and the eigenframe of the
/// relative position (the normalised frame of its shadow).
struct SegmentView<T: Real> {
    cartan: CartanVector,
    frame: Mat<T>,
}

fn segment_view<T: Real>(from: &Point<T>, to: &Point<T>) -> Result<SegmentView<T>> {
    let rel = relative(from, to)?;
    Ok(SegmentView { cartan: rel.cartan()?, frame: rel.eig.vectors })
}

fn margin_of(a: &CartanVector, face: &FaceType) -> f64 {
    unit_root_margin(a, face).unwrap_or(0.0)
}

/// Defect `π - ∠^ζ` at the common start of two segments; `π` when either
/// segment is too close to a wall of the ζ face for its shadow to exist.
fn defect_between<T: Real>(back: &SegmentView<T>, fwd: &SegmentView<T>, zeta: &ZetaType, tol: &Tolerances) -> f64 {
    let face = zeta.face();
    let ok = |v: &SegmentView<T>| {
        v.cartan.norm() > tol.margin_floor && crate::cartan::regularity_margin(&v.cartan, face) > tol.margin_floor
    };
    if !ok(back) || !ok(fwd) {
        return PI;
    }
    direction_defect(&direction_in_frame(&back.frame, zeta), &direction_in_frame(&fwd.frame, zeta))
}

/// `(Θ, ε)`-straightness and `l`-spacing of a path.
pub fn is_straight<T: Real>(
    path: &OrbitPath<T>,
    theta: &ThetaSet,
    eps: f64,
    spacing: f64,
    zeta: &ZetaType,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let pts = path.points();
    let len = pts.len();
    if len < 2 {
        return Err(Error::PathTooShort { len, required: 2 });
    }
    let face = theta.face();
    let mut segment: Vec<Option<CartanVector>> = alloc::vec![None; len - 1];
    let mut angle_defects = Vec::with_capacity(len.saturating_sub(2));
    for n in 1..len - 1 {
        let back = segment_view(&pts[n], &pts[n - 1])?;
        let fwd = segment_view(&pts[n], &pts[n + 1])?;
        angle_defects.push(defect_between(&back, &fwd, zeta, tol));
        // the reversed segment has Cartan vector ι(a); the face is ι-invariant
        segment[n - 1].get_or_insert(back.cartan);
        segment[n] = Some(fwd.cartan);
    }
    if len == 2 {
        segment[0] = Some(segment_view(&pts[0], &pts[1])?.cartan);
    }
    let cartans: Vec<CartanVector> = segment.into_iter().map(|a| a.expect("every segment visited")).collect();
    let margins: Vec<f64> = cartans.iter().map(|a| margin_of(a, face)).collect();
    let spacings: Vec<f64> = cartans.iter().map(CartanVector::norm).collect();
    Ok(assemble_report(angle_defects, margins, spacings, theta.margin(), eps, spacing))
}

fn assemble_report(
    angle_defects: Vec<f64>,
    margins: Vec<f64>,
    spacings: Vec<f64>,
    margin: f64,
    eps: f64,
    spacing: f64,
) -> CheckReport {
    let mut violations = Vec::new();
    for (i, &m) in margins.iter().enumerate() {
        if !(m >= margin) {
            violations.push(Violation { kind: ViolationKind::Regularity, index: i, value: m });
        }
    }
    for (i, &d) in angle_defects.iter().enumerate() {
        if !(d <= eps) {
            violations.push(Violation { kind: ViolationKind::Angle, index: i + 1, value: d });
        }
    }
    for (i, &s) in spacings.iter().enumerate() {
        if !(s >= spacing) {
            violations.push(Violation { kind: ViolationKind::Spacing, index: i, value: s });
        }
    }
    CheckReport {
        pass: violations.is_empty(),
        worst_angle_defect: angle_defects.iter().copied().fold(0.0, f64::max),
        worst_margin: margins.iter().copied().fold(f64::INFINITY, f64::min),
        worst_spacing: spacings.iter().copied().fold(f64::INFINITY, f64::min),
        angle_defects,
        margins,
        spacings,
        violations,
    }
}

/// Midpoints of consecutive points of the coarsened path `x_0, x_s, x_{2s}, …`.
pub fn midpoint_triples<T: Real>(path: &OrbitPath<T>, s: usize) -> Result<OrbitPath<T>> {
    let len = path.len();
    if s == 0 || len < 2 * s + 1 {
        return Err(Error::PathTooShort { len, required: 2 * s.max(1) + 1 });
    }
    let coarse: Vec<&Point<T>> = path.points().iter().step_by(s).collect();
    let mids = coarse.windows(2).map(|w| midpoint(w[0], w[1])).collect::<Result<Vec<_>>>()?;
    OrbitPath::new(mids)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GapMode {
    /// Quadruples `t, t+s, t+2s, t+3s`.
    #[default]
    Exact,
    /// All quadruples with consecutive gaps at least `s`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadrupleReport {
    pub pass: bool,
    pub quadruples_checked: usize,
    pub worst_angle_defect: f64,
    pub worst_margin: f64,
    pub worst_spacing: f64,
    /// First failing quadruple in lexicographic order with its triple report.
    pub first_failure: Option<([usize; 4], CheckReport)>,
}

/// Straightness and spacing of the midpoint triple of one quadruple.
pub fn triple_check<T: Real>(
    mids: [&Point<T>; 3],
    params: &StraightnessParams,
    zeta: &ZetaType,
    tol: &Tolerances,
) -> Result<CheckReport> {
    let back = segment_view(mids[1], mids[0])?;
    let fwd = segment_view(mids[1], mids[2])?;
    let defect = defect_between(&back, &fwd, zeta, tol);
    let face = params.theta.face();
    let margins = alloc::vec![margin_of(&back.cartan, face), margin_of(&fwd.cartan, face)];
    let spacings = alloc::vec![back.cartan.norm(), fwd.cartan.norm()];
    Ok(assemble_report(alloc::vec![defect], margins, spacings, params.theta.margin(), params.eps, params.spacing))
}

/// The `(Θ, ε, l, s)`-quadruple condition on a path.
pub fn quadruple_check<T: Real>(
    path: &OrbitPath<T>,
    params: &StraightnessParams,
    zeta: &ZetaType,
    mode: GapMode,
    tol: &Tolerances,
) -> Result<QuadrupleReport> {
    let s = params.scale;
    let len = path.len();
    if len < 3 * s + 1 {
        return Err(Error::PathTooShort { len, required: 3 * s + 1 });
    }
    let pts = path.points();
    let mut cache: BTreeMap<(usize, usize), Point<T>> = BTreeMap::new();
    let mut mid = |i: usize, j: usize| -> Result<Point<T>> {
        if let Some(p) = cache.get(&(i, j)) {
            return Ok(p.clone());
        }
        let m = midpoint(&pts[i], &pts[j])?;
        cache.insert((i, j), m.clone());
        Ok(m)
    };
    let mut quads = Vec::new();
    match mode {
        GapMode::Exact => {
            for t in 0..len - 3 * s {
                quads.push([t, t + s, t + 2 * s, t + 3 * s]);
            }
        }
        GapMode::AtLeast => {
            for t1 in 0..len {
                for t2 in t1 + s..len {
                    for t3 in t2 + s..len {
                        for t4 in t3 + s..len {
                            quads.push([t1, t2, t3, t4]);
                        }
                    }
                }
            }
        }
    }
    let mut report = QuadrupleReport {
        pass: true,
        quadruples_checked: 0,
        worst_angle_defect: 0.0,
        worst_margin: f64::INFINITY,
        worst_spacing: f64::INFINITY,
        first_failure: None,
    };
    for q in quads {
        let (m1, m2, m3) = (mid(q[0], q[1])?, mid(q[1], q[2])?, mid(q[2], q[3])?);
        let r = triple_check([&m1, &m2, &m3], params, zeta, tol)?;
        report.quadruples_checked += 1;
        report.worst_angle_defect = report.worst_angle_defect.max(r.worst_angle_defect);
        report.worst_margin = report.worst_margin.min(r.worst_margin);
        report.worst_spacing = report.worst_spacing.min(r.worst_spacing);
        if !r.pass {
            report.pass = false;
            if report.first_failure.is_none() {
                report.first_failure = Some((q, r));
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct FitReport<T: Real = f64> {
    pub pass: bool,
    pub tau_minus: Flag<T>,
    pub tau_plus: Flag<T>,
    /// Distance of each point to the parallel set of the outer shadows.
    pub distances: Vec<f64>,
    pub max_distance: f64,
    /// Pairs `(i, j)`, `i < j`, of projections checked for cone membership.
    pub memberships_checked: usize,
    /// Pairs failing `x̄_j ∈ V(x̄_i, st_Θ'(τ₊))` or `x̄_i ∈ V(x̄_j, st_Θ'(τ₋))`.
    pub membership_failures: Vec<(usize, usize)>,
}

/// Closeness of a path to the parallel set spanned by the shadows of its
/// outermost segments, and nesting of the Θ'-cones at the projections.
pub fn morse_lemma_fit<T: Real>(
    path: &OrbitPath<T>,
    theta: &ThetaSet,
    delta: f64,
    tol: &Tolerances,
) -> Result<FitReport<T>> {
    let pts = path.points();
    if pts.len() < 2 {
        return Err(Error::PathTooShort { len: pts.len(), required: 2 });
    }
    // the fit is equivariant; moving the first point to I keeps flags well conditioned
    let back = pts[0].sqrt_element();
    let to_origin = back.inverse();
    let moved: Vec<Point<T>> = pts.iter().map(|p| p.translate(&to_origin)).collect();
    let (first, last) = (&moved[0], &moved[moved.len() - 1]);
    let face = theta.face();
    let tau_plus = flag_shadow(first, last, face, tol)?;
    let tau_minus = flag_shadow(last, first, face, tol)?;
    let set = parallel_set(&tau_minus, &tau_plus, tol)?;
    let mut projections = Vec::with_capacity(pts.len());
    let mut distances = Vec::with_capacity(pts.len());
    for p in &moved {
        let proj = project_to_parallel_set(p, &set)?;
        distances.push(proj.distance);
        projections.push(proj.point);
    }
    let mut memberships_checked = 0;
    let mut membership_failures = Vec::new();
    for i in 0..projections.len() {
        for j in i + 1..projections.len() {
            memberships_checked += 1;
            let forward = cone_member(&projections[i], &tau_plus, &projections[j], theta, tol)?;
            let backward = cone_member(&projections[j], &tau_minus, &projections[i], theta, tol)?;
            if !(forward && backward) {
                membership_failures.push((i, j));
            }
        }
    }
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    Ok(FitReport {
        pass: max_distance <= delta && membership_failures.is_empty(),
        tau_minus: tau_minus.translate(&back),
        tau_plus: tau_plus.translate(&back),
        distances,
        max_distance,
        memberships_checked,
        membership_failures,
    })
}

fn cone_member<T: Real>(x: &Point<T>, tau: &Flag<T>, y: &Point<T>, theta: &ThetaSet, tol: &Tolerances) -> Result<bool> {
    match in_theta_cone(x, tau, y, theta, tol) {
        Ok(r) => Ok(r.inside),
        Err(Error::DegenerateSegment) => Ok(false),
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MorsePathReport {
    pub pass: bool,
    /// Pairs `(i, j)` violating `|i-j|/L - A ≤ d(xᵢ, xⱼ) ≤ L|i-j| + A`.
    pub quasigeodesic_violations: Vec<(usize, usize)>,
    /// Largest distance from an intermediate point to the diamond of a pair.
    pub worst_diamond_distance: f64,
    /// Pairs `(i, j)` with an intermediate point outside the `D`-neighbourhood
    /// of `◊_Θ(xᵢ, xⱼ)`, or whose segment is not Θ-regular although longer than `2D`.
    pub diamond_violations: Vec<(usize, usize)>,
    pub pairs_checked: usize,
}

/// Quasigeodesic constants and diamond closeness over all index pairs.
pub fn check_path_morse<T: Real>(
    path: &OrbitPath<T>,
    l: f64,
    a: f64,
    theta: &ThetaSet,
    d: f64,
    tol: &Tolerances,
) -> Result<MorsePathReport> {
    let pts = path.points();
    let len = pts.len();
    let mut quasigeodesic_violations = Vec::new();
    let mut diamond_violations = Vec::new();
    let mut worst_diamond_distance = 0.0f64;
    let mut pairs_checked = 0;
    for i in 0..len {
        for j in i + 1..len {
            pairs_checked += 1;
            let dist = riemannian_distance(&pts[i], &pts[j])?;
            let k = (j - i) as f64;
            if dist < k / l - a - tol.geometric || dist > l * k + a + tol.geometric {
                quasigeodesic_violations.push((i, j));
            }
            if j == i + 1 {
                continue;
            }
            // a point within D of a tip is D-close to the diamond
            let near_tip = |m: usize| -> Result<bool> {
                Ok(riemannian_distance(&pts[m], &pts[i])? <= d || riemannian_distance(&pts[m], &pts[j])? <= d)
            };
            let mut interior = Vec::new();
            for m in i + 1..j {
                if !near_tip(m)? {
                    interior.push(m);
                }
            }
            let report = match interior
                .iter()
                .map(|&m| in_diamond(&pts[i], &pts[j], &pts[m], theta, d, tol))
                .collect::<Result<Vec<_>>>()
            {
                Ok(r) => r,
                Err(Error::NotThetaRegular { .. } | Error::NearSingularMargin { .. } | Error::DegenerateSegment) => {
                    if dist > 2.0 * d {
                        diamond_violations.push((i, j));
                    }
                    continue;
                }
                Err(e) => return Err(e),
            };
            for r in &report {
                worst_diamond_distance = worst_diamond_distance.max(r.projection_distance);
            }
            if report.iter().any(|r| !r.inside) {
                diamond_violations.push((i, j));
            }
        }
    }
    Ok(MorsePathReport {
        pass: quasigeodesic_violations.is_empty() && diamond_violations.is_empty(),
        quasigeodesic_violations,
        worst_diamond_distance,
        diamond_violations,
        pairs_checked,
    })
}

/// Options shared by all certification entry points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifyOptions {
    pub tol: Tolerances,
    /// Depth of the word prefixes that split each scale into independent subtrees.
    pub partition_depth: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { tol: Tolerances::default(), partition_depth: 2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FailureKind {
    /// The midpoint triple of the word failed a check.
    Check(CheckReport),
    /// Orbit points left the range the scalar type resolves; the scale is
    /// inconclusive rather than failed.
    Truncated { log10_condition: f64, limit: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Failure {
    pub word: Word,
    pub kind: FailureKind,
}

/// Outcome of one schedule entry over one or more word subtrees.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleSummary {
    /// 1-based position in the schedule.
    pub schedule_index: usize,
    pub words_checked: u64,
    pub worst_angle_defect: f64,
    pub worst_margin: f64,
    pub worst_spacing: f64,
    pub failure: Option<Failure>,
}

impl ScaleSummary {
    pub fn empty(schedule_index: usize) -> Self {
        ScaleSummary {
            schedule_index,
            words_checked: 0,
            worst_angle_defect: 0.0,
            worst_margin: f64::INFINITY,
            worst_spacing: f64::INFINITY,
            failure: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }

    /// Componentwise worst case; of two failures the lexicographically
    /// smaller word is kept.
    pub fn merge(mut self, other: &ScaleSummary) -> ScaleSummary {
        self.words_checked += other.words_checked;
        self.worst_angle_defect = self.worst_angle_defect.max(other.worst_angle_defect);
        self.worst_margin = self.worst_margin.min(other.worst_margin);
        self.worst_spacing = self.worst_spacing.min(other.worst_spacing);
        self.failure = match (self.failure.take(), &other.failure) {
            (Some(a), Some(b)) => Some(if b.word < a.word { b.clone() } else { a }),
            (a, b) => a.or_else(|| b.clone()),
        };
        self
    }

    /// Merges subtree results in partition order, up to and including the
    /// first failing subtree. The result does not depend on how subtrees
    /// were scheduled.
    pub fn merge_ordered(schedule_index: usize, parts: &[ScaleSummary]) -> ScaleSummary {
        let mut acc = ScaleSummary::empty(schedule_index);
        for p in parts {
            acc = acc.merge(p);
            if !p.passed() {
                break;
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub params: StraightnessParams,
    pub schedule_index: usize,
    pub words_checked: u64,
    pub worst_angle_defect: f64,
    pub worst_margin: f64,
    pub worst_spacing: f64,
    /// The schedule is supplied by the user, not derived from the theory's
    /// existence statements.
    pub empirical_schedule: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NotCertified {
    /// One summary per schedule entry tried, in order.
    pub attempts: Vec<ScaleSummary>,
}

impl NotCertified {
    /// Failure of the last schedule entry tried.
    pub fn witness(&self) -> Option<&Failure> {
        self.attempts.last().and_then(|a| a.failure.as_ref())
    }

    /// Whether any entry stopped on numerical range rather than a failed check.
    pub fn truncated(&self) -> bool {
        self.attempts.iter().any(|a| matches!(a.failure, Some(Failure { kind: FailureKind::Truncated { .. }, .. })))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertifyOutcome {
    Certified(Certificate),
    NotCertified(NotCertified),
}

impl CertifyOutcome {
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            CertifyOutcome::Certified(c) => Some(c),
            CertifyOutcome::NotCertified(_) => None,
        }
    }
}

/// Checks preconditions shared by the certification entry points.
pub fn validate_schedule(face: &FaceType, schedule: &[StraightnessParams]) -> Result<()> {
    face.require_iota_invariant()?;
    if schedule.is_empty() {
        return Err(Error::InputError("schedule must not be empty".into()));
    }
    if schedule.windows(2).any(|w| w[1].scale < w[0].scale) {
        return Err(Error::InputError("schedule scales must not decrease".into()));
    }
    if let Some(p) = schedule.iter().find(|p| p.theta.face() != face) {
        return Err(Error::InputError(alloc::format!("schedule entry has face {} instead of {}", p.theta.face(), face)));
    }
    Ok(())
}

/// Word prefixes partitioning the reduced words of `length`.
pub fn subtree_roots(rank: usize, length: usize, depth: usize) -> Vec<Word> {
    reduced_words(rank, depth.min(length)).collect()
}

/// Runs one schedule entry over the reduced words of length `3s` that start
/// with `prefix`, stopping at the first failing word.
///
/// Each word is evaluated in coordinates centred at its `s`-th orbit point:
/// the quadruple `x, ρ(w₁…w_s)x, ρ(w₁…w_{2s})x, ρ(w₁…w_{3s})x` is moved by
/// `ρ(w₁…w_s)⁻¹`, which halves the spread of the coordinates. Products are
/// shared along the depth-first traversal.
pub fn certify_subtree<T: Real>(
    rep: &Representation<T>,
    params: &StraightnessParams,
    zeta: &ZetaType,
    schedule_index: usize,
    prefix: &[Letter],
    opts: &CertifyOptions,
) -> Result<ScaleSummary> {
    let s = params.scale;
    let length = 3 * s;
    let mut summary = ScaleSummary::empty(schedule_index);
    if prefix.len() > length || !is_reduced(prefix) || prefix.iter().any(|l| l.generator >= rep.rank()) {
        return Ok(summary);
    }
    let mut walker = Walker {
        rep,
        params,
        zeta,
        opts,
        s,
        word: Vec::with_capacity(length),
        stack: Vec::with_capacity(length + 1),
        summary: &mut summary,
    };
    walker.stack.push(GroupElement::identity(rep.dim()));
    for &l in prefix {
        walker.push(l);
    }
    walker.run()?;
    Ok(summary)
}

struct Walker<'a, T: Real> {
    rep: &'a Representation<T>,
    params: &'a StraightnessParams,
    zeta: &'a ZetaType,
    opts: &'a CertifyOptions,
    s: usize,
    word: Word,
    /// Entry `k`: `ρ(w₁…w_k)⁻¹` for `k ≤ s`, `ρ(w_{s+1}…w_k)` beyond.
    stack: Vec<GroupElement<T>>,
    summary: &'a mut ScaleSummary,
}

impl<T: Real> Walker<'_, T> {
    fn push(&mut self, l: Letter) {
        let depth = self.word.len() + 1;
        let top = self.stack.last().expect("non-empty");
        let next = if depth <= self.s {
            self.rep.letter(l.inv()).mul(top)
        } else if depth == self.s + 1 {
            self.rep.letter(l).clone()
        } else {
            top.mul(self.rep.letter(l))
        };
        self.word.push(l);
        self.stack.push(next);
    }

    fn pop(&mut self) {
        self.word.pop();
        self.stack.pop();
    }

    /// Returns `false` once a failure has been recorded.
    fn run(&mut self) -> Result<bool> {
        if self.word.len() == 3 * self.s {
            return self.check_leaf();
        }
        for i in 0..2 * self.rep.rank() {
            let l = Letter::from_index(i);
            if self.word.last().is_some_and(|&p| p == l.inv()) {
                continue;
            }
            self.push(l);
            let go_on = self.run();
            self.pop();
            if !go_on? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn check_leaf(&mut self) -> Result<bool> {
        let s = self.s;
        let x = self.rep.basepoint();
        let centred = [
            x.translate(&self.stack[s]),
            x.clone(),
            x.translate(&self.stack[2 * s]),
            x.translate(&self.stack[3 * s]),
        ];
        let outcome = centred
            .into_iter()
            .enumerate()
            .map(|(k, p)| checked_point(p, k * s))
            .collect::<Result<Vec<_>>>()
            .and_then(|pts| {
                let mids = [midpoint(&pts[0], &pts[1])?, midpoint(&pts[1], &pts[2])?, midpoint(&pts[2], &pts[3])?];
                for (k, m) in mids.iter().enumerate() {
                    checked_point(m.clone(), k)?;
                }
                triple_check([&mids[0], &mids[1], &mids[2]], self.params, self.zeta, &self.opts.tol)
            });
        self.summary.words_checked += 1;
        match outcome {
            Ok(report) => {
                self.summary.worst_angle_defect = self.summary.worst_angle_defect.max(report.worst_angle_defect);
                self.summary.worst_margin = self.summary.worst_margin.min(report.worst_margin);
                self.summary.worst_spacing = self.summary.worst_spacing.min(report.worst_spacing);
                if report.pass {
                    Ok(true)
                } else {
                    self.summary.failure = Some(Failure { word: self.word.clone(), kind: FailureKind::Check(report) });
                    Ok(false)
                }
            }
            Err(Error::NumericalBlowup { log10_condition, limit, .. }) => {
                self.summary.failure =
                    Some(Failure { word: self.word.clone(), kind: FailureKind::Truncated { log10_condition, limit } });
                Ok(false)
            }
            Err(e) => Err(e),
        }
    }
}

/// Runs one schedule entry over all reduced words of length `3s`.
pub fn certify_scale<T: Real>(
    rep: &Representation<T>,
    params: &StraightnessParams,
    zeta: &ZetaType,
    schedule_index: usize,
    opts: &CertifyOptions,
) -> Result<ScaleSummary> {
    let roots = subtree_roots(rep.rank(), 3 * params.scale, opts.partition_depth);
    let mut parts = Vec::with_capacity(roots.len());
    for root in &roots {
        let part = certify_subtree(rep, params, zeta, schedule_index, root, opts)?;
        let failed = !part.passed();
        parts.push(part);
        if failed {
            break;
        }
    }
    Ok(ScaleSummary::merge_ordered(schedule_index, &parts))
}

/// Turns per-entry summaries into an outcome: certified at the first passing entry.
pub fn outcome_from_summaries(schedule: &[StraightnessParams], attempts: Vec<ScaleSummary>) -> CertifyOutcome {
    match attempts.iter().find(|a| a.passed()) {
        Some(a) => CertifyOutcome::Certified(Certificate {
            params: schedule[a.schedule_index - 1].clone(),
            schedule_index: a.schedule_index,
            words_checked: a.words_checked,
            worst_angle_defect: a.worst_angle_defect,
            worst_margin: a.worst_margin,
            worst_spacing: a.worst_spacing,
            empirical_schedule: true,
        }),
        None => CertifyOutcome::NotCertified(NotCertified { attempts }),
    }
}

/// The semi-decision procedure: tries the schedule in order and certifies
/// at the first entry whose quadruple condition holds for every reduced word
/// of length `3s`.
pub fn certify_action<T: Real>(
    rep: &Representation<T>,
    face: &FaceType,
    schedule: &[StraightnessParams],
    zeta: &ZetaType,
    opts: &CertifyOptions,
) -> Result<CertifyOutcome> {
    validate_schedule(face, schedule)?;
    if zeta.face() != face {
        return Err(Error::FaceMismatch);
    }
    let mut attempts = Vec::new();
    for (i, params) in schedule.iter().enumerate() {
        let summary = certify_scale(rep, params, zeta, i + 1, opts)?;
        let passed = summary.passed();
        attempts.push(summary);
        if passed {
            break;
        }
    }
    Ok(outcome_from_summaries(schedule, attempts))
}
