//! Morse–Schottky construction: axis flags of a generator pair, the
//! geometry of the quadruple of power midpoints, a search over powers
//! `(m, n)` certifying `⟨αᵐ, βⁿ⟩`, and sampling of flag limit sets.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::cartan::{midpoint, regularity_margin, relative, unit_root_margin, FaceType, GroupElement, Point};
use crate::error::{Error, Result};
use crate::flags::{direction_angle, direction_in_frame, flag_distance, is_opposite, Flag, ZetaType};
use crate::morse::{certify_scale, outcome_from_summaries, CertifyOptions, CertifyOutcome, Certificate, ScaleSummary, StraightnessParams};
use crate::real::Real;
use crate::tolerance::Tolerances;
use crate::words::{checked_point, Representation, Word};

/// Axis flags are declared stable once doubling the power moves them less than this.
pub const AXIS_STABILITY: f64 = 1e-6;
/// Largest power tried while stabilising axis flags.
pub const MAX_AXIS_POWER: u32 = 1 << 12;
/// Limit-set representatives closer than this are merged.
pub const MERGE_DISTANCE: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct AxisFlags<T: Real = f64> {
    /// Attracting flag of `g`: the limit of shadows of `gᴺ`.
    pub attracting: Flag<T>,
    /// Repelling flag of `g`: the limit of shadows of `g⁻ᴺ`.
    pub repelling: Flag<T>,
    /// Power at which both flags moved less than [`AXIS_STABILITY`].
    pub power: u32,
}

/// Attracting and repelling flags of `g` read off the shadows of doubling powers.
pub fn axis_flags<T: Real>(g: &GroupElement<T>, face: &FaceType, basepoint: &Point<T>, tol: &Tolerances) -> Result<AxisFlags<T>> {
    let shadows = |power: &GroupElement<T>, n: u32| -> Result<(Flag<T>, Flag<T>)> {
        let blowup = |e: Error| match e {
            Error::NumericalBlowup { .. } => Error::PowerStabilizationFailed { max_power: n },
            e => e,
        };
        let fwd = checked_point(basepoint.translate(power), 1).map_err(blowup)?;
        let back = checked_point(basepoint.translate(&power.inverse()), 1).map_err(blowup)?;
        Ok((
            crate::flags::flag_shadow(basepoint, &fwd, face, tol)?,
            crate::flags::flag_shadow(basepoint, &back, face, tol)?,
        ))
    };
    let mut power = g.clone();
    let mut n = 1u32;
    let mut current = shadows(&power, n)?;
    while n < MAX_AXIS_POWER {
        power = power.mul(&power);
        n *= 2;
        let next = shadows(&power, n)?;
        let moved = flag_distance(&current.0, &next.0)?.max(flag_distance(&current.1, &next.1)?);
        current = next;
        if moved < AXIS_STABILITY {
            return Ok(AxisFlags { attracting: current.0, repelling: current.1, power: n });
        }
    }
    Err(Error::PowerStabilizationFailed { max_power: MAX_AXIS_POWER })
}

/// Labels of the four axis flags in the order `+a, -a, +b, -b`.
pub const AXIS_LABELS: [&str; 4] = ["+a", "-a", "+b", "-b"];

#[derive(Clone, Debug)]
pub struct GenericityReport<T: Real = f64> {
    pub pass: bool,
    /// Axis flags `τ₊ₐ, τ₋ₐ, τ₊ᵦ, τ₋ᵦ`.
    pub flags: [Flag<T>; 4],
    pub powers: [u32; 2],
    /// Opposition margins of the six pairs `(i, j)`, `i < j`, indexing [`AXIS_LABELS`].
    pub margins: Vec<((usize, usize), f64)>,
}

impl<T: Real> GenericityReport<T> {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min)
    }

    /// Pairs whose flags are not opposite.
    pub fn failing_pairs(&self, tol: &Tolerances) -> Vec<(usize, usize)> {
        self.margins.iter().filter(|m| !(m.1 > tol.flag)).map(|m| m.0).collect()
    }
}

/// Pairwise opposition of the four axis flags of `α` and `β`.
pub fn genericity_check<T: Real>(
    alpha: &GroupElement<T>,
    beta: &GroupElement<T>,
    face: &FaceType,
    basepoint: &Point<T>,
    tol: &Tolerances,
) -> Result<GenericityReport<T>> {
    let a = axis_flags(alpha, face, basepoint, tol)?;
    let b = axis_flags(beta, face, basepoint, tol)?;
    let flags = [a.attracting, a.repelling, b.attracting, b.repelling];
    let mut margins = Vec::with_capacity(6);
    for i in 0..4 {
        for j in i + 1..4 {
            margins.push(((i, j), is_opposite(&flags[i], &flags[j], tol)?.margin));
        }
    }
    let pass = margins.iter().all(|m| m.1 > tol.flag);
    Ok(GenericityReport { pass, flags, powers: [a.power, b.power], margins })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadrupleGeometry {
    /// Smallest distance between two of `y₊ₘ, y₋ₘ, z₊ₙ, z₋ₙ`.
    pub min_separation: f64,
    /// Smallest unit-type margin over the six connecting segments.
    pub min_margin: f64,
    /// Largest ζ-angle, at one of the four points, between the direction to
    /// another of them and the direction to the basepoint.
    pub max_angle_defect: f64,
}

/// Midpoints `y±ₘ` of `x ↔ α^{±m}x` and `z±ₙ` of `x ↔ β^{±n}x`.
pub fn power_midpoints<T: Real>(alpha: &GroupElement<T>, beta: &GroupElement<T>, m: u32, n: u32, basepoint: &Point<T>) -> Result<[Point<T>; 4]> {
    if m == 0 || n == 0 {
        return Err(Error::DegenerateSegment);
    }
    let (am, bn) = (alpha.pow(m as i64), beta.pow(n as i64));
    let mid = |g: &GroupElement<T>| midpoint(basepoint, &basepoint.translate(g));
    Ok([mid(&am)?, mid(&am.inverse())?, mid(&bn)?, mid(&bn.inverse())?])
}

/// Separation, regularity and angle data of the power-midpoint quadruple.
pub fn quadruple_geometry<T: Real>(
    alpha: &GroupElement<T>,
    beta: &GroupElement<T>,
    m: u32,
    n: u32,
    basepoint: &Point<T>,
    face: &FaceType,
    zeta: &ZetaType,
    tol: &Tolerances,
) -> Result<QuadrupleGeometry> {
    let pts = power_midpoints(alpha, beta, m, n, basepoint)?;
    let mut min_separation = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            let rel = relative(&pts[i], &pts[j])?;
            let a = rel.cartan()?;
            min_separation = min_separation.min(a.norm());
            min_margin = min_margin.min(unit_root_margin(&a, face).unwrap_or(0.0));
        }
    }
    let direction = |from: &Point<T>, to: &Point<T>| -> Result<Option<crate::linalg::Mat<T>>> {
        let rel = relative(from, to)?;
        let a = rel.cartan()?;
        if a.norm() <= tol.margin_floor || regularity_margin(&a, zeta.face()) <= tol.margin_floor {
            return Ok(None);
        }
        Ok(Some(direction_in_frame(&rel.eig.vectors, zeta)))
    };
    let mut max_angle_defect = 0.0f64;
    for i in 0..4 {
        let home = direction(&pts[i], basepoint)?;
        for j in (0..4).filter(|&j| j != i) {
            let angle = match (&home, direction(&pts[i], &pts[j])?) {
                (Some(h), Some(d)) => direction_angle(h, &d),
                _ => PI,
            };
            max_angle_defect = max_angle_defect.max(angle);
        }
    }
    Ok(QuadrupleGeometry { min_separation, min_margin, max_angle_defect })
}

/// Pairs `(m, n)` with `max(m, n) = k`, ordered by `m`.
pub fn sweep_level(k: u32) -> impl Iterator<Item = (u32, u32)> {
    (1..k).map(move |m| (m, k)).chain((1..=k).map(move |n| (k, n)))
}

/// All pairs up to `max_power` in search order.
pub fn power_sweep(max_power: u32) -> impl Iterator<Item = (u32, u32)> {
    (1..=max_power).flat_map(sweep_level)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PowerAttempt {
    pub m: u32,
    pub n: u32,
    pub summary: ScaleSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PowerSearchOutcome {
    Found { m: u32, n: u32, certificate: Certificate, attempts: usize },
    NotFound { max_power: u32, attempts: Vec<PowerAttempt> },
}

impl PowerSearchOutcome {
    /// Failed attempt that checked the most words before its first failure.
    pub fn best_attempt(&self) -> Option<&PowerAttempt> {
        match self {
            PowerSearchOutcome::Found { .. } => None,
            PowerSearchOutcome::NotFound { attempts, .. } => {
                attempts.iter().rev().max_by_key(|a| a.summary.words_checked)
            }
        }
    }
}

/// Smallest `(m, n)` in sweep order for which `⟨αᵐ, βⁿ⟩` certifies at `params`.
pub fn power_search<T: Real>(
    alpha: &GroupElement<T>,
    beta: &GroupElement<T>,
    basepoint: &Point<T>,
    params: &StraightnessParams,
    zeta: &ZetaType,
    max_power: u32,
    opts: &CertifyOptions,
) -> Result<PowerSearchOutcome> {
    power_search_with(alpha, beta, basepoint, params, zeta, max_power, opts, |m, n| {
        let rep = Representation::new(alloc::vec![alpha.pow(m as i64), beta.pow(n as i64)], basepoint.clone())?;
        certify_scale(&rep, params, zeta, 1, opts)
    })
}

/// [`power_search`] with a caller-supplied certification of `⟨αᵐ, βⁿ⟩` at
/// `params`, for example one choosing its own precision per pair or spreading
/// word subtrees over threads.
#[allow(clippy::too_many_arguments)]
pub fn power_search_with<T: Real, F>(
    alpha: &GroupElement<T>,
    beta: &GroupElement<T>,
    basepoint: &Point<T>,
    params: &StraightnessParams,
    zeta: &ZetaType,
    max_power: u32,
    opts: &CertifyOptions,
    mut run: F,
) -> Result<PowerSearchOutcome>
where
    F: FnMut(u32, u32) -> Result<ScaleSummary>,
{
    let face = params.theta.face();
    crate::morse::validate_schedule(face, core::slice::from_ref(params))?;
    if zeta.face() != face {
        return Err(Error::FaceMismatch);
    }
    let generic = genericity_check(alpha, beta, face, basepoint, &opts.tol)?;
    if !generic.pass {
        return Err(Error::NotOpposite { margin: generic.min_margin() });
    }
    let mut attempts = Vec::new();
    for (m, n) in power_sweep(max_power) {
        let summary = run(m, n)?;
        if summary.passed() {
            let count = attempts.len() + 1;
            return match outcome_from_summaries(core::slice::from_ref(params), alloc::vec![summary]) {
                CertifyOutcome::Certified(certificate) => Ok(PowerSearchOutcome::Found { m, n, certificate, attempts: count }),
                CertifyOutcome::NotCertified(_) => unreachable!("summary passed"),
            };
        }
        attempts.push(PowerAttempt { m, n, summary });
    }
    Ok(PowerSearchOutcome::NotFound { max_power, attempts })
}

#[derive(Clone, Debug)]
pub struct LimitPoint<T: Real = f64> {
    pub word: Word,
    pub flag: Flag<T>,
    /// Regularity margin of the segment `x → ρ(w)x` over the face.
    pub margin: f64,
}

#[derive(Clone, Debug)]
pub struct LimitSetSample<T: Real = f64> {
    /// Representatives after merging, in lexicographic order of their words.
    pub points: Vec<LimitPoint<T>>,
    /// Words whose shadow could not be formed.
    pub skipped: Vec<(Word, Error)>,
    /// Number of words visited.
    pub sampled: usize,
}

/// Shadows of all reduced words of `length` extending `prefix`, unmerged.
pub fn shadow_samples<T: Real>(
    rep: &Representation<T>,
    face: &FaceType,
    length: usize,
    prefix: &[crate::words::Letter],
    tol: &Tolerances,
) -> Result<(Vec<LimitPoint<T>>, Vec<(Word, Error)>)> {
    let x = rep.basepoint();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    rep.visit_words(length, prefix, |word, products| {
        let g = products.last().expect("non-empty");
        let shadow = checked_point(x.translate(g), word.len()).and_then(|y| {
            let a = relative(x, &y)?.cartan()?;
            let flag = crate::flags::flag_shadow(x, &y, face, tol)?;
            Ok((flag, regularity_margin(&a, face)))
        });
        match shadow {
            Ok((flag, margin)) => points.push(LimitPoint { word: word.to_vec(), flag, margin }),
            Err(e) => skipped.push((word.to_vec(), e)),
        }
        Ok(())
    })?;
    Ok((points, skipped))
}

/// Grid key of the projector onto the smallest subspace of a flag. Flags
/// within [`MERGE_DISTANCE`] have projectors whose entries differ by less than
/// one cell, so they land in adjacent cells.
fn cell_key<T: Real>(flag: &Flag<T>) -> [i64; 3] {
    let k = flag.face().dims()[0];
    let v = flag.subspace(k);
    let n = flag.dim();
    let entry = |i: usize, j: usize| (0..k).map(|c| v[(i, c)].to_f64() * v[(j, c)].to_f64()).sum::<f64>();
    let cell = 10.0 * MERGE_DISTANCE;
    let coords = [entry(0, 0), entry(0, 1.min(n - 1)), entry(1.min(n - 1), 1.min(n - 1))];
    coords.map(|c| libm::floor(c / cell) as i64)
}

/// Merges samples in the given order, keeping the first representative of
/// each cluster of flags closer than [`MERGE_DISTANCE`].
pub fn merge_samples<T: Real>(samples: Vec<LimitPoint<T>>) -> Result<Vec<LimitPoint<T>>> {
    let mut kept: Vec<LimitPoint<T>> = Vec::new();
    let mut grid: BTreeMap<[i64; 3], Vec<usize>> = BTreeMap::new();
    for sample in samples {
        let key = cell_key(&sample.flag);
        let mut duplicate = false;
        'search: for d0 in -1..=1 {
            for d1 in -1..=1 {
                for d2 in -1..=1 {
                    if let Some(bucket) = grid.get(&[key[0] + d0, key[1] + d1, key[2] + d2]) {
                        for &i in bucket {
                            if flag_distance(&kept[i].flag, &sample.flag)? < MERGE_DISTANCE {
                                duplicate = true;
                                break 'search;
                            }
                        }
                    }
                }
            }
        }
        if !duplicate {
            grid.entry(key).or_default().push(kept.len());
            kept.push(sample);
        }
    }
    Ok(kept)
}

/// Shadows of all reduced words of exactly `length`, merged.
pub fn limit_set_sample<T: Real>(rep: &Representation<T>, face: &FaceType, length: usize, tol: &Tolerances) -> Result<LimitSetSample<T>> {
    let (points, skipped) = shadow_samples(rep, face, length, &[], tol)?;
    let sampled = points.len() + skipped.len();
    Ok(LimitSetSample { points: merge_samples(points)?, skipped, sampled })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntipodalityAudit {
    /// Smallest opposition margin over all pairs.
    pub min_margin: f64,
    /// Pair attaining the minimum when it is not opposite.
    pub offender: Option<(usize, usize)>,
}

/// Minimum pairwise opposition margin of a list of flags.
pub fn antipodality_audit<T: Real>(flags: &[Flag<T>], tol: &Tolerances) -> Result<AntipodalityAudit> {
    if flags.len() < 2 {
        return Err(Error::InputError("antipodality audit needs at least two flags".into()));
    }
    let face = flags[0].face();
    if flags.iter().any(|f| f.face() != face) {
        return Err(Error::FaceMismatch);
    }
    let mut best = (f64::INFINITY, (0, 1));
    for i in 0..flags.len() {
        let row = audit_row(flags, i, tol)?;
        if row.0 < best.0 {
            best = row;
        }
    }
    Ok(finish_audit(best, opposition_floor::<T>()))
}

/// Smallest margin between flag `i` and the later flags, with its pair.
pub fn audit_row<T: Real>(flags: &[Flag<T>], i: usize, tol: &Tolerances) -> Result<(f64, (usize, usize))> {
    let mut best = (f64::INFINITY, (i, i + 1));
    for j in i + 1..flags.len() {
        let m = is_opposite(&flags[i], &flags[j], tol)?.margin;
        if m < best.0 {
            best = (m, (i, j));
        }
    }
    Ok(best)
}

/// Margins at or below this cannot be told apart from zero at the working
/// precision of `T`. Limit points of long words sit very close together, so
/// their margins are legitimately far below the flag tolerance.
pub fn opposition_floor<T: Real>() -> f64 {
    T::epsilon().sqrt().to_f64()
}

/// Builds the audit from the overall minimum.
pub fn finish_audit(best: (f64, (usize, usize)), floor: f64) -> AntipodalityAudit {
    AntipodalityAudit { min_margin: best.0, offender: (!(best.0 > floor)).then_some(best.1) }
}
