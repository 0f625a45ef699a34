//! Acceptance suite. Each criterion prints one line with its verdict, the
//! measured quantity and the elapsed time against its time limit. The process
//! exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use morsecert::schema::{load_representation, RepresentationInput};
use morsecert_core::cartan::unit_root_margin;
use morsecert_core::cones::in_theta_cone;
use morsecert_core::dynamics::{expansion_factor, expansion_report, log_expansion_factor};
use morsecert_core::flags::{canonical_zeta, flag_distance, group_shadow};
use morsecert_core::linalg::{determinant, qr};
use morsecert_core::morse::{
    certify_action, default_schedule, morse_lemma_fit, CertifyOptions, CertifyOutcome, StraightnessParams,
};
use morsecert_core::sample::{
    random_flag, random_group_element, random_point, random_reduced_word, random_rotation, random_traceless, rng,
};
use morsecert_core::schottky::{antipodality_audit, limit_set_sample, power_search, shadow_samples, PowerSearchOutcome};
use morsecert_core::words::Representation;
use morsecert_core::{
    cartan_vector, iota, midpoint, CartanVector, FaceType, Flag, GroupElement, Mat, Mp, Point, Real, ThetaSet,
    Tolerances,
};

type Check = Result<String, String>;

fn fail(e: impl Display) -> String {
    e.to_string()
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn load(name: &str) -> Result<RepresentationInput, String> {
    let bytes = std::fs::read(data_dir().join(name)).map_err(fail)?;
    load_representation(&bytes).map_err(fail)
}

fn rotation_element(k: &Mat<f64>) -> Result<GroupElement<f64>, String> {
    GroupElement::from_rows(k.rows(), &k.to_row_major_f64()).map_err(fail)
}

fn to_nalgebra(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

/// Straightness parameters used by the Schottky search.
fn search_params(face: &FaceType) -> Result<StraightnessParams, String> {
    let theta = ThetaSet::new(face.clone(), 0.25).map_err(fail)?;
    StraightnessParams::new(theta, 0.2, 2.0, 1).map_err(fail)
}

// ---------------------------------------------------------------------------
// 1. Symmetry of the vector-valued distance

fn cartan_symmetry() -> Check {
    let mut source = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let p = random_point(3, 1.5, &mut source);
        let q = random_point(3, 1.5, &mut source);
        let forward = cartan_vector(&p, &q).map_err(fail)?;
        let backward = iota(&cartan_vector(&q, &p).map_err(fail)?);
        let gap = forward.entries().iter().zip(backward.entries()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    verdict(worst <= 1e-8, format!("max deviation {worst:.2e} over 1000 pairs"))
}

// ---------------------------------------------------------------------------
// 2. Expansion factors against finite differences

/// Orthonormal frame of the column flag of `m`, signs fixed by a positive `R` diagonal.
fn frame_of(m: &DMatrix<f64>) -> DMatrix<f64> {
    let decomposition = m.clone().qr();
    let (mut q, r) = (decomposition.q(), decomposition.r());
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Entries `(r, c)` strictly below the block diagonal of the face.
fn lower_block_entries(face: &FaceType) -> Vec<(usize, usize)> {
    let block = |i: usize| face.dims().iter().filter(|&&d| d <= i).count();
    let n = face.n();
    (0..n).flat_map(|c| (0..n).map(move |r| (r, c))).filter(|&(r, c)| block(r) > block(c)).collect()
}

/// Smallest singular value of the differential of `g` at the flag with
/// orthonormal frame `frame`, by central differences in rotation charts.
fn finite_difference_expansion(g: &DMatrix<f64>, frame: &DMatrix<f64>, face: &FaceType) -> f64 {
    let n = face.n();
    let entries = lower_block_entries(face);
    let image = frame_of(&(g * frame));
    let chart = |s: f64, (r, c): (usize, usize)| -> DVector<f64> {
        let mut generator = DMatrix::zeros(n, n);
        generator[(r, c)] = s;
        generator[(c, r)] = -s;
        let moved = frame_of(&(g * frame * generator.exp()));
        let relative = image.transpose() * moved;
        DVector::from_iterator(entries.len(), entries.iter().map(|&(i, j)| relative[(i, j)]))
    };
    let step = 1e-5;
    let columns: Vec<DVector<f64>> =
        entries.iter().map(|&rc| (chart(step, rc) - chart(-step, rc)) / (2.0 * step)).collect();
    DMatrix::from_columns(&columns).singular_values().min()
}

fn expansion_factors() -> Check {
    let mut source = rng(2);
    let faces3 = [FaceType::full(3), FaceType::new(3, vec![1]).map_err(fail)?, FaceType::new(3, vec![2]).map_err(fail)?];
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let face = if i < 100 { FaceType::full(2) } else { faces3[i % 3].clone() };
        let g = random_group_element(face.n(), 0.8, &mut source);
        let tau = random_flag(&face, &mut source);
        let library = expansion_factor(&g, &tau);
        let oracle = finite_difference_expansion(&to_nalgebra(g.matrix()), &to_nalgebra(tau.frame()), &face);
        worst = worst.max((library - oracle).abs() / oracle);
    }
    let mut closed: f64 = 0.0;
    for step in 1..=20 {
        let t = 0.1 * step as f64;
        let g = GroupElement::<f64>::from_log_diagonal(&[-t, t]);
        let value = expansion_factor(&g, &Flag::standard(FaceType::full(2)));
        closed = closed.max((value - (2.0 * t).exp()).abs() / (2.0 * t).exp());
    }
    verdict(
        worst <= 1e-3 && closed <= 1e-6,
        format!("finite-difference relative error {worst:.2e} over 200 pairs, closed form {closed:.2e}"),
    )
}

// ---------------------------------------------------------------------------
// 3. Contraction of transvections against distances to the cone walls

/// Ranks of the entries, 0 for the smallest.
fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut rank = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let squares: f64 = ranks(a).iter().zip(ranks(b)).map(|(&x, y)| (x as f64 - y as f64).powi(2)).sum();
    1.0 - 6.0 * squares / (n * (n * n - 1.0))
}

/// Distance of `θ·I` to the walls of the Weyl cone at `I`, from the spectrum of `θθᵀ`.
fn wall_distance(theta: &GroupElement<f64>) -> f64 {
    let m = to_nalgebra(theta.matrix());
    let mut logs: Vec<f64> = (&m * m.transpose()).symmetric_eigen().eigenvalues.iter().map(|v| v.ln()).collect();
    logs.sort_by(|a, b| b.total_cmp(a));
    logs.windows(2).map(|w| (w[0] - w[1]) / 2f64.sqrt()).fold(f64::INFINITY, f64::min)
}

fn transvection_shape() -> Check {
    let face = FaceType::full(3);
    let mut source = rng(3);
    let (mut library, mut oracle) = (Vec::new(), Vec::new());
    let mut vanishing = Vec::new();
    for i in 0..105 {
        let mut a = if i < 100 {
            random_traceless(3, 1.0, &mut source)
        } else {
            // a repeated exponent puts the translate on a wall
            let u = 0.2 + source.random::<f64>();
            if i % 2 == 0 { vec![u, u, -2.0 * u] } else { vec![2.0 * u, -u, -u] }
        };
        a.sort_by(|x, y| y.total_cmp(x));
        let rotation = rotation_element(&random_rotation(3, &mut source))?;
        let theta = GroupElement::from_log_diagonal(&a).conjugate_by(&rotation);
        let tau = Flag::standard(face.clone()).translate(&rotation);
        let value = log_expansion_factor(&theta.inverse(), &tau);
        let distance = wall_distance(&theta);
        if i < 100 {
            library.push(value);
            oracle.push(distance);
        } else {
            vanishing.push((value, distance));
        }
    }
    let rho = spearman(&library, &oracle);
    let positive = library.iter().zip(&oracle).all(|(&v, &d)| v > 1e-9 && d > 1e-9);
    let together = vanishing.iter().all(|&(v, d)| v.abs() <= 1e-9 && d.abs() <= 1e-9);
    verdict(
        rho == 1.0 && positive && together,
        format!("Spearman {rho} over 100, {} wall cases vanish together: {together}", vanishing.len()),
    )
}

// ---------------------------------------------------------------------------
// 4. Rank one: Schottky pair in SL(2) and a parabolic generator

fn multiply2(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    [a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3], a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]]
}

/// Isometric circles `|cz + d| = 1` of `g` and `|-cz + a| = 1` of `g⁻¹` as (centre, radius).
fn isometric_circles(g: &[f64; 4]) -> Option<[(f64, f64); 2]> {
    let [a, _, c, d] = *g;
    (c.abs() > 1e-12).then(|| [(-d / c, 1.0 / c.abs()), (a / c, 1.0 / c.abs())])
}

/// Klein's criterion: some rotation conjugate of the pair has four pairwise
/// disjoint isometric circles, so the pair generates a free group.
fn ping_pong(a: &[f64; 4], b: &[f64; 4]) -> bool {
    (0..64).any(|i| {
        let angle = PI * i as f64 / 64.0;
        let (s, c) = angle.sin_cos();
        let (rotation, back) = ([c, -s, s, c], [c, s, -s, c]);
        let circles: Vec<(f64, f64)> = [a, b]
            .iter()
            .filter_map(|g| isometric_circles(&multiply2(&multiply2(&rotation, g), &back)))
            .flatten()
            .collect();
        circles.len() == 4
            && (0..4).all(|i| (i + 1..4).all(|j| (circles[i].0 - circles[j].0).abs() > circles[i].1 + circles[j].1))
    })
}

/// Eigenvectors of a hyperbolic `2 × 2` matrix, the expanding one first.
fn axis_endpoints(g: &GroupElement<f64>) -> ([f64; 2], [f64; 2]) {
    let m = g.matrix();
    let (trace, det) = (m[(0, 0)] + m[(1, 1)], m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]);
    let root = (trace * trace / 4.0 - det).sqrt();
    let (large, small) = if trace >= 0.0 { (trace / 2.0 + root, trace / 2.0 - root) } else { (trace / 2.0 - root, trace / 2.0 + root) };
    // (m - λ) v = 0 is solved by either row; the longer candidate is the stable one
    let vector = |lambda: f64| {
        let (first, second) = ([m[(0, 1)], lambda - m[(0, 0)]], [lambda - m[(1, 1)], m[(1, 0)]]);
        if first[0].hypot(first[1]) >= second[0].hypot(second[1]) { first } else { second }
    };
    (vector(large), vector(small))
}

/// Cross-ratio `(a⁺, a⁻; b⁺, b⁻)` of the axis endpoints on the projective line.
fn axis_cross_ratio(a: &GroupElement<f64>, b: &GroupElement<f64>) -> f64 {
    let (ap, am) = axis_endpoints(a);
    let (bp, bm) = axis_endpoints(b);
    let bracket = |u: [f64; 2], v: [f64; 2]| u[0] * v[1] - u[1] * v[0];
    (bracket(ap, bp) * bracket(am, bm) / (bracket(ap, bm) * bracket(am, bp))).abs()
}

fn rank_one() -> Check {
    let input = load("schottky_sl2.json")?;
    let face = input.face_type();
    let gens = input.group_elements();
    let separation = axis_cross_ratio(&gens[0], &gens[1]);
    if separation < 2.0 {
        return Err(format!("documented pair has cross-ratio {separation:.3} < 2"));
    }
    type Search = Mp<256>;
    let (alpha, beta) = (gens[0].lift::<Search>(), gens[1].lift::<Search>());
    let zeta = canonical_zeta(&face).map_err(fail)?;
    let outcome = power_search(
        &alpha,
        &beta,
        &Point::identity(2),
        &search_params(&face)?,
        &zeta,
        32,
        &CertifyOptions::default(),
    )
    .map_err(fail)?;
    let PowerSearchOutcome::Found { m, n, .. } = outcome else {
        return Err("power search found no certified pair".into());
    };
    let power = |g: &GroupElement<f64>, k: u32| {
        let p = g.pow(k as i64).matrix().to_row_major_f64();
        [p[0], p[1], p[2], p[3]]
    };
    let free = ping_pong(&power(&gens[0], m), &power(&gens[1], n));

    let unipotent = load("unipotent_sl2.json")?;
    let uface = unipotent.face_type();
    let rep = Representation::new(
        unipotent.group_elements().iter().map(|g| g.lift::<Mp<128>>()).collect(),
        Point::identity(2),
    )
    .map_err(fail)?;
    let schedule = default_schedule(&uface, 6).map_err(fail)?;
    let parabolic = certify_action(&rep, &uface, &schedule, &canonical_zeta(&uface).map_err(fail)?, &CertifyOptions::default())
        .map_err(fail)?;
    let rejected = match &parabolic {
        CertifyOutcome::NotCertified(nc) => nc.attempts.len() == 6,
        CertifyOutcome::Certified(_) => false,
    };
    verdict(
        free && rejected,
        format!("cross-ratio {separation:.3}, certified ({m},{n}), ping-pong {free}, parabolic rejected through 6: {rejected}"),
    )
}

// ---------------------------------------------------------------------------
// 5. Schottky pair in SL(3)

fn certified_sl3_powers() -> Result<(RepresentationInput, u32, u32), String> {
    let input = load("schottky_sl3.json")?;
    let face = input.face_type();
    let gens = input.group_elements();
    type Search = Mp<256>;
    let outcome = power_search(
        &gens[0].lift::<Search>(),
        &gens[1].lift::<Search>(),
        &Point::identity(3),
        &search_params(&face)?,
        &canonical_zeta(&face).map_err(fail)?,
        32,
        &CertifyOptions::default(),
    )
    .map_err(fail)?;
    match outcome {
        PowerSearchOutcome::Found { m, n, .. } => Ok((input, m, n)),
        PowerSearchOutcome::NotFound { .. } => Err("power search found no certified pair up to 32".into()),
    }
}

fn powered<T: Real>(input: &RepresentationInput, m: u32, n: u32) -> Result<Representation<T>, String> {
    let gens = input.group_elements();
    let generators = vec![gens[0].lift::<T>().pow(m as i64), gens[1].lift::<T>().pow(n as i64)];
    Representation::new(generators, Point::identity(input.n)).map_err(fail)
}

fn schottky_sl3() -> Check {
    let (input, m, n) = certified_sl3_powers()?;
    let face = input.face_type();
    let tol = Tolerances::default();
    let rep = powered::<Mp<1024>>(&input, m, n)?;
    let sample = limit_set_sample(&rep, &face, 8, &tol).map_err(fail)?;
    let flags: Vec<Flag<Mp<1024>>> = sample.points.iter().map(|p| p.flag.clone()).collect();
    let audit = antipodality_audit(&flags, &tol).map_err(fail)?;
    let opposite = audit.offender.is_none() && audit.min_margin > 0.0 && sample.skipped.is_empty();

    let rep = powered::<Mp<2048>>(&input, m, n)?;
    let mut slopes = Vec::new();
    for seed in 1..=3 {
        let ray = random_reduced_word(2, 20, &mut rng(seed));
        let element = rep.word_element(&ray).map_err(fail)?;
        let tau = group_shadow(&element, rep.basepoint(), &face, &tol).map_err(fail)?;
        slopes.push(expansion_report(&rep, &ray, &tau).map_err(fail)?.slope);
    }
    let expanding = slopes.iter().all(|&s| s >= 0.1);
    verdict(
        m <= 32 && n <= 32 && opposite && expanding,
        format!(
            "powers ({m},{n}), {} flags at length 8 with min margin {:.3e}, slopes {:.3?}",
            flags.len(),
            audit.min_margin,
            slopes
        ),
    )
}

// ---------------------------------------------------------------------------
// 6. Closeness of certified orbit paths to parallel sets

fn morse_lemma() -> Check {
    let (input, m, n) = certified_sl3_powers()?;
    type Wide = Mp<1024>;
    let rep = powered::<Wide>(&input, m, n)?;
    let theta = ThetaSet::new(input.face_type(), 0.125).map_err(fail)?;
    let tol = Tolerances::default();
    let mut source = rng(11);
    let mut fits = Vec::new();
    for length in 1..=12usize {
        for _ in 0..3 {
            let word = random_reduced_word(2, length, &mut source);
            let path = rep.centred_path(&word, length / 2).map_err(fail)?;
            fits.push(morse_lemma_fit(&path, &theta, f64::INFINITY, &tol).map_err(fail)?);
        }
    }
    let observed = fits.iter().map(|f| f.max_distance).fold(0.0, f64::max);
    let delta = 2.0 * observed;
    let within = fits.iter().all(|f| f.max_distance <= delta);
    let failures: usize = fits.iter().map(|f| f.membership_failures.len()).sum();
    let checked: usize = fits.iter().map(|f| f.memberships_checked).sum();
    verdict(
        within && failures == 0,
        format!("{} paths, delta {delta:.3}, {failures} of {checked} cone memberships fail", fits.len()),
    )
}

// ---------------------------------------------------------------------------
// 7. Nested cones and convexity

/// `x^{1/2} k exp(diag a) kᵀ x^{1/2}` with `k` the orthonormal frame of
/// `x^{-1/2} F`: the point at type `a` from `x` toward the chamber of `F`.
fn cone_point(x: &Point<f64>, frame: &Mat<f64>, a: &[f64]) -> Result<Point<f64>, String> {
    let (k, _) = qr(&x.inv_sqrt().matmul(frame)).ok_or("singular frame")?;
    let diag: Vec<f64> = a.iter().map(|v| v.exp()).collect();
    let y = x.sqrt().matmul(&k).congruence(&Mat::from_diagonal(&diag));
    Point::new(y, &Tolerances::default()).map_err(fail)
}

/// Decreasing traceless exponents whose unit type clears `margin` on the face.
fn regular_type(face: &FaceType, margin: f64, source: &mut impl Rng) -> Result<Vec<f64>, String> {
    loop {
        let a = CartanVector::from_unsorted(random_traceless(face.n(), 1.0, source)).map_err(fail)?;
        if unit_root_margin(&a, face).map_err(fail)? >= margin {
            let scale = 0.5 + 1.5 * source.random::<f64>();
            return Ok(a.unit().map_err(fail)?.scaled(scale).entries().to_vec());
        }
    }
}

/// The frame of `tau` rotated inside each block: another chamber with the same flag.
fn other_chamber(tau: &Flag<f64>, source: &mut impl Rng) -> Mat<f64> {
    let n = tau.dim();
    let mut inner = Mat::<f64>::zeros(n, n);
    for (start, end) in tau.face().blocks() {
        let block = random_rotation(end - start, source);
        for r in start..end {
            for c in start..end {
                inner[(r, c)] = block[(r - start, c - start)];
            }
        }
    }
    tau.frame().matmul(&inner)
}

fn cone_invariants() -> Check {
    let tol = Tolerances::default();
    let mut source = rng(7);
    let faces = [FaceType::full(3), FaceType::new(4, vec![1, 3]).map_err(fail)?, FaceType::new(4, vec![2]).map_err(fail)?];
    let margin = 0.3;
    let (mut nested_failures, mut convex_failures) = (0, 0);
    for i in 0..500 {
        let face = &faces[i % faces.len()];
        let theta = ThetaSet::new(face.clone(), margin).map_err(fail)?;
        let x = random_point(face.n(), 1.0, &mut source);
        let tau = random_flag(face, &mut source);
        let first = cone_point(&x, tau.frame(), &regular_type(face, margin + 0.05, &mut source)?)?;
        let second_frame = other_chamber(&tau, &mut source);
        let y = cone_point(&first, &second_frame, &regular_type(face, margin + 0.05, &mut source)?)?;
        if !in_theta_cone(&x, &tau, &y, &theta, &tol).map_err(fail)?.inside {
            nested_failures += 1;
        }
    }
    for i in 0..500 {
        let face = &faces[i % faces.len()];
        let slack = ThetaSet::new(face.clone(), margin - 1e-3).map_err(fail)?;
        let x = random_point(face.n(), 1.0, &mut source);
        let tau = random_flag(face, &mut source);
        let y1 = cone_point(&x, tau.frame(), &regular_type(face, margin, &mut source)?)?;
        let second_frame = other_chamber(&tau, &mut source);
        let y2 = cone_point(&x, &second_frame, &regular_type(face, margin, &mut source)?)?;
        let mid = midpoint(&y1, &y2).map_err(fail)?;
        if !in_theta_cone(&x, &tau, &mid, &slack, &tol).map_err(fail)?.inside {
            convex_failures += 1;
        }
    }
    verdict(
        nested_failures == 0 && convex_failures == 0,
        format!("nested violations {nested_failures}/500, convexity violations {convex_failures}/500"),
    )
}

// ---------------------------------------------------------------------------
// 8. Shadows do not depend on the basepoint

fn shadow_uniqueness() -> Check {
    type Wide = Mp<512>;
    let face = FaceType::full(3);
    let tol = Tolerances::default();
    let mut source = rng(8);
    let (mut monotone, mut worst_final) = (true, 0.0f64);
    for _ in 0..20 {
        let a = loop {
            let mut a = random_traceless(3, 1.0, &mut source);
            a.sort_by(|x, y| y.total_cmp(x));
            if a.windows(2).all(|w| w[0] - w[1] >= 0.5) {
                break a;
            }
        };
        let h = random_group_element(3, 0.5, &mut source).lift::<Wide>();
        let gamma = GroupElement::<Wide>::from_log_diagonal(&a).conjugate_by(&h);
        let p = random_point(3, 1.0, &mut source).lift::<Wide>();
        let identity = Point::<Wide>::identity(3);
        let mut distances = Vec::new();
        for k in 3..=10 {
            let power = gamma.pow(k);
            let from_identity = group_shadow(&power, &identity, &face, &tol).map_err(fail)?;
            let from_p = group_shadow(&power, &p, &face, &tol).map_err(fail)?;
            distances.push(flag_distance(&from_identity, &from_p).map_err(fail)?);
        }
        monotone &= distances.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        worst_final = worst_final.max(*distances.last().expect("eight powers"));
    }
    verdict(monotone && worst_final <= 1e-3, format!("non-increasing {monotone}, worst final distance {worst_final:.2e}"))
}

// ---------------------------------------------------------------------------
// 9. Small perturbations of the certified pair

/// `g (I + 1e-4 E)` with `E` uniform in `[-1, 1]`, rescaled to determinant one.
/// Entrywise changes of the same size would move the determinant of these
/// badly conditioned generators by orders of magnitude.
fn perturbed<T: Real>(g: &GroupElement<T>, source: &mut impl Rng) -> Result<GroupElement<T>, String> {
    let n = g.dim();
    let nudge = Mat::<f64>::from_fn(n, n, |r, c| {
        let identity = if r == c { 1.0 } else { 0.0 };
        identity + 1e-4 * (2.0 * source.random::<f64>() - 1.0)
    });
    let mat = g.matrix().matmul(&nudge.lift::<T>());
    let scale = determinant(&mat).to_f64().powf(-1.0 / n as f64);
    GroupElement::new(mat.scale(&T::from_f64(scale)), &Tolerances::default()).map_err(fail)
}

fn perturbation() -> Check {
    type Wide = Mp<512>;
    let (input, m, n) = certified_sl3_powers()?;
    let face = input.face_type();
    let tol = Tolerances::default();
    let schedule = [search_params(&face)?];
    let zeta = canonical_zeta(&face).map_err(fail)?;
    let original = powered::<Wide>(&input, m, n)?;
    let mut source = rng(9);
    let generators = original
        .generators()
        .iter()
        .map(|g| perturbed(g, &mut source))
        .collect::<Result<Vec<_>, _>>()?;
    let moved = Representation::new(generators, Point::identity(input.n)).map_err(fail)?;
    let index = |rep: &Representation<Wide>| -> Result<Option<usize>, String> {
        let outcome = certify_action(rep, &face, &schedule, &zeta, &CertifyOptions::default()).map_err(fail)?;
        Ok(outcome.certificate().map(|c| c.schedule_index))
    };
    let (before, after) = (index(&original)?, index(&moved)?);
    let (reference, _) = shadow_samples(&original, &face, 4, &[], &tol).map_err(fail)?;
    let (shifted, _) = shadow_samples(&moved, &face, 4, &[], &tol).map_err(fail)?;
    let mut worst: f64 = 0.0;
    let mut matched = reference.len() == shifted.len();
    for (a, b) in reference.iter().zip(&shifted) {
        matched &= a.word == b.word;
        worst = worst.max(flag_distance(&a.flag, &b.flag).map_err(fail)?);
    }
    verdict(
        before.is_some() && before == after && matched && worst <= 1e-2,
        format!("schedule index {before:?} -> {after:?}, {} shadows, worst flag distance {worst:.2e}", reference.len()),
    )
}

// ---------------------------------------------------------------------------
// 10. Certification output does not depend on the worker count

fn determinism() -> Check {
    let mut files: Vec<PathBuf> = std::fs::read_dir(data_dir())
        .map_err(fail)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let scratch = std::env::temp_dir().join(format!("morsecert-determinism-{}", std::process::id()));
    std::fs::create_dir_all(&scratch).map_err(fail)?;
    let mut compared = Vec::new();
    let mut differing = Vec::new();
    for file in files {
        let Ok(input) = load_representation(&std::fs::read(&file).map_err(fail)?) else {
            continue;
        };
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("input").to_string();
        let mut outputs = Vec::new();
        for jobs in [1, 4] {
            let out = scratch.join(format!("{stem}-{jobs}.json"));
            let mut command = Command::new(env!("CARGO_BIN_EXE_morsecert"));
            command.arg("certify").arg(&file).arg("--jobs").arg(jobs.to_string()).arg("--out").arg(&out);
            if input.rank >= 2 {
                command.args(["--schedule-max", "2"]);
            }
            let status = command.output().map_err(fail)?.status;
            if !matches!(status.code(), Some(0 | 2)) {
                return Err(format!("{stem}: certify exited with {status}"));
            }
            outputs.push(std::fs::read(&out).map_err(fail)?);
        }
        if outputs[0] != outputs[1] {
            differing.push(stem.clone());
        }
        compared.push(stem);
    }
    let _ = std::fs::remove_dir_all(&scratch);
    verdict(
        differing.is_empty() && !compared.is_empty(),
        format!("{} documents compared, differing: {differing:?}", compared.len()),
    )
}

// ---------------------------------------------------------------------------

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { name: "distance symmetry", limit: secs(5), run: cartan_symmetry },
        Criterion { name: "expansion factors", limit: secs(30), run: expansion_factors },
        Criterion { name: "transvection contraction", limit: secs(30), run: transvection_shape },
        Criterion { name: "rank-one ping-pong", limit: secs(120), run: rank_one },
        Criterion { name: "SL(3) Schottky pair", limit: secs(600), run: schottky_sl3 },
        Criterion { name: "Morse lemma fit", limit: secs(120), run: morse_lemma },
        Criterion { name: "nested cones and convexity", limit: secs(60), run: cone_invariants },
        Criterion { name: "shadow uniqueness", limit: secs(30), run: shadow_uniqueness },
        Criterion { name: "perturbation", limit: secs(600), run: perturbation },
        Criterion { name: "determinism across jobs", limit: None, run: determinism },
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, criterion) in criteria.iter().enumerate() {
        let number = i + 1;
        if !selected.is_empty() && !selected.contains(&number) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(criterion.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(detail) if criterion.limit.is_some_and(|l| elapsed > l) => (false, format!("{detail}; over time limit")),
            Ok(detail) => (true, detail),
            Err(detail) => (false, detail),
        };
        failed += usize::from(!pass);
        let limit = criterion.limit.map_or("no limit".to_string(), |l| format!("limit {}s", l.as_secs()));
        println!(
            "criterion {number:>2} {:<28} {} ({:.2}s, {limit}): {detail}",
            criterion.name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
