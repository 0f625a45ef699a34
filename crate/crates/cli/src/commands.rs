//! Subcommand implementations. Each returns whether the run reached a
//! positive verdict; input and runtime errors surface as [`CliError`].

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use morsecert_core::dynamics::expansion_report;
use morsecert_core::flags::{canonical_zeta, group_shadow, Flag};
use morsecert_core::morse::{check_path_morse, default_schedule, CertifyOptions, CertifyOutcome, StraightnessParams};
use morsecert_core::schottky::{
    finish_audit, genericity_check, opposition_floor, merge_samples, power_search_with, shadow_samples, AntipodalityAudit,
    PowerSearchOutcome, AXIS_LABELS,
};
use morsecert_core::words::{format_word, is_reduced, parse_word, reduced_words, Representation, Word};
use morsecert_core::{riemannian_distance, FaceType, GroupElement, Point, Real, ThetaSet, Tolerances};

use crate::parallel::{certify_action_parallel, certify_scale_parallel, thread_pool};
use crate::precision::{orbit_condition_bound, Precision, PrecisionChoice};
use crate::report::{
    self, AttemptJson, Budget, CertificateJson, CertifyReport, CheckPathReport, GenericityJson, InputSummary,
    PowerAttemptJson, ScheduleEntry, SchottkyReport, SearchVerdict, Tool, Verdict,
};
use crate::schema::{load_representation, RepresentationInput, SchemaError};
use crate::with_precision;

/// Environment variable overriding the document seed.
pub const SEED_VARIABLE: &str = "MORSECERT_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error in {path}: {source}")]
    Schema { path: PathBuf, source: SchemaError },
    #[error(transparent)]
    Core(#[from] morsecert_core::Error),
    #[error("{0}")]
    Usage(String),
}

/// Verdict of a completed run, mapped to exit codes 0 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Positive,
    Negative,
}

#[derive(Debug, Parser)]
#[command(name = "morsecert", version, about = "Certify Morse (Anosov) actions of free groups on SL(n,R)/SO(n)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the local-to-global certifier over the default schedule.
    Certify(CertifyArgs),
    /// Search powers (m, n) making <a^m, b^n> certifiably Morse.
    SchottkySearch(SchottkyArgs),
    /// Sample the flag limit set by shadows of words of one length.
    Limitset(LimitsetArgs),
    /// Expansion factors along a ray of words.
    ExpansionReport(ExpansionArgs),
    /// Check quasigeodesic and diamond closeness of one orbit path.
    CheckPath(CheckPathArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Representation document (JSON).
    pub rep_file: PathBuf,
    /// Face type as comma-separated dimensions; defaults to the document's.
    #[arg(long, value_delimiter = ',')]
    pub face: Option<Vec<usize>>,
    /// Arithmetic: auto, f64, or a bit width (128 … 4096).
    #[arg(long, default_value = "auto")]
    pub precision: PrecisionChoice,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of schedule entries to try.
    #[arg(long, default_value_t = 6)]
    pub schedule_max: usize,
    /// Skip schedule entries whose scale exceeds this.
    #[arg(long)]
    pub scale_cap: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SchottkyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 32)]
    pub max_power: u32,
    #[arg(long, default_value_t = 0.25)]
    pub theta_margin: f64,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 2.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 1)]
    pub scale: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitsetArgs {
    #[command(flatten)]
    pub common: Common,
    /// Exact word length of the sampled shadows.
    #[arg(long)]
    pub length: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExpansionArgs {
    #[command(flatten)]
    pub common: Common,
    /// Word repeated periodically along the ray; a seeded random reduced ray when absent.
    #[arg(long)]
    pub ray: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckPathArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 0.25)]
    pub theta_margin: f64,
    /// Allowed distance from the diamonds.
    #[arg(long = "D", default_value_t = 1.0)]
    pub diamond_distance: f64,
    /// Multiplicative quasigeodesic constant; derived from generator displacements when absent.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub additive: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<Status, CliError> {
    match &cli.command {
        Command::Certify(a) => certify(a, stdout),
        Command::SchottkySearch(a) => schottky_search(a, stdout),
        Command::Limitset(a) => limitset(a, stdout),
        Command::ExpansionReport(a) => expansion(a, stdout),
        Command::CheckPath(a) => check_path(a, stdout),
    }
}

fn read_input(path: &Path) -> Result<RepresentationInput, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    load_representation(&bytes).map_err(|source| CliError::Schema { path: path.to_path_buf(), source })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn say(out: &mut dyn Write, text: std::fmt::Arguments) -> Result<(), CliError> {
    out.write_fmt(text).and_then(|_| out.write_all(b"\n")).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

/// Document seed, unless overridden by the environment.
pub fn effective_seed(input: &RepresentationInput) -> Result<u64, CliError> {
    match std::env::var(SEED_VARIABLE) {
        Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_VARIABLE} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(input.seed),
    }
}

struct Loaded {
    input: RepresentationInput,
    face: FaceType,
    seed: u64,
    generators: Vec<GroupElement<f64>>,
    basepoint: Point<f64>,
}

impl Loaded {
    fn new(common: &Common) -> Result<Loaded, CliError> {
        let input = read_input(&common.rep_file)?;
        let dims = common.face.clone().unwrap_or_else(|| input.face.clone());
        let face = FaceType::new(input.n, dims).map_err(|e| CliError::Usage(format!("--face: {e}")))?;
        let seed = effective_seed(&input)?;
        let generators = input.group_elements();
        let basepoint = input.basepoint_point();
        Ok(Loaded { input, face, seed, generators, basepoint })
    }

    fn summary(&self) -> InputSummary {
        InputSummary::new(&self.input, self.face.dims(), self.seed)
    }

    fn generator_conditions(&self) -> Vec<f64> {
        self.generators.iter().map(GroupElement::log10_condition).collect()
    }

    /// Precision for orbit points reached by words of `letters` letters.
    fn precision(&self, choice: PrecisionChoice, letters: usize) -> Precision {
        choice.resolve(orbit_condition_bound(&self.generator_conditions(), self.basepoint.log10_condition(), letters))
    }

    fn representation<T: Real>(&self) -> Result<Representation<T>, CliError> {
        Ok(Representation::new(self.generators.iter().map(GroupElement::lift).collect(), self.basepoint.lift())?)
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    thread_pool(jobs).map_err(CliError::Usage)
}

pub fn certify(args: &CertifyArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = Loaded::new(&args.common)?;
    let face = &loaded.face;
    if args.schedule_max == 0 {
        return Err(CliError::Usage("--schedule-max must be positive".into()));
    }
    let schedule: Vec<StraightnessParams> = default_schedule(face, args.schedule_max)?
        .into_iter()
        .filter(|p| args.scale_cap.is_none_or(|cap| p.scale <= cap))
        .collect();
    if schedule.is_empty() {
        return Err(CliError::Usage("the scale cap excludes every schedule entry".into()));
    }
    let zeta = canonical_zeta(face)?;
    let largest_scale = schedule.iter().map(|p| p.scale).max().unwrap_or(1);
    // words are evaluated centred at their s-th point, so points are at most 2s letters away
    let precision = loaded.precision(args.common.precision, 3 * largest_scale);
    let pool = pool(args.jobs)?;
    let opts = CertifyOptions::default();
    let outcome = with_precision!(precision, T => {
        let rep = loaded.representation::<T>()?;
        certify_action_parallel(&rep, face, &schedule, &zeta, &opts, &pool)?
    });
    let schedule_json: Vec<ScheduleEntry> = schedule.iter().enumerate().map(|(i, p)| ScheduleEntry::new(i + 1, p)).collect();
    let (verdict, certificate, attempts, status) = match &outcome {
        CertifyOutcome::Certified(c) => (Verdict::Certified, Some(CertificateJson::from(c)), Vec::new(), Status::Positive),
        CertifyOutcome::NotCertified(nc) => {
            let verdict = if nc.truncated() { Verdict::BudgetExhaustedWithTruncation } else { Verdict::BudgetExhausted };
            (verdict, None, nc.attempts.iter().map(AttemptJson::from).collect(), Status::Negative)
        }
    };
    match &outcome {
        CertifyOutcome::Certified(c) => say(
            out,
            format_args!(
                "certified at schedule index {} (theta margin {}, eps {}, spacing {}, scale {}): {} words checked, worst angle defect {:.3e}",
                c.schedule_index,
                c.params.theta.margin(),
                c.params.eps,
                c.params.spacing,
                c.params.scale,
                c.words_checked,
                c.worst_angle_defect
            ),
        )?,
        CertifyOutcome::NotCertified(nc) => {
            say(out, format_args!("not certified: schedule budget exhausted after {} entries", nc.attempts.len()))?;
            if let Some(w) = nc.witness() {
                let what = match &w.kind {
                    morsecert_core::morse::FailureKind::Check(r) => format!(
                        "failed check ({})",
                        report::check_violations(r).iter().map(|v| format!("{} {:.3e}", v.kind, v.value)).collect::<Vec<_>>().join(", ")
                    ),
                    morsecert_core::morse::FailureKind::Truncated { log10_condition, limit } => {
                        format!("numerical range exceeded (log10 condition {log10_condition:.1} > {limit:.1})")
                    }
                };
                say(out, format_args!("witness word {}: {what}", format_word(&w.word)))?;
            }
            if nc.truncated() {
                say(out, format_args!("some schedule entries stopped on numerical range rather than on a failed check"))?;
            }
        }
    }
    if let Some(path) = &args.out {
        let report = CertifyReport {
            tool: Tool::current(),
            command: "certify",
            input: loaded.summary(),
            precision: precision.to_string(),
            budget: Budget { schedule_max: args.schedule_max, scale_cap: args.scale_cap },
            schedule: schedule_json,
            verdict,
            certificate,
            attempts,
        };
        write_file(path, &report::to_json(&report))?;
    }
    Ok(status)
}

fn pair_label(i: usize, j: usize) -> String {
    format!("{}/{}", AXIS_LABELS[i], AXIS_LABELS[j])
}

/// Widths tried in turn for axis-flag stabilisation under automatic precision.
const AXIS_WIDTHS: [u32; 3] = [256, 1024, 4096];

pub fn schottky_search(args: &SchottkyArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = Loaded::new(&args.common)?;
    if loaded.input.rank != 2 {
        return Err(CliError::Usage(format!("schottky-search needs exactly 2 generators, found {}", loaded.input.rank)));
    }
    let face = loaded.face.clone();
    let theta = ThetaSet::new(face.clone(), args.theta_margin)?;
    let params = StraightnessParams::new(theta, args.eps, args.spacing, args.scale)?;
    let zeta = canonical_zeta(&face)?;
    let tol = Tolerances::default();
    let opts = CertifyOptions::default();
    let pool = pool(args.jobs)?;
    let (alpha, beta) = (&loaded.generators[0], &loaded.generators[1]);
    let conds = loaded.generator_conditions();
    let base_cond = loaded.basepoint.log10_condition();

    let widths: Vec<Precision> = match args.common.precision {
        PrecisionChoice::Fixed(p) => vec![p],
        PrecisionChoice::Auto => AXIS_WIDTHS.iter().map(|&b| Precision::Bits(b)).collect(),
    };
    let mut generic = None;
    for (k, &p) in widths.iter().enumerate() {
        let result = with_precision!(p, T => {
            genericity_check(&alpha.lift::<T>(), &beta.lift::<T>(), &face, &loaded.basepoint.lift::<T>(), &tol)
                .map(|r| (r.pass, r.powers, r.margins.clone(), p))
        });
        match result {
            Err(morsecert_core::Error::PowerStabilizationFailed { .. }) if k + 1 < widths.len() => continue,
            other => {
                generic = Some(other?);
                break;
            }
        }
    }
    let (pass, powers, margins, axis_precision) = generic.expect("at least one width tried");
    let genericity = GenericityJson {
        pass,
        axis_powers: powers,
        margins: margins.iter().map(|&((i, j), m)| (pair_label(i, j), m)).collect(),
    };
    let mut report = SchottkyReport {
        tool: Tool::current(),
        command: "schottky-search",
        input: loaded.summary(),
        params: ScheduleEntry::new(1, &params),
        max_power: args.max_power,
        genericity,
        verdict: SearchVerdict::NotGeneric,
        powers: None,
        certificate: None,
        pairs_tried: 0,
        best_attempt: None,
    };
    let status = if !pass {
        let worst = margins.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("six pairs");
        say(
            out,
            format_args!(
                "not generic: axis flags {} are not opposite (margin {:.3e})",
                pair_label(worst.0 .0, worst.0 .1),
                worst.1
            ),
        )?;
        Status::Negative
    } else {
        let mut precisions = Vec::new();
        let outcome = with_precision!(axis_precision, T => {
            let (a, b) = (alpha.lift::<T>(), beta.lift::<T>());
            power_search_with(&a, &b, &loaded.basepoint.lift::<T>(), &params, &zeta, args.max_power, &opts, |m, n| {
                let bound = orbit_condition_bound(&[m as f64 * conds[0], n as f64 * conds[1]], base_cond, 3 * params.scale);
                let p = args.common.precision.resolve(bound);
                precisions.push(p);
                with_precision!(p, U => {
                    let gens = vec![alpha.lift::<U>().pow(m as i64), beta.lift::<U>().pow(n as i64)];
                    let rep = Representation::new(gens, loaded.basepoint.lift::<U>())?;
                    certify_scale_parallel(&rep, &params, &zeta, 1, &opts, &pool)
                })
            })?
        });
        match &outcome {
            PowerSearchOutcome::Found { m, n, certificate, attempts } => {
                report.verdict = SearchVerdict::Found;
                report.powers = Some((*m, *n));
                report.certificate = Some(CertificateJson::from(certificate));
                report.pairs_tried = *attempts;
                say(out, format_args!("found (m, n) = ({m}, {n}) after {attempts} pairs; certificate at scale {}", certificate.params.scale))?;
                Status::Positive
            }
            PowerSearchOutcome::NotFound { max_power, attempts } => {
                report.verdict = SearchVerdict::NotFound;
                report.pairs_tried = attempts.len();
                if let Some(best) = outcome.best_attempt() {
                    let idx = attempts.iter().position(|a| a == best).expect("best is an attempt");
                    report.best_attempt = Some(PowerAttemptJson {
                        m: best.m,
                        n: best.n,
                        precision: precisions[idx].to_string(),
                        attempt: AttemptJson::from(&best.summary),
                    });
                }
                say(out, format_args!("not found: no pair up to power {max_power} certifies ({} pairs tried)", attempts.len()))?;
                Status::Negative
            }
        }
    };
    if let Some(path) = &args.out {
        write_file(path, &report::to_json(&report))?;
    }
    Ok(status)
}

/// Shadow rows of a sample, with the audit of the merged flags.
pub struct LimitSetRun {
    pub rows: Vec<(Word, Flag<f64>, f64)>,
    pub sampled: usize,
    pub skipped: usize,
    pub audit: Option<AntipodalityAudit>,
}

/// Parallel shadow sampling over prefix subtrees, merged in word order.
pub fn sample_limit_set<T: Real>(
    rep: &Representation<T>,
    face: &FaceType,
    length: usize,
    pool: &rayon::ThreadPool,
) -> Result<LimitSetRun, CliError> {
    let tol = Tolerances::default();
    let roots: Vec<Word> = reduced_words(rep.rank(), length.min(2)).collect();
    let parts = pool.install(|| roots.par_iter().map(|r| shadow_samples(rep, face, length, r, &tol)).collect::<Vec<_>>());
    let mut points = Vec::new();
    let mut skipped = 0;
    for part in parts {
        let (p, s) = part?;
        points.extend(p);
        skipped += s.len();
    }
    let sampled = points.len() + skipped;
    let merged = merge_samples(points)?;
    let flags: Vec<Flag<T>> = merged.iter().map(|p| p.flag.clone()).collect();
    let audit = if flags.len() < 2 { None } else { Some(parallel_audit(&flags, pool)?) };
    let rows = merged.into_iter().map(|p| (p.word, p.flag.to_f64(), p.margin)).collect();
    Ok(LimitSetRun { rows, sampled, skipped, audit })
}

/// Pairwise antipodality audit at the working precision, rows spread over workers.
pub fn parallel_audit<T: Real>(flags: &[Flag<T>], pool: &rayon::ThreadPool) -> Result<AntipodalityAudit, CliError> {
    let tol = Tolerances::default();
    let rows = pool.install(|| {
        (0..flags.len() - 1)
            .into_par_iter()
            .map(|i| morsecert_core::schottky::audit_row(flags, i, &tol))
            .collect::<Vec<_>>()
    });
    let mut best = (f64::INFINITY, (0, 1));
    for row in rows {
        let row = row?;
        if row.0 < best.0 {
            best = row;
        }
    }
    Ok(finish_audit(best, opposition_floor::<T>()))
}

pub fn limitset(args: &LimitsetArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = Loaded::new(&args.common)?;
    if args.length == 0 {
        return Err(CliError::Usage("--length must be positive".into()));
    }
    let precision = loaded.precision(args.common.precision, args.length);
    let pool = pool(args.jobs)?;
    let run = with_precision!(precision, T => {
        let rep = loaded.representation::<T>()?;
        sample_limit_set(&rep, &loaded.face, args.length, &pool)?
    });
    let n = loaded.input.n;
    let k = *loaded.face.dims().last().expect("non-empty face");
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["word".to_string(), "k".to_string()];
    for c in 0..k {
        for r in 0..n {
            header.push(format!("v{}_{}", c + 1, r + 1));
        }
    }
    header.push("margin".into());
    let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    writer.write_record(&header).map_err(csv_err)?;
    for (word, flag, margin) in &run.rows {
        let mut record = vec![format_word(word), k.to_string()];
        let frame = flag.frame();
        for c in 0..k {
            for r in 0..n {
                record.push(format!("{:e}", frame[(r, c)]));
            }
        }
        record.push(format!("{margin:e}"));
        writer.write_record(&record).map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    match &args.out {
        Some(path) => write_file(path, &bytes)?,
        None => out.write_all(&bytes).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
    }
    let summary = format!(
        "{} words sampled, {} skipped, {} flags after merging",
        run.sampled,
        run.skipped,
        run.rows.len()
    );
    match run.audit {
        Some(a) => match a.offender {
            None => say(out, format_args!("{summary}; antipodality audit: pairwise opposite, min margin {:.3e}", a.min_margin))?,
            Some((i, j)) => say(
                out,
                format_args!(
                    "{summary}; antipodality audit: flags of {} and {} not opposite (margin {:.3e})",
                    format_word(&run.rows[i].0),
                    format_word(&run.rows[j].0),
                    a.min_margin
                ),
            )?,
        },
        None => say(out, format_args!("{summary}; antipodality audit needs two flags"))?,
    }
    Ok(Status::Positive)
}

/// Ray of `steps` letters: `word` repeated, or a seeded random reduced word.
pub fn build_ray(word: Option<&str>, rank: usize, steps: usize, seed: u64) -> Result<Word, CliError> {
    let ray: Word = match word {
        Some(w) => {
            let w = parse_word(w).map_err(|e| CliError::Usage(format!("--ray: {e}")))?;
            if w.is_empty() {
                return Err(CliError::Usage("--ray must not be empty".into()));
            }
            w.iter().copied().cycle().take(steps).collect()
        }
        None => morsecert_core::sample::random_reduced_word(rank, steps, &mut morsecert_core::sample::rng(seed)),
    };
    if !is_reduced(&ray) {
        return Err(CliError::Usage("the ray must be reduced; a repeated word must be cyclically reduced".into()));
    }
    if let Some(l) = ray.iter().find(|l| l.generator >= rank) {
        return Err(CliError::Usage(format!("letter {l} exceeds rank {rank}")));
    }
    Ok(ray)
}

pub fn expansion(args: &ExpansionArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = Loaded::new(&args.common)?;
    if args.steps == 0 {
        return Err(CliError::Usage("--steps must be positive".into()));
    }
    let ray = build_ray(args.ray.as_deref(), loaded.input.rank, args.steps, loaded.seed)?;
    let precision = loaded.precision(args.common.precision, args.steps);
    let tol = Tolerances::default();
    let report = with_precision!(precision, T => {
        let rep = loaded.representation::<T>()?;
        // the flag the ray converges to, read off its full length
        let tau = group_shadow(&rep.word_element(&ray)?, rep.basepoint(), &loaded.face, &tol)?;
        expansion_report(&rep, &ray, &tau)?
    });
    let mut writer = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| CliError::Usage(format!("csv: {e}"));
    writer.write_record(["step", "letter", "log_expansion"]).map_err(csv_err)?;
    for (step, value) in &report.series {
        writer.write_record([step.to_string(), ray[step - 1].to_string(), format!("{value:e}")]).map_err(csv_err)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    if let Some(path) = &args.out {
        write_file(path, &bytes)?;
    }
    say(
        out,
        format_args!(
            "ray {}: slope {:.6} intercept {:.6} monotone {}",
            format_word(&ray),
            report.slope,
            report.intercept,
            report.monotone
        ),
    )?;
    Ok(if report.slope > 0.0 { Status::Positive } else { Status::Negative })
}

/// `max(D, 1/d)` for the largest and smallest generator displacements `D`, `d`.
fn default_lipschitz<T: Real>(rep: &Representation<T>) -> Result<f64, CliError> {
    let x = rep.basepoint();
    let mut hi: f64 = 0.0;
    let mut lo = f64::INFINITY;
    for g in rep.generators() {
        let d = riemannian_distance(x, &x.translate(g))?;
        hi = hi.max(d);
        lo = lo.min(d);
    }
    Ok(hi.max(1.0 / lo))
}

pub fn check_path(args: &CheckPathArgs, out: &mut dyn Write) -> Result<Status, CliError> {
    let loaded = Loaded::new(&args.common)?;
    let word = parse_word(&args.word).map_err(|e| CliError::Usage(format!("--word: {e}")))?;
    if !is_reduced(&word) {
        return Err(CliError::Usage("--word must be reduced".into()));
    }
    let theta = ThetaSet::new(loaded.face.clone(), args.theta_margin)?;
    let half = word.len() / 2;
    let precision = loaded.precision(args.common.precision, word.len().max(1));
    let tol = Tolerances::default();
    let (lipschitz, result) = with_precision!(precision, T => {
        let rep = loaded.representation::<T>()?;
        let lipschitz = match args.lipschitz {
            Some(l) => l,
            None => default_lipschitz(&rep)?,
        };
        // centre the path at its middle point; all checks are isometry invariant
        let path = rep.centred_path(&word, half)?;
        (lipschitz, check_path_morse(&path, lipschitz, args.additive, &theta, args.diamond_distance, &tol)?)
    });
    say(
        out,
        format_args!(
            "path {}: {} ({} pairs, worst diamond distance {:.3e}, {} quasigeodesic and {} diamond violations)",
            format_word(&word),
            if result.pass { "pass" } else { "fail" },
            result.pairs_checked,
            result.worst_diamond_distance,
            result.quasigeodesic_violations.len(),
            result.diamond_violations.len()
        ),
    )?;
    if let Some(path) = &args.out {
        let report = CheckPathReport {
            tool: Tool::current(),
            command: "check-path",
            input: loaded.summary(),
            precision: precision.to_string(),
            word: format_word(&word),
            theta_margin: args.theta_margin,
            diamond_distance: args.diamond_distance,
            lipschitz,
            additive: args.additive,
            pass: result.pass,
            pairs_checked: result.pairs_checked,
            worst_diamond_distance: result.worst_diamond_distance,
            quasigeodesic_violations: result.quasigeodesic_violations.clone(),
            diamond_violations: result.diamond_violations.clone(),
        };
        write_file(path, &report::to_json(&report))?;
    }
    Ok(if result.pass { Status::Positive } else { Status::Negative })
}
