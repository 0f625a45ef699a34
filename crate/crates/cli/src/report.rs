//! JSON report documents.

use serde::Serialize;

use morsecert_core::morse::{
    Certificate, CheckReport, Failure, FailureKind, ScaleSummary, StraightnessParams, ViolationKind,
};
use morsecert_core::words::format_word;

use crate::schema::{Renormalization, RepresentationInput};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Non-finite values serialise as `null`.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

impl Tool {
    pub fn current() -> Tool {
        Tool { name: TOOL_NAME, version: TOOL_VERSION }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub n: usize,
    pub rank: usize,
    pub face: Vec<usize>,
    pub seed: u64,
    pub renormalized: Vec<Renormalization>,
}

impl InputSummary {
    pub fn new(input: &RepresentationInput, face: &[usize], seed: u64) -> Self {
        InputSummary { n: input.n, rank: input.rank, face: face.to_vec(), seed, renormalized: input.renormalized.clone() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScheduleEntry {
    pub index: usize,
    pub theta_margin: f64,
    pub eps: f64,
    pub spacing: f64,
    pub scale: usize,
}

impl ScheduleEntry {
    pub fn new(index: usize, p: &StraightnessParams) -> Self {
        ScheduleEntry { index, theta_margin: p.theta.margin(), eps: p.eps, spacing: p.spacing, scale: p.scale }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ViolationJson {
    pub kind: &'static str,
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureJson {
    /// A midpoint triple failed straightness, regularity or spacing.
    CheckFailed {
        word: String,
        violations: Vec<ViolationJson>,
        angle_defects: Vec<f64>,
        margins: Vec<f64>,
        spacings: Vec<f64>,
    },
    /// Orbit points exceeded the resolvable condition number.
    NumericalRange { word: String, log10_condition: Option<f64>, limit: f64 },
}

fn violation_name(kind: ViolationKind) -> &'static str {
    match kind {
        ViolationKind::Regularity => "regularity",
        ViolationKind::Angle => "angle",
        ViolationKind::Spacing => "spacing",
    }
}

pub fn check_violations(r: &CheckReport) -> Vec<ViolationJson> {
    r.violations.iter().map(|v| ViolationJson { kind: violation_name(v.kind), index: v.index, value: v.value }).collect()
}

impl From<&Failure> for FailureJson {
    fn from(f: &Failure) -> Self {
        let word = format_word(&f.word);
        match &f.kind {
            FailureKind::Check(r) => FailureJson::CheckFailed {
                word,
                violations: check_violations(r),
                angle_defects: r.angle_defects.clone(),
                margins: r.margins.clone(),
                spacings: r.spacings.clone(),
            },
            FailureKind::Truncated { log10_condition, limit } => {
                FailureJson::NumericalRange { word, log10_condition: finite(*log10_condition), limit: *limit }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AttemptJson {
    pub schedule_index: usize,
    pub passed: bool,
    pub words_checked: u64,
    pub worst_angle_defect: f64,
    pub worst_margin: Option<f64>,
    pub worst_spacing: Option<f64>,
    pub failure: Option<FailureJson>,
}

impl From<&ScaleSummary> for AttemptJson {
    fn from(s: &ScaleSummary) -> Self {
        AttemptJson {
            schedule_index: s.schedule_index,
            passed: s.passed(),
            words_checked: s.words_checked,
            worst_angle_defect: s.worst_angle_defect,
            worst_margin: finite(s.worst_margin),
            worst_spacing: finite(s.worst_spacing),
            failure: s.failure.as_ref().map(FailureJson::from),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CertificateJson {
    pub schedule_index: usize,
    pub params: ScheduleEntry,
    pub words_checked: u64,
    pub worst_angle_defect: f64,
    pub worst_margin: Option<f64>,
    pub worst_spacing: Option<f64>,
    /// The schedule is a user choice; the certificate holds for it, not for
    /// constants derived from the local-to-global theorem.
    pub empirical_schedule: bool,
}

impl From<&Certificate> for CertificateJson {
    fn from(c: &Certificate) -> Self {
        CertificateJson {
            schedule_index: c.schedule_index,
            params: ScheduleEntry::new(c.schedule_index, &c.params),
            words_checked: c.words_checked,
            worst_angle_defect: c.worst_angle_defect,
            worst_margin: finite(c.worst_margin),
            worst_spacing: finite(c.worst_spacing),
            empirical_schedule: c.empirical_schedule,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Certified,
    /// Every schedule entry within the budget failed a check.
    BudgetExhausted,
    /// The budget ran out and at least one entry stopped on numerical range
    /// rather than on a failed check.
    BudgetExhaustedWithTruncation,
}

#[derive(Debug, Clone, Serialize)]
pub struct Budget {
    pub schedule_max: usize,
    pub scale_cap: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyReport {
    pub tool: Tool,
    pub command: &'static str,
    pub input: InputSummary,
    pub precision: String,
    pub budget: Budget,
    pub schedule: Vec<ScheduleEntry>,
    pub verdict: Verdict,
    pub certificate: Option<CertificateJson>,
    pub attempts: Vec<AttemptJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GenericityJson {
    pub pass: bool,
    pub axis_powers: [u32; 2],
    /// Opposition margins keyed by flag pair, e.g. `+a/-b`.
    pub margins: Vec<(String, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowerAttemptJson {
    pub m: u32,
    pub n: u32,
    pub precision: String,
    pub attempt: AttemptJson,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchVerdict {
    Found,
    NotFound,
    /// The axis flags of the two generators are not pairwise opposite.
    NotGeneric,
}

#[derive(Debug, Clone, Serialize)]
pub struct SchottkyReport {
    pub tool: Tool,
    pub command: &'static str,
    pub input: InputSummary,
    pub params: ScheduleEntry,
    pub max_power: u32,
    pub genericity: GenericityJson,
    pub verdict: SearchVerdict,
    pub powers: Option<(u32, u32)>,
    pub certificate: Option<CertificateJson>,
    pub pairs_tried: usize,
    pub best_attempt: Option<PowerAttemptJson>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckPathReport {
    pub tool: Tool,
    pub command: &'static str,
    pub input: InputSummary,
    pub precision: String,
    pub word: String,
    pub theta_margin: f64,
    pub diamond_distance: f64,
    pub lipschitz: f64,
    pub additive: f64,
    pub pass: bool,
    pub pairs_checked: usize,
    pub worst_diamond_distance: f64,
    pub quasigeodesic_violations: Vec<(usize, usize)>,
    pub diamond_violations: Vec<(usize, usize)>,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(report).expect("serialisable report");
    out.push(b'\n');
    out
}
