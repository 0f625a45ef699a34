//! Certification spread over word subtrees with an order-fixed merge.
//!
//! Subtrees are the reduced-word prefixes of a fixed depth. Results are
//! merged in prefix order up to and including the first failing subtree,
//! exactly as the sequential driver does, so the outcome is independent of
//! the number of workers. Subtrees after a known failure are skipped.

use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use morsecert_core::morse::{
    certify_subtree, outcome_from_summaries, subtree_roots, validate_schedule, CertifyOptions, CertifyOutcome,
    ScaleSummary, StraightnessParams,
};
use morsecert_core::words::Representation;
use morsecert_core::{Error, FaceType, Real, Result, ZetaType};

pub fn thread_pool(jobs: usize) -> std::result::Result<rayon::ThreadPool, String> {
    rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| e.to_string())
}

/// One schedule entry over all reduced words of length `3s`.
pub fn certify_scale_parallel<T: Real>(
    rep: &Representation<T>,
    params: &StraightnessParams,
    zeta: &ZetaType,
    schedule_index: usize,
    opts: &CertifyOptions,
    pool: &rayon::ThreadPool,
) -> Result<ScaleSummary> {
    let roots = subtree_roots(rep.rank(), 3 * params.scale, opts.partition_depth);
    let first_failure = AtomicUsize::new(usize::MAX);
    let parts: Vec<Result<Option<ScaleSummary>>> = pool.install(|| {
        roots
            .par_iter()
            .enumerate()
            .map(|(i, root)| {
                if i > first_failure.load(Ordering::Relaxed) {
                    return Ok(None);
                }
                let part = certify_subtree(rep, params, zeta, schedule_index, root, opts)?;
                if !part.passed() {
                    first_failure.fetch_min(i, Ordering::Relaxed);
                }
                Ok(Some(part))
            })
            .collect()
    });
    let mut ordered = Vec::with_capacity(parts.len());
    for part in parts {
        // a skipped subtree always follows a failed one, where the loop stops
        let part = part?.expect("subtrees before the first failure are evaluated");
        let failed = !part.passed();
        ordered.push(part);
        if failed {
            break;
        }
    }
    Ok(ScaleSummary::merge_ordered(schedule_index, &ordered))
}

/// The schedule driver of the sequential certifier with parallel scales.
pub fn certify_action_parallel<T: Real>(
    rep: &Representation<T>,
    face: &FaceType,
    schedule: &[StraightnessParams],
    zeta: &ZetaType,
    opts: &CertifyOptions,
    pool: &rayon::ThreadPool,
) -> Result<CertifyOutcome> {
    validate_schedule(face, schedule)?;
    if zeta.face() != face {
        return Err(Error::FaceMismatch);
    }
    let mut attempts = Vec::new();
    for (i, params) in schedule.iter().enumerate() {
        let summary = certify_scale_parallel(rep, params, zeta, i + 1, opts, pool)?;
        let passed = summary.passed();
        attempts.push(summary);
        if passed {
            break;
        }
    }
    Ok(outcome_from_summaries(schedule, attempts))
}
