//! Parallel drivers around the core enumerator and lifter.

use rayon::prelude::*;
use tropcount_core::curve::ProblemSpec;
use tropcount_core::enumerate::{validate_genericity, EnumerationResult, Enumerator, GenericityViolation};
use tropcount_core::lift::{Lifter, LiftOptions};

use crate::error::Failure;
use crate::problem::Problem;
use crate::result::{lifted_map_entry, LiftEntry};

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::new(crate::error::ErrorCode::Runtime, e.to_string()))
}

/// Classifies every trivalent type in parallel. The result does not depend
/// on the thread count: assembly sorts by canonical key.
pub fn enumerate(spec: &ProblemSpec, threads: Option<usize>) -> Result<EnumerationResult, Failure> {
    let e = Enumerator::prepare(spec)?;
    let n = u64::try_from(e.num_types()).map_err(|_| Failure::invariant("too many combinatorial types"))?;
    let classified: Vec<_> = pool(threads)?.install(|| (0..n).into_par_iter().map(|i| e.classify(i.into())).collect());
    Ok(e.assemble(classified))
}

/// Genericity violations per accepted curve (1-based curve index).
pub fn genericity_violations(result: &EnumerationResult) -> Vec<(usize, GenericityViolation)> {
    result
        .curves
        .iter()
        .enumerate()
        .flat_map(|(i, c)| validate_genericity(&c.curve).into_iter().map(move |v| (i + 1, v)))
        .collect()
}

/// Lifts every accepted curve to `order`; curves run in parallel.
pub fn lift(
    problem: &Problem,
    result: &EnumerationResult,
    order: i64,
    threads: Option<usize>,
) -> Result<Vec<LiftEntry>, Failure> {
    let mut options = LiftOptions::new(order);
    options.essential_betas = problem.essential_betas.clone();
    pool(threads)?.install(|| {
        result
            .curves
            .par_iter()
            .enumerate()
            .map(|(i, c)| {
                let maps = Lifter::new(&c.curve, &problem.spec, &options)?.lift_all(&options)?;
                Ok(LiftEntry { curve: i + 1, order, maps: maps.iter().map(lifted_map_entry).collect() })
            })
            .collect::<Result<Vec<_>, tropcount_core::lift::LiftError>>()
            .map_err(Failure::from)
    })
}
