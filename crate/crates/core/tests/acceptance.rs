//! The twelve acceptance criteria at their default tolerances.
//!
//! The per-criterion lines are written to the process stdout directly, so
//! they appear even when the harness captures test output.

use std::io::Write;

use meanfield::verify::{checks, run_one, Ctx, Tolerances, DEFAULT_SEED};

#[test]
fn acceptance_criteria() {
    let ctx = Ctx { tol: Tolerances::default(), seed: DEFAULT_SEED };
    let criteria: Vec<_> = checks().into_iter().filter(|c| c.criterion.is_some()).collect();
    assert_eq!(criteria.len(), 12);

    let outcomes: Vec<_> = criteria.iter().map(|c| run_one(&ctx, c)).collect();
    let mut out = std::io::stdout().lock();
    for o in &outcomes {
        let _ = writeln!(out, "{}", o.line());
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    let _ = writeln!(out, "{}/12 criteria passed", 12 - failed.len());
    drop(out);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
