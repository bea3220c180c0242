//! Grounding and forward state-space search.

mod brute;
mod ground;
mod search;
mod validate;

pub use brute::{brute_force_solve, BRUTE_FORCE_STATE_CAP};
pub use ground::{
    ground, GroundAction, GroundAtom, GroundCondition, GroundTask, MAX_GROUND_ACTIONS,
};
pub use search::{
    solve, Plan, PlanStep, SearchLimits, SearchStats, SolveOutcome, UnsolvableReason,
};
pub use validate::{validate_plan, PlanFailure};

use crate::pddl::{DomainFile, ProblemFile};

/// Grounds and solves in one call.
pub fn plan(df: &DomainFile, pf: &ProblemFile, limits: &SearchLimits) -> SolveOutcome {
    match ground(df, pf) {
        Ok(task) => solve(&task, limits),
        Err(diags) => SolveOutcome::Malformed(diags),
    }
}
