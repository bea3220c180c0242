use std::collections::{BTreeMap, BTreeSet};

use super::ground::GroundTask;
use super::search::{Plan, PlanStep, SearchStats, SolveOutcome, UnsolvableReason};

/// State cap for the exhaustive reference search.
pub const BRUTE_FORCE_STATE_CAP: usize = 100_000;

/// Reference search for testing `solve`: expands whole levels of the state
/// graph with ordered sets, independent of the bitset search.
pub fn brute_force_solve(task: &GroundTask) -> SolveOutcome {
    let init: BTreeSet<usize> = task.init.iter().copied().collect();
    let is_goal = |s: &BTreeSet<usize>| task.goal.eval(&|a| s.contains(&a));
    // state -> (predecessor, action index)
    let mut parents: BTreeMap<BTreeSet<usize>, Option<(BTreeSet<usize>, usize)>> = BTreeMap::new();
    parents.insert(init.clone(), None);
    let mut level = vec![init];
    let mut stats = SearchStats::default();

    loop {
        if let Some(goal) = level.iter().find(|s| is_goal(s)) {
            let mut steps = Vec::new();
            let mut cur = goal.clone();
            while let Some(Some((prev, ai))) = parents.get(&cur) {
                let a = &task.actions[*ai];
                steps.push(PlanStep {
                    name: a.name.clone(),
                    args: a.args.clone(),
                });
                cur = prev.clone();
            }
            steps.reverse();
            return SolveOutcome::Found(Plan::new(steps), stats);
        }
        let mut next_level = Vec::new();
        for state in &level {
            stats.expanded += 1;
            for (ai, action) in task.actions.iter().enumerate() {
                let applicable = action.pre_pos.iter().all(|a| state.contains(a))
                    && action.pre_neg.iter().all(|a| !state.contains(a))
                    && action.pre_complex.iter().all(|c| c.eval(&|a| state.contains(&a)));
                if !applicable {
                    continue;
                }
                let mut next: BTreeSet<usize> =
                    state.difference(&action.del.iter().copied().collect()).copied().collect();
                next.extend(action.add.iter().copied());
                stats.generated += 1;
                if parents.contains_key(&next) {
                    continue;
                }
                parents.insert(next.clone(), Some((state.clone(), ai)));
                next_level.push(next);
                if parents.len() > BRUTE_FORCE_STATE_CAP {
                    return SolveOutcome::Unsolvable(UnsolvableReason::LimitExceeded);
                }
            }
        }
        if next_level.is_empty() {
            return SolveOutcome::Unsolvable(UnsolvableReason::GoalUnreachable);
        }
        level = next_level;
    }
}
