use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ground::{GroundCondition, GroundTask};
use super::search::Plan;

/// First failing step of a plan. `step == plan.len()` means every action
/// applied but the goal does not hold at the end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanFailure {
    pub step: usize,
    pub unmet: String,
}

impl fmt::Display for PlanFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: unmet {}", self.step, self.unmet)
    }
}

/// Replays `plan` from the initial state, checking each action's
/// preconditions and finally the goal.
pub fn validate_plan(task: &GroundTask, plan: &Plan) -> Result<(), PlanFailure> {
    let mut state: BTreeSet<usize> = task.init.iter().copied().collect();
    for (i, step) in plan.steps.iter().enumerate() {
        let Some(action) = task.find_action(&step.name, &step.args) else {
            return Err(PlanFailure {
                step: i,
                unmet: format!("{step} is not an applicable action of this task"),
            });
        };
        let holds = |a: usize| state.contains(&a);
        if let Some(&a) = action.pre_pos.iter().find(|&&a| !holds(a)) {
            return Err(PlanFailure {
                step: i,
                unmet: task.atoms[a].to_string(),
            });
        }
        if let Some(&a) = action.pre_neg.iter().find(|&&a| holds(a)) {
            return Err(PlanFailure {
                step: i,
                unmet: format!("(not {})", task.atoms[a]),
            });
        }
        if let Some(c) = action.pre_complex.iter().find(|c| !c.eval(&holds)) {
            return Err(PlanFailure {
                step: i,
                unmet: task.render_condition(c),
            });
        }
        for d in &action.del {
            state.remove(d);
        }
        state.extend(action.add.iter().copied());
    }
    if task.goal.eval(&|a| state.contains(&a)) {
        Ok(())
    } else {
        Err(PlanFailure {
            step: plan.len(),
            unmet: match &task.goal {
                GroundCondition::False => "goal (unreachable)".to_string(),
                g => task.render_condition(g),
            },
        })
    }
}
