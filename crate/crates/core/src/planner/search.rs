use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ground::GroundTask;
use crate::pddl::PddlDiagnostic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_expansions: usize,
    pub max_plan_len: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_expansions: 200_000,
            max_plan_len: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanStep {
    pub name: String,
    pub args: Vec<String>,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.name)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

impl PlanStep {
    /// Parses `(name a b)`; surrounding whitespace and case are ignored.
    pub fn parse(line: &str) -> Option<PlanStep> {
        let inner = line.trim().strip_prefix('(')?.strip_suffix(')')?;
        let mut words = inner.split_whitespace().map(str::to_lowercase);
        let name = words.next()?;
        Some(PlanStep {
            name,
            args: words.collect(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
    pub cost: usize,
}

impl Plan {
    pub fn new(steps: Vec<PlanStep>) -> Plan {
        let cost = steps.len();
        Plan { steps, cost }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// One action per line, `(name arg1 arg2 ...)`.
    pub fn to_text(&self) -> String {
        self.steps
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub expanded: usize,
    pub generated: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsolvableReason {
    GoalUnreachable,
    LimitExceeded,
}

impl fmt::Display for UnsolvableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnsolvableReason::GoalUnreachable => "goal-unreachable",
            UnsolvableReason::LimitExceeded => "limit-exceeded",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Found(Plan, SearchStats),
    Unsolvable(UnsolvableReason),
    Malformed(Vec<PddlDiagnostic>),
}

impl SolveOutcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            SolveOutcome::Found(p, _) => Some(p),
            _ => None,
        }
    }
}

type Bits = Box<[u64]>;

fn holds(bits: &[u64], a: usize) -> bool {
    bits[a / 64] >> (a % 64) & 1 == 1
}

/// Breadth-first search with duplicate detection. Successors are generated
/// in (name, args) order, so among shortest plans the first found is also
/// the lexicographically smallest sequence.
pub fn solve(task: &GroundTask, limits: &SearchLimits) -> SolveOutcome {
    let words = task.atoms.len().div_ceil(64).max(1);
    let mut init = vec![0u64; words].into_boxed_slice();
    for &a in &task.init {
        init[a / 64] |= 1 << (a % 64);
    }
    let mut stats = SearchStats::default();
    if task.goal.eval(&|a| holds(&init, a)) {
        return SolveOutcome::Found(Plan::default(), stats);
    }

    // (state, parent node, action index, depth)
    let mut nodes: Vec<(usize, usize, usize)> = vec![(usize::MAX, usize::MAX, 0)];
    let mut seen: HashMap<Bits, usize> = HashMap::new();
    let mut states: Vec<Bits> = vec![init.clone()];
    seen.insert(init, 0);
    let mut queue = VecDeque::from([0usize]);
    let mut truncated = false;

    while let Some(node) = queue.pop_front() {
        let depth = nodes[node].2;
        if depth >= limits.max_plan_len {
            truncated = true;
            continue;
        }
        if stats.expanded >= limits.max_expansions {
            return SolveOutcome::Unsolvable(UnsolvableReason::LimitExceeded);
        }
        stats.expanded += 1;
        let state = states[node].clone();
        for (ai, action) in task.actions.iter().enumerate() {
            if !action.applicable(&|a| holds(&state, a)) {
                continue;
            }
            let mut next = state.clone();
            for &d in &action.del {
                next[d / 64] &= !(1 << (d % 64));
            }
            for &a in &action.add {
                next[a / 64] |= 1 << (a % 64);
            }
            stats.generated += 1;
            if seen.contains_key(&next) {
                continue;
            }
            let id = nodes.len();
            nodes.push((node, ai, depth + 1));
            if task.goal.eval(&|a| holds(&next, a)) {
                return SolveOutcome::Found(extract(task, &nodes, id), stats);
            }
            seen.insert(next.clone(), id);
            states.push(next);
            queue.push_back(id);
        }
    }
    if truncated {
        SolveOutcome::Unsolvable(UnsolvableReason::LimitExceeded)
    } else {
        SolveOutcome::Unsolvable(UnsolvableReason::GoalUnreachable)
    }
}

fn extract(task: &GroundTask, nodes: &[(usize, usize, usize)], mut id: usize) -> Plan {
    let mut steps = Vec::new();
    while nodes[id].0 != usize::MAX {
        let a = &task.actions[nodes[id].1];
        steps.push(PlanStep {
            name: a.name.clone(),
            args: a.args.clone(),
        });
        id = nodes[id].0;
    }
    steps.reverse();
    Plan::new(steps)
}
