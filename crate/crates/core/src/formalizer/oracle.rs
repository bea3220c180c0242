//! Formalizer that writes correct PDDL from what the agent has observed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::envs::{AlfBelief, Belief, CoinBelief, Item, ItemLocation, Treatment};
use crate::pddl::parse_domain;
use crate::planner::{plan, SearchLimits, SolveOutcome};

use super::parse::FormalizerOutput;
use super::prompt::{Mode, PromptContext};
use super::{Formalizer, FormalizerError};

pub const COIN_ORACLE_DOMAIN: &str = "(define (domain explore)
  (:requirements :strips :typing :negative-preconditions :disjunctive-preconditions)
  (:types location direction)
  (:predicates
    (at ?loc - location)
    (door-closed ?loc1 - location ?loc2 - location ?dir - direction)
    (door-open ?loc1 - location ?loc2 - location ?dir - direction)
    (door-exists ?loc1 - location ?loc2 - location ?dir - direction)
    (no-door ?loc1 - location ?loc2 - location ?dir - direction)
  )
  (:action open-door
    :parameters (?loc1 - location ?loc2 - location ?dir - direction)
    :precondition (and (at ?loc1) (door-closed ?loc1 ?loc2 ?dir))
    :effect (and (not (door-closed ?loc1 ?loc2 ?dir)) (door-open ?loc1 ?loc2 ?dir))
  )
  (:action move
    :parameters (?from - location ?to - location ?dir - direction)
    :precondition (and (at ?from) (or (door-open ?from ?to ?dir) (no-door ?from ?to ?dir)))
    :effect (and (not (at ?from)) (at ?to))
  )
)";

pub const ALF_ORACLE_DOMAIN: &str = "(define (domain household)
  (:requirements :strips :typing :negative-preconditions :existential-preconditions)
  (:types
    receptacle sharpobject - object
    microwavereceptacle sinkbasinreceptacle fridgereceptacle - receptacle
  )
  (:predicates
    (at ?r - receptacle)
    (closed ?r - receptacle)
    (opened ?r - receptacle)
    (in ?o - object ?r - receptacle)
    (holding ?o - object)
    (handempty)
    (used ?o - object)
    (heated ?o - object)
    (cleaned ?o - object)
    (cooled ?o - object)
    (sliced ?o - object)
  )
  (:action GotoLocation
    :parameters (?from - receptacle ?to - receptacle)
    :precondition (at ?from)
    :effect (and (not (at ?from)) (at ?to))
  )
  (:action OpenObject
    :parameters (?r - receptacle)
    :precondition (and (at ?r) (closed ?r))
    :effect (and (opened ?r) (not (closed ?r)))
  )
  (:action CloseObject
    :parameters (?r - receptacle)
    :precondition (and (at ?r) (opened ?r))
    :effect (and (closed ?r) (not (opened ?r)))
  )
  (:action PickupObject
    :parameters (?o - object ?r - receptacle)
    :precondition (and (at ?r) (in ?o ?r) (handempty) (not (closed ?r)))
    :effect (and (holding ?o) (not (handempty)) (not (in ?o ?r)))
  )
  (:action PutObject
    :parameters (?o - object ?r - receptacle)
    :precondition (and (at ?r) (holding ?o) (not (closed ?r)))
    :effect (and (in ?o ?r) (handempty) (not (holding ?o)))
  )
  (:action useObject
    :parameters (?o - object)
    :precondition (exists (?r - receptacle) (and (at ?r) (in ?o ?r) (not (closed ?r))))
    :effect (used ?o)
  )
  (:action HeatObject
    :parameters (?o - object ?r - microwavereceptacle)
    :precondition (and (at ?r) (holding ?o))
    :effect (heated ?o)
  )
  (:action CleanObject
    :parameters (?o - object ?r - sinkbasinreceptacle)
    :precondition (and (at ?r) (holding ?o))
    :effect (cleaned ?o)
  )
  (:action CoolObject
    :parameters (?o - object ?r - fridgereceptacle)
    :precondition (and (at ?r) (holding ?o))
    :effect (cooled ?o)
  )
  (:action SliceObject
    :parameters (?r - receptacle ?co - object ?sharp_o - sharpobject)
    :precondition (and (at ?r) (in ?co ?r) (holding ?sharp_o) (not (closed ?r)))
    :effect (sliced ?co)
  )
)";

/// Predicates a domain file offers for describing doors.
#[derive(Clone, Copy, Debug)]
struct DoorVocabulary {
    door_exists: bool,
    door_open: bool,
    no_door: bool,
}

impl DoorVocabulary {
    fn full() -> Self {
        DoorVocabulary {
            door_exists: true,
            door_open: true,
            no_door: true,
        }
    }

    fn of(df_text: &str) -> Self {
        match parse_domain(df_text) {
            Ok(df) => DoorVocabulary {
                door_exists: df.predicate("door-exists").is_some(),
                door_open: df.predicate("door-open").is_some(),
                no_door: df.predicate("no-door").is_some(),
            },
            Err(_) => DoorVocabulary::full(),
        }
    }
}

fn placeholder(room: &str, dir: &str) -> String {
    format!("unknown-{room}-{dir}")
}

/// Problem file for the explored part of a CoinCollector map, with the
/// nearest unvisited location as goal.
pub fn coin_problem(b: &CoinBelief) -> String {
    coin_problem_with(b, DoorVocabulary::full())
}

fn coin_problem_with(b: &CoinBelief, vocab: DoorVocabulary) -> String {
    let mut locations: BTreeSet<String> = BTreeSet::new();
    let mut atoms: BTreeSet<String> = BTreeSet::new();
    let mut adjacency: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (room, exits) in &b.exits {
        locations.insert(room.clone());
        for e in exits {
            let other = e
                .neighbor
                .clone()
                .unwrap_or_else(|| placeholder(room, e.dir.name()));
            locations.insert(other.clone());
            adjacency.entry(room.clone()).or_default().insert(other.clone());
            adjacency.entry(other.clone()).or_default().insert(room.clone());
            let back = e.dir.opposite().name();
            let dir = e.dir.name();
            let mut both = |pred: &str| {
                atoms.insert(format!("({pred} {room} {other} {dir})"));
                atoms.insert(format!("({pred} {other} {room} {back})"));
            };
            match e.door_open {
                None if vocab.no_door => both("no-door"),
                None => {
                    if vocab.door_exists {
                        both("door-exists");
                    }
                    both("door-closed");
                }
                Some(open) => {
                    if vocab.door_exists {
                        both("door-exists");
                    }
                    if open && vocab.door_open {
                        both("door-open");
                    } else if !open {
                        both("door-closed");
                    }
                }
            }
        }
    }
    locations.insert(b.current.clone());

    let mut dist: BTreeMap<&str, usize> = BTreeMap::from([(b.current.as_str(), 0)]);
    let mut queue = VecDeque::from([b.current.as_str()]);
    while let Some(r) = queue.pop_front() {
        let d = dist[r];
        for n in adjacency.get(r).into_iter().flatten() {
            if !dist.contains_key(n.as_str()) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    let goal = dist
        .iter()
        .filter(|(name, _)| !b.visited.contains(**name))
        .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
        .map_or(b.current.as_str(), |(name, _)| name);

    let mut out = String::from("(define (problem explore-problem)\n  (:domain explore)\n  (:objects\n");
    out.push_str(&format!(
        "    {} - location\n    north south east west - direction\n  )\n  (:init\n",
        locations.iter().cloned().collect::<Vec<_>>().join(" ")
    ));
    out.push_str(&format!("    (at {})\n", b.current));
    for a in &atoms {
        out.push_str(&format!("    {a}\n"));
    }
    out.push_str(&format!("  )\n  (:goal (at {goal}))\n)"));
    out
}

/// "cabinet 1" becomes "cabinet1".
pub fn pddl_name(name: &str) -> String {
    name.split_whitespace().collect()
}

fn receptacle_type(kind: &str) -> &'static str {
    match kind {
        "microwave" => "microwavereceptacle",
        "sinkbasin" => "sinkbasinreceptacle",
        "fridge" => "fridgereceptacle",
        _ => "receptacle",
    }
}

fn is_sharp(item: &Item) -> bool {
    matches!(item.kind.as_str(), "knife" | "butterknife")
}

fn is_lamp(item: &Item) -> bool {
    matches!(item.kind.as_str(), "desklamp" | "floorlamp")
}

/// Current goal for ALF-lite: exploration until every object the task
/// needs has been seen, then one task stage at a time.
pub fn alf_goal(b: &AlfBelief) -> String {
    let t = &b.task;
    let target = b.items.iter().find(|i| i.kind == t.target);
    let knife = b.items.iter().find(|i| is_sharp(i));
    let lamp = b.items.iter().find(|i| is_lamp(i));
    let need_knife = t.slice && knife.is_none();
    let need_lamp = t.destination.is_none() && lamp.is_none();
    let (Some(target), false, false) = (target, need_knife, need_lamp) else {
        return explore_goal(b);
    };
    let tn = pddl_name(&target.name);
    let holding = b.holding.as_deref();
    if t.slice && !target.sliced {
        let kn = pddl_name(&knife.unwrap().name);
        return if holding == knife.map(|k| k.name.as_str()) {
            format!("(sliced {tn})")
        } else {
            format!("(holding {kn})")
        };
    }
    if let Some(h) = holding {
        if h != target.name {
            return "(handempty)".to_string();
        }
    } else {
        return format!("(holding {tn})");
    }
    if let Some(tr) = t.treatment {
        let (pred, done) = match tr {
            Treatment::Heat => ("heated", target.heated),
            Treatment::Cool => ("cooled", target.cooled),
            Treatment::Clean => ("cleaned", target.cleaned),
        };
        if !done {
            return format!("({pred} {tn})");
        }
    }
    match &t.destination {
        Some(dest) => {
            let r = b
                .receptacles
                .iter()
                .filter(|r| r.kind == *dest)
                .map(|r| pddl_name(&r.name))
                .min()
                .unwrap_or_default();
            format!("(in {tn} {r})")
        }
        None => format!("(and (holding {tn}) (used {}))", pddl_name(&lamp.unwrap().name)),
    }
}

fn explore_goal(b: &AlfBelief) -> String {
    if let Some(at) = &b.agent_at {
        if let Some(r) = b.receptacles.iter().find(|r| &r.name == at) {
            if r.open == Some(false) && !r.contents_known {
                return format!("(opened {})", pddl_name(&r.name));
            }
        }
    }
    let next = b
        .receptacles
        .iter()
        .filter(|r| !r.visited || (r.open == Some(false) && !r.contents_known))
        .map(|r| (pddl_name(&r.name), r))
        .min_by(|a, b| a.0.cmp(&b.0));
    match next {
        Some((n, r)) if r.visited => format!("(opened {n})"),
        Some((n, _)) => format!("(at {n})"),
        None => format!(
            "(at {})",
            b.agent_at.as_deref().map_or("init_receptacle".to_string(), pddl_name)
        ),
    }
}

pub fn alf_problem(b: &AlfBelief) -> String {
    let mut by_type: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    by_type.entry("receptacle").or_default().push("init_receptacle".to_string());
    for r in &b.receptacles {
        by_type
            .entry(receptacle_type(&r.kind))
            .or_default()
            .push(pddl_name(&r.name));
    }
    let mut items: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for i in &b.items {
        let ty = if is_sharp(i) { "sharpobject" } else { "object" };
        items.entry(ty).or_default().push(pddl_name(&i.name));
    }
    let mut out = String::from("(define (problem household-task)\n  (:domain household)\n  (:objects\n");
    for (ty, names) in by_type.iter().chain(items.iter()) {
        out.push_str(&format!("    {} - {ty}\n", names.join(" ")));
    }
    out.push_str("  )\n  (:init\n");
    let at = b.agent_at.as_deref().map_or("init_receptacle".to_string(), pddl_name);
    out.push_str(&format!("    (at {at})\n"));
    for r in &b.receptacles {
        match r.open {
            Some(true) if r.openable => out.push_str(&format!("    (opened {})\n", pddl_name(&r.name))),
            Some(false) if r.openable => out.push_str(&format!("    (closed {})\n", pddl_name(&r.name))),
            _ => {}
        }
    }
    if b.holding.is_none() {
        out.push_str("    (handempty)\n");
    }
    for i in &b.items {
        let n = pddl_name(&i.name);
        match i.location {
            ItemLocation::Held => out.push_str(&format!("    (holding {n})\n")),
            ItemLocation::In(_) => {
                let r = b
                    .receptacles
                    .iter()
                    .find(|r| item_in(b, i, &r.name))
                    .map(|r| pddl_name(&r.name))
                    .unwrap_or_default();
                out.push_str(&format!("    (in {n} {r})\n"));
            }
        }
        for (flag, pred) in [
            (i.heated, "heated"),
            (i.cooled, "cooled"),
            (i.cleaned, "cleaned"),
            (i.sliced, "sliced"),
            (i.on, "used"),
        ] {
            if flag {
                out.push_str(&format!("    ({pred} {n})\n"));
            }
        }
    }
    out.push_str(&format!("  )\n  (:goal {})\n)", alf_goal(b)));
    out
}

fn item_in(b: &AlfBelief, item: &Item, receptacle: &str) -> bool {
    match item.location {
        ItemLocation::In(idx) => b.receptacles.get(idx).is_some_and(|r| r.name == receptacle),
        ItemLocation::Held => false,
    }
}

/// The oracle's DF and PF for the current belief. With `fixed_df`, the PF is
/// phrased in that domain's door vocabulary.
pub fn oracle_pddl(belief: &Belief, fixed_df: Option<&str>) -> (String, String) {
    match belief {
        Belief::Coin(b) => match fixed_df {
            Some(df) => (df.to_string(), coin_problem_with(b, DoorVocabulary::of(df))),
            None => (COIN_ORACLE_DOMAIN.to_string(), coin_problem(b)),
        },
        Belief::Alf(b) => (
            fixed_df.unwrap_or(ALF_ORACLE_DOMAIN).to_string(),
            alf_problem(b),
        ),
    }
}

/// Perfect formalizer backed by the true observed state.
#[derive(Clone, Debug, Default)]
pub struct OracleFormalizer {
    pub limits: SearchLimits,
}

impl OracleFormalizer {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Formalizer for OracleFormalizer {
    fn formalize(&mut self, ctx: &PromptContext, belief: &Belief) -> Result<FormalizerOutput, FormalizerError> {
        let fixed = if ctx.df_fixed { ctx.prev_df.as_deref() } else { None };
        let (df, pf) = oracle_pddl(belief, fixed);
        if ctx.mode != Mode::Plangen {
            return Ok(FormalizerOutput::Pddl { df, pf });
        }
        let (Ok(d), Ok(p)) = (parse_domain(&df), crate::pddl::parse_problem(&pf)) else {
            return Err(FormalizerError::Format("oracle produced unparsable PDDL".into()));
        };
        let command = match plan(&d, &p, &self.limits) {
            SolveOutcome::Found(plan, _) => plan
                .steps
                .first()
                .and_then(|s| crate::orchestrator::translate_step(s, ctx.env).ok()),
            _ => None,
        };
        Ok(FormalizerOutput::Actions {
            actions: vec![command.unwrap_or_else(|| "look around".to_string())],
        })
    }
}
