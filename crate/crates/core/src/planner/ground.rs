use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::pddl::{
    Atom, Condition, DomainFile, PddlDiagnostic, ProblemFile, Span, Term, TypedName,
};

/// Grounding refuses tasks with more ground actions than this.
pub const MAX_GROUND_ACTIONS: usize = 2_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        f.write_str(")")
    }
}

/// Ground condition over interned atom ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroundCondition {
    True,
    False,
    Atom(usize),
    Not(Box<GroundCondition>),
    And(Vec<GroundCondition>),
    Or(Vec<GroundCondition>),
}

impl GroundCondition {
    pub fn eval(&self, holds: &impl Fn(usize) -> bool) -> bool {
        match self {
            GroundCondition::True => true,
            GroundCondition::False => false,
            GroundCondition::Atom(a) => holds(*a),
            GroundCondition::Not(c) => !c.eval(holds),
            GroundCondition::And(cs) => cs.iter().all(|c| c.eval(holds)),
            GroundCondition::Or(cs) => cs.iter().any(|c| c.eval(holds)),
        }
    }

    /// Delete-relaxed evaluation: negations are assumed satisfiable.
    fn eval_relaxed(&self, holds: &impl Fn(usize) -> bool) -> bool {
        match self {
            GroundCondition::True | GroundCondition::Not(_) => true,
            GroundCondition::False => false,
            GroundCondition::Atom(a) => holds(*a),
            GroundCondition::And(cs) => cs.iter().all(|c| c.eval_relaxed(holds)),
            GroundCondition::Or(cs) => cs.iter().any(|c| c.eval_relaxed(holds)),
        }
    }

    /// Replaces atoms for which `fixed` returns a value, then folds constants.
    fn simplify(self, fixed: &impl Fn(usize) -> Option<bool>) -> GroundCondition {
        use GroundCondition as G;
        match self {
            G::Atom(a) => match fixed(a) {
                Some(true) => G::True,
                Some(false) => G::False,
                None => G::Atom(a),
            },
            G::Not(c) => match c.simplify(fixed) {
                G::True => G::False,
                G::False => G::True,
                G::Not(inner) => *inner,
                other => G::Not(Box::new(other)),
            },
            G::And(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    match c.simplify(fixed) {
                        G::True => {}
                        G::False => return G::False,
                        G::And(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => G::True,
                    1 => out.pop().unwrap(),
                    _ => G::And(out),
                }
            }
            G::Or(cs) => {
                let mut out = Vec::new();
                for c in cs {
                    match c.simplify(fixed) {
                        G::False => {}
                        G::True => return G::True,
                        G::Or(inner) => out.extend(inner),
                        other => out.push(other),
                    }
                }
                match out.len() {
                    0 => G::False,
                    1 => out.pop().unwrap(),
                    _ => G::Or(out),
                }
            }
            c => c,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub pre_pos: Vec<usize>,
    pub pre_neg: Vec<usize>,
    /// Disjunctions and other non-literal precondition parts.
    pub pre_complex: Vec<GroundCondition>,
    pub add: Vec<usize>,
    pub del: Vec<usize>,
}

impl GroundAction {
    pub fn applicable(&self, holds: &impl Fn(usize) -> bool) -> bool {
        self.pre_pos.iter().all(|&a| holds(a))
            && self.pre_neg.iter().all(|&a| !holds(a))
            && self.pre_complex.iter().all(|c| c.eval(holds))
    }

    pub fn signature(&self) -> String {
        let mut s = format!("({}", self.name);
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s.push(')');
        s
    }
}

/// A propositional task. Actions are sorted by (name, args).
#[derive(Clone, Debug)]
pub struct GroundTask {
    pub atoms: Vec<GroundAtom>,
    pub init: Vec<usize>,
    pub goal: GroundCondition,
    pub actions: Vec<GroundAction>,
    /// Type-consistent instantiations per schema, before any pruning.
    pub instance_counts: BTreeMap<String, usize>,
}

impl GroundTask {
    pub fn atom_id(&self, atom: &GroundAtom) -> Option<usize> {
        self.atoms.iter().position(|a| a == atom)
    }

    pub fn find_action(&self, name: &str, args: &[String]) -> Option<&GroundAction> {
        let key = (name, args);
        self.actions
            .binary_search_by(|a| (a.name.as_str(), a.args.as_slice()).cmp(&key))
            .ok()
            .map(|i| &self.actions[i])
    }

    pub fn render_condition(&self, c: &GroundCondition) -> String {
        match c {
            GroundCondition::True => "(and)".into(),
            GroundCondition::False => "(or)".into(),
            GroundCondition::Atom(a) => self.atoms[*a].to_string(),
            GroundCondition::Not(c) => format!("(not {})", self.render_condition(c)),
            GroundCondition::And(cs) | GroundCondition::Or(cs) => {
                let head = if matches!(c, GroundCondition::And(_)) { "and" } else { "or" };
                let parts: Vec<_> = cs.iter().map(|c| self.render_condition(c)).collect();
                format!("({head} {})", parts.join(" "))
            }
        }
    }
}

struct Interner {
    atoms: Vec<GroundAtom>,
    index: HashMap<GroundAtom, usize>,
}

impl Interner {
    fn intern(&mut self, atom: GroundAtom) -> usize {
        if let Some(&i) = self.index.get(&atom) {
            return i;
        }
        let i = self.atoms.len();
        self.index.insert(atom.clone(), i);
        self.atoms.push(atom);
        i
    }
}

struct Grounder<'a> {
    objects: HashSet<&'a str>,
    objects_by_type: HashMap<&'a str, Vec<&'a str>>,
    statics: HashSet<&'a str>,
    init: HashSet<GroundAtom>,
    interner: Interner,
    visited: usize,
}

type Binding<'a> = Vec<(&'a str, &'a str)>;

fn lookup<'a>(binding: &Binding<'a>, var: &str) -> Option<&'a str> {
    binding.iter().rev().find(|(v, _)| *v == var).map(|(_, o)| *o)
}

/// Enumeration work limit, counting partial bindings.
const MAX_BINDINGS_VISITED: usize = 20_000_000;

fn too_large(span: Span) -> PddlDiagnostic {
    PddlDiagnostic::semantic(
        format!("task too large to ground (more than {MAX_GROUND_ACTIONS} actions)"),
        span,
    )
}

struct Instance {
    name: String,
    args: Vec<String>,
    pre: GroundCondition,
    add: Vec<usize>,
    del: Vec<usize>,
}

impl<'a> Grounder<'a> {
    fn objects_of(&self, ty: &str) -> Vec<&'a str> {
        self.objects_by_type.get(ty).cloned().unwrap_or_default()
    }

    fn ground_atom(&self, atom: &Atom, binding: &Binding<'a>) -> Result<GroundAtom, PddlDiagnostic> {
        let mut args = Vec::with_capacity(atom.terms.len());
        for t in &atom.terms {
            match t {
                Term::Name(n) => {
                    if !self.objects.contains(n.as_str()) {
                        return Err(PddlDiagnostic::semantic(
                            format!("undefined object {n} in {atom}"),
                            atom.span,
                        ));
                    }
                    args.push(n.clone());
                }
                Term::Var(v) => match lookup(binding, v) {
                    Some(o) => args.push(o.to_string()),
                    None => {
                        return Err(PddlDiagnostic::semantic(
                            format!("undefined variable ?{v} in {atom}"),
                            atom.span,
                        ))
                    }
                },
            }
        }
        Ok(GroundAtom {
            predicate: atom.predicate.clone(),
            args,
        })
    }

    fn ground_condition(
        &mut self,
        c: &'a Condition,
        binding: &mut Binding<'a>,
    ) -> Result<GroundCondition, PddlDiagnostic> {
        let g = match c {
            Condition::Atom(a) => {
                let g = self.ground_atom(a, binding)?;
                if self.statics.contains(a.predicate.as_str()) {
                    if self.init.contains(&g) {
                        GroundCondition::True
                    } else {
                        GroundCondition::False
                    }
                } else {
                    GroundCondition::Atom(self.interner.intern(g))
                }
            }
            Condition::Not(inner) => {
                GroundCondition::Not(Box::new(self.ground_condition(inner, binding)?))
            }
            Condition::And(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                for c in cs {
                    out.push(self.ground_condition(c, binding)?);
                }
                GroundCondition::And(out)
            }
            Condition::Or(cs) => {
                let mut out = Vec::with_capacity(cs.len());
                for c in cs {
                    out.push(self.ground_condition(c, binding)?);
                }
                GroundCondition::Or(out)
            }
            Condition::Exists(vars, body) => {
                let mut disjuncts = Vec::new();
                self.expand_exists(vars, body, binding, &mut disjuncts)?;
                GroundCondition::Or(disjuncts)
            }
        };
        Ok(g.simplify(&|_| None))
    }

    fn expand_exists(
        &mut self,
        vars: &'a [TypedName],
        body: &'a Condition,
        binding: &mut Binding<'a>,
        out: &mut Vec<GroundCondition>,
    ) -> Result<(), PddlDiagnostic> {
        let Some((first, rest)) = vars.split_first() else {
            out.push(self.ground_condition(body, binding)?);
            return Ok(());
        };
        for obj in self.objects_of(&first.ty) {
            binding.push((&first.name, obj));
            let r = self.expand_exists(rest, body, binding, out);
            binding.pop();
            r?;
        }
        Ok(())
    }

    fn ground_schema(
        &mut self,
        schema: &'a crate::pddl::ActionSchema,
        out: &mut Vec<Instance>,
    ) -> Result<(), PddlDiagnostic> {
        let domains: Vec<Vec<&'a str>> = schema
            .parameters
            .iter()
            .map(|p| self.objects_of(&p.ty))
            .collect();
        // Static literals at the top level of the precondition prune partial
        // bindings as soon as all their variables are bound.
        let mut checks: Vec<Vec<(&'a Atom, bool)>> = vec![Vec::new(); schema.parameters.len() + 1];
        if let Some(pre) = &schema.precondition {
            let mut top = Vec::new();
            flatten_and(pre, &mut top);
            for lit in top {
                let (atom, positive) = match lit {
                    Condition::Atom(a) => (a, true),
                    Condition::Not(inner) => match &**inner {
                        Condition::Atom(a) => (a, false),
                        _ => continue,
                    },
                    _ => continue,
                };
                if !self.statics.contains(atom.predicate.as_str()) {
                    continue;
                }
                let mut level = 0;
                let mut ok = true;
                for t in &atom.terms {
                    if let Term::Var(v) = t {
                        match schema.parameters.iter().position(|p| &p.name == v) {
                            Some(i) => level = level.max(i + 1),
                            None => ok = false,
                        }
                    }
                }
                if ok {
                    checks[level].push((atom, positive));
                }
            }
        }
        let mut binding: Binding<'a> = Vec::new();
        self.enumerate(schema, &domains, &checks, &mut binding, out)
    }

    fn statics_hold(&self, checks: &[(&'a Atom, bool)], binding: &Binding<'a>) -> bool {
        checks.iter().all(|(atom, positive)| {
            self.ground_atom(atom, binding)
                .map(|g| self.init.contains(&g) == *positive)
                .unwrap_or(true)
        })
    }

    fn enumerate(
        &mut self,
        schema: &'a crate::pddl::ActionSchema,
        domains: &[Vec<&'a str>],
        checks: &[Vec<(&'a Atom, bool)>],
        binding: &mut Binding<'a>,
        out: &mut Vec<Instance>,
    ) -> Result<(), PddlDiagnostic> {
        self.visited += 1;
        if self.visited > MAX_BINDINGS_VISITED || out.len() > MAX_GROUND_ACTIONS {
            return Err(too_large(schema.span));
        }
        let depth = binding.len();
        if !self.statics_hold(&checks[depth], binding) {
            return Ok(());
        }
        if depth < domains.len() {
            let var: &'a str = &schema.parameters[depth].name;
            for &obj in &domains[depth] {
                binding.push((var, obj));
                let r = self.enumerate(schema, domains, checks, binding, out);
                binding.pop();
                r?;
            }
            return Ok(());
        }
        let pre = match &schema.precondition {
            Some(p) => self.ground_condition(p, binding)?,
            None => GroundCondition::True,
        };
        if pre == GroundCondition::False {
            return Ok(());
        }
        let mut effects = Vec::new();
        flatten_and(&schema.effect, &mut effects);
        let mut add = Vec::new();
        let mut del = Vec::new();
        for e in effects {
            match e {
                Condition::Atom(a) => {
                    let g = self.ground_atom(a, binding)?;
                    add.push(self.interner.intern(g));
                }
                Condition::Not(inner) => match &**inner {
                    Condition::Atom(a) => {
                        let g = self.ground_atom(a, binding)?;
                        del.push(self.interner.intern(g));
                    }
                    _ => return Err(bad_effect(schema)),
                },
                _ => return Err(bad_effect(schema)),
            }
        }
        out.push(Instance {
            name: schema.name.clone(),
            args: binding.iter().map(|(_, o)| o.to_string()).collect(),
            pre,
            add,
            del,
        });
        Ok(())
    }
}

fn bad_effect(schema: &crate::pddl::ActionSchema) -> PddlDiagnostic {
    PddlDiagnostic::semantic(
        format!("effect of action {} may only contain atoms and negated atoms", schema.name),
        schema.span,
    )
}

fn flatten_and<'c>(c: &'c Condition, out: &mut Vec<&'c Condition>) {
    match c {
        Condition::And(cs) => cs.iter().for_each(|c| flatten_and(c, out)),
        other => out.push(other),
    }
}

fn remap(c: GroundCondition, ids: &[Option<usize>]) -> GroundCondition {
    use GroundCondition as G;
    match c {
        G::Atom(a) => G::Atom(ids[a].expect("unreachable atoms are simplified away")),
        G::Not(c) => G::Not(Box::new(remap(*c, ids))),
        G::And(cs) => G::And(cs.into_iter().map(|c| remap(c, ids)).collect()),
        G::Or(cs) => G::Or(cs.into_iter().map(|c| remap(c, ids)).collect()),
        c => c,
    }
}

fn sorted_unique(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Grounds a domain/problem pair.
///
/// Runs the consistency check first. Instances whose static preconditions
/// fail, or which are not reachable in the delete relaxation, are dropped;
/// atoms that can never become true are folded into the conditions.
pub fn ground(df: &DomainFile, pf: &ProblemFile) -> Result<GroundTask, Vec<PddlDiagnostic>> {
    crate::pddl::check_consistency(df, pf)?;
    if pf.goal == Condition::And(Vec::new()) {
        return Err(vec![PddlDiagnostic::semantic(
            "empty goal: the goal condition (and) is vacuous",
            Span::default(),
        )]);
    }

    let mut objects_by_type: HashMap<&str, Vec<&str>> = HashMap::new();
    let type_names = std::iter::once(crate::pddl::UNIVERSAL_TYPE)
        .chain(df.types.iter().map(|t| t.name.as_str()));
    for ty in type_names {
        let objs = pf
            .objects
            .iter()
            .filter(|o| df.is_subtype(&o.ty, ty))
            .map(|o| o.name.as_str())
            .collect();
        objects_by_type.insert(ty, objs);
    }
    let mut effect_preds = HashSet::new();
    for a in &df.actions {
        a.effect.for_each_atom(&mut |atom| {
            effect_preds.insert(atom.predicate.as_str());
        });
    }
    let statics = df
        .predicates
        .iter()
        .map(|p| p.name.as_str())
        .filter(|p| !effect_preds.contains(p))
        .collect();
    let init: HashSet<GroundAtom> = pf
        .init
        .iter()
        .map(|a| GroundAtom {
            predicate: a.predicate.clone(),
            args: a.terms.iter().map(ToString::to_string).collect(),
        })
        .collect();

    let mut g = Grounder {
        objects: pf.objects.iter().map(|o| o.name.as_str()).collect(),
        objects_by_type,
        statics,
        init,
        interner: Interner {
            atoms: Vec::new(),
            index: HashMap::new(),
        },
        visited: 0,
    };

    let mut instance_counts = BTreeMap::new();
    let mut instances = Vec::new();
    for schema in &df.actions {
        let count = schema
            .parameters
            .iter()
            .map(|p| g.objects_of(&p.ty).len())
            .fold(1usize, |acc, n| acc.saturating_mul(n));
        instance_counts.insert(schema.name.clone(), count);
        g.ground_schema(schema, &mut instances).map_err(|d| vec![d])?;
    }
    let mut goal_binding = Vec::new();
    let goal = g
        .ground_condition(&pf.goal, &mut goal_binding)
        .map_err(|d| vec![d])?;

    // Delete-relaxed reachability over fluent atoms.
    let mut init_ids = Vec::new();
    for a in &pf.init {
        if !g.statics.contains(a.predicate.as_str()) {
            let atom = GroundAtom {
                predicate: a.predicate.clone(),
                args: a.terms.iter().map(ToString::to_string).collect(),
            };
            init_ids.push(g.interner.intern(atom));
        }
    }
    let n = g.interner.atoms.len();
    let mut reached = vec![false; n];
    for &i in &init_ids {
        reached[i] = true;
    }
    let mut applied = vec![false; instances.len()];
    let mut changed = true;
    while changed {
        changed = false;
        for (i, inst) in instances.iter().enumerate() {
            if applied[i] || !inst.pre.eval_relaxed(&|a| reached[a]) {
                continue;
            }
            applied[i] = true;
            changed = true;
            for &a in &inst.add {
                reached[a] = true;
            }
        }
    }

    let mut ids = vec![None; n];
    let mut atoms = Vec::new();
    for (i, atom) in g.interner.atoms.into_iter().enumerate() {
        if reached[i] {
            ids[i] = Some(atoms.len());
            atoms.push(atom);
        }
    }
    let fixed = |a: usize| if reached[a] { None } else { Some(false) };

    let mut actions = Vec::new();
    for (inst, ok) in instances.into_iter().zip(applied) {
        if !ok {
            continue;
        }
        let pre = remap(inst.pre.simplify(&fixed), &ids);
        let mut parts = Vec::new();
        match pre {
            GroundCondition::False => continue,
            GroundCondition::True => {}
            GroundCondition::And(cs) => parts = cs,
            other => parts.push(other),
        }
        let (mut pre_pos, mut pre_neg, mut pre_complex) = (Vec::new(), Vec::new(), Vec::new());
        for p in parts {
            match p {
                GroundCondition::Atom(a) => pre_pos.push(a),
                GroundCondition::Not(inner) => match *inner {
                    GroundCondition::Atom(a) => pre_neg.push(a),
                    other => pre_complex.push(GroundCondition::Not(Box::new(other))),
                },
                other => pre_complex.push(other),
            }
        }
        let add = sorted_unique(inst.add.iter().filter_map(|&a| ids[a]).collect());
        let del = sorted_unique(
            inst.del
                .iter()
                .filter_map(|&a| ids[a])
                .filter(|a| add.binary_search(a).is_err())
                .collect(),
        );
        actions.push(GroundAction {
            name: inst.name,
            args: inst.args,
            pre_pos: sorted_unique(pre_pos),
            pre_neg: sorted_unique(pre_neg),
            pre_complex,
            add,
            del,
        });
    }
    actions.sort_by(|a, b| (&a.name, &a.args).cmp(&(&b.name, &b.args)));
    actions.dedup_by(|a, b| a.name == b.name && a.args == b.args);

    let goal = remap(goal.simplify(&fixed), &ids);
    let init = sorted_unique(init_ids.into_iter().filter_map(|a| ids[a]).collect());
    Ok(GroundTask {
        atoms,
        init,
        goal,
        actions,
        instance_counts,
    })
}
