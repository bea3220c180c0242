//! Random small planning tasks and a lifted breadth-first reference search
//! that works directly on the AST, without grounding or pruning.

use std::collections::{BTreeSet, HashMap, VecDeque};

use pddlego::pddl::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const TYPES: &[&str] = &["t1", "t2"];

pub fn random_task(seed: u64) -> (DomainFile, ProblemFile) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_preds = rng.random_range(1..=3);
    let predicates: Vec<PredicateSig> = (0..n_preds)
        .map(|i| PredicateSig {
            name: format!("p{i}"),
            params: (0..rng.random_range(0..=2))
                .map(|j| TypedName::new(format!("a{j}"), *TYPES.choose(&mut rng).unwrap()))
                .collect(),
            span: Span::default(),
        })
        .collect();

    let atom_over = |rng: &mut ChaCha8Rng, vars: &[TypedName], objs: &[TypedName]| -> Option<Atom> {
        let p = predicates.choose(rng).unwrap();
        let mut terms = Vec::new();
        for param in &p.params {
            let vs: Vec<_> = vars.iter().filter(|v| v.ty == param.ty).collect();
            let os: Vec<_> = objs.iter().filter(|o| o.ty == param.ty).collect();
            if !vs.is_empty() && (os.is_empty() || rng.random_bool(0.8)) {
                terms.push(Term::Var(vs.choose(rng).unwrap().name.clone()));
            } else if !os.is_empty() {
                terms.push(Term::Name(os.choose(rng).unwrap().name.clone()));
            } else {
                return None;
            }
        }
        Some(Atom::new(p.name.clone(), terms))
    };

    let n_objs = rng.random_range(1..=6);
    let objects: Vec<TypedName> = (0..n_objs)
        .map(|i| TypedName::new(format!("o{i}"), *TYPES.choose(&mut rng).unwrap()))
        .collect();

    let literal = |rng: &mut ChaCha8Rng, atom: Atom| {
        if rng.random_bool(0.25) {
            Condition::Not(Box::new(Condition::Atom(atom)))
        } else {
            Condition::Atom(atom)
        }
    };

    let n_actions = rng.random_range(1..=4);
    let mut actions = Vec::new();
    for i in 0..n_actions {
        let params: Vec<TypedName> = (0..rng.random_range(0..=2))
            .map(|j| TypedName::new(format!("v{j}"), *TYPES.choose(&mut rng).unwrap()))
            .collect();
        let mut pre = Vec::new();
        for _ in 0..rng.random_range(0..=2) {
            if let Some(a) = atom_over(&mut rng, &params, &objects) {
                pre.push(literal(&mut rng, a));
            }
        }
        if rng.random_bool(0.2) {
            let a = atom_over(&mut rng, &params, &objects);
            let b = atom_over(&mut rng, &params, &objects);
            if let (Some(a), Some(b)) = (a, b) {
                pre.push(Condition::Or(vec![literal(&mut rng, a), Condition::Atom(b)]));
            }
        }
        if rng.random_bool(0.15) {
            let ty = *TYPES.choose(&mut rng).unwrap();
            let mut scope = params.clone();
            scope.push(TypedName::new("e", ty));
            if let Some(a) = atom_over(&mut rng, &scope, &[]) {
                pre.push(Condition::Exists(
                    vec![TypedName::new("e", ty)],
                    Box::new(Condition::Atom(a)),
                ));
            }
        }
        let mut eff = Vec::new();
        for _ in 0..rng.random_range(1..=3) {
            if let Some(a) = atom_over(&mut rng, &params, &objects) {
                if rng.random_bool(0.35) {
                    eff.push(Condition::Not(Box::new(Condition::Atom(a))));
                } else {
                    eff.push(Condition::Atom(a));
                }
            }
        }
        actions.push(ActionSchema {
            name: format!("act{i}"),
            parameters: params,
            precondition: if pre.is_empty() { None } else { Some(Condition::And(pre)) },
            effect: Condition::And(eff),
            span: Span::default(),
        });
    }

    let df = DomainFile {
        name: "rand".into(),
        requirements: Requirement::ALL.into_iter().collect(),
        types: TYPES.iter().map(|t| TypedName::new(*t, "object")).collect(),
        predicates: predicates.clone(),
        actions,
    };

    let mut init = Vec::new();
    for _ in 0..rng.random_range(0..=4) {
        if let Some(a) = atom_over(&mut rng, &[], &objects) {
            if !init.contains(&a) {
                init.push(a);
            }
        }
    }
    let mut goal = Vec::new();
    for _ in 0..rng.random_range(1..=2) {
        if let Some(a) = atom_over(&mut rng, &[], &objects) {
            goal.push(literal(&mut rng, a));
        }
    }
    if rng.random_bool(0.2) {
        let ty = *TYPES.choose(&mut rng).unwrap();
        if let Some(a) = atom_over(&mut rng, &[TypedName::new("g", ty)], &[]) {
            goal.push(Condition::Exists(
                vec![TypedName::new("g", ty)],
                Box::new(Condition::Atom(a)),
            ));
        }
    }
    if goal.is_empty() {
        goal.push(Condition::Atom(Atom::new(
            predicates.iter().find(|p| p.params.is_empty()).map_or("p0", |p| &p.name),
            vec![],
        )));
        if !predicates.iter().any(|p| p.params.is_empty()) {
            goal.clear();
            let p = &predicates[0];
            let terms = p
                .params
                .iter()
                .map(|_| Term::Var("g".into()))
                .collect();
            goal.push(Condition::Exists(
                vec![TypedName::new("g", "object")],
                Box::new(Condition::Atom(Atom::new(p.name.clone(), terms))),
            ));
        }
    }
    let pf = ProblemFile {
        name: "p".into(),
        domain_name: "rand".into(),
        objects,
        init,
        goal: Condition::And(goal),
    };
    (df, pf)
}

type Fact = (String, Vec<String>);
type State = BTreeSet<Fact>;

pub struct Lifted<'a> {
    df: &'a DomainFile,
    pf: &'a ProblemFile,
}

pub enum LiftedOutcome {
    Cost(usize),
    Unsolvable,
    TooLarge,
}

impl<'a> Lifted<'a> {
    pub fn new(df: &'a DomainFile, pf: &'a ProblemFile) -> Self {
        Lifted { df, pf }
    }

    fn objects_of(&self, ty: &str) -> Vec<&'a str> {
        self.pf
            .objects
            .iter()
            .filter(|o| self.df.is_subtype(&o.ty, ty))
            .map(|o| o.name.as_str())
            .collect()
    }

    fn fact(atom: &Atom, b: &HashMap<String, String>) -> Fact {
        let args = atom
            .terms
            .iter()
            .map(|t| match t {
                Term::Var(v) => b[v].clone(),
                Term::Name(n) => n.clone(),
            })
            .collect();
        (atom.predicate.clone(), args)
    }

    fn holds(&self, c: &Condition, s: &State, b: &HashMap<String, String>) -> bool {
        match c {
            Condition::Atom(a) => s.contains(&Self::fact(a, b)),
            Condition::Not(c) => !self.holds(c, s, b),
            Condition::And(cs) => cs.iter().all(|c| self.holds(c, s, b)),
            Condition::Or(cs) => cs.iter().any(|c| self.holds(c, s, b)),
            Condition::Exists(vars, body) => {
                let mut out = false;
                self.bindings(vars, b.clone(), &mut |b| out |= self.holds(body, s, &b));
                out
            }
        }
    }

    fn bindings(
        &self,
        vars: &[TypedName],
        b: HashMap<String, String>,
        f: &mut dyn FnMut(HashMap<String, String>),
    ) {
        match vars.split_first() {
            None => f(b),
            Some((v, rest)) => {
                for o in self.objects_of(&v.ty) {
                    let mut b = b.clone();
                    b.insert(v.name.clone(), o.to_string());
                    self.bindings(rest, b, f);
                }
            }
        }
    }

    pub fn init(&self) -> State {
        self.pf
            .init
            .iter()
            .map(|a| Self::fact(a, &HashMap::new()))
            .collect()
    }

    pub fn is_goal(&self, s: &State) -> bool {
        self.holds(&self.pf.goal, s, &HashMap::new())
    }

    /// Successor for one named ground action, if applicable.
    pub fn apply(&self, s: &State, name: &str, args: &[String]) -> Option<State> {
        let schema = self.df.action(name)?;
        if schema.parameters.len() != args.len() {
            return None;
        }
        let mut b = HashMap::new();
        for (p, a) in schema.parameters.iter().zip(args) {
            if !self.objects_of(&p.ty).contains(&a.as_str()) {
                return None;
            }
            b.insert(p.name.clone(), a.clone());
        }
        if let Some(pre) = &schema.precondition {
            if !self.holds(pre, s, &b) {
                return None;
            }
        }
        let mut effects = Vec::new();
        flatten(&schema.effect, &mut effects);
        let mut next = s.clone();
        let mut adds = Vec::new();
        for e in effects {
            match e {
                Condition::Atom(a) => adds.push(Self::fact(a, &b)),
                Condition::Not(inner) => {
                    if let Condition::Atom(a) = &**inner {
                        next.remove(&Self::fact(a, &b));
                    }
                }
                _ => unreachable!(),
            }
        }
        next.extend(adds);
        Some(next)
    }

    fn successors(&self, s: &State) -> Vec<State> {
        let mut out = Vec::new();
        for schema in &self.df.actions {
            self.bindings(&schema.parameters, HashMap::new(), &mut |b| {
                let args: Vec<String> = schema.parameters.iter().map(|p| b[&p.name].clone()).collect();
                if let Some(n) = self.apply(s, &schema.name, &args) {
                    out.push(n);
                }
            });
        }
        out
    }

    pub fn optimal_cost(&self, cap: usize) -> LiftedOutcome {
        let init = self.init();
        let mut dist: HashMap<State, usize> = HashMap::new();
        dist.insert(init.clone(), 0);
        let mut queue = VecDeque::from([init]);
        while let Some(s) = queue.pop_front() {
            let d = dist[&s];
            if self.is_goal(&s) {
                return LiftedOutcome::Cost(d);
            }
            for n in self.successors(&s) {
                if !dist.contains_key(&n) {
                    if dist.len() >= cap {
                        return LiftedOutcome::TooLarge;
                    }
                    dist.insert(n.clone(), d + 1);
                    queue.push_back(n);
                }
            }
        }
        LiftedOutcome::Unsolvable
    }
}

fn flatten<'c>(c: &'c Condition, out: &mut Vec<&'c Condition>) {
    match c {
        Condition::And(cs) => cs.iter().for_each(|c| flatten(c, out)),
        other => out.push(other),
    }
}
