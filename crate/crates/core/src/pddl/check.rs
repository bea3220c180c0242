use std::collections::{HashMap, HashSet};

use super::ast::{
    Atom, Condition, DomainFile, ProblemFile, Requirement, Span, Term, TypedName, UNIVERSAL_TYPE,
};
use super::diagnostic::PddlDiagnostic;

struct Checker<'a> {
    df: &'a DomainFile,
    pf: &'a ProblemFile,
    arity: HashMap<&'a str, usize>,
    objects: HashSet<&'a str>,
    diags: Vec<PddlDiagnostic>,
}

/// Where a condition appears; used for wording and requirement checks.
#[derive(Clone, Copy)]
enum Context<'a> {
    Precondition(&'a str),
    Effect(&'a str),
    Goal,
}

impl Context<'_> {
    fn describe(&self) -> String {
        match self {
            Context::Precondition(a) => format!("precondition of action {a}"),
            Context::Effect(a) => format!("effect of action {a}"),
            Context::Goal => "problem goal".to_string(),
        }
    }
}

impl<'a> Checker<'a> {
    fn error(&mut self, message: String, span: Span) {
        self.diags.push(PddlDiagnostic::semantic(message, span));
    }

    fn check_type(&mut self, ty: &str, message: impl FnOnce() -> String, span: Span) {
        if !self.df.has_type(ty) {
            self.error(message(), span);
        }
    }

    fn check_domain(&mut self) {
        let df = self.df;
        let mut seen = HashSet::new();
        for t in &df.types {
            if t.ty != UNIVERSAL_TYPE && !df.has_type(&t.ty) {
                self.error(
                    format!("type {} has unknown parent type {}", t.name, t.ty),
                    t.span,
                );
            }
        }
        for p in &df.predicates {
            if !seen.insert(p.name.as_str()) {
                self.error(format!("predicate {} is declared more than once", p.name), p.span);
            }
            for param in &p.params {
                self.check_type(
                    &param.ty,
                    || {
                        format!(
                            "parameter ?{} of predicate {} has unknown or empty type {}",
                            param.name, p.name, param.ty
                        )
                    },
                    param.span,
                );
            }
        }
        let mut seen = HashSet::new();
        for a in &df.actions {
            if !seen.insert(a.name.as_str()) {
                self.error(format!("action {} is declared more than once", a.name), a.span);
            }
            let mut names = HashSet::new();
            for param in &a.parameters {
                if !names.insert(param.name.as_str()) {
                    self.error(
                        format!("parameter ?{} of action {} is declared more than once", param.name, a.name),
                        param.span,
                    );
                }
                self.check_type(
                    &param.ty,
                    || {
                        format!(
                            "parameter ?{} of action {} has unknown or empty type {}",
                            param.name, a.name, param.ty
                        )
                    },
                    param.span,
                );
            }
            let scope: Vec<&str> = a.parameters.iter().map(|p| p.name.as_str()).collect();
            if let Some(pre) = &a.precondition {
                self.check_condition(pre, &scope, Context::Precondition(&a.name), a.span);
            }
            self.check_effect(&a.effect, &a.name, a.span);
            self.check_condition(&a.effect, &scope, Context::Effect(&a.name), a.span);
        }
    }

    fn check_effect(&mut self, effect: &Condition, action: &str, span: Span) {
        let ok = match effect {
            Condition::Atom(_) => true,
            Condition::Not(inner) => matches!(**inner, Condition::Atom(_)),
            Condition::And(cs) => cs.iter().all(|c| match c {
                Condition::Atom(_) => true,
                Condition::Not(inner) => matches!(**inner, Condition::Atom(_)),
                _ => false,
            }),
            _ => false,
        };
        if !ok {
            self.error(
                format!(
                    "effect of action {action} may only be a conjunction of atoms and negated atoms (no or/exists/nesting)"
                ),
                span,
            );
        }
    }

    fn check_atom(&mut self, atom: &Atom, scope: &[&str], ctx: Context<'_>) {
        match self.arity.get(atom.predicate.as_str()) {
            None => self.error(
                format!(
                    "predicate {} used in {} is not declared",
                    atom.predicate,
                    ctx.describe()
                ),
                atom.span,
            ),
            Some(&n) if n != atom.terms.len() => self.error(
                format!(
                    "predicate {} takes {} argument(s) but {} are given in {}",
                    atom.predicate,
                    n,
                    atom.terms.len(),
                    ctx.describe()
                ),
                atom.span,
            ),
            Some(_) => {}
        }
        for t in &atom.terms {
            match t {
                Term::Var(v) if !scope.contains(&v.as_str()) => self.error(
                    format!("undefined variable ?{v} in {}", ctx.describe()),
                    atom.span,
                ),
                Term::Name(n) if !self.objects.contains(n.as_str()) => self.error(
                    format!("undefined object {n} in {}", ctx.describe()),
                    atom.span,
                ),
                _ => {}
            }
        }
    }

    fn require(&mut self, req: Requirement, construct: &str, ctx: Context<'_>, span: Span) {
        if !self.df.requirements.contains(&req) {
            self.error(
                format!(
                    "{} uses '{construct}' but {} is not declared in :requirements",
                    ctx.describe(),
                    req.keyword()
                ),
                span,
            );
        }
    }

    fn check_condition(&mut self, c: &Condition, scope: &[&str], ctx: Context<'_>, span: Span) {
        match c {
            Condition::Atom(a) => self.check_atom(a, scope, ctx),
            Condition::And(cs) => {
                for c in cs {
                    self.check_condition(c, scope, ctx, span);
                }
            }
            Condition::Or(cs) => {
                if !matches!(ctx, Context::Effect(_)) {
                    self.require(Requirement::DisjunctivePreconditions, "or", ctx, span);
                }
                for c in cs {
                    self.check_condition(c, scope, ctx, span);
                }
            }
            Condition::Not(inner) => {
                if !matches!(ctx, Context::Effect(_)) {
                    self.require(Requirement::NegativePreconditions, "not", ctx, span);
                }
                self.check_condition(inner, scope, ctx, span);
            }
            Condition::Exists(vars, body) => {
                if !matches!(ctx, Context::Effect(_)) {
                    self.require(Requirement::ExistentialPreconditions, "exists", ctx, span);
                }
                for v in vars {
                    self.check_type(
                        &v.ty,
                        || {
                            format!(
                                "variable ?{} in {} has unknown or empty type {}",
                                v.name,
                                ctx.describe(),
                                v.ty
                            )
                        },
                        v.span,
                    );
                }
                let mut inner: Vec<&str> = scope.to_vec();
                inner.extend(vars.iter().map(|v| v.name.as_str()));
                self.check_condition(body, &inner, ctx, span);
            }
        }
    }

    fn check_problem(&mut self) {
        let pf = self.pf;
        let mut seen = HashSet::new();
        for o in &pf.objects {
            if !seen.insert(o.name.as_str()) {
                self.error(format!("object {} is declared more than once", o.name), o.span);
            }
            self.check_type(
                &o.ty,
                || format!("object {} has unknown or empty type {}", o.name, o.ty),
                o.span,
            );
        }
        for a in &pf.init {
            match self.arity.get(a.predicate.as_str()) {
                None => self.error(
                    format!("predicate {} used in problem init is not declared", a.predicate),
                    a.span,
                ),
                Some(&n) if n != a.terms.len() => self.error(
                    format!(
                        "predicate {} takes {} argument(s) but {} are given in problem init",
                        a.predicate,
                        n,
                        a.terms.len()
                    ),
                    a.span,
                ),
                Some(_) => {}
            }
            for t in &a.terms {
                if let Term::Name(n) = t {
                    if !self.objects.contains(n.as_str()) {
                        self.error(format!("undefined object {n} in problem init"), a.span);
                    }
                }
            }
        }
        self.check_condition(&pf.goal, &[], Context::Goal, Span::default());
    }
}

/// Cross-checks a domain and problem: declared predicates with matching
/// arity, resolvable types, declared objects, and the requirement flags the
/// conditions need. Returns every violation found.
pub fn check_consistency(df: &DomainFile, pf: &ProblemFile) -> Result<(), Vec<PddlDiagnostic>> {
    let mut checker = Checker {
        df,
        pf,
        arity: df
            .predicates
            .iter()
            .map(|p| (p.name.as_str(), p.params.len()))
            .collect(),
        objects: pf.objects.iter().map(|o: &TypedName| o.name.as_str()).collect(),
        diags: Vec::new(),
    };
    checker.check_domain();
    checker.check_problem();
    if checker.diags.is_empty() {
        Ok(())
    } else {
        Err(checker.diags)
    }
}
