use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of the implicitly declared root type.
pub const UNIVERSAL_TYPE: &str = "object";

/// Source position of an AST node.
///
/// Spans never take part in AST equality: two nodes parsed from differently
/// formatted text compare equal when their content does.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Span {
    pub offset: usize,
    pub line: usize,
    pub col: usize,
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Requirement {
    Strips,
    Typing,
    NegativePreconditions,
    DisjunctivePreconditions,
    ExistentialPreconditions,
}

impl Requirement {
    pub const ALL: [Requirement; 5] = [
        Requirement::Strips,
        Requirement::Typing,
        Requirement::NegativePreconditions,
        Requirement::DisjunctivePreconditions,
        Requirement::ExistentialPreconditions,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Requirement::Strips => ":strips",
            Requirement::Typing => ":typing",
            Requirement::NegativePreconditions => ":negative-preconditions",
            Requirement::DisjunctivePreconditions => ":disjunctive-preconditions",
            Requirement::ExistentialPreconditions => ":existential-preconditions",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.keyword() == kw)
    }
}

pub type Requirements = BTreeSet<Requirement>;

/// A name with its declared type. Untyped declarations carry [`UNIVERSAL_TYPE`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedName {
    pub name: String,
    pub ty: String,
    #[serde(default)]
    pub span: Span,
}

impl TypedName {
    pub fn new(name: impl Into<String>, ty: impl Into<String>) -> Self {
        TypedName {
            name: name.into(),
            ty: ty.into(),
            span: Span::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Term {
    /// `?x`, stored without the question mark.
    Var(String),
    Name(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "?{v}"),
            Term::Name(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    pub predicate: String,
    pub terms: Vec<Term>,
    #[serde(default)]
    pub span: Span,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, terms: Vec<Term>) -> Self {
        Atom {
            predicate: predicate.into(),
            terms,
            span: Span::default(),
        }
    }

    /// Ground atom from object names.
    pub fn ground<S: AsRef<str>>(predicate: &str, args: &[S]) -> Self {
        Atom::new(
            predicate,
            args.iter().map(|a| Term::Name(a.as_ref().to_string())).collect(),
        )
    }

    pub fn is_ground(&self) -> bool {
        self.terms.iter().all(|t| matches!(t, Term::Name(_)))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for t in &self.terms {
            write!(f, " {t}")?;
        }
        f.write_str(")")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    Atom(Atom),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
    Exists(Vec<TypedName>, Box<Condition>),
}

impl Condition {
    /// Visits every atom, including those under quantifiers.
    pub fn for_each_atom<'a>(&'a self, f: &mut impl FnMut(&'a Atom)) {
        match self {
            Condition::Atom(a) => f(a),
            Condition::Not(c) => c.for_each_atom(f),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.for_each_atom(f)),
            Condition::Exists(_, c) => c.for_each_atom(f),
        }
    }

    pub fn contains_or(&self) -> bool {
        match self {
            Condition::Atom(_) => false,
            Condition::Or(_) => true,
            Condition::Not(c) | Condition::Exists(_, c) => c.contains_or(),
            Condition::And(cs) => cs.iter().any(Condition::contains_or),
        }
    }

    pub fn contains_exists(&self) -> bool {
        match self {
            Condition::Atom(_) => false,
            Condition::Exists(_, _) => true,
            Condition::Not(c) => c.contains_exists(),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().any(Condition::contains_exists),
        }
    }

    pub fn contains_not(&self) -> bool {
        match self {
            Condition::Atom(_) => false,
            Condition::Not(_) => true,
            Condition::Exists(_, c) => c.contains_not(),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().any(Condition::contains_not),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateSig {
    pub name: String,
    pub params: Vec<TypedName>,
    #[serde(default)]
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub precondition: Option<Condition>,
    pub effect: Condition,
    #[serde(default)]
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainFile {
    pub name: String,
    pub requirements: Requirements,
    /// Declared types, each with its parent type.
    pub types: Vec<TypedName>,
    pub predicates: Vec<PredicateSig>,
    pub actions: Vec<ActionSchema>,
}

impl DomainFile {
    pub fn predicate(&self, name: &str) -> Option<&PredicateSig> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn has_type(&self, ty: &str) -> bool {
        ty == UNIVERSAL_TYPE || self.types.iter().any(|t| t.name == ty)
    }

    /// True when `ty` equals `ancestor` or inherits from it.
    pub fn is_subtype(&self, ty: &str, ancestor: &str) -> bool {
        if ancestor == UNIVERSAL_TYPE {
            return true;
        }
        let mut current = ty;
        // Bounded walk: cyclic hierarchies terminate.
        for _ in 0..=self.types.len() {
            if current == ancestor {
                return true;
            }
            match self.types.iter().find(|t| t.name == current) {
                Some(t) if t.ty != current => current = &t.ty,
                _ => return false,
            }
        }
        false
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    /// Ground, positive atoms.
    pub init: Vec<Atom>,
    pub goal: Condition,
}

impl ProblemFile {
    pub fn object(&self, name: &str) -> Option<&TypedName> {
        self.objects.iter().find(|o| o.name == name)
    }
}
