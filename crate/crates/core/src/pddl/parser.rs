use super::ast::{
    ActionSchema, Atom, Condition, DomainFile, PredicateSig, ProblemFile, Requirement,
    Requirements, Span, Term, TypedName, UNIVERSAL_TYPE,
};
use super::diagnostic::PddlDiagnostic;
use super::sexpr::{read_one, Sexp};

type Result<T> = std::result::Result<T, PddlDiagnostic>;

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| matches!(c, 'a'..='z' | '0'..='9' | '_' | '-'))
}

fn identifier(sexp: &Sexp, what: &str) -> Result<String> {
    match sexp {
        Sexp::Symbol(s, span) => {
            let lower = s.to_lowercase();
            if is_identifier(&lower) {
                Ok(lower)
            } else {
                Err(PddlDiagnostic::syntax(
                    format!("invalid {what} '{s}': names start with a letter and use letters, digits, '-' or '_'"),
                    *span,
                ))
            }
        }
        Sexp::List(_, span) => Err(PddlDiagnostic::syntax(
            format!("expected {what} but found a parenthesized list"),
            *span,
        )),
    }
}

fn variable(s: &str, span: Span) -> Result<String> {
    let lower = s.to_lowercase();
    match lower.strip_prefix('?') {
        Some(name) if is_identifier(name) => Ok(name.to_string()),
        _ => Err(PddlDiagnostic::syntax(format!("invalid variable '{s}'"), span)),
    }
}

fn list<'a>(sexp: &'a Sexp, what: &str) -> Result<&'a [Sexp]> {
    match sexp {
        Sexp::List(items, _) => Ok(items),
        Sexp::Symbol(s, span) => Err(PddlDiagnostic::syntax(
            format!("expected {what} in parentheses but found '{s}'"),
            *span,
        )),
    }
}

fn keyword_of(sexp: &Sexp) -> Option<String> {
    sexp.as_symbol().map(str::to_lowercase)
}

/// Parses `(define (<kind> <name>) <sections>...)` and returns name and sections.
fn definition<'a>(root: &'a Sexp, kind: &str) -> Result<(String, &'a [Sexp])> {
    let items = list(root, "a definition")?;
    let root_span = root.span();
    match items.first().and_then(keyword_of).as_deref() {
        Some("define") => {}
        _ => {
            return Err(PddlDiagnostic::syntax(
                "expected '(define ...)' at top level",
                items.first().map_or(root_span, Sexp::span),
            ))
        }
    }
    let header = items.get(1).ok_or_else(|| {
        PddlDiagnostic::syntax(format!("missing '({kind} <name>)' header"), root_span)
    })?;
    let head = list(header, "a header")?;
    match head.first().and_then(keyword_of) {
        Some(k) if k == kind => {}
        other => {
            return Err(PddlDiagnostic::syntax(
                format!(
                    "expected '({kind} <name>)' header, found '({}...)'",
                    other.unwrap_or_default()
                ),
                header.span(),
            ))
        }
    }
    if head.len() != 2 {
        return Err(PddlDiagnostic::syntax(
            format!("'({kind} <name>)' takes exactly one name"),
            header.span(),
        ));
    }
    let name = identifier(&head[1], &format!("{kind} name"))?;
    Ok((name, &items[2..]))
}

fn section_keyword(section: &Sexp) -> Result<(String, &[Sexp])> {
    let items = list(section, "a section")?;
    let first = items
        .first()
        .ok_or_else(|| PddlDiagnostic::syntax("empty section '()'", section.span()))?;
    match first.as_symbol() {
        Some(s) if s.starts_with(':') => Ok((s.to_lowercase(), &items[1..])),
        _ => Err(PddlDiagnostic::syntax(
            "expected a section keyword such as ':predicates'",
            first.span(),
        )),
    }
}

/// `a b - t c` style list. `var` selects `?x` entries instead of plain names.
fn typed_list(items: &[Sexp], var: bool, what: &str) -> Result<Vec<TypedName>> {
    let mut out = Vec::new();
    let mut pending: Vec<TypedName> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let item = &items[i];
        match item {
            Sexp::Symbol(s, span) if s == "-" => {
                if pending.is_empty() {
                    return Err(PddlDiagnostic::syntax(
                        format!("'-' without preceding {what}"),
                        *span,
                    ));
                }
                let ty_sexp = items.get(i + 1).ok_or_else(|| {
                    PddlDiagnostic::syntax("missing type after '-'", *span)
                })?;
                if let Sexp::List(inner, lspan) = ty_sexp {
                    let head = inner.first().and_then(keyword_of).unwrap_or_default();
                    return Err(PddlDiagnostic::syntax(
                        format!("unsupported type expression '({head} ...)'; only plain type names are supported"),
                        *lspan,
                    ));
                }
                let ty = identifier(ty_sexp, "type name")?;
                for mut p in pending.drain(..) {
                    p.ty = ty.clone();
                    out.push(p);
                }
                i += 2;
            }
            Sexp::Symbol(s, span) => {
                let name = if var {
                    variable(s, *span)?
                } else {
                    identifier(item, what)?
                };
                pending.push(TypedName {
                    name,
                    ty: UNIVERSAL_TYPE.to_string(),
                    span: *span,
                });
                i += 1;
            }
            Sexp::List(_, span) => {
                return Err(PddlDiagnostic::syntax(
                    format!("expected {what} but found a parenthesized list"),
                    *span,
                ))
            }
        }
    }
    out.extend(pending);
    Ok(out)
}

fn term(sexp: &Sexp) -> Result<Term> {
    match sexp {
        Sexp::Symbol(s, span) if s.starts_with('?') => Ok(Term::Var(variable(s, *span)?)),
        Sexp::Symbol(..) => Ok(Term::Name(identifier(sexp, "object name")?)),
        Sexp::List(_, span) => Err(PddlDiagnostic::syntax(
            "expected a term but found a nested list (function terms are not supported)",
            *span,
        )),
    }
}

fn atom(items: &[Sexp], span: Span) -> Result<Atom> {
    let predicate = identifier(&items[0], "predicate name")?;
    let terms = items[1..].iter().map(term).collect::<Result<Vec<_>>>()?;
    Ok(Atom {
        predicate,
        terms,
        span,
    })
}

fn condition(sexp: &Sexp) -> Result<Condition> {
    let span = sexp.span();
    let items = list(sexp, "a condition")?;
    let Some(head) = items.first() else {
        return Err(PddlDiagnostic::syntax("empty condition '()'", span));
    };
    let Some(head_sym) = head.as_symbol() else {
        return Err(PddlDiagnostic::syntax(
            "expected a predicate or connective, found a nested list",
            head.span(),
        ));
    };
    match head_sym.to_lowercase().as_str() {
        "and" => Ok(Condition::And(
            items[1..].iter().map(condition).collect::<Result<_>>()?,
        )),
        "or" => Ok(Condition::Or(
            items[1..].iter().map(condition).collect::<Result<_>>()?,
        )),
        "not" => {
            if items.len() != 2 {
                return Err(PddlDiagnostic::syntax("'not' takes exactly one condition", span));
            }
            Ok(Condition::Not(Box::new(condition(&items[1])?)))
        }
        "exists" => {
            if items.len() != 3 {
                return Err(PddlDiagnostic::syntax(
                    "'exists' takes a variable list and one condition",
                    span,
                ));
            }
            let vars = typed_list(list(&items[1], "a variable list")?, true, "variable")?;
            Ok(Condition::Exists(vars, Box::new(condition(&items[2])?)))
        }
        kw @ ("forall" | "imply" | "when" | "=" | "increase" | "decrease" | "assign") => {
            Err(PddlDiagnostic::syntax(
                format!("'{kw}' is not supported; use and/or/not/exists over predicates"),
                head.span(),
            ))
        }
        _ => Ok(Condition::Atom(atom(items, span)?)),
    }
}

fn requirements(items: &[Sexp]) -> Result<Requirements> {
    let mut reqs = Requirements::new();
    for item in items {
        let Some(sym) = item.as_symbol() else {
            return Err(PddlDiagnostic::syntax(
                "expected a requirement keyword",
                item.span(),
            ));
        };
        let kw = sym.to_lowercase();
        match Requirement::from_keyword(&kw) {
            Some(r) => {
                reqs.insert(r);
            }
            None => {
                let supported: Vec<_> = Requirement::ALL.iter().map(|r| r.keyword()).collect();
                return Err(PddlDiagnostic::syntax(
                    format!(
                        "unsupported requirement '{kw}'; supported: {}",
                        supported.join(" ")
                    ),
                    item.span(),
                ));
            }
        }
    }
    Ok(reqs)
}

fn predicate_sig(sexp: &Sexp) -> Result<PredicateSig> {
    let span = sexp.span();
    let items = list(sexp, "a predicate declaration")?;
    let Some(head) = items.first() else {
        return Err(PddlDiagnostic::syntax("empty predicate declaration '()'", span));
    };
    Ok(PredicateSig {
        name: identifier(head, "predicate name")?,
        params: typed_list(&items[1..], true, "variable")?,
        span,
    })
}

fn action(items: &[Sexp], span: Span) -> Result<ActionSchema> {
    let Some(name_sexp) = items.first() else {
        return Err(PddlDiagnostic::syntax("':action' is missing a name", span));
    };
    let name = identifier(name_sexp, "action name")?;
    let mut parameters = None;
    let mut precondition = None;
    let mut effect = None;
    let mut i = 1;
    while i < items.len() {
        let key = &items[i];
        let kw = match key.as_symbol() {
            Some(s) if s.starts_with(':') => s.to_lowercase(),
            _ => {
                return Err(PddlDiagnostic::syntax(
                    format!("expected ':parameters', ':precondition' or ':effect' in action {name}"),
                    key.span(),
                ))
            }
        };
        let value = items.get(i + 1).ok_or_else(|| {
            PddlDiagnostic::syntax(format!("'{kw}' of action {name} has no value"), key.span())
        })?;
        let slot_taken = match kw.as_str() {
            ":parameters" => {
                let taken = parameters.is_some();
                parameters = Some(typed_list(list(value, "a parameter list")?, true, "parameter")?);
                taken
            }
            ":precondition" => {
                let taken = precondition.is_some();
                precondition = Some(condition(value)?);
                taken
            }
            ":effect" => {
                let taken = effect.is_some();
                effect = Some(condition(value)?);
                taken
            }
            _ => {
                return Err(PddlDiagnostic::syntax(
                    format!("unknown action keyword '{kw}' in action {name}"),
                    key.span(),
                ))
            }
        };
        if slot_taken {
            return Err(PddlDiagnostic::syntax(
                format!("duplicate '{kw}' in action {name}"),
                key.span(),
            ));
        }
        i += 2;
    }
    let effect = effect.ok_or_else(|| {
        PddlDiagnostic::syntax(format!("action {name} has no ':effect'"), span)
    })?;
    Ok(ActionSchema {
        name,
        parameters: parameters.unwrap_or_default(),
        precondition,
        effect,
        span,
    })
}

/// Parses a domain file. Semantic checks are left to
/// [`check_consistency`](super::check_consistency).
pub fn parse_domain(source: &str) -> Result<DomainFile> {
    let root = read_one(source)?;
    let (name, sections) = definition(&root, "domain")?;
    let mut domain = DomainFile {
        name,
        requirements: Requirements::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
    };
    let mut seen: Vec<String> = Vec::new();
    for section in sections {
        let (kw, body) = section_keyword(section)?;
        if kw != ":action" {
            if seen.contains(&kw) {
                return Err(PddlDiagnostic::syntax(
                    format!("duplicate section '{kw}'"),
                    section.span(),
                ));
            }
            seen.push(kw.clone());
        }
        match kw.as_str() {
            ":requirements" => domain.requirements = requirements(body)?,
            ":types" => domain.types = typed_list(body, false, "type name")?,
            ":predicates" => {
                domain.predicates = body.iter().map(predicate_sig).collect::<Result<_>>()?
            }
            ":action" => domain.actions.push(action(body, section.span())?),
            _ => {
                return Err(PddlDiagnostic::syntax(
                    format!("unknown domain section '{kw}'; supported: :requirements :types :predicates :action"),
                    section.span(),
                ))
            }
        }
    }
    Ok(domain)
}

fn init_atom(sexp: &Sexp) -> Result<Atom> {
    let span = sexp.span();
    let items = list(sexp, "an init fact")?;
    let Some(head) = items.first() else {
        return Err(PddlDiagnostic::syntax("empty init fact '()'", span));
    };
    if head.as_symbol().map(str::to_lowercase).as_deref() == Some("not") {
        let shown = items
            .get(1)
            .and_then(|inner| list(inner, "").ok())
            .map(|inner| {
                inner
                    .iter()
                    .filter_map(Sexp::as_symbol)
                    .map(str::to_lowercase)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .unwrap_or_default();
        return Err(PddlDiagnostic::semantic(
            format!("negated init literal (not ({shown})): :init may only list facts that are true"),
            span,
        ));
    }
    if let Some(kw) = head.as_symbol().map(str::to_lowercase) {
        if matches!(kw.as_str(), "and" | "or" | "exists" | "forall" | "=") {
            return Err(PddlDiagnostic::syntax(
                format!("'{kw}' is not allowed in :init; list ground facts only"),
                head.span(),
            ));
        }
    }
    let a = atom(items, span)?;
    if let Some(Term::Var(v)) = a.terms.iter().find(|t| matches!(t, Term::Var(_))) {
        return Err(PddlDiagnostic::syntax(
            format!("init fact {} uses variable ?{v}; init facts must be ground", a),
            span,
        ));
    }
    Ok(a)
}

/// Parses a problem file. Negated init literals are rejected with a
/// semantic diagnostic.
pub fn parse_problem(source: &str) -> Result<ProblemFile> {
    let root = read_one(source)?;
    let root_span = root.span();
    let (name, sections) = definition(&root, "problem")?;
    let mut domain_name = None;
    let mut objects = None;
    let mut init = None;
    let mut goal = None;
    for section in sections {
        let (kw, body) = section_keyword(section)?;
        let duplicate = match kw.as_str() {
            ":domain" => {
                if body.len() != 1 {
                    return Err(PddlDiagnostic::syntax(
                        "':domain' takes exactly one name",
                        section.span(),
                    ));
                }
                domain_name.replace(identifier(&body[0], "domain name")?).is_some()
            }
            ":objects" => objects
                .replace(typed_list(body, false, "object name")?)
                .is_some(),
            ":init" => init
                .replace(body.iter().map(init_atom).collect::<Result<Vec<_>>>()?)
                .is_some(),
            ":goal" => {
                if body.len() != 1 {
                    return Err(PddlDiagnostic::syntax(
                        "':goal' takes exactly one condition",
                        section.span(),
                    ));
                }
                goal.replace(condition(&body[0])?).is_some()
            }
            _ => {
                return Err(PddlDiagnostic::syntax(
                    format!("unknown problem section '{kw}'; supported: :domain :objects :init :goal"),
                    section.span(),
                ))
            }
        };
        if duplicate {
            return Err(PddlDiagnostic::syntax(
                format!("duplicate section '{kw}'"),
                section.span(),
            ));
        }
    }
    Ok(ProblemFile {
        name,
        domain_name: domain_name
            .ok_or_else(|| PddlDiagnostic::syntax("missing '(:domain <name>)' section", root_span))?,
        objects: objects.unwrap_or_default(),
        init: init.unwrap_or_default(),
        goal: goal.ok_or_else(|| PddlDiagnostic::syntax("missing '(:goal ...)' section", root_span))?,
    })
}
