use std::fmt::Write;

use super::ast::{Condition, DomainFile, ProblemFile, TypedName, UNIVERSAL_TYPE};

/// Groups consecutive names of equal type. A group of universally typed
/// names is written bare only when it is last, otherwise the reader would
/// attach the next group's type to it.
fn typed_groups(items: &[TypedName]) -> Vec<String> {
    let mut groups: Vec<(Vec<&str>, &str)> = Vec::new();
    for item in items {
        match groups.last_mut() {
            Some((names, ty)) if *ty == item.ty => names.push(&item.name),
            _ => groups.push((vec![&item.name], &item.ty)),
        }
    }
    let last = groups.len().saturating_sub(1);
    groups
        .iter()
        .enumerate()
        .map(|(i, (names, ty))| {
            let names = names.join(" ");
            if *ty == UNIVERSAL_TYPE && i == last {
                names
            } else {
                format!("{names} - {ty}")
            }
        })
        .collect()
}

fn typed_vars(items: &[TypedName]) -> String {
    let bare_from = items
        .iter()
        .rposition(|v| v.ty != UNIVERSAL_TYPE)
        .map_or(0, |i| i + 1);
    items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if i >= bare_from {
                format!("?{}", v.name)
            } else {
                format!("?{} - {}", v.name, v.ty)
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render_condition(c: &Condition) -> String {
    let mut out = String::new();
    write_condition(&mut out, c);
    out
}

fn write_condition(out: &mut String, c: &Condition) {
    match c {
        Condition::Atom(a) => {
            let _ = write!(out, "{a}");
        }
        Condition::Not(inner) => {
            out.push_str("(not ");
            write_condition(out, inner);
            out.push(')');
        }
        Condition::And(cs) | Condition::Or(cs) => {
            out.push_str(if matches!(c, Condition::And(_)) { "(and" } else { "(or" });
            for c in cs {
                out.push(' ');
                write_condition(out, c);
            }
            out.push(')');
        }
        Condition::Exists(vars, body) => {
            let _ = write!(out, "(exists ({}) ", typed_vars(vars));
            write_condition(out, body);
            out.push(')');
        }
    }
}

pub fn render_domain(df: &DomainFile) -> String {
    let mut out = format!("(define (domain {})\n", df.name);
    if !df.requirements.is_empty() {
        let reqs: Vec<_> = df.requirements.iter().map(|r| r.keyword()).collect();
        let _ = writeln!(out, "  (:requirements {})", reqs.join(" "));
    }
    if !df.types.is_empty() {
        let _ = writeln!(out, "  (:types {})", typed_groups(&df.types).join(" "));
    }
    if !df.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for p in &df.predicates {
            if p.params.is_empty() {
                let _ = writeln!(out, "    ({})", p.name);
            } else {
                let _ = writeln!(out, "    ({} {})", p.name, typed_vars(&p.params));
            }
        }
        out.push_str("  )\n");
    }
    for a in &df.actions {
        let _ = writeln!(out, "  (:action {}", a.name);
        let _ = writeln!(out, "    :parameters ({})", typed_vars(&a.parameters));
        if let Some(pre) = &a.precondition {
            let _ = writeln!(out, "    :precondition {}", render_condition(pre));
        }
        let _ = writeln!(out, "    :effect {}", render_condition(&a.effect));
        out.push_str("  )\n");
    }
    out.push(')');
    out
}

pub fn render_problem(pf: &ProblemFile) -> String {
    let mut out = format!("(define (problem {})\n", pf.name);
    let _ = writeln!(out, "  (:domain {})", pf.domain_name);
    if pf.objects.is_empty() {
        out.push_str("  (:objects)\n");
    } else {
        out.push_str("  (:objects\n");
        for g in typed_groups(&pf.objects) {
            let _ = writeln!(out, "    {g}");
        }
        out.push_str("  )\n");
    }
    if pf.init.is_empty() {
        out.push_str("  (:init)\n");
    } else {
        out.push_str("  (:init\n");
        for a in &pf.init {
            let _ = writeln!(out, "    {a}");
        }
        out.push_str("  )\n");
    }
    let _ = writeln!(out, "  (:goal {})", render_condition(&pf.goal));
    out.push(')');
    out
}
