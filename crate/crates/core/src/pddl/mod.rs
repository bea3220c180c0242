//! PDDL subset: parsing, consistency checking and rendering.

pub mod ast;
mod check;
mod diagnostic;
mod parser;
mod render;
pub mod sexpr;

pub use ast::*;
pub use check::check_consistency;
pub use diagnostic::{render_diagnostics, Location, PddlDiagnostic, Severity};
pub use parser::{parse_domain, parse_problem};
pub use render::{render_condition, render_domain, render_problem};
