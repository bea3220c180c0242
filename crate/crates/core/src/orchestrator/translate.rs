//! Ground plan actions to environment commands.

use std::sync::LazyLock;

use regex::Regex;

use crate::envs::{Dir, EnvKind};
use crate::planner::{Plan, PlanStep};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("Untranslatable action {step}: {reason}")]
pub struct UntranslatableAction {
    pub step: String,
    pub reason: String,
}

static NUMBERED: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(.*[a-z])(\d+)$").unwrap());

/// "cabinet1" becomes "cabinet 1"; other names pass through.
pub fn demangle(name: &str) -> String {
    let lower = name.to_lowercase();
    match NUMBERED.captures(&lower) {
        Some(c) => format!("{} {}", &c[1], &c[2]),
        None => lower,
    }
}

fn untranslatable(step: &PlanStep, reason: &str) -> UntranslatableAction {
    UntranslatableAction {
        step: step.to_string(),
        reason: reason.to_string(),
    }
}

fn arg<'a>(step: &'a PlanStep, index: usize) -> Result<&'a str, UntranslatableAction> {
    step.args
        .get(index)
        .map(String::as_str)
        .ok_or_else(|| untranslatable(step, "too few arguments"))
}

/// The direction argument: the first argument naming a compass direction,
/// otherwise the last argument.
fn direction(step: &PlanStep) -> Result<String, UntranslatableAction> {
    step.args
        .iter()
        .find(|a| Dir::parse(a).is_some())
        .or(step.args.last())
        .map(|a| a.to_lowercase())
        .ok_or_else(|| untranslatable(step, "no direction argument"))
}

pub fn translate_step(step: &PlanStep, env: EnvKind) -> Result<String, UntranslatableAction> {
    let name = step.name.to_lowercase();
    match env {
        EnvKind::Coin => match name.as_str() {
            "open-door" => Ok(format!("open door to {}", direction(step)?)),
            "close-door" => Ok(format!("close door to {}", direction(step)?)),
            "move" => Ok(format!("move {}", direction(step)?)),
            _ => Err(untranslatable(step, "unknown action schema")),
        },
        EnvKind::Alf => {
            let last = || {
                step.args
                    .last()
                    .map(|a| demangle(a))
                    .ok_or_else(|| untranslatable(step, "too few arguments"))
            };
            match name.as_str() {
                "gotolocation" => Ok(format!("go to {}", last()?)),
                "openobject" => Ok(format!("open {}", last()?)),
                "closeobject" => Ok(format!("close {}", last()?)),
                "pickupobject" => Ok(format!("take {} from {}", demangle(arg(step, 0)?), demangle(arg(step, 1)?))),
                "putobject" => Ok(format!("move {} to {}", demangle(arg(step, 0)?), demangle(arg(step, 1)?))),
                "useobject" => Ok(format!("use {}", demangle(arg(step, 0)?))),
                "heatobject" | "cleanobject" | "coolobject" => {
                    let verb = name.trim_end_matches("object");
                    Ok(format!("{verb} {} with {}", demangle(arg(step, 0)?), demangle(arg(step, 1)?)))
                }
                "sliceobject" => Ok(format!("slice {} with {}", demangle(arg(step, 1)?), demangle(arg(step, 2)?))),
                _ => Err(untranslatable(step, "unknown action schema")),
            }
        }
    }
}

pub fn translate_plan(plan: &Plan, env: EnvKind) -> Result<Vec<String>, UntranslatableAction> {
    plan.steps.iter().map(|s| translate_step(s, env)).collect()
}
