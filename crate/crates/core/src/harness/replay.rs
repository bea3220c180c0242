//! Human-readable transcripts of logged trials.

use std::fmt::Write;

use crate::orchestrator::{translate_step, LogError, TrialRecord};
use crate::planner::PlanStep;

fn indent(text: &str, by: &str) -> String {
    text.lines().map(|l| format!("{by}{l}")).collect::<Vec<_>>().join("\n")
}

/// Renders a trial as numbered blocks: the observation a step started from,
/// every DF/PF pair tried (refinements numbered `i.2`, `i.3`, ...), the plan
/// and what happened when it ran.
pub fn transcript(record: &TrialRecord) -> String {
    let mut out = String::new();
    let mut observation = record.initial_observation.clone();
    for step in &record.steps {
        let _ = writeln!(out, "Observation {}\n{}\n", step.i, indent(&observation, "    "));
        for (n, attempt) in step.attempts.iter().enumerate() {
            let label = if n == 0 {
                step.i.to_string()
            } else {
                format!("{}.{}", step.i, n + 1)
            };
            if let Some(df) = &attempt.df {
                let _ = writeln!(out, "DF {label}\n{}\n", indent(df, "    "));
            }
            if let Some(pf) = &attempt.pf {
                let _ = writeln!(out, "PF {label}\n{}\n", indent(pf, "    "));
            }
            if let Some(actions) = &attempt.actions {
                let _ = writeln!(out, "ACTION {label}\n{}\n", indent(&actions.join("\n"), "    "));
            }
            if let Some(e) = &attempt.solver_error {
                let _ = writeln!(out, "SOLVER ERROR\n{}\n", indent(e, "    "));
                continue;
            }
            if attempt.df.is_some() {
                let _ = writeln!(out, "SOLVER PLAN");
                if attempt.plan.is_empty() {
                    let _ = writeln!(out, "  (empty plan)");
                }
                for (p, line) in attempt.plan.iter().enumerate() {
                    let command = PlanStep::parse(line)
                        .and_then(|s| translate_step(&s, record.env).ok())
                        .unwrap_or_else(|| line.clone());
                    let _ = writeln!(out, "  {}. {command}", p + 1);
                }
                out.push('\n');
            }
            let _ = writeln!(out, "EXEC RESULT");
            for ex in &attempt.exchanges {
                let _ = writeln!(out, "  > {}\n{}", ex.command, indent(&ex.observation, "    "));
            }
            match &attempt.simulation_error {
                Some(e) => {
                    let _ = writeln!(out, "  ERROR: \"{e}\"\n");
                }
                None => {
                    let _ = writeln!(out, "  OK\n");
                }
            }
        }
        if step.committed && !step.exchanges.is_empty() {
            observation = step
                .exchanges
                .iter()
                .map(|e| e.observation.as_str())
                .collect::<Vec<_>>()
                .join("\n");
        }
    }
    let _ = writeln!(out, "SUMMARY");
    let _ = writeln!(
        out,
        "  success: {}\n  steps: {}\n  commands: {}",
        record.success, record.steps_taken, record.commands_used
    );
    for e in &record.errors {
        let _ = writeln!(
            out,
            "  step {} {:?} error ({:?}): {}",
            e.step, e.kind, e.resolution, e.message
        );
    }
    if let Some(f) = &record.failure {
        let _ = writeln!(out, "  failure ({:?}): {}", f.kind, f.message);
    }
    out
}

/// Parses a JSON-lines trial log and renders its transcript.
pub fn replay_log(jsonl: &str) -> Result<(TrialRecord, String), LogError> {
    let record = TrialRecord::from_jsonl(jsonl)?;
    let text = transcript(&record);
    Ok((record, text))
}
