//! Trial records and their JSON-lines form.

use serde::{Deserialize, Serialize};

use crate::envs::EnvKind;
use crate::formalizer::Exchange;
use crate::harness::TrialConfig;

use super::Method;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Solver,
    Simulation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Fixed,
    Aborted,
    /// The trial ended some other way before the error was settled.
    Superseded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEvent {
    /// Time step, counted from 1.
    pub step: usize,
    pub kind: ErrorKind,
    pub message: String,
    pub resolution: Resolution,
}

/// One formalize/solve/execute pass at outer iteration `j`, inner iteration `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attempt {
    pub j: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pf: Option<String>,
    /// Actions proposed directly (plan generation mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plan: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exchanges: Vec<Exchange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation_error: Option<String>,
    /// After a rollback: whether the environment matched its step-start snapshot.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rollback_ok: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepLog {
    pub i: usize,
    pub attempts: Vec<Attempt>,
    /// Goal of the problem file whose plan was executed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<String>,
    pub plan: Vec<String>,
    /// Exchanges kept in memory; empty when the step was not completed.
    pub exchanges: Vec<Exchange>,
    pub errors: Vec<ErrorEvent>,
    pub committed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    AbortSolver,
    AbortSimulation,
    Transport,
    ScriptExhausted,
    Budget,
    StepLimit,
    Stalled,
    Crash,
    Config,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<TrialConfig>,
    pub method: Method,
    pub env: EnvKind,
    /// What the environment showed before the first command.
    #[serde(default)]
    pub initial_observation: String,
    pub success: bool,
    /// Completed time steps.
    pub steps_taken: usize,
    /// Environment commands that count against the budget.
    pub commands_used: usize,
    pub stalled: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
    /// Library index of the domain file when it was held fixed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df_index: Option<usize>,
    pub errors: Vec<ErrorEvent>,
    #[serde(default)]
    pub steps: Vec<StepLog>,
    pub wall_time_ms: u64,
}

impl TrialRecord {
    pub fn new(method: Method, env: EnvKind) -> Self {
        TrialRecord {
            schema_version: SCHEMA_VERSION,
            config: None,
            method,
            env,
            initial_observation: String::new(),
            success: false,
            steps_taken: 0,
            commands_used: 0,
            stalled: false,
            failure: None,
            df_index: None,
            errors: Vec::new(),
            steps: Vec::new(),
            wall_time_ms: 0,
        }
    }

    /// A trial that never ran, e.g. because setup panicked.
    pub fn crashed(method: Method, env: EnvKind, message: impl Into<String>) -> Self {
        let mut r = TrialRecord::new(method, env);
        r.failure = Some(Failure {
            kind: FailureKind::Crash,
            message: message.into(),
        });
        r
    }

    pub fn count(&self, kind: ErrorKind, resolution: Option<Resolution>) -> usize {
        self.errors
            .iter()
            .filter(|e| e.kind == kind && resolution.is_none_or(|r| e.resolution == r))
            .count()
    }

    /// Same record without timing, for comparing runs.
    pub fn without_timing(&self) -> TrialRecord {
        TrialRecord {
            wall_time_ms: 0,
            ..self.clone()
        }
    }

    /// Step lines followed by one summary line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            let mut v = serde_json::to_value(step).expect("step serializes");
            v["type"] = "step".into();
            out.push_str(&v.to_string());
            out.push('\n');
        }
        let mut summary = serde_json::to_value(self).expect("record serializes");
        summary.as_object_mut().unwrap().remove("steps");
        summary["type"] = "summary".into();
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<TrialRecord, LogError> {
        let mut steps = Vec::new();
        let mut last_valid = 0;
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value = serde_json::from_str(line).map_err(|e| LogError::Malformed {
                line: line_no,
                last_valid,
                message: e.to_string(),
            })?;
            match value.get("type").and_then(|t| t.as_str()) {
                Some("step") => {
                    let step: StepLog = serde_json::from_value(value).map_err(|e| LogError::Malformed {
                        line: line_no,
                        last_valid,
                        message: e.to_string(),
                    })?;
                    steps.push(step);
                }
                Some("summary") => {
                    let version = value.get("schema_version").and_then(|v| v.as_u64());
                    if version != Some(SCHEMA_VERSION as u64) {
                        return Err(LogError::SchemaVersion {
                            found: version,
                            expected: SCHEMA_VERSION,
                        });
                    }
                    let mut record: TrialRecord =
                        serde_json::from_value(value).map_err(|e| LogError::Malformed {
                            line: line_no,
                            last_valid,
                            message: e.to_string(),
                        })?;
                    record.steps = steps;
                    return Ok(record);
                }
                _ => {
                    return Err(LogError::Malformed {
                        line: line_no,
                        last_valid,
                        message: "line has no \"type\" of step or summary".into(),
                    })
                }
            }
            last_valid = line_no;
        }
        Err(LogError::Truncated { last_valid })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum LogError {
    #[error("line {line} is not a valid log entry ({message}); last valid line is {last_valid}")]
    Malformed {
        line: usize,
        last_valid: usize,
        message: String,
    },
    #[error("log ends without a summary line; last valid line is {last_valid}")]
    Truncated { last_valid: usize },
    #[error("log schema version {found:?} is not supported (expected {expected})")]
    SchemaVersion { found: Option<u64>, expected: u32 },
}
