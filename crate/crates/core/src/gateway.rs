//! One solving interface over the local planner and a remote planning
//! service. Every failure becomes a [`SolverError`] whose message is shown
//! to the formalizer as-is.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::http::{self, Semaphore};
use crate::pddl::{self, render_diagnostics, PddlDiagnostic, Severity};
use crate::planner::{self, Plan, PlanStep, SearchLimits, SolveOutcome, UnsolvableReason};

pub const PLANNER_URL_ENV: &str = "PDDLEGO_PLANNER_URL";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverErrorKind {
    Parse,
    Semantic,
    Unsolvable,
    Timeout,
    Transport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverSource {
    Local,
    Remote,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverError {
    pub kind: SolverErrorKind,
    pub message: String,
    pub source: SolverSource,
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for SolverError {}

impl SolverError {
    fn local(kind: SolverErrorKind, message: impl Into<String>) -> Self {
        SolverError {
            kind,
            message: message.into(),
            source: SolverSource::Local,
        }
    }

    fn remote(kind: SolverErrorKind, message: impl Into<String>) -> Self {
        let mut message = message.into();
        if message.trim().is_empty() {
            message = "remote planner returned an empty response".into();
        }
        SolverError {
            kind,
            message,
            source: SolverSource::Remote,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemotePlannerConfig {
    pub endpoint: String,
    pub timeout_secs: f64,
    pub retries: u32,
    pub max_in_flight: usize,
    /// Request field carrying the domain text.
    pub domain_field: String,
    /// Request field carrying the problem text.
    pub problem_field: String,
    /// Response field holding the plan, looked up at the top level and
    /// under `result`.
    pub plan_field: String,
    /// Lowercase substrings marking a response as "no plan exists".
    pub unsolvable_markers: Vec<String>,
}

impl Default for RemotePlannerConfig {
    fn default() -> Self {
        RemotePlannerConfig {
            endpoint: String::new(),
            timeout_secs: 10.0,
            retries: 2,
            max_in_flight: 4,
            domain_field: "domain".into(),
            problem_field: "problem".into(),
            plan_field: "plan".into(),
            unsolvable_markers: vec!["unsolvable".into(), "no solution".into()],
        }
    }
}

impl RemotePlannerConfig {
    /// Applies the endpoint override from the environment, if set.
    pub fn with_env_override(mut self) -> Self {
        if let Ok(url) = std::env::var(PLANNER_URL_ENV) {
            if !url.trim().is_empty() {
                self.endpoint = url.trim().to_string();
            }
        }
        self
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    #[default]
    Local,
    Remote,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GatewayConfig {
    pub mode: SolverMode,
    pub limits: SearchLimits,
    pub remote: RemotePlannerConfig,
}

pub struct SolverGateway {
    config: GatewayConfig,
    remote: Option<(ureq::Agent, Semaphore)>,
}

fn diagnostic_error(file: &str, d: &PddlDiagnostic) -> SolverError {
    let kind = match d.severity {
        Severity::Syntax => SolverErrorKind::Parse,
        Severity::Semantic => SolverErrorKind::Semantic,
    };
    SolverError::local(kind, format!("{file}: {d}"))
}

/// Parses both files and runs the consistency check.
fn front_end(df_text: &str, pf_text: &str) -> Result<(pddl::DomainFile, pddl::ProblemFile), SolverError> {
    let df = pddl::parse_domain(df_text).map_err(|d| diagnostic_error("domain file", &d))?;
    let pf = pddl::parse_problem(pf_text).map_err(|d| diagnostic_error("problem file", &d))?;
    pddl::check_consistency(&df, &pf)
        .map_err(|ds| SolverError::local(SolverErrorKind::Semantic, render_diagnostics(&ds)))?;
    Ok((df, pf))
}

impl SolverGateway {
    pub fn new(config: GatewayConfig) -> Self {
        let remote = (config.mode == SolverMode::Remote).then(|| {
            let timeout = Duration::from_secs_f64(config.remote.timeout_secs.max(0.001));
            (http::agent(timeout), Semaphore::new(config.remote.max_in_flight))
        });
        SolverGateway { config, remote }
    }

    pub fn local(limits: SearchLimits) -> Self {
        SolverGateway::new(GatewayConfig {
            mode: SolverMode::Local,
            limits,
            remote: RemotePlannerConfig::default(),
        })
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn solve(&self, df_text: &str, pf_text: &str) -> Result<Plan, SolverError> {
        let (df, pf) = front_end(df_text, pf_text)?;
        match &self.remote {
            None => solve_local(&df, &pf, &self.config.limits),
            Some((agent, sem)) => {
                let _permit = sem.acquire();
                self.solve_remote(agent, df_text, pf_text)
            }
        }
    }

    fn solve_remote(&self, agent: &ureq::Agent, df_text: &str, pf_text: &str) -> Result<Plan, SolverError> {
        let cfg = &self.config.remote;
        if cfg.endpoint.is_empty() {
            return Err(SolverError::remote(
                SolverErrorKind::Transport,
                format!("remote planner endpoint not configured (set {PLANNER_URL_ENV})"),
            ));
        }
        let body = json!({ &cfg.domain_field: df_text, &cfg.problem_field: pf_text });
        let mut last = None;
        for _ in 0..=cfg.retries {
            match http::post_json(agent, &cfg.endpoint, &[], &body) {
                Ok((status, text)) if status >= 500 => {
                    last = Some(normalize_with(cfg, status, text.as_bytes()));
                }
                Ok((status, text)) => return normalize_with(cfg, status, text.as_bytes()),
                Err(f) => {
                    let msg = if f.timed_out {
                        format!("remote planner timed out after {}s: {}", cfg.timeout_secs, f.message)
                    } else {
                        f.message
                    };
                    last = Some(Err(SolverError::remote(SolverErrorKind::Transport, msg)));
                }
            }
        }
        last.expect("at least one attempt")
    }
}

fn solve_local(df: &pddl::DomainFile, pf: &pddl::ProblemFile, limits: &SearchLimits) -> Result<Plan, SolverError> {
    match planner::plan(df, pf, limits) {
        SolveOutcome::Found(plan, _) => Ok(plan),
        SolveOutcome::Malformed(ds) => Err(SolverError::local(
            SolverErrorKind::Semantic,
            render_diagnostics(&ds),
        )),
        SolveOutcome::Unsolvable(UnsolvableReason::GoalUnreachable) => Err(SolverError::local(
            SolverErrorKind::Unsolvable,
            "no plan found: the goal is unreachable from the initial state (search space exhausted)",
        )),
        SolveOutcome::Unsolvable(UnsolvableReason::LimitExceeded) => Err(SolverError::local(
            SolverErrorKind::Timeout,
            format!(
                "no plan found within the search limits (max_expansions {}, max_plan_len {})",
                limits.max_expansions, limits.max_plan_len
            ),
        )),
    }
}

/// Full pipeline on raw texts: parse, check, ground and solve, locally or
/// through the configured remote service.
pub fn solve_with_gateway(df_text: &str, pf_text: &str, config: &GatewayConfig) -> Result<Plan, SolverError> {
    SolverGateway::new(config.clone()).solve(df_text, pf_text)
}

/// Maps a remote planner response using the default wire format.
pub fn normalize_remote_response(status: u16, body: &[u8]) -> Result<Plan, SolverError> {
    normalize_with(&RemotePlannerConfig::default(), status, body)
}

fn plan_from_lines(text: &str) -> Option<Plan> {
    let mut steps = Vec::new();
    for line in text.lines().map(str::trim) {
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        steps.push(PlanStep::parse(line)?);
    }
    Some(Plan::new(steps))
}

fn plan_from_json(v: &Value) -> Option<Plan> {
    match v {
        Value::String(s) => plan_from_lines(s),
        Value::Array(items) => {
            let mut steps = Vec::new();
            for item in items {
                let line = match item {
                    Value::String(s) => s.as_str(),
                    Value::Object(o) => o
                        .get("name")
                        .or_else(|| o.get("action"))
                        .and_then(Value::as_str)?,
                    _ => return None,
                };
                let line = line.trim();
                let step = if line.starts_with('(') {
                    PlanStep::parse(line)?
                } else {
                    PlanStep::parse(&format!("({line})"))?
                };
                steps.push(step);
            }
            Some(Plan::new(steps))
        }
        _ => None,
    }
}

fn error_text(v: &Value) -> String {
    for key in ["error", "message", "output", "result"] {
        match v.get(key) {
            Some(Value::String(s)) => return s.clone(),
            Some(inner @ Value::Object(_)) => {
                let s = error_text(inner);
                if !s.is_empty() {
                    return s;
                }
            }
            _ => {}
        }
    }
    v.to_string()
}

fn normalize_with(cfg: &RemotePlannerConfig, status: u16, body: &[u8]) -> Result<Plan, SolverError> {
    let text = String::from_utf8_lossy(body);
    let lower = text.to_lowercase();
    let unsolvable = cfg.unsolvable_markers.iter().any(|m| lower.contains(m.as_str()));
    if !(200..300).contains(&status) {
        let kind = if unsolvable {
            SolverErrorKind::Unsolvable
        } else {
            SolverErrorKind::Transport
        };
        return Err(SolverError::remote(
            kind,
            format!("remote planner returned HTTP {status}: {}", text.trim()),
        ));
    }
    if let Ok(v) = serde_json::from_str::<Value>(&text) {
        let field = v
            .get(&cfg.plan_field)
            .or_else(|| v.get("result").and_then(|r| r.get(&cfg.plan_field)));
        let failed = v.get("status").and_then(Value::as_str).is_some_and(|s| s != "ok");
        if let (Some(p), false) = (field, failed) {
            if let Some(plan) = plan_from_json(p) {
                return Ok(plan);
            }
        }
        let kind = if unsolvable {
            SolverErrorKind::Unsolvable
        } else {
            SolverErrorKind::Transport
        };
        return Err(SolverError::remote(kind, error_text(&v)));
    }
    if unsolvable {
        return Err(SolverError::remote(SolverErrorKind::Unsolvable, text.trim()));
    }
    plan_from_lines(&text).ok_or_else(|| {
        SolverError::remote(
            SolverErrorKind::Transport,
            format!("unparsable remote planner response: {}", text.trim()),
        )
    })
}
