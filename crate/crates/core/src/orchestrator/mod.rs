//! The formalize, solve, execute loop with solver-error (inner) and
//! simulation-error (outer) refinement, and the baselines built on it.

pub mod library;
pub mod record;
pub mod translate;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::envs::{Env, Snapshot};
use crate::formalizer::{
    Exchange, Feedback, Formalizer, FormalizerError, FormalizerOutput, Mode, PromptContext, Variant,
};
use crate::gateway::{SolverErrorKind, SolverGateway};
use crate::pddl::{parse_problem, render_condition};
use crate::planner::Plan;

pub use library::{coin_df_library, df_library, draw_df};
pub use record::{
    Attempt, ErrorEvent, ErrorKind, Failure, FailureKind, LogError, Resolution, StepLog, TrialRecord,
    SCHEMA_VERSION,
};
pub use translate::{demangle, translate_plan, translate_step, UntranslatableAction};

/// Identical consecutive (goal, plan, observations) triples that mark a trial as stalled.
pub const STALL_REPEATS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopLimits {
    /// Refinements allowed after solver errors within one outer iteration.
    pub max_inner: usize,
    /// Refinements allowed after simulation errors within one time step.
    pub max_outer: usize,
    /// Defaults to the environment's command budget.
    #[serde(default)]
    pub max_time_steps: Option<usize>,
}

impl Default for LoopLimits {
    fn default() -> Self {
        LoopLimits {
            max_inner: 5,
            max_outer: 5,
            max_time_steps: None,
        }
    }
}

impl LoopLimits {
    pub fn new(max_inner: usize, max_outer: usize) -> Self {
        LoopLimits {
            max_inner,
            max_outer,
            max_time_steps: None,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.max_inner == 0 || self.max_outer == 0 || self.max_time_steps == Some(0) {
            return Err("loop limits must all be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Plangen,
    Pddlego,
    PddlegoPlus,
    PddlegoPlusFixedDf,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Plangen,
        Method::Pddlego,
        Method::PddlegoPlus,
        Method::PddlegoPlusFixedDf,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Method::Plangen => "plangen",
            Method::Pddlego => "pddlego",
            Method::PddlegoPlus => "pddlego+",
            Method::PddlegoPlusFixedDf => "fixed-df",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "plangen" => Method::Plangen,
            "pddlego" => Method::Pddlego,
            "pddlego+" | "pddlego_plus" | "pddlego-plus" => Method::PddlegoPlus,
            "fixed-df" | "pddlego_plus_fixed_df" => Method::PddlegoPlusFixedDf,
            _ => return Err(format!("unknown method '{s}'")),
        })
    }
}

/// Error events of one time step while they are still open.
#[derive(Default)]
struct StepEvents {
    solver: Option<(String, Option<Resolution>)>,
    simulation: Option<(String, Option<Resolution>)>,
}

impl StepEvents {
    fn open(slot: &mut Option<(String, Option<Resolution>)>, message: &str) {
        match slot {
            None => *slot = Some((message.to_string(), None)),
            // Keep the latest message while the event is unresolved.
            Some((m, None)) => *m = message.to_string(),
            Some(_) => {}
        }
    }

    fn resolve_pending(slot: &mut Option<(String, Option<Resolution>)>, r: Resolution) {
        if let Some((_, res @ None)) = slot {
            *res = Some(r);
        }
    }

    fn is_pending(slot: &Option<(String, Option<Resolution>)>) -> bool {
        matches!(slot, Some((_, None)))
    }

    /// Marks the last unresolved error as aborted, preferring the loop that
    /// ran out of retries. Returns the kind that was aborted.
    fn abort(&mut self, preferred: ErrorKind) -> ErrorKind {
        let kind = match preferred {
            ErrorKind::Solver if Self::is_pending(&self.solver) => ErrorKind::Solver,
            ErrorKind::Simulation if Self::is_pending(&self.simulation) => ErrorKind::Simulation,
            ErrorKind::Solver => ErrorKind::Simulation,
            ErrorKind::Simulation => ErrorKind::Solver,
        };
        match kind {
            ErrorKind::Solver => Self::resolve_pending(&mut self.solver, Resolution::Aborted),
            ErrorKind::Simulation => Self::resolve_pending(&mut self.simulation, Resolution::Aborted),
        }
        self.settle(Resolution::Superseded);
        kind
    }

    fn settle(&mut self, r: Resolution) {
        Self::resolve_pending(&mut self.solver, r);
        Self::resolve_pending(&mut self.simulation, r);
    }

    fn into_events(self, step: usize) -> Vec<ErrorEvent> {
        let mut out = Vec::new();
        for (kind, slot) in [(ErrorKind::Solver, self.solver), (ErrorKind::Simulation, self.simulation)] {
            if let Some((message, resolution)) = slot {
                out.push(ErrorEvent {
                    step,
                    kind,
                    message,
                    resolution: resolution.unwrap_or(Resolution::Superseded),
                });
            }
        }
        out
    }
}

enum StepEnd {
    Committed {
        exchanges: Vec<Exchange>,
        df: Option<String>,
        pf: Option<String>,
    },
    Failed(Failure),
}

fn failure(kind: FailureKind, message: impl Into<String>) -> Failure {
    Failure {
        kind,
        message: message.into(),
    }
}

fn formalizer_failure(e: &FormalizerError) -> Option<Failure> {
    match e {
        FormalizerError::Transport(m) => Some(failure(FailureKind::Transport, m.clone())),
        FormalizerError::ScriptExhausted(_) => Some(failure(FailureKind::ScriptExhausted, e.to_string())),
        FormalizerError::Format(_) => None,
    }
}

fn problem_goal(pf: &str) -> Option<String> {
    parse_problem(pf).ok().map(|p| render_condition(&p.goal))
}

/// Settings shared by every loop variant.
struct Runner<'a> {
    env: &'a mut Env,
    formalizer: &'a mut dyn Formalizer,
    gateway: Option<&'a SolverGateway>,
    mode: Mode,
    variant: Variant,
    limits: LoopLimits,
    refine: bool,
    fixed_df: Option<String>,
    record: TrialRecord,
    memory: Vec<Exchange>,
    last: Vec<Exchange>,
    prev_df: Option<String>,
    prev_pf: Option<String>,
}

impl<'a> Runner<'a> {
    fn context(&self) -> PromptContext {
        PromptContext {
            env: self.env.kind(),
            mode: self.mode,
            variant: self.variant,
            task_goal: self.env.task_goal(),
            current: self.last.clone(),
            memory: self.memory.clone(),
            prev_df: self.prev_df.clone(),
            prev_pf: self.prev_pf.clone(),
            feedback: None,
            valid_actions: self.env.valid_actions(),
            df_fixed: self.fixed_df.is_some(),
        }
    }

    fn rollback(&mut self, snapshot: &Snapshot) -> bool {
        self.env.restore(snapshot);
        self.env.snapshot() == *snapshot
    }

    fn run(mut self) -> TrialRecord {
        let start = Instant::now();
        if let Err(e) = self.limits.validate() {
            self.record.failure = Some(failure(FailureKind::Config, e));
            return self.record;
        }
        let first = self.env.reset();
        self.record.initial_observation = first.observation.clone();
        self.last = vec![Exchange::new("look around", first.observation)];
        self.memory = self.last.clone();
        self.prev_df = self.fixed_df.clone();
        let max_steps = self.limits.max_time_steps.unwrap_or(self.env.budget());
        let mut stall_key: Option<(Option<String>, Vec<String>, Vec<Exchange>)> = None;
        let mut stall_count = 0;
        let mut i = 0;
        while !self.env.done() {
            if i >= max_steps {
                self.record.failure = Some(failure(
                    FailureKind::StepLimit,
                    format!("no success within {max_steps} time steps"),
                ));
                break;
            }
            i += 1;
            let mut log = StepLog {
                i,
                ..Default::default()
            };
            let mut events = StepEvents::default();
            let end = match self.mode {
                Mode::Plangen => self.plangen_step(&mut log, &mut events),
                _ => self.pddl_step(&mut log, &mut events),
            };
            match end {
                StepEnd::Committed { exchanges, df, pf } => {
                    events.settle(Resolution::Fixed);
                    log.committed = true;
                    log.goal = pf.as_deref().and_then(problem_goal);
                    log.exchanges = exchanges.clone();
                    self.record.steps_taken += 1;
                    let key = (log.goal.clone(), log.plan.clone(), exchanges.clone());
                    if stall_key.as_ref() == Some(&key) {
                        stall_count += 1;
                    } else {
                        stall_key = Some(key);
                        stall_count = 1;
                    }
                    if !exchanges.is_empty() {
                        self.memory.extend(exchanges.iter().cloned());
                        self.last = exchanges;
                    }
                    if df.is_some() {
                        self.prev_df = self.fixed_df.clone().or(df);
                        self.prev_pf = pf;
                    }
                    log.errors = events.into_events(i);
                    self.record.errors.extend(log.errors.iter().cloned());
                    self.record.steps.push(log);
                    if stall_count >= STALL_REPEATS && !self.env.done() {
                        self.record.stalled = true;
                        self.record.failure = Some(failure(
                            FailureKind::Stalled,
                            format!("the same goal and plan came back {STALL_REPEATS} times without new observations"),
                        ));
                        break;
                    }
                }
                StepEnd::Failed(f) => {
                    if matches!(f.kind, FailureKind::AbortSolver | FailureKind::AbortSimulation) {
                        let preferred = if f.kind == FailureKind::AbortSolver {
                            ErrorKind::Solver
                        } else {
                            ErrorKind::Simulation
                        };
                        let kind = events.abort(preferred);
                        self.record.failure = Some(failure(
                            match kind {
                                ErrorKind::Solver => FailureKind::AbortSolver,
                                ErrorKind::Simulation => FailureKind::AbortSimulation,
                            },
                            f.message,
                        ));
                    } else {
                        events.settle(Resolution::Superseded);
                        self.record.failure = Some(f);
                    }
                    log.errors = events.into_events(i);
                    self.record.errors.extend(log.errors.iter().cloned());
                    self.record.steps.push(log);
                    break;
                }
            }
        }
        self.record.success = self.env.success();
        if self.record.success {
            self.record.failure = None;
        } else if self.record.failure.is_none() {
            self.record.failure = Some(failure(FailureKind::Budget, "the command budget ran out"));
        }
        self.record.commands_used = self.env.commands_used();
        self.record.wall_time_ms = start.elapsed().as_millis() as u64;
        self.record
    }

    /// Runs plan steps one command at a time, stopping at the first error or
    /// when the episode ends. Returns the exchanges and the error, if any.
    fn execute(&mut self, plan: &Plan) -> (Vec<Exchange>, Option<String>) {
        let mut exchanges = Vec::new();
        for step in &plan.steps {
            let command = match translate_step(step, self.env.kind()) {
                Ok(c) => c,
                Err(e) => {
                    let message = e.to_string();
                    exchanges.push(Exchange::new(step.to_string(), message.clone()));
                    return (exchanges, Some(message));
                }
            };
            let result = self.env.step(&command);
            exchanges.push(Exchange::new(command, result.observation));
            if let Some(e) = result.error {
                return (exchanges, Some(e));
            }
            if result.done {
                break;
            }
        }
        (exchanges, None)
    }

    fn pddl_step(&mut self, log: &mut StepLog, events: &mut StepEvents) -> StepEnd {
        let snapshot = self.env.snapshot();
        let belief = self.env.belief();
        let mut ctx = self.context();
        let mut j = 0;
        loop {
            // Inner loop: ask until the solver returns a plan.
            let mut k = 0;
            let (df, pf, plan) = loop {
                let mut attempt = Attempt {
                    j,
                    k,
                    ..Default::default()
                };
                let answer = self.formalizer.formalize(&ctx, &belief);
                let solved = match answer {
                    Err(e) => {
                        if let Some(f) = formalizer_failure(&e) {
                            log.attempts.push(attempt);
                            return StepEnd::Failed(f);
                        }
                        Err(e.to_string())
                    }
                    Ok(FormalizerOutput::Actions { .. }) => Err("format error: expected 'df' and 'pf'".to_string()),
                    Ok(FormalizerOutput::Pddl { df, pf }) => {
                        let df = self.fixed_df.clone().unwrap_or(df);
                        attempt.df = Some(df.clone());
                        attempt.pf = Some(pf.clone());
                        let gateway = self.gateway.expect("PDDL modes need a solver gateway");
                        match gateway.solve(&df, &pf) {
                            Ok(plan) => Ok((df, pf, plan)),
                            Err(e) if e.kind == SolverErrorKind::Transport => {
                                log.attempts.push(attempt);
                                return StepEnd::Failed(failure(FailureKind::Transport, e.message));
                            }
                            Err(e) => Err(e.message),
                        }
                    }
                };
                match solved {
                    Ok((df, pf, plan)) => {
                        attempt.plan = plan.steps.iter().map(ToString::to_string).collect();
                        log.attempts.push(attempt);
                        break (df, pf, plan);
                    }
                    Err(message) => {
                        attempt.solver_error = Some(message.clone());
                        StepEvents::open(&mut events.solver, &message);
                        if !self.refine || k >= self.limits.max_inner {
                            log.attempts.push(attempt);
                            return StepEnd::Failed(failure(
                                FailureKind::AbortSolver,
                                format!("solver error not fixed after {k} refinements: {message}"),
                            ));
                        }
                        if let (Some(df), Some(pf)) = (attempt.df.clone(), attempt.pf.clone()) {
                            ctx.prev_df = Some(df);
                            ctx.prev_pf = Some(pf);
                        }
                        ctx.feedback = Some(Feedback::Solver(message));
                        log.attempts.push(attempt);
                        k += 1;
                    }
                }
            };
            StepEvents::resolve_pending(&mut events.solver, Resolution::Fixed);
            log.plan = plan.steps.iter().map(ToString::to_string).collect();

            let (exchanges, error) = self.execute(&plan);
            let attempt = log.attempts.last_mut().expect("an attempt was logged");
            attempt.exchanges = exchanges.clone();
            let Some(message) = error else {
                return StepEnd::Committed {
                    exchanges,
                    df: Some(df),
                    pf: Some(pf),
                };
            };
            attempt.simulation_error = Some(message.clone());
            attempt.rollback_ok = Some(self.rollback(&snapshot));
            StepEvents::open(&mut events.simulation, &message);
            if !self.refine || j >= self.limits.max_outer {
                return StepEnd::Failed(failure(
                    FailureKind::AbortSimulation,
                    format!("simulation error not fixed after {j} refinements: {message}"),
                ));
            }
            ctx.current = exchanges.clone();
            ctx.feedback = Some(Feedback::Simulation(exchanges));
            ctx.prev_df = Some(df);
            ctx.prev_pf = Some(pf);
            j += 1;
        }
    }

    fn plangen_step(&mut self, log: &mut StepLog, events: &mut StepEvents) -> StepEnd {
        let snapshot = self.env.snapshot();
        let belief = self.env.belief();
        let mut ctx = self.context();
        let mut j = 0;
        loop {
            let mut attempt = Attempt {
                j,
                ..Default::default()
            };
            let (error, feedback) = match self.formalizer.formalize(&ctx, &belief) {
                Err(e) => {
                    if let Some(f) = formalizer_failure(&e) {
                        log.attempts.push(attempt);
                        return StepEnd::Failed(f);
                    }
                    (e.to_string(), Feedback::Solver(e.to_string()))
                }
                Ok(FormalizerOutput::Pddl { .. }) => {
                    let m = "format error: expected 'actions'".to_string();
                    (m.clone(), Feedback::Solver(m))
                }
                Ok(FormalizerOutput::Actions { actions }) => {
                    let command = actions.into_iter().next().unwrap_or_default();
                    attempt.actions = Some(vec![command.clone()]);
                    let result = self.env.step(&command);
                    let exchange = Exchange::new(command.clone(), result.observation);
                    attempt.exchanges = vec![exchange.clone()];
                    match result.error {
                        None => {
                            log.plan = vec![command];
                            log.attempts.push(attempt);
                            return StepEnd::Committed {
                                exchanges: vec![exchange],
                                df: None,
                                pf: None,
                            };
                        }
                        Some(e) => (e, Feedback::Simulation(vec![exchange])),
                    }
                }
            };
            attempt.simulation_error = Some(error.clone());
            attempt.rollback_ok = Some(self.rollback(&snapshot));
            log.attempts.push(attempt);
            StepEvents::open(&mut events.simulation, &error);
            if !self.refine || j >= self.limits.max_outer {
                return StepEnd::Failed(failure(
                    FailureKind::AbortSimulation,
                    format!("no valid action after {j} regenerations: {error}"),
                ));
            }
            ctx.feedback = Some(feedback);
            j += 1;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn runner<'a>(
    env: &'a mut Env,
    formalizer: &'a mut dyn Formalizer,
    gateway: Option<&'a SolverGateway>,
    method: Method,
    variant: Variant,
    limits: LoopLimits,
    refine: bool,
    fixed_df: Option<String>,
) -> Runner<'a> {
    let mode = match method {
        Method::Plangen => Mode::Plangen,
        Method::Pddlego => Mode::Pddlego,
        Method::PddlegoPlus | Method::PddlegoPlusFixedDf => Mode::PddlegoPlus,
    };
    let kind = env.kind();
    Runner {
        env,
        formalizer,
        gateway,
        mode,
        variant,
        limits,
        refine,
        fixed_df,
        record: TrialRecord::new(method, kind),
        memory: Vec::new(),
        last: Vec::new(),
        prev_df: None,
        prev_pf: None,
    }
}

/// Formalize, solve and execute with both refinement loops.
pub fn run_pddlego_plus(
    env: &mut Env,
    formalizer: &mut dyn Formalizer,
    gateway: &SolverGateway,
    limits: LoopLimits,
    variant: Variant,
) -> TrialRecord {
    runner(env, formalizer, Some(gateway), Method::PddlegoPlus, variant, limits, true, None).run()
}

/// The loop with refinement switched off; used to check that the baseline is
/// exactly the refining loop without its retries.
pub fn run_pddlego_plus_unrefined(
    env: &mut Env,
    formalizer: &mut dyn Formalizer,
    gateway: &SolverGateway,
    limits: LoopLimits,
    variant: Variant,
) -> TrialRecord {
    runner(env, formalizer, Some(gateway), Method::PddlegoPlus, variant, limits, false, None).run()
}

/// Baseline without refinement: the first solver or simulation error ends the trial.
pub fn run_pddlego(env: &mut Env, formalizer: &mut dyn Formalizer, gateway: &SolverGateway, variant: Variant) -> TrialRecord {
    let limits = LoopLimits::new(1, 1);
    runner(env, formalizer, Some(gateway), Method::Pddlego, variant, limits, false, None).run()
}

/// One action per step straight from the formalizer; simulation errors are
/// fed back up to `limits.max_outer` times.
pub fn run_plangen(env: &mut Env, formalizer: &mut dyn Formalizer, limits: LoopLimits) -> TrialRecord {
    runner(env, formalizer, None, Method::Plangen, Variant::Detailed, limits, true, None).run()
}

/// Like [`run_pddlego_plus`], but the domain file is drawn from `df_library`
/// with `seed` and never changes.
pub fn run_with_fixed_df(
    env: &mut Env,
    formalizer: &mut dyn Formalizer,
    gateway: &SolverGateway,
    df_library: &[String],
    limits: LoopLimits,
    variant: Variant,
    seed: u64,
) -> TrialRecord {
    let kind = env.kind();
    if df_library.is_empty() {
        let mut r = TrialRecord::new(Method::PddlegoPlusFixedDf, kind);
        r.failure = Some(failure(FailureKind::Config, "domain file library is empty"));
        return r;
    }
    let index = draw_df(df_library.len(), seed);
    let fixed = df_library[index].clone();
    let mut record = runner(
        env,
        formalizer,
        Some(gateway),
        Method::PddlegoPlusFixedDf,
        variant,
        limits,
        true,
        Some(fixed),
    )
    .run();
    record.df_index = Some(index);
    record
}
