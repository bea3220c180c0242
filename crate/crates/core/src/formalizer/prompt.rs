use serde::{Deserialize, Serialize};

use crate::envs::EnvKind;

pub const PROMPT_VERSION: &str = "v1";

macro_rules! template {
    ($name:literal) => {
        include_str!(concat!("../../prompts/v1/", $name, ".txt"))
    };
}

const COIN_DETAILED_INITIAL: &str = template!("coin_pddl_detailed_initial");
const COIN_DETAILED_UPDATE: &str = template!("coin_pddl_detailed_update");
const COIN_SIMPLE_INITIAL: &str = template!("coin_pddl_simple_initial");
const COIN_SIMPLE_UPDATE: &str = template!("coin_pddl_simple_update");
const COIN_PLANGEN: &str = template!("coin_plangen");
const ALF_DETAILED_INITIAL: &str = template!("alf_pddl_detailed_initial");
const ALF_DETAILED_UPDATE: &str = template!("alf_pddl_detailed_update");
const ALF_SIMPLE_INITIAL: &str = template!("alf_pddl_simple_initial");
const ALF_SIMPLE_UPDATE: &str = template!("alf_pddl_simple_update");
const ALF_PLANGEN: &str = template!("alf_plangen");
const REFINE_SIM: &str = template!("refine_sim_suffix");
const REFINE_SOLVER: &str = template!("refine_solver_suffix");
const FIXED_DF: &str = template!("fixed_df_suffix");

const NO_MEMORY: &str = "No additional memory available.";
const NO_ERRORS: &str = "No errors or obstacles mentioned.";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    PddlegoPlus,
    Pddlego,
    Plangen,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Simple,
    #[default]
    Detailed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Initial,
    Update,
    RefineSolver,
    RefineSim,
}

/// One executed command and the observation it produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exchange {
    pub command: String,
    pub observation: String,
}

impl Exchange {
    pub fn new(command: impl Into<String>, observation: impl Into<String>) -> Self {
        Exchange {
            command: command.into(),
            observation: observation.into(),
        }
    }

    pub fn render(&self) -> String {
        format!("Action: {}\n{}", self.command, self.observation)
    }
}

/// What went wrong with the previous answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// Solver or formatting failure, as text.
    Solver(String),
    /// The commands run before (and including) the failing one.
    Simulation(Vec<Exchange>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptContext {
    pub env: EnvKind,
    pub mode: Mode,
    pub variant: Variant,
    pub task_goal: String,
    /// Exchanges of the latest step, or of the failed attempt when refining
    /// after a simulation error.
    pub current: Vec<Exchange>,
    /// Every committed exchange since the trial started.
    pub memory: Vec<Exchange>,
    pub prev_df: Option<String>,
    pub prev_pf: Option<String>,
    pub feedback: Option<Feedback>,
    pub valid_actions: Vec<String>,
    /// The domain file is held fixed and only the problem file may change.
    #[serde(default)]
    pub df_fixed: bool,
}

impl PromptContext {
    pub fn phase(&self) -> Phase {
        match (&self.feedback, &self.prev_df) {
            (Some(Feedback::Solver(_)), _) => Phase::RefineSolver,
            (Some(Feedback::Simulation(_)), _) => Phase::RefineSim,
            (None, None) => Phase::Initial,
            (None, Some(_)) => Phase::Update,
        }
    }

    /// Template file chosen for this context, without extension.
    pub fn template_name(&self) -> String {
        let env = match self.env {
            EnvKind::Coin => "coin",
            EnvKind::Alf => "alf",
        };
        if self.mode == Mode::Plangen {
            return format!("{env}_plangen");
        }
        let variant = match self.variant {
            Variant::Simple => "simple",
            Variant::Detailed => "detailed",
        };
        let base = if self.prev_df.is_some() { "update" } else { "initial" };
        format!("{env}_pddl_{variant}_{base}")
    }
}

fn base_template(ctx: &PromptContext) -> &'static str {
    let update = ctx.prev_df.is_some();
    match (ctx.env, ctx.mode, ctx.variant, update) {
        (EnvKind::Coin, Mode::Plangen, _, _) => COIN_PLANGEN,
        (EnvKind::Alf, Mode::Plangen, _, _) => ALF_PLANGEN,
        (EnvKind::Coin, _, Variant::Detailed, false) => COIN_DETAILED_INITIAL,
        (EnvKind::Coin, _, Variant::Detailed, true) => COIN_DETAILED_UPDATE,
        (EnvKind::Coin, _, Variant::Simple, false) => COIN_SIMPLE_INITIAL,
        (EnvKind::Coin, _, Variant::Simple, true) => COIN_SIMPLE_UPDATE,
        (EnvKind::Alf, _, Variant::Detailed, false) => ALF_DETAILED_INITIAL,
        (EnvKind::Alf, _, Variant::Detailed, true) => ALF_DETAILED_UPDATE,
        (EnvKind::Alf, _, Variant::Simple, false) => ALF_SIMPLE_INITIAL,
        (EnvKind::Alf, _, Variant::Simple, true) => ALF_SIMPLE_UPDATE,
    }
}

fn join(exchanges: &[Exchange], sep: &str) -> String {
    exchanges.iter().map(Exchange::render).collect::<Vec<_>>().join(sep)
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("    {l}")).collect::<Vec<_>>().join("\n")
}

fn render_valid_actions(ctx: &PromptContext) -> String {
    match ctx.env {
        EnvKind::Coin => {
            let quoted: Vec<String> = ctx.valid_actions.iter().map(|a| format!("'{a}'")).collect();
            format!("[{}]", quoted.join(", "))
        }
        EnvKind::Alf => ctx
            .valid_actions
            .iter()
            .map(|a| format!("    - {a}"))
            .collect::<Vec<_>>()
            .join("\n"),
    }
}

/// Replaces `{{name}}` markers in one pass, so values may contain braces.
fn fill(template: &str, lookup: impl Fn(&str) -> Option<String>) -> String {
    let mut out = String::with_capacity(template.len() * 2);
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        let Some(len) = rest[start + 2..].find("}}") else { break };
        let key = &rest[start + 2..start + 2 + len];
        match lookup(key) {
            Some(value) if key.chars().all(|c| c.is_ascii_lowercase() || c == '_') => {
                out.push_str(&rest[..start]);
                out.push_str(&value);
            }
            _ => out.push_str(&rest[..start + 2 + len + 2]),
        }
        rest = &rest[start + 2 + len + 2..];
    }
    out.push_str(rest);
    out
}

pub fn build_prompt(ctx: &PromptContext) -> String {
    let plangen = ctx.mode == Mode::Plangen;
    let mut template = base_template(ctx).to_string();
    if !plangen {
        if ctx.df_fixed {
            template.push_str(FIXED_DF);
        }
        match ctx.feedback {
            Some(Feedback::Solver(_)) => template.push_str(REFINE_SOLVER),
            Some(Feedback::Simulation(_)) => template.push_str(REFINE_SIM),
            None => {}
        }
    }
    // A failed attempt is listed with every exchange closed by a newline.
    let current = match ctx.feedback {
        Some(Feedback::Simulation(_)) if !plangen => ctx
            .current
            .iter()
            .map(|e| format!("{}\n", e.render()))
            .collect::<Vec<_>>()
            .join("\n"),
        _ => join(&ctx.current, "\n\n"),
    };
    let memory = join(&ctx.memory, "\n");
    let error_message = match (&ctx.feedback, plangen) {
        (None, true) => NO_ERRORS.to_string(),
        (None, false) => String::new(),
        (Some(Feedback::Solver(msg)), true) => msg.clone(),
        (Some(Feedback::Solver(msg)), false) => indent(msg),
        (Some(Feedback::Simulation(ex)), true) => join(ex, "\n"),
        (Some(Feedback::Simulation(ex)), false) => indent(&join(ex, "\n")),
    };
    fill(&template, |key| {
        Some(match key {
            "task_goal" => ctx.task_goal.clone(),
            "current_obs" => current.clone(),
            "memory" if plangen && memory.is_empty() => NO_MEMORY.to_string(),
            "memory" => memory.clone(),
            "prev_df" => ctx.prev_df.clone().unwrap_or_default(),
            "prev_pf" => ctx.prev_pf.clone().unwrap_or_default(),
            "valid_actions" => render_valid_actions(ctx),
            "error_message" => error_message.clone(),
            _ => return None,
        })
    })
}
