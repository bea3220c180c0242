//! Turns observations into PDDL (or actions): prompt rendering, output
//! parsing and the interchangeable formalizer implementations.

pub mod fault;
pub mod llm;
pub mod oracle;
pub mod parse;
pub mod prompt;
pub mod replay;

use crate::envs::Belief;

pub use fault::{parse_fault_spec, FaultFormalizer, FaultKind};
pub use llm::{extract_reply_text, LlmConfig, LlmFormalizer};
pub use oracle::{
    alf_goal, alf_problem, coin_problem, oracle_pddl, pddl_name, OracleFormalizer, ALF_ORACLE_DOMAIN,
    COIN_ORACLE_DOMAIN,
};
pub use parse::{parse_output, Expected, FormalizerOutput, FormatError};
pub use prompt::{build_prompt, Exchange, Feedback, Mode, Phase, PromptContext, Variant, PROMPT_VERSION};
pub use replay::{ReplayEntry, ReplayFormalizer};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormalizerError {
    #[error("format error: {0}")]
    Format(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("replay script exhausted after {0} answers")]
    ScriptExhausted(usize),
}

pub trait Formalizer: Send {
    /// Produces the next answer. `belief` is the observed world state; only
    /// the oracle looks at it.
    fn formalize(&mut self, ctx: &PromptContext, belief: &Belief) -> Result<FormalizerOutput, FormalizerError>;
}

impl<F: Formalizer + ?Sized> Formalizer for Box<F> {
    fn formalize(&mut self, ctx: &PromptContext, belief: &Belief) -> Result<FormalizerOutput, FormalizerError> {
        (**self).formalize(ctx, belief)
    }
}

pub fn expected_output(ctx: &PromptContext) -> Expected {
    match ctx.mode {
        Mode::Plangen => Expected::Actions { single: true },
        _ => Expected::Pddl,
    }
}
