use serde::{Deserialize, Serialize};

use crate::envs::Belief;

use super::parse::{parse_output, FormalizerOutput};
use super::prompt::{build_prompt, PromptContext};
use super::{expected_output, Formalizer, FormalizerError};

/// One scripted answer: raw model text (parsed like a live reply), a
/// ready-made output, or a forced formatting failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReplayEntry {
    Raw(String),
    Output(FormalizerOutput),
    FormatError { format_error: String },
}

impl ReplayEntry {
    pub fn pddl(df: impl Into<String>, pf: impl Into<String>) -> Self {
        ReplayEntry::Output(FormalizerOutput::Pddl {
            df: df.into(),
            pf: pf.into(),
        })
    }

    pub fn action(a: impl Into<String>) -> Self {
        ReplayEntry::Output(FormalizerOutput::Actions {
            actions: vec![a.into()],
        })
    }
}

/// Plays back a fixed script of answers in call order.
#[derive(Clone, Debug, Default)]
pub struct ReplayFormalizer {
    script: Vec<ReplayEntry>,
    next: usize,
    /// Prompts that would have been sent, one per call.
    pub prompts: Vec<String>,
    pub contexts: Vec<PromptContext>,
}

impl ReplayFormalizer {
    pub fn new(script: Vec<ReplayEntry>) -> Self {
        ReplayFormalizer {
            script,
            ..Default::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let script: Vec<ReplayEntry> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if script.is_empty() {
            return Err("replay script is empty".to_string());
        }
        Ok(ReplayFormalizer::new(script))
    }

    pub fn calls(&self) -> usize {
        self.next
    }

    pub fn remaining(&self) -> usize {
        self.script.len() - self.next
    }
}

impl Formalizer for ReplayFormalizer {
    fn formalize(&mut self, ctx: &PromptContext, _belief: &Belief) -> Result<FormalizerOutput, FormalizerError> {
        self.prompts.push(build_prompt(ctx));
        self.contexts.push(ctx.clone());
        let entry = self
            .script
            .get(self.next)
            .cloned()
            .ok_or(FormalizerError::ScriptExhausted(self.next))?;
        self.next += 1;
        let expected = expected_output(ctx);
        match entry {
            ReplayEntry::Raw(raw) => parse_output(&raw, expected).map_err(|e| FormalizerError::Format(e.0)),
            ReplayEntry::Output(out) => {
                let text = serde_json::to_string(&out).expect("output serializes");
                parse_output(&text, expected).map_err(|e| FormalizerError::Format(e.0))
            }
            ReplayEntry::FormatError { format_error } => Err(FormalizerError::Format(format_error)),
        }
    }
}
