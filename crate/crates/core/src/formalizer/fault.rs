use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::envs::Belief;

use super::parse::FormalizerOutput;
use super::prompt::PromptContext;
use super::{Formalizer, FormalizerError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaultKind {
    /// Answer is not usable JSON.
    Format,
    /// The endpoint could not be reached.
    Transport,
    /// Problem file loses its closing parenthesis.
    Syntax,
    /// Goal mentions an object that is never declared.
    Semantic,
    /// The proposed action is not a valid command.
    Action,
}

impl FaultKind {
    fn parse(s: &str) -> Option<FaultKind> {
        Some(match s {
            "format" => FaultKind::Format,
            "transport" => FaultKind::Transport,
            "syntax" => FaultKind::Syntax,
            "semantic" => FaultKind::Semantic,
            "action" => FaultKind::Action,
            _ => return None,
        })
    }
}

/// Wraps another formalizer and corrupts a seeded fraction of its answers.
pub struct FaultFormalizer {
    inner: Box<dyn Formalizer>,
    faults: Vec<(FaultKind, f64)>,
    rng: ChaCha8Rng,
    pub injected: usize,
}

/// Parses "syntax@0.2,format@0.1" into (kind, probability) pairs.
pub fn parse_fault_spec(spec: &str) -> Result<Vec<(FaultKind, f64)>, String> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let (kind, rate) = part
                .trim()
                .split_once('@')
                .ok_or_else(|| format!("fault '{part}' must look like kind@rate"))?;
            let kind = FaultKind::parse(kind).ok_or_else(|| format!("unknown fault kind '{kind}'"))?;
            let rate: f64 = rate.parse().map_err(|_| format!("bad fault rate '{rate}'"))?;
            if !(0.0..=1.0).contains(&rate) {
                return Err(format!("fault rate {rate} is outside [0, 1]"));
            }
            Ok((kind, rate))
        })
        .collect()
}

impl FaultFormalizer {
    pub fn new(inner: Box<dyn Formalizer>, faults: Vec<(FaultKind, f64)>, seed: u64) -> Self {
        FaultFormalizer {
            inner,
            faults,
            rng: ChaCha8Rng::seed_from_u64(seed),
            injected: 0,
        }
    }
}

impl Formalizer for FaultFormalizer {
    fn formalize(&mut self, ctx: &PromptContext, belief: &Belief) -> Result<FormalizerOutput, FormalizerError> {
        let out = self.inner.formalize(ctx, belief)?;
        let mut chosen = None;
        for &(kind, rate) in &self.faults {
            if chosen.is_none() && self.rng.random_bool(rate) {
                chosen = Some(kind);
            }
        }
        let Some(kind) = chosen else { return Ok(out) };
        self.injected += 1;
        match (kind, out) {
            (FaultKind::Format, _) => Err(FormalizerError::Format("injected: output was not JSON".into())),
            (FaultKind::Transport, _) => Err(FormalizerError::Transport("injected: connection reset".into())),
            (FaultKind::Syntax, FormalizerOutput::Pddl { df, mut pf }) => {
                if let Some(i) = pf.rfind(')') {
                    pf.remove(i);
                }
                Ok(FormalizerOutput::Pddl { df, pf })
            }
            (FaultKind::Semantic, FormalizerOutput::Pddl { df, pf }) => {
                let pf = match pf.find("(:goal") {
                    Some(i) => format!("{}(:goal (at nowhere-land)))", &pf[..i]),
                    None => pf,
                };
                Ok(FormalizerOutput::Pddl { df, pf })
            }
            (FaultKind::Action, FormalizerOutput::Actions { .. }) => Ok(FormalizerOutput::Actions {
                actions: vec!["dance wildly".to_string()],
            }),
            (_, out) => Ok(out),
        }
    }
}
