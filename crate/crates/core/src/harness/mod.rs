//! Batch execution of seeded trials, metric aggregation and reports.

pub mod metrics;
pub mod replay;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::envs::{AlfCategory, Env, EnvKind, VALID_SIZES};
use crate::formalizer::{
    parse_fault_spec, FaultFormalizer, Formalizer, LlmConfig, LlmFormalizer, OracleFormalizer, ReplayFormalizer,
    Variant,
};
use crate::gateway::{GatewayConfig, SolverGateway};
use crate::orchestrator::{
    df_library, run_plangen, run_pddlego, run_pddlego_plus, run_with_fixed_df, FailureKind, LoopLimits, Method,
    TrialRecord,
};

pub use metrics::{aggregate, emit_report, percent, AggregateMetrics, DifficultyBin, Report, ReportFormat};
pub use replay::{replay_log, transcript};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnvSpec {
    Coin { rooms: usize, seed: u64 },
    Alf { category: AlfCategory, seed: u64 },
}

impl EnvSpec {
    pub fn kind(&self) -> EnvKind {
        match self {
            EnvSpec::Coin { .. } => EnvKind::Coin,
            EnvSpec::Alf { .. } => EnvKind::Alf,
        }
    }

    pub fn build(&self) -> Result<Env, String> {
        match *self {
            EnvSpec::Coin { rooms, seed } => {
                if !VALID_SIZES.contains(&rooms) {
                    return Err(format!("CoinCollector size must be one of {VALID_SIZES:?}, got {rooms}"));
                }
                Ok(Env::coin(rooms, seed))
            }
            EnvSpec::Alf { category, seed } => Ok(Env::alf(category, seed)),
        }
    }

    pub fn bin(&self) -> DifficultyBin {
        match *self {
            EnvSpec::Coin { rooms, .. } => DifficultyBin::Rooms(rooms),
            EnvSpec::Alf { category, .. } => DifficultyBin::Category(category),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FormalizerSpec {
    Oracle,
    Llm(LlmConfig),
    /// JSON array of scripted answers.
    Replay { path: PathBuf },
    /// The oracle with seeded faults, e.g. "syntax@0.2,action@0.1".
    Fault { spec: String },
}

impl FormalizerSpec {
    /// Parses the command-line form: `oracle`, `llm`, `replay:<file>`, `fault:<spec>`.
    pub fn parse_cli(s: &str, llm: &LlmConfig) -> Result<FormalizerSpec, String> {
        match s.split_once(':') {
            None if s == "oracle" => Ok(FormalizerSpec::Oracle),
            None if s == "llm" => Ok(FormalizerSpec::Llm(llm.clone())),
            Some(("replay", path)) => Ok(FormalizerSpec::Replay { path: path.into() }),
            Some(("fault", spec)) => {
                parse_fault_spec(spec)?;
                Ok(FormalizerSpec::Fault { spec: spec.to_string() })
            }
            _ => Err(format!("unknown formalizer '{s}'")),
        }
    }

    pub fn build(&self, seed: u64) -> Result<Box<dyn Formalizer>, String> {
        Ok(match self {
            FormalizerSpec::Oracle => Box::new(OracleFormalizer::new()),
            FormalizerSpec::Llm(c) => Box::new(LlmFormalizer::new(c.clone())),
            FormalizerSpec::Replay { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                Box::new(ReplayFormalizer::from_json(&text)?)
            }
            FormalizerSpec::Fault { spec } => Box::new(FaultFormalizer::new(
                Box::new(OracleFormalizer::new()),
                parse_fault_spec(spec)?,
                seed,
            )),
        })
    }
}

/// Everything that determines one trial, given the formalizer's behaviour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub env: EnvSpec,
    pub method: Method,
    #[serde(default)]
    pub variant: Variant,
    pub formalizer: FormalizerSpec,
    #[serde(default)]
    pub solver: GatewayConfig,
    #[serde(default)]
    pub limits: LoopLimits,
    #[serde(default)]
    pub trial_seed: u64,
}

impl TrialConfig {
    pub fn new(env: EnvSpec, method: Method) -> Self {
        TrialConfig {
            env,
            method,
            variant: Variant::Detailed,
            formalizer: FormalizerSpec::Oracle,
            solver: GatewayConfig::default(),
            limits: LoopLimits::default(),
            trial_seed: 0,
        }
    }
}

fn failed_record(config: &TrialConfig, kind: FailureKind, message: String) -> TrialRecord {
    let mut r = TrialRecord::crashed(config.method, config.env.kind(), message);
    if let Some(f) = r.failure.as_mut() {
        f.kind = kind;
    }
    r.config = Some(config.clone());
    r
}

/// Runs one trial with the given gateway.
pub fn run_trial_with(config: &TrialConfig, gateway: &SolverGateway) -> TrialRecord {
    let mut env = match config.env.build() {
        Ok(e) => e,
        Err(m) => return failed_record(config, FailureKind::Config, m),
    };
    let mut formalizer = match config.formalizer.build(config.trial_seed) {
        Ok(f) => f,
        Err(m) => return failed_record(config, FailureKind::Config, m),
    };
    let f: &mut dyn Formalizer = formalizer.as_mut();
    let mut record = match config.method {
        Method::Plangen => run_plangen(&mut env, f, config.limits),
        Method::Pddlego => run_pddlego(&mut env, f, gateway, config.variant),
        Method::PddlegoPlus => run_pddlego_plus(&mut env, f, gateway, config.limits, config.variant),
        Method::PddlegoPlusFixedDf => run_with_fixed_df(
            &mut env,
            f,
            gateway,
            &df_library(config.env.kind()),
            config.limits,
            config.variant,
            config.trial_seed,
        ),
    };
    record.config = Some(config.clone());
    record
}

pub fn run_trial(config: &TrialConfig) -> TrialRecord {
    run_trial_with(config, &SolverGateway::new(config.solver.clone()))
}

/// Runs every config on a pool of `parallelism` workers. Records come back in
/// config order; a panicking trial becomes a failed record.
pub fn run_batch(configs: &[TrialConfig], parallelism: usize) -> Vec<TrialRecord> {
    // One gateway per distinct solver setup, shared by the trials using it.
    let mut gateways: Vec<(GatewayConfig, SolverGateway)> = Vec::new();
    for c in configs {
        if !gateways.iter().any(|(g, _)| *g == c.solver) {
            gateways.push((c.solver.clone(), SolverGateway::new(c.solver.clone())));
        }
    }
    let run_one = |config: &TrialConfig| {
        let gateway = &gateways.iter().find(|(g, _)| *g == config.solver).expect("gateway built").1;
        catch_unwind(AssertUnwindSafe(|| run_trial_with(config, gateway))).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "trial panicked".to_string());
            failed_record(config, FailureKind::Crash, message)
        })
    };
    match rayon::ThreadPoolBuilder::new().num_threads(parallelism.max(1)).build() {
        Ok(pool) => pool.install(|| configs.par_iter().map(run_one).collect()),
        Err(_) => configs.iter().map(run_one).collect(),
    }
}

/// Preset names; `coin-bench` and `alf-bench` are aliases of the first two.
pub const PRESETS: [&str; 4] = ["paper-cc", "paper-alf", "coin-bench", "alf-bench"];

/// Seeds used when a preset is not given explicit ones.
pub const DEFAULT_CC_SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
pub const CC_REPETITIONS: usize = 4;
pub const ALF_INSTANCES: u64 = 20;

/// Environment specs of a named preset. `paper-cc`: every size times every
/// seed, repeated four times. `paper-alf`: twenty instances per category.
pub fn preset_envs(name: &str, seeds: Option<&[u64]>) -> Result<Vec<(EnvSpec, u64)>, String> {
    match name {
        "paper-cc" | "coin-bench" => {
            let seeds = seeds.unwrap_or(&DEFAULT_CC_SEEDS);
            let mut out = Vec::new();
            for &rooms in &VALID_SIZES {
                for &seed in seeds {
                    for rep in 0..CC_REPETITIONS {
                        let trial_seed = seed * 1000 + rooms as u64 * 10 + rep as u64;
                        out.push((EnvSpec::Coin { rooms, seed }, trial_seed));
                    }
                }
            }
            Ok(out)
        }
        "paper-alf" | "alf-bench" => {
            let default: Vec<u64> = (0..ALF_INSTANCES).collect();
            let seeds = seeds.unwrap_or(&default);
            let mut out = Vec::new();
            for category in AlfCategory::ALL {
                for &seed in seeds {
                    out.push((EnvSpec::Alf { category, seed }, seed));
                }
            }
            Ok(out)
        }
        _ => Err(format!("unknown preset '{name}' (known: {})", PRESETS.join(", "))),
    }
}

/// Expands a preset into configs that all share `template`'s other settings.
pub fn preset_configs(name: &str, seeds: Option<&[u64]>, template: &TrialConfig) -> Result<Vec<TrialConfig>, String> {
    Ok(preset_envs(name, seeds)?
        .into_iter()
        .map(|(env, trial_seed)| TrialConfig {
            env,
            trial_seed,
            ..template.clone()
        })
        .collect())
}
