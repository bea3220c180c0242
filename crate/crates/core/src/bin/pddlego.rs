use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use pddlego::envs::{AlfCategory, EnvKind, VALID_SIZES};
use pddlego::formalizer::{LlmConfig, Variant};
use pddlego::gateway::{GatewayConfig, RemotePlannerConfig, SolverMode};
use pddlego::harness::{
    aggregate, emit_report, preset_configs, replay_log, run_batch, EnvSpec, FormalizerSpec, ReportFormat, TrialConfig,
};
use pddlego::orchestrator::{LoopLimits, Method, TrialRecord};

/// Overrides the chat endpoint from the environment.
const LLM_URL_ENV: &str = "PDDLEGO_LLM_URL";

#[derive(Parser)]
#[command(name = "pddlego", version, about = "Run and score PDDL-formalizing agents on text environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of trials and write one JSON-lines log per trial.
    Run(RunArgs),
    /// Aggregate the logs in a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "table")]
        format: String,
    },
    /// Print the transcript of one trial log.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

/// Flags of `run`. Every field can also come from `--config`; flags win.
#[derive(clap::Args, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunArgs {
    /// JSON file with any of these options.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// coin or alf
    #[arg(long)]
    env: Option<String>,
    /// plangen, pddlego, pddlego+ or fixed-df
    #[arg(long)]
    method: Option<String>,
    /// simple or detailed
    #[arg(long)]
    variant: Option<String>,
    /// llm, oracle, replay:<file> or fault:<kind@rate,...>
    #[arg(long)]
    formalizer: Option<String>,
    /// local or remote
    #[arg(long)]
    solver: Option<String>,
    /// paper-cc (alias coin-bench) or paper-alf (alias alf-bench)
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// CoinCollector size when no preset is given.
    #[arg(long)]
    rooms: Option<usize>,
    /// ALF-lite category when no preset is given.
    #[arg(long)]
    category: Option<String>,
    /// Directory for the per-trial logs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Refinements allowed after solver errors.
    #[arg(long)]
    max_inner: Option<usize>,
    /// Refinements allowed after simulation errors.
    #[arg(long)]
    max_outer: Option<usize>,
    /// Defaults to the environment's command budget.
    #[arg(long)]
    max_time_steps: Option<usize>,
    /// Chat model name for --formalizer llm.
    #[arg(long)]
    model: Option<String>,
    /// Chat-completions base URL; PDDLEGO_LLM_URL overrides it.
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    reasoning_effort: Option<String>,
    /// Remote planner endpoint for --solver remote.
    #[arg(long)]
    planner_url: Option<String>,
}

macro_rules! merge {
    ($cli:ident, $file:ident, $($field:ident),*) => {
        $( if $cli.$field.is_none() { $cli.$field = $file.$field.take(); } )*
    };
}

impl RunArgs {
    fn merged(mut self) -> Result<RunArgs, String> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut file: RunArgs = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        merge!(
            self, file, env, method, variant, formalizer, solver, preset, seeds, rooms, category, out, parallelism,
            max_inner, max_outer, max_time_steps, model, base_url, temperature, reasoning_effort, planner_url
        );
        Ok(self)
    }

    fn configs(&self) -> Result<Vec<TrialConfig>, String> {
        let env_kind = match self.env.as_deref().unwrap_or("coin") {
            "coin" => EnvKind::Coin,
            "alf" => EnvKind::Alf,
            other => return Err(format!("unknown env '{other}'")),
        };
        let method: Method = self.method.as_deref().unwrap_or("pddlego+").parse()?;
        let variant = match self.variant.as_deref().unwrap_or("detailed") {
            "simple" => Variant::Simple,
            "detailed" => Variant::Detailed,
            other => return Err(format!("unknown variant '{other}'")),
        };
        let mut llm = LlmConfig::default();
        if let Some(m) = &self.model {
            llm.model = m.clone();
        }
        if let Some(u) = &self.base_url {
            llm.base_url = u.clone();
        }
        if let Ok(u) = std::env::var(LLM_URL_ENV) {
            if !u.trim().is_empty() {
                llm.base_url = u.trim().to_string();
            }
        }
        if let Some(t) = self.temperature {
            llm.temperature = t;
        }
        llm.reasoning_effort = self.reasoning_effort.clone();
        let formalizer = FormalizerSpec::parse_cli(self.formalizer.as_deref().unwrap_or("oracle"), &llm)?;
        let mut solver = GatewayConfig::default();
        match self.solver.as_deref().unwrap_or("local") {
            "local" => {}
            "remote" => {
                solver.mode = SolverMode::Remote;
                solver.remote = RemotePlannerConfig {
                    endpoint: self.planner_url.clone().unwrap_or_default(),
                    ..Default::default()
                }
                .with_env_override();
                if solver.remote.endpoint.is_empty() {
                    return Err("--solver remote needs --planner-url or PDDLEGO_PLANNER_URL".into());
                }
            }
            other => return Err(format!("unknown solver '{other}'")),
        }
        let defaults = LoopLimits::default();
        let limits = LoopLimits {
            max_inner: self.max_inner.unwrap_or(defaults.max_inner),
            max_outer: self.max_outer.unwrap_or(defaults.max_outer),
            max_time_steps: self.max_time_steps,
        };
        limits.validate()?;
        let template = TrialConfig {
            env: EnvSpec::Coin { rooms: 3, seed: 0 },
            method,
            variant,
            formalizer,
            solver,
            limits,
            trial_seed: 0,
        };
        let seeds = self.seeds.as_deref();
        if let Some(preset) = &self.preset {
            let configs = preset_configs(preset, seeds, &template)?;
            if configs.first().map(|c| c.env.kind()) != Some(env_kind) && self.env.is_some() {
                return Err(format!("preset '{preset}' does not match --env"));
            }
            return Ok(configs);
        }
        let seeds = seeds.unwrap_or(&[0]);
        let envs: Vec<EnvSpec> = match env_kind {
            EnvKind::Coin => {
                let rooms = self.rooms.unwrap_or(3);
                if !VALID_SIZES.contains(&rooms) {
                    return Err(format!("--rooms must be one of {VALID_SIZES:?}"));
                }
                seeds.iter().map(|&seed| EnvSpec::Coin { rooms, seed }).collect()
            }
            EnvKind::Alf => {
                let categories = match &self.category {
                    Some(c) => vec![c.parse::<AlfCategory>()?],
                    None => AlfCategory::ALL.to_vec(),
                };
                categories
                    .iter()
                    .flat_map(|&category| seeds.iter().map(move |&seed| EnvSpec::Alf { category, seed }))
                    .collect()
            }
        };
        Ok(envs
            .into_iter()
            .map(|env| {
                let trial_seed = match env {
                    EnvSpec::Coin { seed, .. } | EnvSpec::Alf { seed, .. } => seed,
                };
                TrialConfig {
                    env,
                    trial_seed,
                    ..template.clone()
                }
            })
            .collect())
    }
}

fn read_logs(dir: &Path) -> Result<Vec<TrialRecord>, String> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!("no .jsonl logs in {}", dir.display()));
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            TrialRecord::from_jsonl(&text).map_err(|e| format!("{}: {e}", p.display()))
        })
        .collect()
}

fn run(args: RunArgs) -> Result<(), String> {
    let args = args.merged()?;
    let configs = args.configs()?;
    let parallelism = args
        .parallelism
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let records = run_batch(&configs, parallelism);
    if let Some(out) = &args.out {
        std::fs::create_dir_all(out).map_err(|e| format!("{}: {e}", out.display()))?;
        for (n, r) in records.iter().enumerate() {
            let path = out.join(format!("trial-{n:04}.jsonl"));
            std::fs::write(&path, r.to_jsonl()).map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    print!("{}", emit_report(&aggregate(&records), ReportFormat::Table));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Report { input, format } => format
            .parse::<ReportFormat>()
            .and_then(|f| read_logs(&input).map(|rs| print!("{}", emit_report(&aggregate(&rs), f)))),
        Command::Replay { log } => std::fs::read_to_string(&log)
            .map_err(|e| format!("{}: {e}", log.display()))
            .and_then(|text| replay_log(&text).map_err(|e| e.to_string()))
            .map(|(_, t)| print!("{t}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
