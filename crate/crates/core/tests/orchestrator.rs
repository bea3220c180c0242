mod common;

use common::pddl;
use pddlego::envs::{walkthrough_world, Belief, AlfCategory, CoinCollector, Env, EnvKind};
use pddlego::formalizer::{
    FaultFormalizer, FaultKind, Formalizer, FormalizerError, FormalizerOutput, OracleFormalizer, PromptContext,
    ReplayEntry, ReplayFormalizer, Variant,
};
use pddlego::gateway::SolverGateway;
use pddlego::planner::{PlanStep, SearchLimits};
use pddlego::orchestrator::{
    coin_df_library, draw_df, run_pddlego, run_pddlego_plus, run_pddlego_plus_unrefined, run_plangen,
    run_with_fixed_df, translate_step, ErrorKind, FailureKind, LogError, LoopLimits, Method, Resolution, TrialRecord,
    STALL_REPEATS,
};

fn gateway() -> SolverGateway {
    SolverGateway::local(SearchLimits::default())
}

fn walkthrough_env() -> Env {
    Env::Coin(CoinCollector::new(walkthrough_world()))
}

fn step(text: &str) -> PlanStep {
    PlanStep::parse(text).unwrap()
}

const DF: &str = "walk_df1";

/// A kitchen problem whose plan is `open door to <dir>`, `move <dir>`.
fn kitchen_pf(dir: &str) -> String {
    format!(
        "(define (problem p) (:domain explore)
  (:objects kitchen target - location {dir} - direction)
  (:init (at kitchen) (door-closed kitchen target {dir}))
  (:goal (at target)))"
    )
}

const MALFORMED_PF: &str = "(define (problem p) (:domain explore) (:init (at kitchen)";

fn good() -> ReplayEntry {
    ReplayEntry::pddl(pddl(DF), kitchen_pf("south"))
}

fn broken() -> ReplayEntry {
    ReplayEntry::pddl(pddl(DF), MALFORMED_PF)
}

fn wrong_door() -> ReplayEntry {
    ReplayEntry::pddl(pddl(DF), kitchen_pf("north"))
}

fn run_script(script: Vec<ReplayEntry>, limits: LoopLimits) -> (TrialRecord, ReplayFormalizer) {
    let mut env = walkthrough_env();
    let mut replay = ReplayFormalizer::new(script);
    let record = run_pddlego_plus(&mut env, &mut replay, &gateway(), limits, Variant::Detailed);
    (record, replay)
}

fn events(record: &TrialRecord) -> Vec<(usize, ErrorKind, Resolution)> {
    record.errors.iter().map(|e| (e.step, e.kind, e.resolution)).collect()
}

#[test]
fn translation_examples() {
    assert_eq!(translate_step(&step("(move kitchen corridor east)"), EnvKind::Coin).unwrap(), "move east");
    assert_eq!(
        translate_step(&step("(open-door kitchen unknown-kitchen-south south)"), EnvKind::Coin).unwrap(),
        "open door to south"
    );
    assert_eq!(
        translate_step(&step("(PickupObject cloth1 cabinet4)"), EnvKind::Alf).unwrap(),
        "take cloth 1 from cabinet 4"
    );
    assert_eq!(
        translate_step(&step("(gotolocation init_receptacle cabinet1)"), EnvKind::Alf).unwrap(),
        "go to cabinet 1"
    );
    assert_eq!(
        translate_step(&step("(putobject cloth1 bathtubbasin1)"), EnvKind::Alf).unwrap(),
        "move cloth 1 to bathtubbasin 1"
    );
    assert_eq!(
        translate_step(&step("(sliceobject countertop1 apple1 knife1)"), EnvKind::Alf).unwrap(),
        "slice apple 1 with knife 1"
    );
    let err = translate_step(&step("(teleport kitchen street)"), EnvKind::Coin).unwrap_err();
    assert!(err.to_string().starts_with("Untranslatable action (teleport kitchen street)"));
}

#[test]
fn oracle_solves_small_coin_world_cleanly() {
    let mut env = Env::coin(3, 0);
    let record = run_pddlego_plus(
        &mut env,
        &mut OracleFormalizer::new(),
        &gateway(),
        LoopLimits::default(),
        Variant::Detailed,
    );
    assert!(record.success, "{:?}", record.failure);
    assert!(record.errors.is_empty());
    assert!(record.steps_taken <= 3);
    assert!(record.failure.is_none());
}

#[test]
fn walkthrough_replays() {
    let df1 = pddl("walk_df1");
    let df2 = pddl("walk_df2_2");
    let script = vec![
        ReplayEntry::pddl(df1.clone(), pddl("walk_pf1")),
        ReplayEntry::pddl(df1, pddl("walk_pf2")),
        ReplayEntry::pddl(df2.clone(), pddl("walk_pf2_2")),
        ReplayEntry::pddl(df2.clone(), pddl("walk_pf3")),
        ReplayEntry::pddl(df2, pddl("walk_pf4")),
    ];
    let (record, replay) = run_script(script, LoopLimits::default());
    assert!(record.success, "{:?}", record.failure);
    assert_eq!(record.steps_taken, 4);
    assert_eq!(replay.remaining(), 0);
    assert_eq!(record.errors.len(), 1);
    let e = &record.errors[0];
    assert_eq!((e.step, e.kind, e.resolution), (2, ErrorKind::Simulation, Resolution::Fixed));
    assert_eq!(e.message, "No door to open.");

    let commands = |i: usize| -> Vec<String> {
        record.steps[i].exchanges.iter().map(|x| x.command.clone()).collect()
    };
    assert_eq!(commands(0), ["open door to south", "move south"]);
    assert_eq!(commands(1), ["move south"]);
    assert_eq!(commands(2), ["move north", "move east"]);
    assert_eq!(commands(3), ["open door to north", "move north"]);
    let step2 = &record.steps[1];
    assert_eq!(step2.attempts.len(), 2);
    assert_eq!(step2.attempts[0].exchanges[0].command, "open door to south");
    assert_eq!(step2.attempts[0].rollback_ok, Some(true));
    assert_eq!(step2.attempts[1].j, 1);
    assert_eq!(step2.goal.as_deref(), Some("(at driveway)"));
    assert_eq!(record.commands_used, 7);
}

#[test]
fn six_malformed_problems_abort_the_solver_loop() {
    let (record, replay) = run_script(vec![broken(); 6], LoopLimits::default());
    assert!(!record.success);
    assert_eq!(record.failure.as_ref().unwrap().kind, FailureKind::AbortSolver);
    assert_eq!(replay.calls(), 6);
    assert_eq!(events(&record), [(1, ErrorKind::Solver, Resolution::Aborted)]);
    assert_eq!(record.steps[0].attempts.len(), 6);
    assert_eq!(record.commands_used, 0);
}

#[test]
fn five_malformed_then_valid_is_fixed() {
    let mut script = vec![broken(); 5];
    script.push(good());
    script.push(ReplayEntry::FormatError {
        format_error: "stop".into(),
    });
    let (record, _) = run_script(script, LoopLimits::new(5, 5));
    assert_eq!(record.steps_taken, 1);
    assert_eq!(record.errors[0].kind, ErrorKind::Solver);
    assert_eq!(record.errors[0].resolution, Resolution::Fixed);
}

#[test]
fn error_routing_matrix() {
    let limits = LoopLimits::new(2, 2);
    let stop = || ReplayEntry::FormatError {
        format_error: "stop".into(),
    };

    // A bad door gets rolled back and fixed on the next outer iteration.
    let (r, _) = run_script(vec![wrong_door(), good(), stop(), stop(), stop()], limits);
    assert_eq!(events(&r)[0], (1, ErrorKind::Simulation, Resolution::Fixed));
    assert_eq!(r.errors[0].message, "No door to open.");
    assert_eq!(r.steps[0].attempts[0].rollback_ok, Some(true));

    // Both loops in one step: each kind is logged once and both get fixed.
    let (r, _) = run_script(vec![wrong_door(), broken(), broken(), good(), stop(), stop(), stop()], limits);
    assert_eq!(
        events(&r)[..2],
        [
            (1, ErrorKind::Solver, Resolution::Fixed),
            (1, ErrorKind::Simulation, Resolution::Fixed)
        ]
    );

    // Outer retries run out.
    let (r, replay) = run_script(vec![wrong_door(); 3], limits);
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::AbortSimulation);
    assert_eq!(events(&r), [(1, ErrorKind::Simulation, Resolution::Aborted)]);
    assert_eq!(replay.calls(), 3);
    assert_eq!(r.commands_used, 0);

    // Inner retries run out while a simulation error is open.
    let (r, _) = run_script(vec![wrong_door(), broken(), broken(), broken()], limits);
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::AbortSolver);
    assert_eq!(
        events(&r),
        [
            (1, ErrorKind::Solver, Resolution::Aborted),
            (1, ErrorKind::Simulation, Resolution::Superseded)
        ]
    );

    // A format error counts as a solver error.
    let (r, _) = run_script(
        vec![ReplayEntry::Raw("no json".into()), good(), stop(), stop(), stop()],
        limits,
    );
    assert_eq!(events(&r)[0], (1, ErrorKind::Solver, Resolution::Fixed));

    // Running out of script ends the trial and leaves open errors superseded.
    let (r, _) = run_script(vec![wrong_door()], limits);
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::ScriptExhausted);
    assert_eq!(events(&r), [(1, ErrorKind::Simulation, Resolution::Superseded)]);
}

#[test]
fn untranslatable_plan_step_is_a_simulation_error() {
    let odd_df = pddl(DF).replace("(:action move", "(:action teleport");
    let script = vec![ReplayEntry::pddl(odd_df, kitchen_pf("south")), good()];
    let (r, _) = run_script(script, LoopLimits::new(1, 1));
    let e = &r.errors[0];
    assert_eq!((e.kind, e.resolution), (ErrorKind::Simulation, Resolution::Fixed));
    assert!(e.message.starts_with("Untranslatable action (teleport"), "{}", e.message);
    let failed = &r.steps[0].attempts[0];
    assert_eq!(failed.exchanges.last().unwrap().command, "(teleport kitchen target south)");
}

/// Answers with whatever the transport layer would report.
struct Unreachable;

impl Formalizer for Unreachable {
    fn formalize(&mut self, _: &PromptContext, _: &Belief) -> Result<FormalizerOutput, FormalizerError> {
        Err(FormalizerError::Transport("connection refused".into()))
    }
}

#[test]
fn transport_failure_ends_the_trial() {
    let mut env = walkthrough_env();
    let r = run_pddlego_plus(&mut env, &mut Unreachable, &gateway(), LoopLimits::default(), Variant::Detailed);
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::Transport);
    assert!(r.errors.is_empty());
}

#[test]
fn empty_plans_stall_the_trial() {
    let at_goal = "(define (problem p) (:domain explore)
  (:objects kitchen - location)
  (:init (at kitchen))
  (:goal (at kitchen)))";
    let script = vec![ReplayEntry::pddl(pddl(DF), at_goal); 10];
    let (r, replay) = run_script(script, LoopLimits::default());
    assert!(r.stalled);
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::Stalled);
    assert_eq!(r.steps_taken, STALL_REPEATS);
    assert_eq!(replay.calls(), STALL_REPEATS);
    assert!(r.steps.iter().all(|s| s.committed && s.exchanges.is_empty()));
}

#[test]
fn step_limit_is_enforced() {
    let limits = LoopLimits {
        max_time_steps: Some(1),
        ..LoopLimits::default()
    };
    let mut env = Env::coin(7, 1);
    let r = run_pddlego_plus(&mut env, &mut OracleFormalizer::new(), &gateway(), limits, Variant::Detailed);
    assert!(!r.success);
    assert_eq!(r.steps_taken, 1);
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::StepLimit);
}

#[test]
fn plangen_runs_and_refines() {
    let mut env = Env::coin(5, 2);
    let r = run_plangen(&mut env, &mut OracleFormalizer::new(), LoopLimits::default());
    assert!(r.success, "{:?}", r.failure);
    assert_eq!(r.method, Method::Plangen);
    assert!(r.steps.iter().all(|s| s.exchanges.len() == 1));
    assert_eq!(r.commands_used, r.steps_taken);

    let script = vec![
        ReplayEntry::action("move north"),
        ReplayEntry::pddl("x", "y"),
        ReplayEntry::action("open door to south"),
    ];
    let mut env = walkthrough_env();
    let mut replay = ReplayFormalizer::new(script);
    let r = run_plangen(&mut env, &mut replay, LoopLimits::default());
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::ScriptExhausted);
    assert_eq!(events(&r)[0], (1, ErrorKind::Simulation, Resolution::Fixed));
    assert_eq!(r.steps[0].attempts.len(), 3);
    assert_eq!(r.steps[0].plan, ["open door to south"]);
    assert_eq!(r.commands_used, 1);
    assert!(replay.prompts[1].contains("You can't move there, there is nothing to the north."));

    let mut env = walkthrough_env();
    let mut replay = ReplayFormalizer::new(vec![ReplayEntry::action("dance"); 2]);
    let r = run_plangen(&mut env, &mut replay, LoopLimits::new(1, 1));
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::AbortSimulation);
    assert_eq!(events(&r), [(1, ErrorKind::Simulation, Resolution::Aborted)]);
}

#[test]
fn fixed_domain_draw_is_seeded() {
    let library = coin_df_library();
    assert_eq!(library.len(), 10);
    for seed in 0..50 {
        assert_eq!(draw_df(library.len(), seed), draw_df(library.len(), seed));
        assert!(draw_df(library.len(), seed) < library.len());
    }
    let drawn: std::collections::BTreeSet<usize> = (0..200).map(|s| draw_df(10, s)).collect();
    assert_eq!(drawn.len(), 10);

    let run = |seed| {
        let mut env = Env::coin(5, 3);
        run_with_fixed_df(
            &mut env,
            &mut OracleFormalizer::new(),
            &gateway(),
            &library,
            LoopLimits::default(),
            Variant::Detailed,
            seed,
        )
        .without_timing()
    };
    let a = run(11);
    assert_eq!(a, run(11));
    assert_eq!(a.df_index, Some(draw_df(10, 11)));
    assert_eq!(a.method, Method::PddlegoPlusFixedDf);
    for s in &a.steps {
        for attempt in &s.attempts {
            assert_eq!(attempt.df.as_deref(), Some(library[draw_df(10, 11)].as_str()));
        }
    }
}

#[test]
fn fixed_domain_without_passages_hits_missing_door() {
    let library = vec![coin_df_library()[6].clone()];
    let mut env = walkthrough_env();
    let r = run_with_fixed_df(
        &mut env,
        &mut OracleFormalizer::new(),
        &gateway(),
        &library,
        LoopLimits::default(),
        Variant::Detailed,
        0,
    );
    assert!(!r.success);
    assert_eq!(r.failure.as_ref().unwrap().kind, FailureKind::AbortSimulation);
    let last = r.errors.last().unwrap();
    assert_eq!(last.message, "No door to open.");
    assert_eq!(last.resolution, Resolution::Aborted);

    let mut env = walkthrough_env();
    let r = run_with_fixed_df(
        &mut env,
        &mut OracleFormalizer::new(),
        &gateway(),
        &[],
        LoopLimits::default(),
        Variant::Detailed,
        0,
    );
    assert_eq!(r.failure.unwrap().kind, FailureKind::Config);
}

fn check_invariants(r: &TrialRecord, limits: LoopLimits) {
    let committed: usize = r.steps.iter().filter(|s| s.committed).map(|s| s.exchanges.len()).sum();
    assert_eq!(r.commands_used, committed, "failed attempts must not use budget");
    assert_eq!(r.steps_taken, r.steps.iter().filter(|s| s.committed).count());
    let per_step: Vec<_> = r.steps.iter().flat_map(|s| s.errors.clone()).collect();
    assert_eq!(per_step, r.errors);
    for s in &r.steps {
        assert!(s.errors.iter().filter(|e| e.kind == ErrorKind::Solver).count() <= 1);
        assert!(s.errors.iter().filter(|e| e.kind == ErrorKind::Simulation).count() <= 1);
        for a in &s.attempts {
            assert!(a.j <= limits.max_outer && a.k <= limits.max_inner);
            if a.simulation_error.is_some() {
                assert_eq!(a.rollback_ok, Some(true));
            }
        }
        assert!(s.attempts.len() <= (limits.max_outer + 1) * (limits.max_inner + 1));
    }
    assert_eq!(r.success, r.failure.is_none());
}

#[test]
fn loop_invariants_hold_under_injected_faults() {
    let limits = LoopLimits::new(3, 3);
    for seed in 0..12 {
        let faults = vec![(FaultKind::Syntax, 0.3), (FaultKind::Action, 0.2), (FaultKind::Format, 0.1)];
        let mut env = if seed % 2 == 0 {
            Env::coin(5, seed)
        } else {
            Env::alf(AlfCategory::ALL[seed as usize % AlfCategory::ALL.len()], seed)
        };
        let mut f = FaultFormalizer::new(Box::new(OracleFormalizer::new()), faults, seed);
        let r = run_pddlego_plus(&mut env, &mut f, &gateway(), limits, Variant::Detailed);
        check_invariants(&r, limits);
    }
}

/// Records the memory handed to the formalizer at every call.
struct Spy {
    inner: OracleFormalizer,
    memories: Vec<Vec<String>>,
}

impl Formalizer for Spy {
    fn formalize(&mut self, ctx: &PromptContext, belief: &Belief) -> Result<FormalizerOutput, FormalizerError> {
        self.memories.push(ctx.memory.iter().map(|e| e.command.clone()).collect());
        self.inner.formalize(ctx, belief)
    }
}

#[test]
fn memory_only_grows() {
    let mut env = Env::coin(9, 4);
    let mut spy = Spy {
        inner: OracleFormalizer::new(),
        memories: Vec::new(),
    };
    let r = run_pddlego_plus(&mut env, &mut spy, &gateway(), LoopLimits::default(), Variant::Detailed);
    assert!(r.success);
    assert_eq!(spy.memories[0], ["look around"]);
    for pair in spy.memories.windows(2) {
        assert!(pair[1].starts_with(&pair[0]));
    }
}

#[test]
fn baseline_is_the_loop_without_refinement() {
    for seed in 0..10 {
        let faults = vec![(FaultKind::Syntax, 0.2), (FaultKind::Action, 0.2)];
        let run = |unrefined: bool| {
            let mut env = Env::coin(5, seed);
            let mut f = FaultFormalizer::new(Box::new(OracleFormalizer::new()), faults.clone(), seed);
            let mut r = if unrefined {
                run_pddlego_plus_unrefined(&mut env, &mut f, &gateway(), LoopLimits::default(), Variant::Simple)
            } else {
                run_pddlego(&mut env, &mut f, &gateway(), Variant::Simple)
            };
            r.method = Method::Pddlego;
            r.without_timing()
        };
        let base = run(false);
        assert_eq!(base, run(true), "seed {seed}");
        assert!(base.errors.iter().all(|e| e.resolution != Resolution::Fixed));
    }
}

#[test]
fn records_round_trip_through_json_lines() {
    let df1 = pddl("walk_df1");
    let script = vec![
        ReplayEntry::pddl(df1.clone(), pddl("walk_pf1")),
        ReplayEntry::pddl(df1, pddl("walk_pf2")),
    ];
    let (record, _) = run_script(script, LoopLimits::default());
    let text = record.to_jsonl();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), record.steps.len() + 1);
    assert!(lines.last().unwrap().contains("\"type\":\"summary\""));
    assert_eq!(TrialRecord::from_jsonl(&text).unwrap(), record);

    let cut = &text[..text.len() - lines.last().unwrap().len() - 1];
    assert!(matches!(TrialRecord::from_jsonl(cut), Err(LogError::Truncated { .. })));
    let bumped = text.replace("\"schema_version\":1", "\"schema_version\":99");
    assert!(matches!(
        TrialRecord::from_jsonl(&bumped),
        Err(LogError::SchemaVersion { found: Some(99), .. })
    ));
    let garbled = text.replacen("{", "[", 1);
    assert!(matches!(TrialRecord::from_jsonl(&garbled), Err(LogError::Malformed { line: 1, .. })));
}

#[test]
fn limits_and_methods_parse() {
    assert!(LoopLimits::new(0, 5).validate().is_err());
    assert!(LoopLimits::default().validate().is_ok());
    for m in Method::ALL {
        assert_eq!(m.label().parse::<Method>().unwrap(), m);
    }
    assert!("plan-everything".parse::<Method>().is_err());
}
