use std::collections::BTreeSet;

use pddlego::envs::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use regex::Regex;

fn coin_env(world: CoinWorld) -> Env {
    Env::Coin(CoinCollector::new(world))
}

#[test]
fn coin_generation_is_deterministic() {
    assert_eq!(generate_coincollector(3, 0), generate_coincollector(3, 0));
    let w = generate_coincollector(7, 3);
    assert_eq!(CoinWorld::from_json(&w.to_json()).unwrap(), w);
}

#[test]
fn world_json_rejects_other_versions() {
    let mut w = generate_coincollector(3, 1);
    w.version = 2;
    let err = CoinWorld::from_json(&w.to_json()).unwrap_err();
    assert!(err.contains("version 2"), "{err}");
}

#[test]
fn generated_worlds_are_well_formed() {
    for &n in &VALID_SIZES {
        let mut layouts = BTreeSet::new();
        for seed in 0..5 {
            let w = generate_coincollector(n, seed);
            assert_eq!(w.rooms.len(), n);
            assert_ne!(w.coin_room, w.start_room);
            assert!(w.is_connected(), "({n},{seed}) disconnected");
            let mut seen = BTreeSet::new();
            for l in &w.links {
                assert_ne!(l.a, l.b);
                assert!(seen.insert((l.a, l.dir)), "two exits from one side");
                assert!(seen.insert((l.b, l.dir.opposite())), "two exits from one side");
            }
            let names: BTreeSet<_> = w.rooms.iter().collect();
            assert_eq!(names.len(), n);
            if n >= 5 {
                let path = w.path(w.start_room, w.coin_room).unwrap();
                assert!(path
                    .iter()
                    .any(|&l| w.links[l].door.as_ref().is_some_and(|d| !d.open)));
            }
            layouts.insert(serde_json::to_string(&(&w.rooms, &w.links, w.coin_room)).unwrap());
        }
        if n == 11 {
            assert_eq!(layouts.len(), 5);
        }
    }
}

#[test]
fn coin_action_surface_matches_grammar() {
    let grammar =
        Regex::new(r"^(look around|(open|close) door to (north|south|east|west)|move (north|south|east|west))$")
            .unwrap();
    for &n in &VALID_SIZES {
        for seed in 0..5 {
            let mut env = Env::coin(n, seed);
            env.reset();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let actions = env.valid_actions();
                for a in &actions {
                    assert!(grammar.is_match(a), "{a}");
                }
                let mut sorted = actions.clone();
                sorted.sort();
                assert_eq!(sorted, actions);
                let Some(a) = actions.choose(&mut rng) else { break };
                if env.step(a).done {
                    break;
                }
            }
        }
    }
}

#[test]
fn walkthrough_world_trajectory() {
    let mut env = coin_env(walkthrough_world());
    let first = env.reset();
    assert_eq!(
        first.observation,
        "You are in the kitchen. To the South you see a closed patio door. To the West you see a closed plain door. "
    );
    let actions = env.valid_actions();
    assert!(actions.contains(&"open door to south".to_string()));
    assert!(actions.contains(&"move west".to_string()));

    let blocked = env.step("move south");
    assert_eq!(blocked.error.as_deref(), Some("You can't move there as the door is closed."));

    let open = env.step("open door to south");
    assert!(open.error.is_none());
    assert!(open.observation.starts_with("You open the patio door, revealing the backyard"));
    let moved = env.step("move south");
    assert_eq!(
        moved.observation,
        "You are in the backyard. Through an open patio door, to the North you see the kitchen. To the South you see the driveway. To the East you see the street. To the West you see a closed patio door. "
    );
    assert_eq!(env.step("open door to south").error.as_deref(), Some("No door to open."));
    assert_eq!(
        env.step("move south").observation,
        "You are in the driveway. To the North you see the backyard. "
    );
    env.step("move north");
    assert_eq!(
        env.step("move east").observation,
        "You are in the street. To the North you see a closed sliding door. To the West you see the backyard. "
    );
    env.step("open door to north");
    let end = env.step("move north");
    assert!(end.success && end.done);
    assert!(end.observation.contains("coin"));
}

#[test]
fn look_around_leaves_state_unchanged_except_counter() {
    let mut env = coin_env(walkthrough_world());
    env.reset();
    let before = env.belief();
    let r = env.step("look around");
    assert!(r.observation.starts_with("You are in the kitchen."));
    assert_eq!(env.belief(), before);
}

#[test]
fn budget_ends_the_episode() {
    let mut env = coin_env(walkthrough_world());
    env.reset();
    for i in 1..=COIN_BUDGET {
        let r = env.step("look around");
        assert_eq!(r.done, i == COIN_BUDGET);
        assert!(!r.success);
    }
    assert_eq!(env.step("move west").error.as_deref(), Some("The game is over."));
}

#[test]
fn coin_success_iff_observation_mentions_coin() {
    for &n in &VALID_SIZES {
        for seed in 0..5 {
            let mut env = Env::coin(n, seed);
            env.reset();
            let mut rng = ChaCha8Rng::seed_from_u64(seed + 100);
            loop {
                let actions = env.valid_actions();
                let r = env.step(actions.choose(&mut rng).unwrap());
                assert_eq!(r.success, r.observation.contains("coin"));
                assert!(!(r.success && r.error.is_some()));
                if r.done {
                    break;
                }
            }
        }
    }
}

fn random_command(rng: &mut ChaCha8Rng, env: &Env) -> String {
    match env {
        Env::Coin(_) => {
            let mut acts = env.valid_actions();
            acts.push("look around".into());
            acts.push("dance".into());
            acts.push("move up".into());
            acts.choose(rng).unwrap().clone()
        }
        Env::Alf(w) => {
            let r = &w.receptacles[rng.random_range(0..w.receptacles.len())].name;
            let o = &w.items[rng.random_range(0..w.items.len())].name;
            let forms = [
                format!("go to {r}"),
                format!("open {r}"),
                format!("close {r}"),
                format!("take {o} from {r}"),
                format!("move {o} to {r}"),
                format!("use {o}"),
                format!("heat {o} with {r}"),
                format!("slice {o} with knife 1"),
                "look around".to_string(),
            ];
            forms.choose(rng).unwrap().clone()
        }
    }
}

fn all_envs() -> Vec<Env> {
    let mut out = Vec::new();
    for &n in &VALID_SIZES {
        for seed in 0..3 {
            out.push(Env::coin(n, seed));
        }
    }
    for c in AlfCategory::ALL {
        for seed in 0..3 {
            out.push(Env::alf(c, seed));
        }
    }
    out
}

#[test]
fn snapshot_restore_replays_byte_identically() {
    for (k, mut env) in all_envs().into_iter().enumerate() {
        env.reset();
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        for _ in 0..5 {
            let c = random_command(&mut rng, &env);
            env.step(&c);
        }
        let snap = env.snapshot();
        let mut copy = env.clone();
        let cmds: Vec<String> = (0..15).map(|_| random_command(&mut rng, &env)).collect();
        let direct: Vec<StepResult> = cmds.iter().map(|c| env.step(c)).collect();
        copy.step("look around");
        copy.restore(&snap);
        let replayed: Vec<StepResult> = cmds.iter().map(|c| copy.step(c)).collect();
        assert_eq!(direct, replayed);
    }
}

#[test]
fn coin_observations_only_name_observed_rooms() {
    for &n in &VALID_SIZES {
        for seed in 0..5 {
            let world = generate_coincollector(n, seed);
            let mut env = CoinCollector::new(world.clone());
            let mut allowed: BTreeSet<usize> = BTreeSet::from([world.start_room]);
            let mut doors = world.links.clone();
            let mut here = world.start_room;
            let mut rng = ChaCha8Rng::seed_from_u64(seed * 31 + n as u64);
            let mut obs = env.reset().observation;
            for _ in 0..COIN_BUDGET {
                for (d, _, other) in world.neighbors(here) {
                    let (l, _) = world.exit(here, d).unwrap();
                    if doors[l].door.as_ref().is_none_or(|door| door.open) {
                        allowed.insert(other);
                    }
                }
                for (i, name) in world.rooms.iter().enumerate() {
                    if !allowed.contains(&i) {
                        assert!(!obs.contains(name.as_str()), "{name} leaked in {obs:?}");
                    }
                }
                let acts = env.valid_actions();
                let cmd = acts.choose(&mut rng).unwrap().clone();
                let r = env.step(&cmd);
                obs = r.observation;
                if r.error.is_none() {
                    let dir = Dir::parse(cmd.rsplit(' ').next().unwrap()).unwrap();
                    let (l, other) = world.exit(here, dir).unwrap();
                    if cmd.starts_with("open") {
                        doors[l].door.as_mut().unwrap().open = true;
                        allowed.insert(other);
                    } else if cmd.starts_with("close") {
                        doors[l].door.as_mut().unwrap().open = false;
                    } else {
                        here = other;
                        allowed.insert(other);
                    }
                }
                if r.done {
                    break;
                }
            }
        }
    }
}

#[test]
fn alf_observations_never_name_hidden_objects() {
    for c in AlfCategory::ALL {
        for seed in 0..10 {
            let mut env = generate_alflite(c, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut obs = env.reset().observation;
            let mut cmd = String::new();
            let wrapper = Env::Alf(env.clone());
            for _ in 0..60 {
                // Names the agent typed itself may be echoed back.
                for hidden in env.hidden_items().into_iter().filter(|h| !cmd.contains(h.as_str())) {
                    let re = Regex::new(&format!(r"\b{}\b", regex::escape(&hidden))).unwrap();
                    assert!(!re.is_match(&obs), "{hidden} leaked in {obs:?}");
                }
                cmd = random_command(&mut rng, &wrapper);
                let r = env.step(&cmd);
                obs = r.observation;
                if r.done {
                    break;
                }
            }
        }
    }
}

#[test]
fn alf_reference_solutions_succeed() {
    for c in AlfCategory::ALL {
        for seed in 0..20 {
            let mut env = generate_alflite(c, seed);
            env.reset();
            let script = env.reference_solution();
            assert!(script.len() <= ALF_BUDGET);
            let mut last = None;
            for cmd in &script {
                let r = env.step(cmd);
                assert!(r.error.is_none(), "{c} seed {seed}: {cmd} -> {:?}", r.error);
                last = Some(r);
            }
            assert!(last.unwrap().success, "{c} seed {seed} not solved by {script:?}");
            let verbs: BTreeSet<&str> = script.iter().map(|s| s.split(' ').next().unwrap()).collect();
            let special = ["heat", "cool", "clean", "slice"];
            match c {
                AlfCategory::BasicUse => assert!(special.iter().all(|v| !verbs.contains(v))),
                AlfCategory::Heat => {
                    let heat = script.iter().position(|s| s.starts_with("heat")).unwrap();
                    assert!(script[heat].contains("microwave"));
                    assert!(script.last().unwrap().starts_with("move"));
                }
                AlfCategory::Clean => assert!(verbs.contains("clean")),
                AlfCategory::Cool => assert!(verbs.contains("cool")),
                AlfCategory::SlicePlus => assert!(verbs.contains("slice")),
            }
        }
    }
}

#[test]
fn alf_target_hidden_about_half_the_time() {
    let mut hidden = 0;
    let mut total = 0;
    for c in AlfCategory::ALL {
        for seed in 0..40 {
            let env = generate_alflite(c, seed);
            let target = &env.task.target;
            total += 1;
            if env.hidden_items().iter().any(|h| h.starts_with(&format!("{target} "))) {
                hidden += 1;
            }
        }
    }
    let share = hidden as f64 / total as f64;
    assert!((0.35..=0.65).contains(&share), "hidden share {share}");
}

#[test]
fn alf_initial_overview_orders_types_and_numbers() {
    let mut env = generate_alflite(AlfCategory::Heat, 0);
    let obs = env.reset().observation;
    assert!(obs.starts_with("You are in the middle of a room. Looking quickly around you, you see a cabinet "));
    assert!(obs.ends_with('.') && !obs.ends_with(".."));
    let names: Vec<(String, u32)> = Regex::new(r"a ([a-z]+) (\d+)")
        .unwrap()
        .captures_iter(&obs)
        .map(|c| (c[1].to_string(), c[2].parse().unwrap()))
        .collect();
    assert_eq!(names.len(), env.receptacles.len());
    for pair in names.windows(2) {
        let ((ka, na), (kb, nb)) = (&pair[0], &pair[1]);
        assert!(ka < kb || (ka == kb && na > nb), "{pair:?}");
    }
}

#[test]
fn alf_error_messages_name_the_missing_precondition() {
    let mut env = generate_alflite(AlfCategory::SlicePlus, 2);
    env.reset();
    let target = env.items[0].name.clone();
    let r = env.step(&format!("slice {target} with knife 1"));
    assert_eq!(r.error.as_deref(), Some("You can't slice without a knife."));

    let cabinet = env.receptacles.iter().find(|r| r.kind == "cabinet").unwrap().name.clone();
    let r = env.step(&format!("open {cabinet}"));
    assert_eq!(r.error.unwrap(), format!("You need to go to the {cabinet} first."));

    env.step(&format!("go to {cabinet}"));
    let r = env.step(&format!("take {target} from {cabinet}"));
    assert_eq!(r.error.unwrap(), format!("The {cabinet} is closed. Open it first."));

    let r = env.step("microwave 1 please");
    assert!(r.error.unwrap().contains("command"));

    let table = env.receptacles.iter().find(|r| r.kind == "countertop").unwrap().name.clone();
    let r = env.step(&format!("heat {target} with {table}"));
    assert!(r.error.unwrap().contains("microwave"));
}

#[test]
fn alf_single_hand() {
    let mut env = generate_alflite(AlfCategory::BasicUse, 5);
    env.reset();
    let mut held = 0;
    for cmd in env.reference_solution() {
        if cmd.starts_with("take") {
            held += 1;
        }
        let r = env.step(&cmd);
        if cmd.starts_with("take") {
            let from = cmd.split(" from ").nth(1).unwrap().to_string();
            let other = env
                .items
                .iter()
                .find(|i| i.location == ItemLocation::In(env.receptacles.iter().position(|r| r.name == from).unwrap()))
                .map(|i| i.name.clone());
            if let Some(o) = other {
                let again = env.step(&format!("take {o} from {from}"));
                assert!(again.error.unwrap().starts_with("You are already holding"));
            }
        }
        assert!(r.error.is_none());
    }
    assert_eq!(held, 1);
}

#[test]
fn alf_valid_actions_are_the_command_templates() {
    let env = Env::alf(AlfCategory::Cool, 1);
    let acts = env.valid_actions();
    assert_eq!(acts.len(), 9);
    assert!(acts.contains(&"slice [bread 1] with [knife 1]".to_string()));
}

#[test]
fn alf_names_accept_spacing_variants() {
    assert_eq!(canonical_name("sink basin 1"), "sinkbasin 1");
    assert_eq!(canonical_name("sinkbasin1"), "sinkbasin 1");
    assert_eq!(canonical_name("cabinet 27"), "cabinet 27");
}

#[test]
fn alf_world_json_round_trip() {
    let w = generate_alflite(AlfCategory::Clean, 4);
    assert_eq!(AlfWorldLite::from_json(&w.to_json()).unwrap(), w);
    assert_eq!(generate_alflite(AlfCategory::Clean, 4), w);
}

#[test]
fn step_never_panics_on_arbitrary_text() {
    let inputs = ["", "   ", "move", "open door", "go to", "take from", "slice with", "ÿ", "move north north", "use"];
    for mut env in all_envs() {
        env.reset();
        for s in inputs {
            let r = env.step(s);
            assert!(r.error.is_some(), "{s:?} accepted");
        }
    }
}
