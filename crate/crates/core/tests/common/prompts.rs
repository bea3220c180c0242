//! Prompt contexts matching the golden prompt files.

use pddlego::envs::{AlfCategory, Env, EnvKind};
use pddlego::formalizer::{Exchange, Feedback, Mode, PromptContext, Variant};

use super::{pddl, read_data};

pub const COIN_ACTIONS: [&str; 6] = [
    "close door to south",
    "close door to west",
    "move south",
    "move west",
    "open door to south",
    "open door to west",
];

pub const ALF_GOAL_CLOTH: &str = "Your task is to: put some cloth on bathtubbasin.";

pub const BATHROOM: &str = "You are in the middle of a room. Looking quickly around you, you see a bathtubbasin 1, a cabinet 5, a cabinet 4, a cabinet 3, a cabinet 2, a cabinet 1, a countertop 1, a garbagecan 1, a handtowelholder 2, a handtowelholder 1, a sinkbasin 1, a toilet 1, a toiletpaperhanger 1, and a towelholder 1.";

pub const KITCHEN_27: &str = "You are in the middle of a room. Looking quickly around you, you see a cabinet 27, a cabinet 26, a cabinet 25, a cabinet 24, a cabinet 23, a cabinet 22, a cabinet 21, a cabinet 20, a cabinet 19, a cabinet 18, a cabinet 17, a cabinet 16, a cabinet 15, a cabinet 14, a cabinet 13, a cabinet 12, a cabinet 11, a cabinet 10, a cabinet 9, a cabinet 8, a cabinet 7, a cabinet 6, a cabinet 5, a cabinet 4, a cabinet 3, a cabinet 2, a cabinet 1, a coffeemachine 1, a countertop 2, a countertop 1, a diningtable 1, a drawer 12, a drawer 11, a drawer 10, a drawer 9, a drawer 8, a drawer 7, a drawer 6, a drawer 5, a drawer 4, a drawer 3, a drawer 2, a drawer 1, a fridge 1, a garbagecan 1, a microwave 1, a sinkbasin 1, a stoveburner 4, a stoveburner 3, a stoveburner 2, a stoveburner 1, and a toaster 1.";

pub const LIVING_ROOM: &str = "You are in the middle of a room. Looking quickly around you, you see a armchair 2, a armchair 1, a coffeetable 2, a coffeetable 1, a diningtable 1, a garbagecan 1, a sidetable 2, a sidetable 1, and a sofa 1.";

pub fn ex(command: &str, observation: &str) -> Exchange {
    Exchange::new(command, observation)
}

pub fn file(name: &str) -> String {
    pddl(name).trim_end_matches('\n').to_string()
}

pub fn base(env: EnvKind, mode: Mode, variant: Variant) -> PromptContext {
    PromptContext {
        env,
        mode,
        variant,
        task_goal: String::new(),
        current: Vec::new(),
        memory: Vec::new(),
        prev_df: None,
        prev_pf: None,
        feedback: None,
        valid_actions: Vec::new(),
        df_fixed: false,
    }
}

pub fn coin(variant: Variant) -> PromptContext {
    let mut c = base(EnvKind::Coin, Mode::PddlegoPlus, variant);
    c.task_goal = "Your task is to find the coin.".into();
    c.valid_actions = COIN_ACTIONS.iter().map(|s| s.to_string()).collect();
    c
}

pub fn alf(mode: Mode, variant: Variant, goal: &str) -> PromptContext {
    let mut c = base(EnvKind::Alf, mode, variant);
    c.task_goal = goal.into();
    c
}

pub fn golden(n: usize) -> String {
    read_data(&format!("prompts/e{n}.txt"))
}

pub fn assert_same(n: usize, got: &str, want: &str) {
    if got != want {
        let at = got.bytes().zip(want.bytes()).take_while(|(a, b)| a == b).count();
        panic!(
            "golden prompt {n} differs at byte {at}:\n got: {:?}\nwant: {:?}",
            &got[at.saturating_sub(40)..(at + 60).min(got.len())],
            &want[at.saturating_sub(40)..(at + 60).min(want.len())]
        );
    }
}

pub fn e1() -> PromptContext {
    let mut c = coin(Variant::Detailed);
    c.current = vec![ex(
        "look around",
        "You are in the kitchen. To the North you see a closed plain door. To the East you see the corridor. ",
    )];
    c
}

pub fn e2() -> PromptContext {
    let mut c = coin(Variant::Detailed);
    let look = ex(
        "look around",
        "You are in the kitchen. To the North you see a closed plain door. To the East you see the corridor. ",
    );
    let moved = ex("move east", "You are in the corridor. To the West you see the kitchen. ");
    c.current = vec![moved.clone()];
    c.memory = vec![look, moved];
    c.prev_df = Some(file("e2_df"));
    c.prev_pf = Some(file("e2_pf"));
    c
}

pub fn e3() -> PromptContext {
    let mut c = coin(Variant::Simple);
    c.current = vec![ex(
        "look around",
        "You are in the kitchen. To the East you see a closed plain door. To the West you see the corridor. ",
    )];
    c
}

pub fn e4() -> PromptContext {
    let mut c = coin(Variant::Simple);
    let moved = ex(
        "move north",
        "You are in the corridor. To the North you see a closed wood door. To the South you see the kitchen. To the East you see a closed wood door. To the West you see a closed patio door. ",
    );
    c.current = vec![moved.clone()];
    c.memory = vec![
        ex(
            "look around",
            "You are in the kitchen. To the North you see the corridor. To the South you see a closed frosted-glass door. ",
        ),
        moved,
    ];
    c.prev_df = Some(file("e4_df"));
    c.prev_pf = Some(file("e4_pf"));
    c
}

pub fn e5(memory: Vec<Exchange>, feedback: Option<Feedback>) -> PromptContext {
    let mut c = coin(Variant::Detailed);
    c.mode = Mode::Plangen;
    c.current = vec![ex("move west", "You are in the pantry. To the East you see the kitchen. ")];
    c.memory = memory;
    c.feedback = feedback;
    c
}

pub fn e6() -> PromptContext {
    let mut c = alf(Mode::PddlegoPlus, Variant::Detailed, ALF_GOAL_CLOTH);
    c.current = vec![ex("look around", BATHROOM)];
    c
}

pub fn e7() -> PromptContext {
    let mut c = alf(Mode::PddlegoPlus, Variant::Detailed, ALF_GOAL_CLOTH);
    let go = ex("go to cabinet 1", "You arrive at cabinet 1. The cabinet 1 is closed.");
    c.current = vec![go.clone()];
    c.memory = vec![ex("look around", BATHROOM), go];
    c.prev_df = Some(file("e7_df"));
    c.prev_pf = Some(file("e7_pf"));
    c
}

pub fn e8() -> PromptContext {
    let mut c = alf(Mode::PddlegoPlus, Variant::Simple, ALF_GOAL_CLOTH);
    c.current = vec![ex("look around", BATHROOM)];
    c
}

pub fn e9() -> PromptContext {
    let mut c = alf(
        Mode::PddlegoPlus,
        Variant::Simple,
        "Your task is to: clean some lettuce and put it in countertop.",
    );
    let failed = vec![
        ex("go to cabinet 27", "You arrive at cabinet 27. The cabinet 27 is closed."),
        ex(
            "open cabinet 27",
            "You open the cabinet 27. The cabinet 27 is open. In it, you see nothing.",
        ),
        ex("clean lettuce with cabinet 27", "Nothing happens."),
    ];
    c.current = failed.clone();
    c.memory = vec![ex("look around", KITCHEN_27)];
    c.prev_df = Some(file("e9_df"));
    c.prev_pf = Some(file("e9_pf"));
    c.feedback = Some(Feedback::Simulation(failed));
    c
}

pub fn e10() -> PromptContext {
    let env = Env::alf(AlfCategory::BasicUse, 0);
    let mut c = alf(Mode::Plangen, Variant::Detailed, "Your task is to: put a remotecontrol in armchair.");
    c.current = vec![ex("look around", LIVING_ROOM)];
    c.memory = vec![ex("look around", LIVING_ROOM)];
    c.valid_actions = env.valid_actions();
    c
}

/// The coin plan-generation listing is an f-string; fill it by hand and
/// compare with the rendered prompt.
pub fn e5_expected(current: &str, memory: Option<&str>, error: Option<&str>) -> String {
    let va = format!(
        "[{}]",
        COIN_ACTIONS.iter().map(|a| format!("'{a}'")).collect::<Vec<_>>().join(", ")
    );
    golden(5)
        .replace("{brief_obs}", current)
        .replace("{valid_actions}", &va)
        .replace(
            "{overall_memory if overall_memory else \"No additional memory available.\"}",
            memory.unwrap_or("No additional memory available."),
        )
        .replace(
            "{large_loop_error_message if large_loop_error_message else \"No errors or obstacles mentioned.\"}",
            error.unwrap_or("No errors or obstacles mentioned."),
        )
        .replace("{{", "{")
        .replace("}}", "}")
}
