//! Text environments driven by command strings.

pub mod alf;
pub mod coin;

use serde::{Deserialize, Serialize};

pub use alf::{
    canonical_name, generate_alflite, AlfBelief, AlfCategory, AlfWorldLite, Item, ItemLocation,
    Receptacle, ReceptacleView, TaskSpec, Treatment, ALF_BUDGET, ALF_TEMPLATES,
};
pub use coin::{
    generate_coincollector, CoinBelief, CoinCollector, CoinWorld, Dir, Door, ExitView, Link,
    COIN_BUDGET, VALID_SIZES,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepResult {
    pub observation: String,
    pub error: Option<String>,
    pub done: bool,
    pub success: bool,
}

impl StepResult {
    fn error(message: &str, done: bool) -> StepResult {
        StepResult {
            observation: message.to_string(),
            error: Some(message.to_string()),
            done,
            success: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Coin,
    Alf,
}

/// Serialized environment state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Snapshot(pub String);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Belief {
    Coin(CoinBelief),
    Alf(AlfBelief),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Env {
    Coin(CoinCollector),
    Alf(AlfWorldLite),
}

impl Env {
    pub fn coin(num_rooms: usize, seed: u64) -> Env {
        Env::Coin(CoinCollector::generate(num_rooms, seed))
    }

    pub fn alf(category: AlfCategory, seed: u64) -> Env {
        Env::Alf(generate_alflite(category, seed))
    }

    pub fn kind(&self) -> EnvKind {
        match self {
            Env::Coin(_) => EnvKind::Coin,
            Env::Alf(_) => EnvKind::Alf,
        }
    }

    pub fn reset(&mut self) -> StepResult {
        match self {
            Env::Coin(e) => e.reset(),
            Env::Alf(e) => e.reset(),
        }
    }

    /// Runs one command. Never panics; bad input comes back as `error`.
    pub fn step(&mut self, command: &str) -> StepResult {
        match self {
            Env::Coin(e) => e.step(command),
            Env::Alf(e) => e.step(command),
        }
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot(serde_json::to_string(self).expect("environment serializes"))
    }

    pub fn restore(&mut self, snapshot: &Snapshot) {
        *self = serde_json::from_str(&snapshot.0).expect("snapshot was produced by snapshot()");
    }

    pub fn valid_actions(&self) -> Vec<String> {
        match self {
            Env::Coin(e) => e.valid_actions(),
            Env::Alf(e) => e.valid_actions(),
        }
    }

    /// Task statement given to agents.
    pub fn task_goal(&self) -> String {
        match self {
            Env::Coin(_) => "Your task is to find the coin.".to_string(),
            Env::Alf(e) => e.task_goal().to_string(),
        }
    }

    pub fn budget(&self) -> usize {
        match self {
            Env::Coin(e) => e.budget(),
            Env::Alf(e) => e.budget(),
        }
    }

    pub fn commands_used(&self) -> usize {
        match self {
            Env::Coin(e) => e.commands_used(),
            Env::Alf(e) => e.commands_used(),
        }
    }

    pub fn success(&self) -> bool {
        match self {
            Env::Coin(e) => e.success(),
            Env::Alf(e) => e.success(),
        }
    }

    pub fn done(&self) -> bool {
        match self {
            Env::Coin(e) => e.done(),
            Env::Alf(e) => e.done(),
        }
    }

    pub fn belief(&self) -> Belief {
        match self {
            Env::Coin(e) => Belief::Coin(e.belief()),
            Env::Alf(e) => Belief::Alf(e.belief()),
        }
    }
}

/// The seven-room house used in the worked example: closed doors south and
/// west of the kitchen, and the coin in the supermarket north of the street.
pub fn walkthrough_world() -> CoinWorld {
    let rooms = ["kitchen", "backyard", "pantry", "driveway", "street", "supermarket", "garage"];
    let door = |style: &str| {
        Some(Door {
            style: style.to_string(),
            open: false,
        })
    };
    let link = |a, dir, b, door| Link { a, dir, b, door };
    CoinWorld {
        version: coin::WORLD_VERSION,
        seed: 0,
        rooms: rooms.iter().map(|s| s.to_string()).collect(),
        links: vec![
            link(0, Dir::South, 1, door("patio")),
            link(0, Dir::West, 2, door("plain")),
            link(1, Dir::South, 3, None),
            link(1, Dir::East, 4, None),
            link(1, Dir::West, 6, door("patio")),
            link(4, Dir::North, 5, door("sliding")),
        ],
        coin_room: 5,
        start_room: 0,
    }
}
