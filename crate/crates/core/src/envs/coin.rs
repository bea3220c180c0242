//! CoinCollector: rooms on a grid joined by doorless openings or doors; the
//! agent must find the room holding the coin.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::StepResult;

pub const WORLD_VERSION: u32 = 1;
pub const COIN_BUDGET: usize = 25;
pub const VALID_SIZES: [usize; 5] = [3, 5, 7, 9, 11];

const START_ROOM: &str = "kitchen";
const ROOM_NAMES: [&str; 10] = [
    "pantry",
    "corridor",
    "bedroom",
    "bathroom",
    "laundry",
    "backyard",
    "driveway",
    "street",
    "supermarket",
    "garage",
];
const DOOR_STYLES: [&str; 7] = [
    "plain",
    "patio",
    "wood",
    "sliding",
    "screen",
    "frosted-glass",
    "fiberglass",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    North,
    South,
    East,
    West,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::North, Dir::South, Dir::East, Dir::West];

    pub fn name(self) -> &'static str {
        match self {
            Dir::North => "north",
            Dir::South => "south",
            Dir::East => "east",
            Dir::West => "west",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Dir::North => "North",
            Dir::South => "South",
            Dir::East => "East",
            Dir::West => "West",
        }
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::North => Dir::South,
            Dir::South => Dir::North,
            Dir::East => Dir::West,
            Dir::West => Dir::East,
        }
    }

    fn delta(self) -> (i32, i32) {
        match self {
            Dir::North => (0, 1),
            Dir::South => (0, -1),
            Dir::East => (1, 0),
            Dir::West => (-1, 0),
        }
    }

    pub fn parse(s: &str) -> Option<Dir> {
        Dir::ALL.into_iter().find(|d| d.name() == s)
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Door {
    pub style: String,
    pub open: bool,
}

/// Connection between room `a` and room `b`, lying in direction `dir` from `a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub a: usize,
    pub dir: Dir,
    pub b: usize,
    pub door: Option<Door>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinWorld {
    pub version: u32,
    pub seed: u64,
    pub rooms: Vec<String>,
    pub links: Vec<Link>,
    pub coin_room: usize,
    pub start_room: usize,
}

impl CoinWorld {
    /// The link leaving `room` towards `dir`, with the room on the other side.
    pub fn exit(&self, room: usize, dir: Dir) -> Option<(usize, usize)> {
        self.links.iter().enumerate().find_map(|(i, l)| {
            if l.a == room && l.dir == dir {
                Some((i, l.b))
            } else if l.b == room && l.dir.opposite() == dir {
                Some((i, l.a))
            } else {
                None
            }
        })
    }

    pub fn room_index(&self, name: &str) -> Option<usize> {
        self.rooms.iter().position(|r| r == name)
    }

    pub fn neighbors(&self, room: usize) -> Vec<(Dir, usize, usize)> {
        Dir::ALL
            .into_iter()
            .filter_map(|d| self.exit(room, d).map(|(l, o)| (d, l, o)))
            .collect()
    }

    /// Shortest room path by link count, ignoring doors.
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let mut prev: HashMap<usize, (usize, usize)> = HashMap::new();
        let mut queue = VecDeque::from([from]);
        let mut seen = BTreeSet::from([from]);
        while let Some(r) = queue.pop_front() {
            if r == to {
                let mut links = Vec::new();
                let mut cur = to;
                while cur != from {
                    let (p, l) = prev[&cur];
                    links.push(l);
                    cur = p;
                }
                links.reverse();
                return Some(links);
            }
            for (_, l, o) in self.neighbors(r) {
                if seen.insert(o) {
                    prev.insert(o, (r, l));
                    queue.push_back(o);
                }
            }
        }
        None
    }

    pub fn is_connected(&self) -> bool {
        (0..self.rooms.len()).all(|r| self.path(self.start_room, r).is_some())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn from_json(text: &str) -> Result<CoinWorld, String> {
        let w: CoinWorld = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if w.version != WORLD_VERSION {
            return Err(format!(
                "unsupported world version {} (expected {WORLD_VERSION})",
                w.version
            ));
        }
        Ok(w)
    }
}

/// Builds a seeded world: a random spanning tree grown on a grid, a few
/// extra links between adjacent rooms, about half the links doored and
/// most doors closed.
pub fn generate_coincollector(num_rooms: usize, seed: u64) -> CoinWorld {
    assert!(
        VALID_SIZES.contains(&num_rooms),
        "room count must be one of {VALID_SIZES:?}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(num_rooms as u64));
    let mut names: Vec<&str> = ROOM_NAMES.to_vec();
    names.shuffle(&mut rng);
    let mut rooms = vec![START_ROOM.to_string()];
    rooms.extend(names.into_iter().take(num_rooms - 1).map(str::to_string));

    let mut cells: HashMap<(i32, i32), usize> = HashMap::from([((0, 0), 0)]);
    let mut pos = vec![(0, 0)];
    let mut links: Vec<Link> = Vec::new();
    while pos.len() < num_rooms {
        let r = rng.random_range(0..pos.len());
        let d = *Dir::ALL.choose(&mut rng).unwrap();
        let (dx, dy) = d.delta();
        let cell = (pos[r].0 + dx, pos[r].1 + dy);
        if cells.contains_key(&cell) {
            continue;
        }
        let id = pos.len();
        cells.insert(cell, id);
        pos.push(cell);
        links.push(Link {
            a: r,
            dir: d,
            b: id,
            door: None,
        });
    }
    for a in 0..pos.len() {
        for d in [Dir::North, Dir::East] {
            let (dx, dy) = d.delta();
            let Some(&b) = cells.get(&(pos[a].0 + dx, pos[a].1 + dy)) else {
                continue;
            };
            let linked = links
                .iter()
                .any(|l| (l.a == a && l.b == b) || (l.a == b && l.b == a));
            if !linked && rng.random_bool(0.25) {
                links.push(Link {
                    a,
                    dir: d,
                    b,
                    door: None,
                });
            }
        }
    }
    for link in &mut links {
        if rng.random_bool(0.5) {
            link.door = Some(Door {
                style: DOOR_STYLES.choose(&mut rng).unwrap().to_string(),
                open: !rng.random_bool(0.6),
            });
        }
    }
    let coin_room = rng.random_range(1..num_rooms);
    let mut world = CoinWorld {
        version: WORLD_VERSION,
        seed,
        rooms,
        links,
        coin_room,
        start_room: 0,
    };
    if num_rooms >= 5 {
        let path = world.path(0, coin_room).expect("generated world is connected");
        let has_closed = path
            .iter()
            .any(|&l| matches!(&world.links[l].door, Some(d) if !d.open));
        if !has_closed {
            let l = *path.choose(&mut rng).unwrap();
            let style = DOOR_STYLES.choose(&mut rng).unwrap().to_string();
            world.links[l].door = Some(Door { style, open: false });
        }
    }
    world
}

/// What the agent has observed so far, taken from the true state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinBelief {
    pub current: String,
    pub visited: BTreeSet<String>,
    /// Exits of visited rooms, keyed by room name.
    pub exits: BTreeMap<String, Vec<ExitView>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitView {
    pub dir: Dir,
    /// Name of the room behind, when it has been mentioned.
    pub neighbor: Option<String>,
    /// `None` for a doorless opening, otherwise whether the door is open.
    pub door_open: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinCollector {
    world: CoinWorld,
    agent: usize,
    visited: BTreeSet<usize>,
    /// Rooms whose names have appeared in an observation.
    named: BTreeSet<usize>,
    commands: usize,
    budget: usize,
    done: bool,
    success: bool,
}

enum Command {
    Look,
    Move(Dir),
    Open(Dir),
    Close(Dir),
}

fn parse_command(text: &str) -> Option<Command> {
    let words: Vec<&str> = text.split_whitespace().collect();
    match words.as_slice() {
        ["look", "around"] => Some(Command::Look),
        ["move", d] => Dir::parse(d).map(Command::Move),
        ["open", "door", "to", d] => Dir::parse(d).map(Command::Open),
        ["close", "door", "to", d] => Dir::parse(d).map(Command::Close),
        _ => None,
    }
}

impl CoinCollector {
    pub fn new(world: CoinWorld) -> Self {
        let start = world.start_room;
        CoinCollector {
            agent: start,
            visited: BTreeSet::from([start]),
            named: BTreeSet::from([start]),
            world,
            commands: 0,
            budget: COIN_BUDGET,
            done: false,
            success: false,
        }
    }

    pub fn generate(num_rooms: usize, seed: u64) -> Self {
        CoinCollector::new(generate_coincollector(num_rooms, seed))
    }

    pub fn world(&self) -> &CoinWorld {
        &self.world
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn commands_used(&self) -> usize {
        self.commands
    }

    pub fn success(&self) -> bool {
        self.success
    }

    pub fn done(&self) -> bool {
        self.done
    }

    pub fn current_room(&self) -> &str {
        &self.world.rooms[self.agent]
    }

    fn describe(&mut self) -> String {
        let room = self.agent;
        let mut out = format!("You are in the {}. ", self.world.rooms[room]);
        if room == self.world.coin_room {
            out.push_str("You see a coin. ");
        }
        for (d, l, other) in self.world.neighbors(room) {
            let name = &self.world.rooms[other];
            match &self.world.links[l].door {
                None => {
                    out.push_str(&format!("To the {} you see the {name}. ", d.title()));
                    self.named.insert(other);
                }
                Some(door) if door.open => {
                    out.push_str(&format!(
                        "Through an open {} door, to the {} you see the {name}. ",
                        door.style,
                        d.title()
                    ));
                    self.named.insert(other);
                }
                Some(door) => out.push_str(&format!(
                    "To the {} you see a closed {} door. ",
                    d.title(),
                    door.style
                )),
            }
        }
        out
    }

    /// Starts the episode with an uncounted "look around".
    pub fn reset(&mut self) -> StepResult {
        let obs = self.describe();
        self.finish(obs)
    }

    fn finish(&mut self, observation: String) -> StepResult {
        if observation.contains("coin") {
            self.success = true;
            self.done = true;
        } else if self.commands >= self.budget {
            self.done = true;
        }
        StepResult {
            observation,
            error: None,
            done: self.done,
            success: self.success,
        }
    }

    fn fail(&mut self, message: &str) -> StepResult {
        if self.commands >= self.budget {
            self.done = true;
        }
        StepResult::error(message, self.done)
    }

    pub fn step(&mut self, command: &str) -> StepResult {
        if self.done {
            return StepResult::error("The game is over.", true);
        }
        let normalized = command.trim().to_lowercase();
        self.commands += 1;
        let Some(cmd) = parse_command(&normalized) else {
            return self.fail(
                "I don't understand that command. Valid commands are: look around, open door to DIRECTION, close door to DIRECTION, move DIRECTION.",
            );
        };
        match cmd {
            Command::Look => {
                let obs = self.describe();
                self.finish(obs)
            }
            Command::Move(d) => match self.world.exit(self.agent, d) {
                None => self.fail(&format!("You can't move there, there is nothing to the {d}.")),
                Some((l, _)) if matches!(&self.world.links[l].door, Some(door) if !door.open) => {
                    self.fail("You can't move there as the door is closed.")
                }
                Some((_, other)) => {
                    self.agent = other;
                    self.visited.insert(other);
                    self.named.insert(other);
                    let obs = self.describe();
                    self.finish(obs)
                }
            },
            Command::Open(d) => {
                let Some((l, other)) = self.world.exit(self.agent, d) else {
                    return self.fail("No door to open.");
                };
                match self.world.links[l].door.as_mut() {
                    None => self.fail("No door to open."),
                    Some(door) if door.open => self.fail("The door is already open."),
                    Some(door) => {
                        door.open = true;
                        let obs = format!(
                            "You open the {} door, revealing the {}. ",
                            door.style, self.world.rooms[other]
                        );
                        self.named.insert(other);
                        self.finish(obs)
                    }
                }
            }
            Command::Close(d) => {
                let Some((l, _)) = self.world.exit(self.agent, d) else {
                    return self.fail("No door to close.");
                };
                match self.world.links[l].door.as_mut() {
                    None => self.fail("No door to close."),
                    Some(door) if !door.open => self.fail("The door is already closed."),
                    Some(door) => {
                        door.open = false;
                        let obs = format!("You close the {} door. ", door.style);
                        self.finish(obs)
                    }
                }
            }
        }
    }

    /// Concrete commands for the current room, sorted.
    pub fn valid_actions(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (d, l, _) in self.world.neighbors(self.agent) {
            out.push(format!("move {d}"));
            if self.world.links[l].door.is_some() {
                out.push(format!("open door to {d}"));
                out.push(format!("close door to {d}"));
            }
        }
        out.sort();
        out
    }

    pub fn belief(&self) -> CoinBelief {
        let mut exits = BTreeMap::new();
        for &room in &self.visited {
            let views = self
                .world
                .neighbors(room)
                .into_iter()
                .map(|(dir, l, other)| ExitView {
                    dir,
                    neighbor: self
                        .named
                        .contains(&other)
                        .then(|| self.world.rooms[other].clone()),
                    door_open: self.world.links[l].door.as_ref().map(|d| d.open),
                })
                .collect();
            exits.insert(self.world.rooms[room].clone(), views);
        }
        CoinBelief {
            current: self.world.rooms[self.agent].clone(),
            visited: self.visited.iter().map(|&r| self.world.rooms[r].clone()).collect(),
            exits,
        }
    }

    /// Room names that may legitimately appear in observations so far.
    pub fn named_rooms(&self) -> BTreeSet<String> {
        self.named.iter().map(|&r| self.world.rooms[r].clone()).collect()
    }
}
