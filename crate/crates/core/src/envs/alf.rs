//! ALFWorld-lite: a single room of freely reachable receptacles, some of them
//! closed, and a household task over one target object.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::StepResult;

pub const ALF_BUDGET: usize = 50;
pub const ALF_VERSION: u32 = 1;

/// Command forms shown to agents, one per action family.
pub const ALF_TEMPLATES: [&str; 9] = [
    "go to [towelholder 1]",
    "open [cabinet 2]",
    "take [cloth 1] from [cabinet 3]",
    "move [soap bar 1] to [sink basin 2]",
    "use [desk lamp 1]",
    "heat [bread 1] with [microwave 1]",
    "clean [fork 1] with [sink basin 1]",
    "cool [wine bottle 1] with [fridge 1]",
    "slice [bread 1] with [knife 1]",
];

const OPENABLE: [&str; 4] = ["cabinet", "drawer", "fridge", "microwave"];
const LAMPS: [&str; 2] = ["desklamp", "floorlamp"];
const SHARP: [&str; 2] = ["knife", "butterknife"];
const SLICEABLE: [&str; 5] = ["apple", "bread", "lettuce", "potato", "tomato"];
const DESTINATIONS: [&str; 4] = ["countertop", "diningtable", "shelf", "sidetable"];
const DISTRACTORS: [&str; 14] = [
    "bowl",
    "candle",
    "dishsponge",
    "fork",
    "glassbottle",
    "kettle",
    "ladle",
    "pan",
    "peppershaker",
    "saltshaker",
    "spatula",
    "spoon",
    "statue",
    "vase",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlfCategory {
    #[serde(rename = "basic&use")]
    BasicUse,
    #[serde(rename = "clean")]
    Clean,
    #[serde(rename = "cool")]
    Cool,
    #[serde(rename = "heat")]
    Heat,
    #[serde(rename = "slice+")]
    SlicePlus,
}

impl AlfCategory {
    pub const ALL: [AlfCategory; 5] = [
        AlfCategory::BasicUse,
        AlfCategory::Clean,
        AlfCategory::Cool,
        AlfCategory::Heat,
        AlfCategory::SlicePlus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            AlfCategory::BasicUse => "basic&use",
            AlfCategory::Clean => "clean",
            AlfCategory::Cool => "cool",
            AlfCategory::Heat => "heat",
            AlfCategory::SlicePlus => "slice+",
        }
    }
}

impl fmt::Display for AlfCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AlfCategory {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        AlfCategory::ALL
            .into_iter()
            .find(|c| c.label() == s)
            .ok_or_else(|| format!("unknown ALF category '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Treatment {
    Heat,
    Cool,
    Clean,
}

impl Treatment {
    pub fn appliance(self) -> &'static str {
        match self {
            Treatment::Heat => "microwave",
            Treatment::Cool => "fridge",
            Treatment::Clean => "sinkbasin",
        }
    }

    fn adjective(self) -> &'static str {
        match self {
            Treatment::Heat => "hot",
            Treatment::Cool => "cool",
            Treatment::Clean => "clean",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub category: AlfCategory,
    /// Object type to act on, e.g. "tomato".
    pub target: String,
    /// Receptacle type for the final placement; `None` for look-under-lamp tasks.
    pub destination: Option<String>,
    pub treatment: Option<Treatment>,
    pub slice: bool,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receptacle {
    pub name: String,
    pub kind: String,
    pub openable: bool,
    pub open: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ItemLocation {
    In(usize),
    Held,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub name: String,
    pub kind: String,
    pub location: ItemLocation,
    pub heated: bool,
    pub cooled: bool,
    pub cleaned: bool,
    pub sliced: bool,
    pub on: bool,
}

impl Item {
    fn new(kind: &str, number: usize, receptacle: usize) -> Item {
        Item {
            name: format!("{kind} {number}"),
            kind: kind.to_string(),
            location: ItemLocation::In(receptacle),
            heated: false,
            cooled: false,
            cleaned: false,
            sliced: false,
            on: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlfWorldLite {
    pub version: u32,
    pub seed: u64,
    pub task: TaskSpec,
    pub receptacles: Vec<Receptacle>,
    pub items: Vec<Item>,
    /// `None` while standing in the middle of the room.
    pub agent_at: Option<usize>,
    visited: BTreeSet<usize>,
    /// Receptacles whose contents have been shown at least once.
    seen_inside: BTreeSet<usize>,
    commands: usize,
    budget: usize,
    done: bool,
    success: bool,
}

fn article_list(names: &[String]) -> String {
    match names.len() {
        0 => "nothing".to_string(),
        1 => format!("a {}", names[0]),
        n => {
            let head: Vec<String> = names[..n - 1].iter().map(|s| format!("a {s}")).collect();
            format!("{}, and a {}", head.join(", "), names[n - 1])
        }
    }
}

static NAME_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(.*?)\s*(\d+)$").unwrap());

/// "sink basin 1" and "sinkbasin1" both become "sinkbasin 1".
pub fn canonical_name(raw: &str) -> String {
    let raw = raw.trim();
    match NAME_RE.captures(raw) {
        Some(c) => format!("{} {}", c[1].split_whitespace().collect::<String>(), &c[2]),
        None => raw.split_whitespace().collect(),
    }
}

enum Command {
    Look,
    Goto(String),
    Open(String),
    Close(String),
    Take(String, String),
    Put(String, String),
    Use(String),
    Treat(Treatment, String, String),
    Slice(String, String),
}

static TAKE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^take (.+) from (.+)$").unwrap());
static MOVE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^move (.+) to (.+)$").unwrap());
static WITH_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(heat|clean|cool|slice) (.+) with (.+)$").unwrap());

fn parse_command(text: &str) -> Option<Command> {
    if text == "look around" {
        return Some(Command::Look);
    }
    if let Some(rest) = text.strip_prefix("go to ") {
        return Some(Command::Goto(canonical_name(rest)));
    }
    if let Some(rest) = text.strip_prefix("open ") {
        return Some(Command::Open(canonical_name(rest)));
    }
    if let Some(rest) = text.strip_prefix("close ") {
        return Some(Command::Close(canonical_name(rest)));
    }
    if let Some(c) = TAKE_RE.captures(text) {
        return Some(Command::Take(canonical_name(&c[1]), canonical_name(&c[2])));
    }
    if let Some(c) = MOVE_RE.captures(text) {
        return Some(Command::Put(canonical_name(&c[1]), canonical_name(&c[2])));
    }
    if let Some(c) = WITH_RE.captures(text) {
        let (o, r) = (canonical_name(&c[2]), canonical_name(&c[3]));
        return Some(match &c[1] {
            "heat" => Command::Treat(Treatment::Heat, o, r),
            "clean" => Command::Treat(Treatment::Clean, o, r),
            "cool" => Command::Treat(Treatment::Cool, o, r),
            _ => Command::Slice(o, r),
        });
    }
    if let Some(rest) = text.strip_prefix("use ") {
        return Some(Command::Use(canonical_name(rest)));
    }
    None
}

struct Builder {
    rng: ChaCha8Rng,
    receptacles: Vec<Receptacle>,
}

impl Builder {
    fn add(&mut self, kind: &str, count: usize) {
        for n in 1..=count {
            let openable = OPENABLE.contains(&kind);
            self.receptacles.push(Receptacle {
                name: format!("{kind} {n}"),
                kind: kind.to_string(),
                openable,
                open: false,
            });
        }
    }

    fn add_range(&mut self, kind: &str, lo: usize, hi: usize) {
        let n = self.rng.random_range(lo..=hi);
        self.add(kind, n);
    }

    fn pick(&mut self, pred: impl Fn(&Receptacle) -> bool) -> usize {
        let options: Vec<usize> = (0..self.receptacles.len())
            .filter(|&i| pred(&self.receptacles[i]))
            .collect();
        *options.choose(&mut self.rng).expect("scene has a matching receptacle")
    }
}

/// Builds a seeded task of the given category. The target object sits in a
/// closed receptacle half of the time.
pub fn generate_alflite(category: AlfCategory, seed: u64) -> AlfWorldLite {
    let salt = AlfCategory::ALL.iter().position(|c| *c == category).unwrap() as u64;
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9).wrapping_add(1000 + salt)),
        receptacles: Vec::new(),
    };
    let look = category == AlfCategory::BasicUse && b.rng.random_bool(0.3);

    b.add_range("cabinet", 2, 6);
    b.add_range("countertop", 1, 2);
    b.add("diningtable", 1);
    b.add_range("drawer", 1, 4);
    b.add("fridge", 1);
    b.add("garbagecan", 1);
    b.add("microwave", 1);
    b.add_range("shelf", 0, 2);
    b.add_range("sidetable", if look { 1 } else { 0 }, 2);
    b.add("sinkbasin", 1);
    b.add_range("stoveburner", 1, 2);

    let present: Vec<&str> = DESTINATIONS
        .into_iter()
        .filter(|d| b.receptacles.iter().any(|r| r.kind == *d))
        .collect();
    let destination = present.choose(&mut b.rng).unwrap().to_string();

    let (target, treatment, slice) = match category {
        AlfCategory::BasicUse if look => {
            let t = ["book", "cd", "creditcard", "pen", "pencil"];
            (t.choose(&mut b.rng).unwrap().to_string(), None, false)
        }
        AlfCategory::BasicUse => {
            let t = ["book", "cloth", "keychain", "remotecontrol", "soapbar", "spraybottle"];
            (t.choose(&mut b.rng).unwrap().to_string(), None, false)
        }
        AlfCategory::Clean => {
            let t = ["cloth", "cup", "lettuce", "mug", "plate", "tomato"];
            (t.choose(&mut b.rng).unwrap().to_string(), Some(Treatment::Clean), false)
        }
        AlfCategory::Cool => {
            let t = ["apple", "bread", "cup", "egg", "lettuce", "mug", "potato", "tomato"];
            (t.choose(&mut b.rng).unwrap().to_string(), Some(Treatment::Cool), false)
        }
        AlfCategory::Heat => {
            let t = ["apple", "bread", "cup", "egg", "mug", "potato", "tomato"];
            (t.choose(&mut b.rng).unwrap().to_string(), Some(Treatment::Heat), false)
        }
        AlfCategory::SlicePlus => {
            let t = SLICEABLE.choose(&mut b.rng).unwrap().to_string();
            let extra = [None, Some(Treatment::Heat), Some(Treatment::Cool)];
            (t, *extra.choose(&mut b.rng).unwrap(), true)
        }
    };

    let text = if look {
        format!("Your task is to: look at {target} under the desklamp.")
    } else if slice {
        let adj = treatment.map(|t| format!("{} ", t.adjective())).unwrap_or_default();
        format!("Your task is to: put a {adj}slice of {target} in {destination}.")
    } else {
        match treatment {
            Some(Treatment::Heat) => {
                format!("Your task is to: heat some {target} and put it in {destination}.")
            }
            Some(Treatment::Cool) => {
                format!("Your task is to: cool some {target} and put it in {destination}.")
            }
            Some(Treatment::Clean) => {
                format!("Your task is to: clean some {target} and put it in {destination}.")
            }
            None => format!("Your task is to: put a {target} in {destination}."),
        }
    };

    let hidden = b.rng.random_bool(0.5);
    let dest_kind = destination.clone();
    let target_home = if hidden {
        b.pick(|r| r.openable && r.kind != "microwave")
    } else {
        b.pick(|r| !r.openable && r.kind != dest_kind || look && !r.openable)
    };
    let mut items = vec![Item::new(&target, 1, target_home)];
    if slice {
        let k = b.pick(|r| matches!(r.kind.as_str(), "countertop" | "diningtable"));
        items.push(Item::new("knife", 1, k));
    }
    if look {
        let l = b.pick(|r| r.kind == "sidetable");
        items.push(Item::new("desklamp", 1, l));
    }
    let mut counts: std::collections::BTreeMap<&str, usize> = Default::default();
    for _ in 0..b.rng.random_range(3..=8) {
        let kind = *DISTRACTORS.choose(&mut b.rng).unwrap();
        let n = counts.entry(kind).or_insert(0);
        *n += 1;
        let number = *n;
        let r = b.rng.random_range(0..b.receptacles.len());
        items.push(Item::new(kind, number, r));
    }

    AlfWorldLite {
        version: ALF_VERSION,
        seed,
        task: TaskSpec {
            category,
            target,
            destination: (!look).then_some(destination),
            treatment,
            slice,
            text,
        },
        receptacles: b.receptacles,
        items,
        agent_at: None,
        visited: BTreeSet::new(),
        seen_inside: BTreeSet::new(),
        commands: 0,
        budget: ALF_BUDGET,
        done: false,
        success: false,
    }
}

/// Observed slice of the world, as an agent could reconstruct it from its
/// transcript.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlfBelief {
    pub task: TaskSpec,
    pub agent_at: Option<String>,
    pub receptacles: Vec<ReceptacleView>,
    /// Objects seen so far with their last known state.
    pub items: Vec<Item>,
    pub holding: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceptacleView {
    pub name: String,
    pub kind: String,
    pub openable: bool,
    pub visited: bool,
    pub contents_known: bool,
    /// Only reported once visited.
    pub open: Option<bool>,
}

impl AlfWorldLite {
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

    pub fn task_goal(&self) -> &str {
        &self.task.text
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("world serializes")
    }

    pub fn from_json(text: &str) -> Result<AlfWorldLite, String> {
        let w: AlfWorldLite = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if w.version != ALF_VERSION {
            return Err(format!(
                "unsupported world version {} (expected {ALF_VERSION})",
                w.version
            ));
        }
        Ok(w)
    }

    fn receptacle(&self, name: &str) -> Option<usize> {
        self.receptacles.iter().position(|r| r.name == name)
    }

    fn item(&self, name: &str) -> Option<usize> {
        self.items.iter().position(|i| i.name == name)
    }

    fn held(&self) -> Option<usize> {
        self.items.iter().position(|i| i.location == ItemLocation::Held)
    }

    fn contents(&self, r: usize) -> Vec<String> {
        self.items
            .iter()
            .filter(|i| i.location == ItemLocation::In(r))
            .map(|i| i.name.clone())
            .collect()
    }

    fn visible_here(&self, item: usize) -> bool {
        match (self.items[item].location, self.agent_at) {
            (ItemLocation::In(r), Some(at)) => r == at && !self.closed(r),
            _ => false,
        }
    }

    fn closed(&self, r: usize) -> bool {
        self.receptacles[r].openable && !self.receptacles[r].open
    }

    fn show_contents(&mut self, r: usize) -> String {
        self.seen_inside.insert(r);
        article_list(&self.contents(r))
    }

    fn overview(&self) -> String {
        let mut names: Vec<(&str, u32, &str)> = self
            .receptacles
            .iter()
            .map(|r| {
                let n = r.name.rsplit(' ').next().unwrap().parse().unwrap_or(0);
                (r.kind.as_str(), n, r.name.as_str())
            })
            .collect();
        names.sort_by(|a, b| a.0.cmp(b.0).then(b.1.cmp(&a.1)));
        let names: Vec<String> = names.into_iter().map(|n| n.2.to_string()).collect();
        format!(
            "You are in the middle of a room. Looking quickly around you, you see {}.",
            article_list(&names)
        )
    }

    fn arrive(&mut self, r: usize) -> String {
        let name = self.receptacles[r].name.clone();
        if self.closed(r) {
            format!("You arrive at {name}. The {name} is closed.")
        } else if self.receptacles[r].openable {
            let c = self.show_contents(r);
            format!("You arrive at {name}. The {name} is open. In it, you see {c}.")
        } else {
            let c = self.show_contents(r);
            format!("You arrive at {name}. On the {name}, you see {c}.")
        }
    }

    pub fn reset(&mut self) -> StepResult {
        let obs = self.overview();
        self.finish(obs)
    }

    fn goal_holds(&self) -> bool {
        let t = &self.task;
        match &t.destination {
            None => {
                let Some(at) = self.agent_at else { return false };
                let lamp_on = self.items.iter().any(|i| {
                    i.on && LAMPS.contains(&i.kind.as_str()) && i.location == ItemLocation::In(at)
                });
                let holding = self.held().is_some_and(|h| self.items[h].kind == t.target);
                lamp_on && holding
            }
            Some(dest) => self.items.iter().any(|i| {
                let ItemLocation::In(r) = i.location else { return false };
                i.kind == t.target
                    && self.receptacles[r].kind == *dest
                    && (!t.slice || i.sliced)
                    && match t.treatment {
                        Some(Treatment::Heat) => i.heated,
                        Some(Treatment::Cool) => i.cooled,
                        Some(Treatment::Clean) => i.cleaned,
                        None => true,
                    }
            }),
        }
    }

    fn finish(&mut self, observation: String) -> StepResult {
        if self.goal_holds() {
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

    fn fail(&mut self, message: String) -> StepResult {
        if self.commands >= self.budget {
            self.done = true;
        }
        StepResult::error(&message, self.done)
    }

    /// Checks that the agent stands at an existing receptacle named `name`.
    fn at_receptacle(&self, name: &str) -> Result<usize, String> {
        let r = self
            .receptacle(name)
            .ok_or_else(|| format!("There is no receptacle called {name}."))?;
        if self.agent_at != Some(r) {
            return Err(format!("You need to go to the {name} first."));
        }
        Ok(r)
    }

    fn holding(&self, name: &str) -> Result<usize, String> {
        match self.held() {
            Some(h) if self.items[h].name == name => Ok(h),
            _ => Err(format!("You are not holding the {name}.")),
        }
    }

    pub fn step(&mut self, command: &str) -> StepResult {
        if self.done {
            return StepResult::error("The game is over.", true);
        }
        let normalized = command.trim().to_lowercase();
        self.commands += 1;
        let outcome = match parse_command(&normalized) {
            None => Err(
                "I don't understand that command. Use one of the forms: go to X, open X, close X, take O from R, move O to R, use O, heat O with R, clean O with R, cool O with R, slice O with K."
                    .to_string(),
            ),
            Some(cmd) => self.apply(cmd),
        };
        match outcome {
            Ok(obs) => self.finish(obs),
            Err(msg) => self.fail(msg),
        }
    }

    fn apply(&mut self, cmd: Command) -> Result<String, String> {
        match cmd {
            Command::Look => Ok(match self.agent_at {
                None => self.overview(),
                Some(r) => {
                    let name = self.receptacles[r].name.clone();
                    let inside = if self.closed(r) {
                        format!("The {name} is closed.")
                    } else {
                        format!("Next to it, you see {}.", self.show_contents(r))
                    };
                    format!("You are facing the {name}. {inside}")
                }
            }),
            Command::Goto(name) => {
                let r = self
                    .receptacle(&name)
                    .ok_or_else(|| format!("There is no receptacle called {name}."))?;
                if self.agent_at == Some(r) {
                    return Ok(format!("You are already at the {name}."));
                }
                self.agent_at = Some(r);
                self.visited.insert(r);
                Ok(self.arrive(r))
            }
            Command::Open(name) => {
                let r = self.at_receptacle(&name)?;
                if !self.receptacles[r].openable {
                    return Err(format!("The {name} cannot be opened."));
                }
                if self.receptacles[r].open {
                    return Err(format!("The {name} is already open."));
                }
                self.receptacles[r].open = true;
                let c = self.show_contents(r);
                Ok(format!("You open the {name}. The {name} is open. In it, you see {c}."))
            }
            Command::Close(name) => {
                let r = self.at_receptacle(&name)?;
                if !self.receptacles[r].openable {
                    return Err(format!("The {name} cannot be closed."));
                }
                if !self.receptacles[r].open {
                    return Err(format!("The {name} is already closed."));
                }
                self.receptacles[r].open = false;
                Ok(format!("You close the {name}."))
            }
            Command::Take(obj, name) => {
                let r = self.at_receptacle(&name)?;
                if self.closed(r) {
                    return Err(format!("The {name} is closed. Open it first."));
                }
                if let Some(h) = self.held() {
                    return Err(format!(
                        "You are already holding the {}. Put it somewhere first.",
                        self.items[h].name
                    ));
                }
                let i = self
                    .item(&obj)
                    .filter(|&i| self.items[i].location == ItemLocation::In(r))
                    .ok_or_else(|| format!("There is no {obj} in the {name}."))?;
                self.items[i].location = ItemLocation::Held;
                Ok(format!("You pick up the {obj} from the {name}."))
            }
            Command::Put(obj, name) => {
                let i = self.holding(&obj)?;
                let r = self.at_receptacle(&name)?;
                if self.closed(r) {
                    return Err(format!("The {name} is closed. Open it first."));
                }
                self.items[i].location = ItemLocation::In(r);
                Ok(format!("You move the {obj} to the {name}."))
            }
            Command::Use(obj) => {
                let i = self
                    .item(&obj)
                    .filter(|&i| self.visible_here(i))
                    .ok_or_else(|| format!("There is no {obj} here."))?;
                if !LAMPS.contains(&self.items[i].kind.as_str()) {
                    return Err(format!("The {obj} cannot be used."));
                }
                self.items[i].on = true;
                Ok(format!("You turn on the {obj}."))
            }
            Command::Treat(t, obj, name) => {
                let r = self
                    .receptacle(&name)
                    .ok_or_else(|| format!("There is no receptacle called {name}."))?;
                if self.receptacles[r].kind != t.appliance() {
                    let verb = match t {
                        Treatment::Heat => "heat",
                        Treatment::Cool => "cool",
                        Treatment::Clean => "clean",
                    };
                    return Err(format!(
                        "The {name} cannot {verb} anything; you need a {}.",
                        t.appliance()
                    ));
                }
                self.at_receptacle(&name)?;
                let i = self.holding(&obj)?;
                let item = &mut self.items[i];
                let verb = match t {
                    Treatment::Heat => {
                        item.heated = true;
                        "heat"
                    }
                    Treatment::Cool => {
                        item.cooled = true;
                        "cool"
                    }
                    Treatment::Clean => {
                        item.cleaned = true;
                        "clean"
                    }
                };
                Ok(format!("You {verb} the {obj} using the {name}."))
            }
            Command::Slice(obj, tool) => {
                let sharp = self
                    .held()
                    .filter(|&h| self.items[h].name == tool && SHARP.contains(&self.items[h].kind.as_str()));
                if sharp.is_none() {
                    return Err("You can't slice without a knife.".to_string());
                }
                let i = self
                    .item(&obj)
                    .filter(|&i| self.visible_here(i))
                    .ok_or_else(|| format!("There is no {obj} here."))?;
                if !SLICEABLE.contains(&self.items[i].kind.as_str()) {
                    return Err(format!("The {obj} cannot be sliced."));
                }
                self.items[i].sliced = true;
                Ok(format!("You slice the {obj} with the {tool}."))
            }
        }
    }

    pub fn valid_actions(&self) -> Vec<String> {
        ALF_TEMPLATES.iter().map(|s| s.to_string()).collect()
    }

    pub fn belief(&self) -> AlfBelief {
        let receptacles = self
            .receptacles
            .iter()
            .enumerate()
            .map(|(i, r)| ReceptacleView {
                name: r.name.clone(),
                kind: r.kind.clone(),
                openable: r.openable,
                visited: self.visited.contains(&i),
                contents_known: self.seen_inside.contains(&i),
                open: self.visited.contains(&i).then_some(r.open),
            })
            .collect();
        let items = self
            .items
            .iter()
            .filter(|i| match i.location {
                ItemLocation::Held => true,
                ItemLocation::In(r) => self.seen_inside.contains(&r),
            })
            .cloned()
            .collect();
        AlfBelief {
            task: self.task.clone(),
            agent_at: self.agent_at.map(|r| self.receptacles[r].name.clone()),
            receptacles,
            items,
            holding: self.held().map(|h| self.items[h].name.clone()),
        }
    }

    /// Names of objects currently hidden inside closed receptacles.
    pub fn hidden_items(&self) -> Vec<String> {
        self.items
            .iter()
            .filter(|i| matches!(i.location, ItemLocation::In(r) if self.closed(r)))
            .map(|i| i.name.clone())
            .collect()
    }

    /// A command script, written from full knowledge of the world, that
    /// completes the task.
    pub fn reference_solution(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut opened = BTreeSet::new();
        let mut visit = |out: &mut Vec<String>, r: usize| {
            let rec = &self.receptacles[r];
            out.push(format!("go to {}", rec.name));
            if rec.openable && !rec.open && opened.insert(r) {
                out.push(format!("open {}", rec.name));
            }
        };
        let home = |i: usize| match self.items[i].location {
            ItemLocation::In(r) => r,
            ItemLocation::Held => unreachable!("nothing is held at the start"),
        };
        let t = &self.task;
        let target = self
            .items
            .iter()
            .position(|i| i.kind == t.target)
            .expect("task target exists");
        let tname = self.items[target].name.clone();
        let troom = home(target);
        if t.slice {
            let knife = self
                .items
                .iter()
                .position(|i| SHARP.contains(&i.kind.as_str()))
                .expect("slice task has a knife");
            let kname = &self.items[knife].name;
            visit(&mut out, home(knife));
            out.push(format!("take {kname} from {}", self.receptacles[home(knife)].name));
            visit(&mut out, troom);
            out.push(format!("slice {tname} with {kname}"));
            out.push(format!("move {kname} to {}", self.receptacles[troom].name));
        } else {
            visit(&mut out, troom);
        }
        out.push(format!("take {tname} from {}", self.receptacles[troom].name));
        if let Some(tr) = t.treatment {
            let a = self.receptacles.iter().find(|r| r.kind == tr.appliance()).unwrap();
            out.push(format!("go to {}", a.name));
            let verb = match tr {
                Treatment::Heat => "heat",
                Treatment::Cool => "cool",
                Treatment::Clean => "clean",
            };
            out.push(format!("{verb} {tname} with {}", a.name));
        }
        match &t.destination {
            Some(dest) => {
                let d = self.receptacles.iter().find(|r| r.kind == *dest).unwrap();
                out.push(format!("go to {}", d.name));
                out.push(format!("move {tname} to {}", d.name));
            }
            None => {
                let lamp = self
                    .items
                    .iter()
                    .position(|i| LAMPS.contains(&i.kind.as_str()))
                    .expect("look task has a lamp");
                let lr = home(lamp);
                if lr != troom {
                    out.push(format!("go to {}", self.receptacles[lr].name));
                }
                out.push(format!("use {}", self.items[lamp].name));
            }
        }
        out
    }
}
