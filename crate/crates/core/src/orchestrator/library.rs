//! Domain files reused across trials when the domain is held fixed.
//!
//! The CoinCollector library mirrors a set of domains learned in earlier
//! runs: three complete ones, five whose `open-door` never checks where the
//! agent is, and two whose `move` ignores closed doors.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::envs::EnvKind;
use crate::formalizer::{ALF_ORACLE_DOMAIN, COIN_ORACLE_DOMAIN};

const HEAD: &str = "(define (domain explore)
  (:requirements :strips :typing :negative-preconditions :disjunctive-preconditions)
  (:types location direction)
";

const PREDICATES_FULL: &str = "  (:predicates
    (at ?loc - location)
    (door-closed ?loc1 - location ?loc2 - location ?dir - direction)
    (door-open ?loc1 - location ?loc2 - location ?dir - direction)
    (door-exists ?loc1 - location ?loc2 - location ?dir - direction)
    (no-door ?loc1 - location ?loc2 - location ?dir - direction)
  )
";

const PREDICATES_NO_NODOOR: &str = "  (:predicates
    (at ?loc - location)
    (door-closed ?loc1 - location ?loc2 - location ?dir - direction)
    (door-open ?loc1 - location ?loc2 - location ?dir - direction)
  )
";

const OPEN_CHECKED: &str = "  (:action open-door
    :parameters (?loc1 - location ?loc2 - location ?dir - direction)
    :precondition (and (at ?loc1) (door-closed ?loc1 ?loc2 ?dir))
    :effect (and (not (door-closed ?loc1 ?loc2 ?dir)) (door-open ?loc1 ?loc2 ?dir))
  )
";

const OPEN_CHECKED_EXISTS: &str = "  (:action open-door
    :parameters (?loc1 - location ?loc2 - location ?dir - direction)
    :precondition (and (at ?loc1) (door-exists ?loc1 ?loc2 ?dir) (door-closed ?loc1 ?loc2 ?dir))
    :effect (and (not (door-closed ?loc1 ?loc2 ?dir)) (door-open ?loc1 ?loc2 ?dir))
  )
";

const OPEN_UNCHECKED: &str = "  (:action open-door
    :parameters (?loc1 - location ?loc2 - location ?dir - direction)
    :precondition (door-closed ?loc1 ?loc2 ?dir)
    :effect (and (not (door-closed ?loc1 ?loc2 ?dir)) (door-open ?loc1 ?loc2 ?dir))
  )
";

const CLOSE: &str = "  (:action close-door
    :parameters (?loc1 - location ?loc2 - location ?dir - direction)
    :precondition (and (at ?loc1) (door-open ?loc1 ?loc2 ?dir))
    :effect (and (not (door-open ?loc1 ?loc2 ?dir)) (door-closed ?loc1 ?loc2 ?dir))
  )
";

const MOVE_CHECKED: &str = "  (:action move
    :parameters (?from - location ?to - location ?dir - direction)
    :precondition (and (at ?from) (or (door-open ?from ?to ?dir) (no-door ?from ?to ?dir)))
    :effect (and (not (at ?from)) (at ?to))
  )
";

const MOVE_OPEN_ONLY: &str = "  (:action move
    :parameters (?from - location ?to - location ?dir - direction)
    :precondition (and (at ?from) (door-open ?from ?to ?dir))
    :effect (and (not (at ?from)) (at ?to))
  )
";

const MOVE_UNCHECKED: &str = "  (:action move
    :parameters (?from - location ?to - location ?dir - direction)
    :precondition (and (at ?from) (or (door-open ?from ?to ?dir) (door-closed ?from ?to ?dir) (no-door ?from ?to ?dir)))
    :effect (and (not (at ?from)) (at ?to))
  )
";

fn domain(predicates: &str, actions: &[&str]) -> String {
    format!("{HEAD}{predicates}{})", actions.concat())
}

/// Complete domains first (indices 0..3), then the flawed ones.
pub fn coin_df_library() -> Vec<String> {
    vec![
        COIN_ORACLE_DOMAIN.to_string(),
        domain(PREDICATES_FULL, &[OPEN_CHECKED_EXISTS, MOVE_CHECKED]),
        domain(PREDICATES_FULL, &[OPEN_CHECKED, CLOSE, MOVE_CHECKED]),
        domain(PREDICATES_FULL, &[OPEN_UNCHECKED, MOVE_CHECKED]),
        domain(PREDICATES_FULL, &[OPEN_UNCHECKED, CLOSE, MOVE_CHECKED]),
        domain(PREDICATES_FULL, &[MOVE_CHECKED, OPEN_UNCHECKED]),
        domain(PREDICATES_NO_NODOOR, &[OPEN_UNCHECKED, MOVE_OPEN_ONLY]),
        domain(PREDICATES_NO_NODOOR, &[OPEN_UNCHECKED, CLOSE, MOVE_OPEN_ONLY]),
        domain(PREDICATES_FULL, &[OPEN_CHECKED, MOVE_UNCHECKED]),
        domain(PREDICATES_FULL, &[OPEN_CHECKED, CLOSE, MOVE_UNCHECKED]),
    ]
}

/// Single-domain library of the reference household domain.
pub fn alf_df_library() -> Vec<String> {
    vec![ALF_ORACLE_DOMAIN.to_string()]
}

pub fn df_library(env: EnvKind) -> Vec<String> {
    match env {
        EnvKind::Coin => coin_df_library(),
        EnvKind::Alf => alf_df_library(),
    }
}

/// Seeded choice of a library entry.
pub fn draw_df(library_len: usize, seed: u64) -> usize {
    ChaCha8Rng::seed_from_u64(seed).random_range(0..library_len)
}
