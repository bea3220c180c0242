#![allow(dead_code)]

use std::path::PathBuf;

pub fn data_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(rel)
}

pub fn read_data(rel: &str) -> String {
    std::fs::read_to_string(data_path(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

pub fn pddl(name: &str) -> String {
    read_data(&format!("pddl/{name}.pddl"))
}

pub const DOMAIN_FILES: &[&str] = &["walk_df1", "walk_df2_2", "e2_df", "e4_df", "e7_df", "e9_df"];

pub const PROBLEM_FILES: &[&str] = &[
    "walk_pf1",
    "walk_pf2",
    "walk_pf2_2",
    "walk_pf3",
    "walk_pf4",
    "e2_pf",
    "e4_pf",
    "e7_pf",
    "e9_pf",
];

pub mod random_task;
pub mod mock_http;
pub mod prompts;
