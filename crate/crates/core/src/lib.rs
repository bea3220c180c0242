pub mod pddl;
pub mod planner;
pub mod envs;
pub mod gateway;
pub mod formalizer;
pub mod orchestrator;
pub mod harness;
mod http;
