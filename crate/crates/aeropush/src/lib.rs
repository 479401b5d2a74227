//! Deterministic, batched simulator for aerial non-prehensile pushing: a
//! velocity-controlled quadrotor with a fixed arm pushes a cube across a
//! table under variable Coulomb friction. Includes the action mapping,
//! reward shaping, observation assembly with a synthetic depth camera, goal
//! scheduling, a scripted baseline, an MPPI planner rolling out the
//! simulator itself, and an evaluation harness with an NDJSON wire protocol
//! for external agents.

pub mod action;
pub mod agents;
pub mod batch;
pub mod config;
pub mod dynamics;
pub mod episode;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod observation;
pub mod reward;
pub mod rng;
pub mod scene;

pub use error::SimError;
