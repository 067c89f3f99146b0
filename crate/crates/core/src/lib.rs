//! Microscopic simulator of a highway on-ramp merge in mixed traffic.
//!
//! Connected automated vehicles (CAVs) predict merge conflicts, resolve them
//! with a two-player leader/follower game and track the assigned leader with
//! a consensus controller. Legacy vehicles follow the Krauss model and use
//! gap-acceptance merging and avoidance lane changes.

pub mod cli;
pub mod conflict;
pub mod dynamics;
pub mod engine;
pub mod game;
pub mod metrics;
pub mod scenario;
