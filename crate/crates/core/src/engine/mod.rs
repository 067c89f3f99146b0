//! Time-stepped simulation of the merge area.
//!
//! Each step works on a frozen snapshot of the previous state: spawn, conflict
//! pairing, games, longitudinal commands, integration, lane changes, then
//! collision checks, logging and arrivals.

mod lanes;
mod log;
mod world;

use thiserror::Error;

use crate::dynamics::{DynamicsError, VehicleId};
use crate::scenario::{ScenarioConfig, ScenarioError};

pub use lanes::{execute_merge, legacy_avoidance_lane_change, neighbours, GapAcceptance, LaneDecision};
pub use log::{GameTraceRecord, RunOptions, SimulationLog, TrajectoryOutput, TrajectoryRecord, TripRecord};
pub use world::{World, STOP_LINE_DECEL};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ScenarioError),
    #[error("CollisionDetected at t={time:.2}s: vehicle {follower} behind {leader}, gap {gap:.3} m\n{trace}")]
    Collision {
        time: f64,
        follower: VehicleId,
        leader: VehicleId,
        gap: f64,
        trace: String,
    },
    #[error("NonTermination: {remaining} vehicles left at t={time:.2}s")]
    NonTermination { time: f64, remaining: usize },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Runs one scenario to completion.
pub fn run(config: &ScenarioConfig, options: RunOptions) -> Result<SimulationLog, EngineError> {
    let mut world = World::new(config.clone(), options)?;
    world.run_to_completion()?;
    Ok(world.into_log())
}
