//! Scenario configuration, merge-network geometry and traffic demand.

mod config;
mod demand;
mod network;

use thiserror::Error;

pub use config::{
    congestion_label, AccelBounds, ConflictParams, ControllerParams, FuelParams, GameParams,
    KraussParams, NetworkParams, Range, ScenarioConfig,
};
pub use demand::{
    generate_departures, mean_headway, origin_share, stream, Departure, DepartureSchedule,
    VehicleClass, NOISE_STREAM_BASE,
};
pub use network::{build_network, Lane, NetworkGeometry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("MalformedLine: line {0} is not `key = value`")]
    MalformedLine(usize),
    #[error("UnknownKey: {0}")]
    UnknownKey(String),
    #[error("InvariantViolation: {key}: {reason}")]
    InvariantViolation { key: String, reason: String },
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    ScenarioConfig::parse(text)
}
