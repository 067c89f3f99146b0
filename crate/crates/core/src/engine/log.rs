use crate::conflict::GameKind;
use crate::dynamics::{Role, VehicleId};
use crate::scenario::{Lane, VehicleClass};

#[derive(Debug, Clone, PartialEq)]
pub struct TripRecord {
    pub id: VehicleId,
    pub vehicle_class: VehicleClass,
    pub origin: Lane,
    pub depart_time: f64,
    pub arrival_time: Option<f64>,
    pub distance_traveled: f64,
    pub fuel_grams: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub id: VehicleId,
    pub time: f64,
    pub lane: Lane,
    pub position: f64,
    pub speed: f64,
    pub accel: f64,
    pub role: Role,
    pub target_id: Option<VehicleId>,
}

/// One resolved game. `ego` is the CAV in a non-cooperative game and the
/// ramp vehicle in a cooperative one; risk and mobility terms belong to the
/// ego's chosen action.
#[derive(Debug, Clone, PartialEq)]
pub struct GameTraceRecord {
    pub time: f64,
    pub ego_id: VehicleId,
    pub comp_id: VehicleId,
    pub kind: GameKind,
    pub ego_role: Role,
    pub ego_cost_lead: f64,
    pub ego_cost_follow: f64,
    pub comp_cost_lead: Option<f64>,
    pub comp_cost_follow: Option<f64>,
    pub risk1: f64,
    pub risk_d2e: f64,
    pub mobility: f64,
}

/// Which trajectory rows to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrajectoryOutput {
    #[default]
    None,
    /// Every n-th step; `Every(1)` keeps all rows.
    Every(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub trajectories: TrajectoryOutput,
    pub game_trace: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimulationLog {
    /// Sorted by vehicle id.
    pub trips: Vec<TripRecord>,
    pub trajectories: Vec<TrajectoryRecord>,
    pub games: Vec<GameTraceRecord>,
    pub steps: u64,
    pub end_time: f64,
    /// Smallest bumper gap between same-lane neighbours seen at any step.
    pub min_gap: f64,
    /// Steps where the safe-speed cap forced braking beyond the acceleration bound.
    pub emergency_brakes: u64,
    /// Times a game pair flipped its role assignment between consecutive steps.
    pub role_switches: u64,
    pub merges: u64,
    pub avoidance_lane_changes: u64,
}
