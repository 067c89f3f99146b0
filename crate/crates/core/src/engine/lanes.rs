use crate::dynamics::{safe_speed, Role, VehicleState};
use crate::scenario::{KraussParams, Lane, NetworkGeometry, ScenarioConfig};

/// Outcome of a lane-change check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LaneDecision {
    Stay,
    Change { lane: Lane, position: f64 },
}

/// Gap acceptance shared by merges and avoidance lane changes.
///
/// A gap is accepted when it exceeds `min_gap + v_follower * gap_time_safe`
/// and the follower across it can stay within its comfortable braking over
/// one step. The follower uses its own reaction time: the Krauss value for
/// legacy drivers, one step for CAVs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapAcceptance {
    pub min_gap: f64,
    pub gap_time_safe: f64,
    pub dt: f64,
    pub krauss: KraussParams,
    pub cav_max_decel: f64,
}

impl GapAcceptance {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self {
            min_gap: config.min_gap,
            gap_time_safe: config.conflict.gap_time_safe,
            dt: config.timestep,
            krauss: config.krauss,
            cav_max_decel: -config.accel_bounds.min,
        }
    }

    fn reaction_and_decel(&self, follower: &VehicleState) -> (f64, f64) {
        if follower.is_cav() {
            (self.dt, self.cav_max_decel)
        } else {
            (self.krauss.reaction_time, self.krauss.max_decel)
        }
    }

    /// Safe speed behind a leader, keeping `min_gap` at standstill.
    pub fn safe_speed_for(&self, follower: &VehicleState, gap: f64, leader_speed: f64) -> f64 {
        let (reaction, decel) = self.reaction_and_decel(follower);
        safe_speed(gap - self.min_gap, follower.speed, leader_speed, reaction, decel)
    }

    /// Whether `follower` may sit `gap` behind a leader moving at `leader_speed`.
    pub fn accepts(&self, follower: &VehicleState, gap: f64, leader_speed: f64) -> bool {
        let (_, decel) = self.reaction_and_decel(follower);
        gap >= self.min_gap + follower.speed * self.gap_time_safe
            && follower.speed - decel * self.dt <= self.safe_speed_for(follower, gap, leader_speed)
    }

    /// Checks both the lead and lag gap for `ego` placed at `position` in a lane
    /// whose occupants are `lane_vehicles`.
    pub fn fits(&self, ego: &VehicleState, position: f64, lane_vehicles: &[&VehicleState]) -> bool {
        let (lead, lag) = neighbours(position, lane_vehicles, ego.id);
        if let Some(lead) = lead {
            let gap = lead.position - lead.length - position;
            if !self.accepts(ego, gap, lead.speed) {
                return false;
            }
        }
        if let Some(lag) = lag {
            let gap = position - ego.length - lag.position;
            if !self.accepts(lag, gap, ego.speed) {
                return false;
            }
        }
        true
    }
}

/// Nearest vehicles at or ahead of / behind `position`, ignoring `skip`.
pub fn neighbours<'a>(
    position: f64,
    lane_vehicles: &[&'a VehicleState],
    skip: u64,
) -> (Option<&'a VehicleState>, Option<&'a VehicleState>) {
    let mut lead: Option<&VehicleState> = None;
    let mut lag: Option<&VehicleState> = None;
    for &v in lane_vehicles {
        if v.id == skip {
            continue;
        }
        if v.position >= position {
            if lead.is_none_or(|l| (v.position, v.id) < (l.position, l.id)) {
                lead = Some(v);
            }
        } else if lag.is_none_or(|l| (v.position, v.id) > (l.position, l.id)) {
            lag = Some(v);
        }
    }
    (lead, lag)
}

/// Merge check for a ramp vehicle inside the merge zone.
///
/// `follower_target` is the vehicle the ego was told to follow, if any; the
/// merge then also waits until that vehicle is ahead in the mainline.
pub fn execute_merge(
    vehicle: &VehicleState,
    mainline_right: &[&VehicleState],
    follower_target: Option<&VehicleState>,
    geometry: &NetworkGeometry,
    acceptance: &GapAcceptance,
) -> LaneDecision {
    if vehicle.lane != Lane::Ramp || vehicle.position < geometry.merge_point(Lane::Ramp) {
        return LaneDecision::Stay;
    }
    let position = vehicle.position + geometry.ramp_to_mainline_offset();
    if vehicle.role == Role::Follower {
        if let Some(t) = follower_target {
            let ahead = t.lane.is_mainline() && t.position - t.length >= position;
            if !ahead {
                return LaneDecision::Stay;
            }
        }
    }
    if acceptance.fits(vehicle, position, mainline_right) {
        LaneDecision::Change {
            lane: Lane::MainlineRight,
            position,
        }
    } else {
        LaneDecision::Stay
    }
}

/// Courtesy lane change of a legacy mainline-right vehicle paired with a ramp
/// vehicle: move left when the gaps allow it and the left lane is faster.
pub fn legacy_avoidance_lane_change(
    vehicle: &VehicleState,
    conflicting_ramp: &VehicleState,
    mainline_right: &[&VehicleState],
    mainline_left: &[&VehicleState],
    detection_range: f64,
    acceptance: &GapAcceptance,
) -> LaneDecision {
    if vehicle.is_cav() || vehicle.lane != Lane::MainlineRight {
        return LaneDecision::Stay;
    }
    if !acceptance.fits(vehicle, vehicle.position, mainline_left) {
        return LaneDecision::Stay;
    }
    let ahead_speed = |lane: &[&VehicleState]| {
        let (lead, _) = neighbours(vehicle.position, lane, vehicle.id);
        lead.filter(|l| l.position - vehicle.position <= detection_range)
            .map_or(f64::INFINITY, |l| l.speed)
    };
    let current = ahead_speed(mainline_right).min(conflicting_ramp.speed);
    let left = ahead_speed(mainline_left);
    if left > current {
        LaneDecision::Change {
            lane: Lane::MainlineLeft,
            position: vehicle.position,
        }
    } else {
        LaneDecision::Stay
    }
}
