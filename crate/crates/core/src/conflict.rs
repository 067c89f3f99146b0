//! Conflict prediction: ramp and mainline-right vehicles are projected onto
//! a shared distance-to-merge frame and paired when their arrival times at
//! the merge point fall within a window.

use thiserror::Error;

use crate::dynamics::{VehicleId, VehicleState};
use crate::scenario::{ConflictParams, Lane, NetworkGeometry, VehicleClass};

/// Speed floor for ETA division, m/s.
pub const ETA_SPEED_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeFrameProjection {
    pub vehicle_id: VehicleId,
    /// Merge point minus own-lane position; negative past the merge point.
    pub distance_to_merge: f64,
    /// Position in the shared frame, `-distance_to_merge`.
    pub projected_position: f64,
    pub eta: f64,
    pub speed: f64,
    pub length: f64,
}

impl MergeFrameProjection {
    /// Bumper gap between two projected vehicles, subtracting the length of
    /// whichever one is ahead (smaller distance to merge).
    pub fn projected_gap(&self, other: &MergeFrameProjection) -> f64 {
        let lead_length = if self.distance_to_merge <= other.distance_to_merge {
            self.length
        } else {
            other.length
        };
        (self.distance_to_merge - other.distance_to_merge).abs() - lead_length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GameKind {
    NonCooperative,
    Cooperative,
    NoGame,
}

impl GameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::NonCooperative => "noncooperative",
            GameKind::Cooperative => "cooperative",
            GameKind::NoGame => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictPair {
    pub ramp_vehicle_id: VehicleId,
    pub mainline_vehicle_id: VehicleId,
    pub game_kind: GameKind,
    pub projected_gap: f64,
    /// Ramp vehicle's remaining distance to the end of the merge zone.
    pub d_end: f64,
    /// |eta_ramp - eta_mainline|
    pub eta_difference: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConflictError {
    #[error("vehicle {0} is on the left mainline lane and never conflicts directly")]
    WrongLane(VehicleId),
}

pub fn project_to_merge_frame(
    state: &VehicleState,
    geometry: &NetworkGeometry,
) -> Result<MergeFrameProjection, ConflictError> {
    if state.lane == Lane::MainlineLeft {
        return Err(ConflictError::WrongLane(state.id));
    }
    let d = geometry.distance_to_merge(state.lane, state.position);
    Ok(MergeFrameProjection {
        vehicle_id: state.id,
        distance_to_merge: d,
        projected_position: -d,
        eta: d / state.speed.max(ETA_SPEED_FLOOR),
        speed: state.speed,
        length: state.length,
    })
}

pub fn pair_game_kind(ramp: VehicleClass, mainline: VehicleClass) -> GameKind {
    use VehicleClass::*;
    match (ramp, mainline) {
        (Cav, Cav) => GameKind::Cooperative,
        (Cav, Legacy) | (Legacy, Cav) => GameKind::NonCooperative,
        (Legacy, Legacy) => GameKind::NoGame,
    }
}

/// Picks the mainline candidate whose ETA is closest to the ramp vehicle's.
///
/// Returns the candidate and the absolute ETA difference. Candidates must
/// already be restricted to the detection range (see [`in_detection_range`]).
pub fn predict_conflict<'a>(
    ramp: &MergeFrameProjection,
    candidates: impl IntoIterator<Item = &'a MergeFrameProjection>,
    horizon: f64,
    window: f64,
) -> Option<(&'a MergeFrameProjection, f64)> {
    if ramp.eta >= horizon {
        return None;
    }
    let mut best: Option<(&MergeFrameProjection, f64)> = None;
    for c in candidates {
        let diff = (ramp.eta - c.eta).abs();
        // Ties go to the candidate closer to the merge point, then lower id.
        let better = match best {
            None => true,
            Some((b, bd)) => {
                diff < bd
                    || (diff == bd
                        && (c.distance_to_merge, c.vehicle_id) < (b.distance_to_merge, b.vehicle_id))
            }
        };
        if better {
            best = Some((c, diff));
        }
    }
    best.filter(|(c, diff)| *diff < window && c.eta < horizon)
}

/// Whether a mainline-right projection lies between the detection range and
/// the end of the merge zone.
pub fn in_detection_range(
    p: &MergeFrameProjection,
    geometry: &NetworkGeometry,
    params: &ConflictParams,
) -> bool {
    p.distance_to_merge >= -geometry.merge_zone_length
        && p.distance_to_merge <= params.detection_range
}

/// A ramp vehicle with its class, ready for pairing.
#[derive(Debug, Clone, Copy)]
pub struct Candidate {
    pub projection: MergeFrameProjection,
    pub class: VehicleClass,
}

/// Forms this step's conflict pairs.
///
/// Each ramp vehicle proposes its best mainline candidate; when several ramp
/// vehicles propose the same mainline vehicle, the one with the smallest ETA
/// difference keeps it and the others stay unpaired until the next step.
/// The result is ordered by ramp-vehicle ETA.
pub fn form_pairs(
    ramp: &[Candidate],
    mainline: &[Candidate],
    geometry: &NetworkGeometry,
    params: &ConflictParams,
) -> Vec<ConflictPair> {
    let in_range: Vec<&Candidate> = mainline
        .iter()
        .filter(|c| in_detection_range(&c.projection, geometry, params))
        .collect();
    let projections: Vec<MergeFrameProjection> = in_range.iter().map(|c| c.projection).collect();

    let mut proposals: Vec<ConflictPair> = Vec::new();
    for r in ramp {
        let Some((m, diff)) =
            predict_conflict(&r.projection, &projections, params.horizon, params.window)
        else {
            continue;
        };
        let m_class = in_range
            .iter()
            .find(|c| c.projection.vehicle_id == m.vehicle_id)
            .map(|c| c.class)
            .expect("candidate came from this list");
        proposals.push(ConflictPair {
            ramp_vehicle_id: r.projection.vehicle_id,
            mainline_vehicle_id: m.vehicle_id,
            game_kind: pair_game_kind(r.class, m_class),
            projected_gap: r.projection.projected_gap(m),
            d_end: (geometry.merge_zone_length + r.projection.distance_to_merge).max(0.0),
            eta_difference: diff,
        });
    }

    let ramp_eta = |id: VehicleId| {
        ramp.iter()
            .find(|c| c.projection.vehicle_id == id)
            .map(|c| c.projection.eta)
            .unwrap_or(f64::INFINITY)
    };
    let mut winners: Vec<ConflictPair> = proposals
        .iter()
        .filter(|p| {
            !proposals.iter().any(|q| {
                q.mainline_vehicle_id == p.mainline_vehicle_id
                    && q.ramp_vehicle_id != p.ramp_vehicle_id
                    && (q.eta_difference, q.ramp_vehicle_id) < (p.eta_difference, p.ramp_vehicle_id)
            })
        })
        .copied()
        .collect();
    winners.sort_by(|a, b| {
        ramp_eta(a.ramp_vehicle_id)
            .total_cmp(&ramp_eta(b.ramp_vehicle_id))
            .then(a.ramp_vehicle_id.cmp(&b.ramp_vehicle_id))
    });
    winners
}
