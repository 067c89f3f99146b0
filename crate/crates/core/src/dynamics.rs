//! Longitudinal vehicle models: consensus control for CAVs, Krauss car
//! following for legacy vehicles, free-flow speed tracking and the
//! semi-implicit Euler integrator shared by both.

use rand::Rng;
use thiserror::Error;

use crate::scenario::{AccelBounds, ControllerParams, KraussParams, Lane, VehicleClass};

pub type VehicleId = u64;

/// Role assigned by the merge game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Leader,
    Follower,
    Unassigned,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Leader => "leader",
            Role::Follower => "follower",
            Role::Unassigned => "none",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub id: VehicleId,
    pub vehicle_class: VehicleClass,
    pub origin: Lane,
    pub lane: Lane,
    /// Front bumper position in the current lane's frame, m.
    pub position: f64,
    pub speed: f64,
    /// Acceleration realised over the last step, m/s².
    pub accel: f64,
    pub length: f64,
    pub driver_sigma: f64,
    pub desired_speed: f64,
    pub role: Role,
    pub target_id: Option<VehicleId>,
    pub depart_time: f64,
    pub distance_traveled: f64,
}

impl VehicleState {
    pub fn is_cav(&self) -> bool {
        self.vehicle_class == VehicleClass::Cav
    }

    pub fn kinematics(&self) -> Kinematics {
        Kinematics {
            position: self.position,
            speed: self.speed,
            length: self.length,
        }
    }
}

/// Position, speed and length of a vehicle in some shared longitudinal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub position: f64,
    pub speed: f64,
    pub length: f64,
}

impl Kinematics {
    /// A stopped zero-length obstacle, e.g. the end of the ramp lane.
    pub fn wall(position: f64) -> Self {
        Self {
            position,
            speed: 0.0,
            length: 0.0,
        }
    }

    /// Bumper-to-bumper gap from `self` (behind) to `leader`.
    pub fn gap_to(&self, leader: &Kinematics) -> f64 {
        leader.position - leader.length - self.position
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("consensus target snapshot is unavailable")]
    MissingTarget,
    #[error("negative gap {gap:.3} m to leader (upstream collision)")]
    NegativeGap { gap: f64 },
}

/// Unclamped consensus reference acceleration.
///
/// `target` is the delayed snapshot of the leader (`τ` seconds old).
pub fn consensus_accel_raw(ego: Kinematics, target: Kinematics, params: &ControllerParams) -> f64 {
    let tau = params.comm_delay;
    let spacing_error =
        ego.position - target.position + target.length + ego.speed * (params.desired_time_gap + tau);
    let speed_error = ego.speed - target.speed;
    -params.adjacency * params.k_gain * (spacing_error + params.gamma_gain * speed_error)
}

/// Consensus reference acceleration clamped to the acceleration bounds.
pub fn consensus_accel(
    ego: Kinematics,
    target: Option<Kinematics>,
    params: &ControllerParams,
    bounds: AccelBounds,
) -> Result<f64, DynamicsError> {
    let target = target.ok_or(DynamicsError::MissingTarget)?;
    Ok(bounds.clamp(consensus_accel_raw(ego, target, params)))
}

/// Speed-tracking law toward `desired_speed`.
pub fn free_flow_accel(speed: f64, desired_speed: f64, gain: f64, bounds: AccelBounds) -> f64 {
    bounds.clamp(gain * (desired_speed - speed))
}

/// Krauss safe speed: the largest speed from which the follower can still
/// stop behind a leader braking at `max_decel`, given `reaction_time`.
pub fn safe_speed(
    gap: f64,
    follower_speed: f64,
    leader_speed: f64,
    reaction_time: f64,
    max_decel: f64,
) -> f64 {
    leader_speed
        + (gap - leader_speed * reaction_time)
            / ((leader_speed + follower_speed) / (2.0 * max_decel) + reaction_time)
}

/// Per-driver inputs to the Krauss model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KraussDriver {
    pub kinematics: Kinematics,
    pub desired_speed: f64,
    pub sigma: f64,
}

/// Next-step speed of a Krauss driver. `noise` supplies the dawdling draw.
pub fn krauss_speed<R: Rng + ?Sized>(
    driver: &KraussDriver,
    leader: Option<Kinematics>,
    params: &KraussParams,
    accel_max: f64,
    dt: f64,
    noise: &mut R,
) -> Result<f64, DynamicsError> {
    let v_f = driver.kinematics.speed;
    let v_safe = match leader {
        Some(l) => {
            let gap = driver.kinematics.gap_to(&l);
            if gap < 0.0 {
                return Err(DynamicsError::NegativeGap { gap });
            }
            safe_speed(gap, v_f, l.speed, params.reaction_time, params.max_decel)
        }
        None => f64::INFINITY,
    };
    let v_des = v_safe.min(v_f + accel_max * dt).min(driver.desired_speed);
    let u: f64 = noise.random();
    Ok((v_des - driver.sigma * accel_max * dt * u).max(0.0))
}

/// Longitudinal command for one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Command {
    Accel(f64),
    Speed(f64),
}

/// Semi-implicit Euler step: speed first, then position with the new speed.
/// The stored acceleration is the one actually realised over the step.
pub fn integrate(state: &VehicleState, command: Command, dt: f64) -> VehicleState {
    let new_speed = match command {
        Command::Accel(a) => (state.speed + a * dt).max(0.0),
        Command::Speed(v) => v.max(0.0),
    };
    let step = new_speed * dt;
    VehicleState {
        position: state.position + step,
        speed: new_speed,
        accel: (new_speed - state.speed) / dt,
        distance_traveled: state.distance_traveled + step,
        ..state.clone()
    }
}
