//! Flat `key = value` scenario files.
//!
//! Every tunable of a run lives in [`ScenarioConfig`]. Absent keys take the
//! documented defaults; unknown keys and out-of-range values are rejected
//! rather than clamped so that a file always means exactly one run.

use std::fmt;

use super::ScenarioError;

/// Lower/upper bounds of the longitudinal acceleration, m/s².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelBounds {
    pub min: f64,
    pub max: f64,
}

impl AccelBounds {
    pub fn clamp(&self, accel: f64) -> f64 {
        accel.clamp(self.min, self.max)
    }
}

impl Default for AccelBounds {
    fn default() -> Self {
        Self { min: -5.0, max: 3.0 }
    }
}

/// Closed interval `[low, high]` used for uniformly sampled driver traits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub low: f64,
    pub high: f64,
}

/// Gains of the consensus longitudinal controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    /// Adjacency weight between ego and its target.
    pub adjacency: f64,
    /// Spacing gain, 1/s².
    pub k_gain: f64,
    /// Speed-error gain, s.
    pub gamma_gain: f64,
    /// Constant communication delay, s.
    pub comm_delay: f64,
    /// Desired time gap, s.
    pub desired_time_gap: f64,
    /// Free-flow speed tracking gain, 1/s.
    pub free_flow_gain: f64,
}

impl Default for ControllerParams {
    fn default() -> Self {
        Self {
            adjacency: 1.0,
            k_gain: 0.3,
            gamma_gain: 1.5,
            comm_delay: 0.0,
            desired_time_gap: 1.0,
            free_flow_gain: 0.4,
        }
    }
}

/// Parameters of the merge game cost functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameParams {
    /// Minimum safe time headway (3-second rule), s.
    pub safe_time_headway: f64,
    /// Prediction step used to evaluate actions, s.
    pub prediction_step: f64,
    /// Finite stand-in for the forbidden Leader/Leader and Follower/Follower cells.
    pub infinity_cost: f64,
    /// Evaluate TTC with the denominator `(v_f + dv_f) - (v_p - dv_p)` instead
    /// of extrapolating both speeds the same way.
    pub literal_ttc_sign: bool,
    /// Seconds a resolved role pair is held before the game is re-solved.
    pub commitment_window: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        Self {
            safe_time_headway: 3.0,
            prediction_step: 0.5,
            infinity_cost: 1.0e6,
            literal_ttc_sign: false,
            commitment_window: 0.0,
        }
    }
}

/// Resistance-power fuel surrogate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuelParams {
    /// kg
    pub mass: f64,
    /// Drag coefficient times frontal area, m².
    pub cda: f64,
    /// kg/m³
    pub air_density: f64,
    pub rolling_coeff: f64,
    /// m/s²
    pub gravity: f64,
    /// Fuel rate at zero or negative tractive power, g/s.
    pub idle_rate: f64,
    /// Fuel per unit of positive tractive energy, g/J.
    pub energy_slope: f64,
}

impl Default for FuelParams {
    fn default() -> Self {
        Self {
            mass: 1500.0,
            cda: 0.736,
            air_density: 1.225,
            rolling_coeff: 0.015,
            gravity: 9.81,
            idle_rate: 0.4,
            energy_slope: 7.66e-5,
        }
    }
}

/// Merge-area layout as configured. Validated by [`super::build_network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    pub ramp_approach_length: f64,
    pub mainline_approach_length: f64,
    pub merge_zone_length: f64,
    pub downstream_length: f64,
    pub mainline_lane_count: u32,
    pub speed_limit: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            ramp_approach_length: 250.0,
            mainline_approach_length: 280.0,
            merge_zone_length: 89.0,
            downstream_length: 200.0,
            mainline_lane_count: 2,
            speed_limit: 20.0,
        }
    }
}

/// Conflict detection and lane-change settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConflictParams {
    /// Mainline vehicles farther than this upstream of the merge point are ignored, m.
    pub detection_range: f64,
    /// Maximum ETA difference for two vehicles to conflict, s.
    pub window: f64,
    /// Conflicts are only predicted for ETAs below this, s.
    pub horizon: f64,
    /// Time-gap term of the gap-acceptance predicate, s.
    pub gap_time_safe: f64,
}

impl Default for ConflictParams {
    fn default() -> Self {
        Self {
            detection_range: 150.0,
            window: 2.0,
            horizon: 15.0,
            gap_time_safe: 0.5,
        }
    }
}

/// Krauss car-following parameters shared by legacy vehicles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KraussParams {
    /// Driver reaction time, s.
    pub reaction_time: f64,
    /// Maximum deceleration assumed in the safe speed, m/s² (positive).
    pub max_decel: f64,
}

impl Default for KraussParams {
    fn default() -> Self {
        Self {
            reaction_time: 1.0,
            max_decel: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Total demand over all origins, vehicles/hour.
    pub demand_vph: f64,
    pub penetration_rate: f64,
    pub ramp_demand_fraction: f64,
    /// s
    pub duration: f64,
    /// Simulation step, s.
    pub timestep: f64,
    pub seed: u64,
    pub initial_speed_ramp: f64,
    pub initial_speed_mainline: f64,
    pub desired_speed: f64,
    pub desired_time_headway: f64,
    pub min_gap: f64,
    pub vehicle_length: f64,
    pub accel_bounds: AccelBounds,
    pub driver_sigma_range: Range,
    pub desired_speed_multiplier_range: Range,
    pub network: NetworkParams,
    pub conflict: ConflictParams,
    pub krauss: KraussParams,
    pub controller: ControllerParams,
    pub game: GameParams,
    pub fuel: FuelParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            demand_vph: 1400.0,
            penetration_rate: 0.0,
            ramp_demand_fraction: 1.0 / 3.0,
            duration: 1800.0,
            timestep: 0.02,
            seed: 1,
            initial_speed_ramp: 15.0,
            initial_speed_mainline: 20.0,
            desired_speed: 20.0,
            desired_time_headway: 1.0,
            min_gap: 5.0,
            vehicle_length: 5.0,
            accel_bounds: AccelBounds::default(),
            driver_sigma_range: Range { low: 0.2, high: 0.8 },
            desired_speed_multiplier_range: Range { low: 0.9, high: 1.1 },
            network: NetworkParams::default(),
            conflict: ConflictParams::default(),
            krauss: KraussParams::default(),
            controller: ControllerParams::default(),
            game: GameParams::default(),
            fuel: FuelParams::default(),
        }
    }
}

/// Congestion label for the three reference demand levels.
pub fn congestion_label(demand_vph: f64) -> &'static str {
    match demand_vph.round() as i64 {
        1400 => "light",
        2400 => "moderate",
        3400 => "congested",
        _ => "custom",
    }
}

fn violation(key: &str, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::InvariantViolation {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ScenarioError> {
    let v: f64 = value
        .parse()
        .map_err(|_| violation(key, format!("`{value}` is not a number")))?;
    if !v.is_finite() {
        return Err(violation(key, "must be finite"));
    }
    Ok(v)
}

fn parse_pair(key: &str, value: &str) -> Result<(f64, f64), ScenarioError> {
    let mut parts = value.split(',').map(str::trim);
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => Ok((parse_f64(key, a)?, parse_f64(key, b)?)),
        _ => Err(violation(key, "expected two comma-separated numbers")),
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ScenarioError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(violation(key, format!("`{value}` is not true/false"))),
    }
}

impl ScenarioConfig {
    /// Parses a scenario document. See the crate README for the key list.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let mut cfg = Self::default();
        let mut tgap_set = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or(ScenarioError::MalformedLine(idx + 1))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ScenarioError::MalformedLine(idx + 1));
            }
            if key == "controller.desired_time_gap" {
                tgap_set = true;
            }
            cfg.set(key, value)?;
        }
        if !tgap_set {
            cfg.controller.desired_time_gap = cfg.desired_time_headway;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ScenarioError> {
        let f = |v: &str| parse_f64(key, v);
        match key {
            "demand_vph" => self.demand_vph = f(value)?,
            "penetration_rate" => self.penetration_rate = f(value)?,
            "ramp_demand_fraction" => self.ramp_demand_fraction = f(value)?,
            "duration" => self.duration = f(value)?,
            "timestep" => self.timestep = f(value)?,
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| violation(key, format!("`{value}` is not a u64")))?
            }
            "initial_speed_ramp" => self.initial_speed_ramp = f(value)?,
            "initial_speed_mainline" => self.initial_speed_mainline = f(value)?,
            "desired_speed" => self.desired_speed = f(value)?,
            "desired_time_headway" => self.desired_time_headway = f(value)?,
            "min_gap" => self.min_gap = f(value)?,
            "vehicle_length" => self.vehicle_length = f(value)?,
            "accel_bounds" => {
                let (min, max) = parse_pair(key, value)?;
                self.accel_bounds = AccelBounds { min, max };
            }
            "driver_sigma_range" => {
                let (low, high) = parse_pair(key, value)?;
                self.driver_sigma_range = Range { low, high };
            }
            "desired_speed_multiplier_range" => {
                let (low, high) = parse_pair(key, value)?;
                self.desired_speed_multiplier_range = Range { low, high };
            }
            "ramp_approach_length" => self.network.ramp_approach_length = f(value)?,
            "mainline_approach_length" => self.network.mainline_approach_length = f(value)?,
            "merge_zone_length" => self.network.merge_zone_length = f(value)?,
            "downstream_length" => self.network.downstream_length = f(value)?,
            "mainline_lane_count" => {
                self.network.mainline_lane_count = value
                    .parse()
                    .map_err(|_| violation(key, format!("`{value}` is not a count")))?
            }
            "speed_limit" => self.network.speed_limit = f(value)?,
            "conflict.detection_range" => self.conflict.detection_range = f(value)?,
            "conflict.window" => self.conflict.window = f(value)?,
            "conflict.horizon" => self.conflict.horizon = f(value)?,
            "conflict.gap_time_safe" => self.conflict.gap_time_safe = f(value)?,
            "krauss.reaction_time" => self.krauss.reaction_time = f(value)?,
            "krauss.max_decel" => self.krauss.max_decel = f(value)?,
            "controller.adjacency" => self.controller.adjacency = f(value)?,
            "controller.k_gain" => self.controller.k_gain = f(value)?,
            "controller.gamma_gain" => self.controller.gamma_gain = f(value)?,
            "controller.comm_delay" => self.controller.comm_delay = f(value)?,
            "controller.desired_time_gap" => self.controller.desired_time_gap = f(value)?,
            "controller.free_flow_gain" => self.controller.free_flow_gain = f(value)?,
            "game.safe_time_headway" => self.game.safe_time_headway = f(value)?,
            "game.prediction_step" => self.game.prediction_step = f(value)?,
            "game.infinity_cost" => self.game.infinity_cost = f(value)?,
            "game.literal_ttc_sign" => self.game.literal_ttc_sign = parse_bool(key, value)?,
            "game.commitment_window" => self.game.commitment_window = f(value)?,
            "fuel.mass" => self.fuel.mass = f(value)?,
            "fuel.cda" => self.fuel.cda = f(value)?,
            "fuel.air_density" => self.fuel.air_density = f(value)?,
            "fuel.rolling_coeff" => self.fuel.rolling_coeff = f(value)?,
            "fuel.gravity" => self.fuel.gravity = f(value)?,
            "fuel.idle_rate" => self.fuel.idle_rate = f(value)?,
            "fuel.energy_slope" => self.fuel.energy_slope = f(value)?,
            _ => return Err(ScenarioError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Checks every scalar invariant. Geometry is checked by `build_network`.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 {
                Ok(())
            } else {
                Err(violation(key, "must be > 0"))
            }
        };
        let fraction = |key: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(violation(key, "must lie in [0, 1]"))
            }
        };
        let range = |key: &str, r: Range, lo_bound: f64| {
            if r.low >= lo_bound && r.low <= r.high {
                Ok(())
            } else {
                Err(violation(key, "expected low <= high within bounds"))
            }
        };

        if self.demand_vph < 0.0 {
            return Err(violation("demand_vph", "must be >= 0"));
        }
        fraction("penetration_rate", self.penetration_rate)?;
        if !(self.ramp_demand_fraction > 0.0 && self.ramp_demand_fraction < 1.0) {
            return Err(violation("ramp_demand_fraction", "must lie in (0, 1)"));
        }
        positive("duration", self.duration)?;
        positive("timestep", self.timestep)?;
        positive("initial_speed_ramp", self.initial_speed_ramp)?;
        positive("initial_speed_mainline", self.initial_speed_mainline)?;
        positive("desired_speed", self.desired_speed)?;
        positive("desired_time_headway", self.desired_time_headway)?;
        positive("min_gap", self.min_gap)?;
        positive("vehicle_length", self.vehicle_length)?;
        if !(self.accel_bounds.min < 0.0 && self.accel_bounds.max > 0.0) {
            return Err(violation("accel_bounds", "require a_min < 0 < a_max"));
        }
        range("driver_sigma_range", self.driver_sigma_range, 0.0)?;
        if self.driver_sigma_range.high > 1.0 {
            return Err(violation("driver_sigma_range", "sigma must not exceed 1"));
        }
        range(
            "desired_speed_multiplier_range",
            self.desired_speed_multiplier_range,
            f64::MIN_POSITIVE,
        )?;

        positive("conflict.detection_range", self.conflict.detection_range)?;
        positive("conflict.window", self.conflict.window)?;
        positive("conflict.horizon", self.conflict.horizon)?;
        if self.conflict.gap_time_safe < 0.0 {
            return Err(violation("conflict.gap_time_safe", "must be >= 0"));
        }
        positive("krauss.reaction_time", self.krauss.reaction_time)?;
        positive("krauss.max_decel", self.krauss.max_decel)?;

        if self.controller.adjacency < 0.0 {
            return Err(violation("controller.adjacency", "must be >= 0"));
        }
        positive("controller.k_gain", self.controller.k_gain)?;
        positive("controller.gamma_gain", self.controller.gamma_gain)?;
        if self.controller.comm_delay < 0.0 {
            return Err(violation("controller.comm_delay", "must be >= 0"));
        }
        positive("controller.desired_time_gap", self.controller.desired_time_gap)?;
        positive("controller.free_flow_gain", self.controller.free_flow_gain)?;

        positive("game.safe_time_headway", self.game.safe_time_headway)?;
        positive("game.prediction_step", self.game.prediction_step)?;
        // Finite costs never exceed 2, so the sentinel must sit well above that.
        if !(self.game.infinity_cost > 2.0) {
            return Err(violation("game.infinity_cost", "must exceed every finite cost (> 2)"));
        }
        if self.game.commitment_window < 0.0 {
            return Err(violation("game.commitment_window", "must be >= 0"));
        }

        positive("fuel.mass", self.fuel.mass)?;
        positive("fuel.cda", self.fuel.cda)?;
        positive("fuel.air_density", self.fuel.air_density)?;
        positive("fuel.rolling_coeff", self.fuel.rolling_coeff)?;
        positive("fuel.gravity", self.fuel.gravity)?;
        positive("fuel.idle_rate", self.fuel.idle_rate)?;
        positive("fuel.energy_slope", self.fuel.energy_slope)?;
        Ok(())
    }

    pub fn congestion_label(&self) -> &'static str {
        congestion_label(self.demand_vph)
    }
}

/// Writes the fully resolved configuration back out as a scenario document.
/// Parsing the output yields an identical config.
impl fmt::Display for ScenarioConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:?}` on f64 prints the shortest string that round-trips exactly.
        writeln!(f, "demand_vph = {:?}", self.demand_vph)?;
        writeln!(f, "penetration_rate = {:?}", self.penetration_rate)?;
        writeln!(f, "ramp_demand_fraction = {:?}", self.ramp_demand_fraction)?;
        writeln!(f, "duration = {:?}", self.duration)?;
        writeln!(f, "timestep = {:?}", self.timestep)?;
        writeln!(f, "seed = {}", self.seed)?;
        writeln!(f, "initial_speed_ramp = {:?}", self.initial_speed_ramp)?;
        writeln!(f, "initial_speed_mainline = {:?}", self.initial_speed_mainline)?;
        writeln!(f, "desired_speed = {:?}", self.desired_speed)?;
        writeln!(f, "desired_time_headway = {:?}", self.desired_time_headway)?;
        writeln!(f, "min_gap = {:?}", self.min_gap)?;
        writeln!(f, "vehicle_length = {:?}", self.vehicle_length)?;
        writeln!(f, "accel_bounds = {:?}, {:?}", self.accel_bounds.min, self.accel_bounds.max)?;
        writeln!(
            f,
            "driver_sigma_range = {:?}, {:?}",
            self.driver_sigma_range.low, self.driver_sigma_range.high
        )?;
        writeln!(
            f,
            "desired_speed_multiplier_range = {:?}, {:?}",
            self.desired_speed_multiplier_range.low, self.desired_speed_multiplier_range.high
        )?;
        let n = &self.network;
        writeln!(f, "ramp_approach_length = {:?}", n.ramp_approach_length)?;
        writeln!(f, "mainline_approach_length = {:?}", n.mainline_approach_length)?;
        writeln!(f, "merge_zone_length = {:?}", n.merge_zone_length)?;
        writeln!(f, "downstream_length = {:?}", n.downstream_length)?;
        writeln!(f, "mainline_lane_count = {}", n.mainline_lane_count)?;
        writeln!(f, "speed_limit = {:?}", n.speed_limit)?;
        let c = &self.conflict;
        writeln!(f, "conflict.detection_range = {:?}", c.detection_range)?;
        writeln!(f, "conflict.window = {:?}", c.window)?;
        writeln!(f, "conflict.horizon = {:?}", c.horizon)?;
        writeln!(f, "conflict.gap_time_safe = {:?}", c.gap_time_safe)?;
        writeln!(f, "krauss.reaction_time = {:?}", self.krauss.reaction_time)?;
        writeln!(f, "krauss.max_decel = {:?}", self.krauss.max_decel)?;
        let k = &self.controller;
        writeln!(f, "controller.adjacency = {:?}", k.adjacency)?;
        writeln!(f, "controller.k_gain = {:?}", k.k_gain)?;
        writeln!(f, "controller.gamma_gain = {:?}", k.gamma_gain)?;
        writeln!(f, "controller.comm_delay = {:?}", k.comm_delay)?;
        writeln!(f, "controller.desired_time_gap = {:?}", k.desired_time_gap)?;
        writeln!(f, "controller.free_flow_gain = {:?}", k.free_flow_gain)?;
        let g = &self.game;
        writeln!(f, "game.safe_time_headway = {:?}", g.safe_time_headway)?;
        writeln!(f, "game.prediction_step = {:?}", g.prediction_step)?;
        writeln!(f, "game.infinity_cost = {:?}", g.infinity_cost)?;
        writeln!(f, "game.literal_ttc_sign = {}", g.literal_ttc_sign)?;
        writeln!(f, "game.commitment_window = {:?}", g.commitment_window)?;
        let u = &self.fuel;
        writeln!(f, "fuel.mass = {:?}", u.mass)?;
        writeln!(f, "fuel.cda = {:?}", u.cda)?;
        writeln!(f, "fuel.air_density = {:?}", u.air_density)?;
        writeln!(f, "fuel.rolling_coeff = {:?}", u.rolling_coeff)?;
        writeln!(f, "fuel.gravity = {:?}", u.gravity)?;
        writeln!(f, "fuel.idle_rate = {:?}", u.idle_rate)?;
        writeln!(f, "fuel.energy_slope = {:?}", u.energy_slope)
    }
}
