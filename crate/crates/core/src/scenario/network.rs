use super::{ScenarioConfig, ScenarioError};

/// Lane a vehicle currently occupies, which is also where it can originate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lane {
    Ramp,
    MainlineRight,
    MainlineLeft,
}

impl Lane {
    pub const ALL: [Lane; 3] = [Lane::Ramp, Lane::MainlineRight, Lane::MainlineLeft];

    pub fn as_str(self) -> &'static str {
        match self {
            Lane::Ramp => "ramp",
            Lane::MainlineRight => "mainline_right",
            Lane::MainlineLeft => "mainline_left",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Lane::Ramp => 0,
            Lane::MainlineRight => 1,
            Lane::MainlineLeft => 2,
        }
    }

    pub fn is_mainline(self) -> bool {
        !matches!(self, Lane::Ramp)
    }
}

/// Straight-segment merge layout.
///
/// Each lane has its own longitudinal frame with the spawn point at 0. The
/// ramp frame and the two mainline frames meet at the merge point, so a
/// position in the ramp frame maps onto the mainline by adding
/// [`NetworkGeometry::ramp_to_mainline_offset`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkGeometry {
    pub ramp_approach_length: f64,
    pub mainline_approach_length: f64,
    pub merge_zone_length: f64,
    /// Mainline length past the end of the merge zone before vehicles exit.
    pub downstream_length: f64,
    pub mainline_lane_count: u32,
    pub speed_limit: f64,
}

impl NetworkGeometry {
    /// Merge point in the given lane's frame.
    pub fn merge_point(&self, lane: Lane) -> f64 {
        match lane {
            Lane::Ramp => self.ramp_approach_length,
            Lane::MainlineRight | Lane::MainlineLeft => self.mainline_approach_length,
        }
    }

    /// End of the merge zone in the given lane's frame. The ramp lane stops here.
    pub fn zone_end(&self, lane: Lane) -> f64 {
        self.merge_point(lane) + self.merge_zone_length
    }

    pub fn ramp_to_mainline_offset(&self) -> f64 {
        self.mainline_approach_length - self.ramp_approach_length
    }

    /// Mainline position at which vehicles leave the network.
    pub fn exit_position(&self) -> f64 {
        self.zone_end(Lane::MainlineRight) + self.downstream_length
    }

    /// Signed distance from `position` (in `lane`'s frame) to the merge point.
    pub fn distance_to_merge(&self, lane: Lane, position: f64) -> f64 {
        self.merge_point(lane) - position
    }

    /// Position relative to the merge point, shared by all lanes.
    pub fn to_merge_frame(&self, lane: Lane, position: f64) -> f64 {
        position - self.merge_point(lane)
    }

    pub fn from_merge_frame(&self, lane: Lane, projected: f64) -> f64 {
        projected + self.merge_point(lane)
    }
}

/// Validates the configured geometry and returns the network.
pub fn build_network(config: &ScenarioConfig) -> Result<NetworkGeometry, ScenarioError> {
    let n = &config.network;
    let positive = |key: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ScenarioError::InvariantViolation {
                key: key.to_string(),
                reason: "must be > 0".into(),
            })
        }
    };
    positive("ramp_approach_length", n.ramp_approach_length)?;
    positive("mainline_approach_length", n.mainline_approach_length)?;
    positive("merge_zone_length", n.merge_zone_length)?;
    positive("downstream_length", n.downstream_length)?;
    positive("speed_limit", n.speed_limit)?;
    // Merges land in the right lane, avoidance lane changes in the left lane.
    // More lanes are not modelled.
    if n.mainline_lane_count != 2 {
        return Err(ScenarioError::InvariantViolation {
            key: "mainline_lane_count".into(),
            reason: "exactly 2 mainline lanes are supported".into(),
        });
    }
    Ok(NetworkGeometry {
        ramp_approach_length: n.ramp_approach_length,
        mainline_approach_length: n.mainline_approach_length,
        merge_zone_length: n.merge_zone_length,
        downstream_length: n.downstream_length,
        mainline_lane_count: n.mainline_lane_count,
        speed_limit: n.speed_limit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_layout() {
        let g = build_network(&ScenarioConfig::default()).unwrap();
        assert_eq!(g.merge_zone_length, 89.0);
        assert_eq!(g.speed_limit, 20.0);
        assert_eq!(g.distance_to_merge(Lane::Ramp, 0.0), 250.0);
        assert_eq!(g.distance_to_merge(Lane::MainlineRight, 0.0), 280.0);
        assert_eq!(g.ramp_to_mainline_offset(), 30.0);
    }

    #[test]
    fn frames_agree_on_merge_point() {
        let g = build_network(&ScenarioConfig::default()).unwrap();
        let ramp_merge = g.merge_point(Lane::Ramp);
        assert_eq!(
            ramp_merge + g.ramp_to_mainline_offset(),
            g.merge_point(Lane::MainlineRight)
        );
        for lane in Lane::ALL {
            assert_eq!(g.to_merge_frame(lane, g.merge_point(lane)), 0.0);
            assert_eq!(g.from_merge_frame(lane, g.to_merge_frame(lane, 12.5)), 12.5);
        }
    }

    #[test]
    fn degenerate_geometry_is_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.network.ramp_approach_length = 0.0;
        assert!(matches!(
            build_network(&cfg),
            Err(ScenarioError::InvariantViolation { key, .. }) if key == "ramp_approach_length"
        ));
        let mut cfg = ScenarioConfig::default();
        cfg.network.mainline_lane_count = 1;
        assert!(build_network(&cfg).is_err());
    }
}
