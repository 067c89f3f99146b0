//! Poisson departure schedule.
//!
//! Every random draw comes from a ChaCha8 generator seeded with the scenario
//! seed. Each (origin, purpose) pair owns its own stream so that changing the
//! demand at one origin, or the penetration rate, never shifts the draws made
//! for another origin:
//!
//! | stream | purpose                              |
//! |--------|--------------------------------------|
//! | 3·o+0  | inter-departure headways of origin o |
//! | 3·o+1  | CAV/legacy classification            |
//! | 3·o+2  | driver traits (σ, speed multiplier)  |
//!
//! with o = 0 ramp, 1 mainline right, 2 mainline left. Streams from
//! [`NOISE_STREAM_BASE`] upward are reserved for per-vehicle driver noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{Lane, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VehicleClass {
    Cav,
    Legacy,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::Cav => "cav",
            VehicleClass::Legacy => "legacy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Departure {
    pub departure_time: f64,
    pub origin: Lane,
    pub vehicle_class: VehicleClass,
    pub driver_sigma: f64,
    pub desired_speed_multiplier: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DepartureSchedule {
    pub entries: Vec<Departure>,
}

impl DepartureSchedule {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub const NOISE_STREAM_BASE: u64 = 1 << 32;

/// Generator for one of the documented streams.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Share of total demand assigned to an origin.
pub fn origin_share(config: &ScenarioConfig, origin: Lane) -> f64 {
    match origin {
        Lane::Ramp => config.ramp_demand_fraction,
        Lane::MainlineRight | Lane::MainlineLeft => (1.0 - config.ramp_demand_fraction) / 2.0,
    }
}

/// Mean inter-departure headway of an origin, s. Infinite for zero demand.
pub fn mean_headway(config: &ScenarioConfig, origin: Lane) -> f64 {
    3600.0 / (origin_share(config, origin) * config.demand_vph)
}

fn origin_departures(config: &ScenarioConfig, origin: Lane) -> Vec<Departure> {
    let rate = origin_share(config, origin) * config.demand_vph / 3600.0;
    if rate <= 0.0 {
        return Vec::new();
    }
    let o = origin.index() as u64;
    let mut headways = stream(config.seed, 3 * o);
    let mut classes = stream(config.seed, 3 * o + 1);
    let mut traits = stream(config.seed, 3 * o + 2);
    let exp = Exp::new(rate).expect("rate is positive and finite");
    let sigma = config.driver_sigma_range;
    let mult = config.desired_speed_multiplier_range;

    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp.sample(&mut headways);
        if t >= config.duration {
            break;
        }
        let is_cav = classes.random::<f64>() < config.penetration_rate;
        // Traits are always drawn so the stream stays aligned across penetration rates.
        let s = sigma.low + (sigma.high - sigma.low) * traits.random::<f64>();
        let m = mult.low + (mult.high - mult.low) * traits.random::<f64>();
        out.push(if is_cav {
            Departure {
                departure_time: t,
                origin,
                vehicle_class: VehicleClass::Cav,
                driver_sigma: 0.0,
                desired_speed_multiplier: 1.0,
            }
        } else {
            Departure {
                departure_time: t,
                origin,
                vehicle_class: VehicleClass::Legacy,
                driver_sigma: s,
                desired_speed_multiplier: m,
            }
        });
    }
    out
}

/// Draws the departure schedule for a validated config.
pub fn generate_departures(config: &ScenarioConfig) -> DepartureSchedule {
    let mut entries: Vec<Departure> = Lane::ALL
        .iter()
        .flat_map(|&origin| origin_departures(config, origin))
        .collect();
    // Stable sort keeps origin order for identical times.
    entries.sort_by(|a, b| a.departure_time.total_cmp(&b.departure_time));
    DepartureSchedule { entries }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(demand: f64, pen: f64, duration: f64) -> ScenarioConfig {
        ScenarioConfig {
            demand_vph: demand,
            penetration_rate: pen,
            duration,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn zero_demand_is_empty() {
        assert!(generate_departures(&config(0.0, 0.5, 1800.0)).is_empty());
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let cfg = config(2400.0, 0.3, 1800.0);
        let a = generate_departures(&cfg);
        let b = generate_departures(&cfg);
        assert_eq!(a, b);
        let bits = |s: &DepartureSchedule| -> Vec<u64> {
            s.entries.iter().map(|e| e.departure_time.to_bits()).collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn sorted_and_within_duration() {
        let cfg = config(3400.0, 0.7, 600.0);
        let s = generate_departures(&cfg);
        assert!(s.entries.windows(2).all(|w| w[0].departure_time <= w[1].departure_time));
        assert!(s.entries.iter().all(|e| e.departure_time < 600.0));
    }

    #[test]
    fn ramp_headway_mean_matches_exponential() {
        // 3600 / (1400/3) = 7.714 s; long horizon for > 1e4 ramp draws.
        let cfg = config(1400.0, 0.0, 7.714_285_714 * 20_000.0);
        let s = generate_departures(&cfg);
        let times: Vec<f64> = s
            .entries
            .iter()
            .filter(|e| e.origin == Lane::Ramp)
            .map(|e| e.departure_time)
            .collect();
        assert!(times.len() >= 10_000);
        let mean = times.last().unwrap() / times.len() as f64;
        let expected = mean_headway(&cfg, Lane::Ramp);
        assert!((expected - 7.714_285_714).abs() < 1e-6);
        assert!((mean - expected).abs() / expected < 0.05, "mean {mean}");
    }

    #[test]
    fn cav_share_tracks_penetration() {
        let cfg = config(3400.0, 0.3, 20_000.0);
        let s = generate_departures(&cfg);
        assert!(s.len() >= 10_000);
        let cav = s.entries.iter().filter(|e| e.vehicle_class == VehicleClass::Cav).count();
        let share = cav as f64 / s.len() as f64;
        assert!((share - 0.3).abs() < 0.02, "share {share}");
    }

    #[test]
    fn traits_only_for_legacy() {
        let cfg = config(2400.0, 0.5, 900.0);
        for e in generate_departures(&cfg).entries {
            match e.vehicle_class {
                VehicleClass::Cav => {
                    assert_eq!(e.driver_sigma, 0.0);
                    assert_eq!(e.desired_speed_multiplier, 1.0);
                }
                VehicleClass::Legacy => {
                    assert!((0.2..=0.8).contains(&e.driver_sigma));
                    assert!((0.9..=1.1).contains(&e.desired_speed_multiplier));
                }
            }
        }
    }

    #[test]
    fn penetration_does_not_move_departure_times() {
        let a = generate_departures(&config(2400.0, 0.0, 900.0));
        let b = generate_departures(&config(2400.0, 1.0, 900.0));
        let times = |s: &DepartureSchedule| -> Vec<f64> {
            s.entries.iter().map(|e| e.departure_time).collect()
        };
        assert_eq!(times(&a), times(&b));
    }

    #[test]
    fn ramp_demand_does_not_perturb_mainline_classes() {
        let base = generate_departures(&config(2400.0, 0.3, 900.0));
        let more_ramp = generate_departures(&ScenarioConfig {
            ramp_demand_fraction: 0.5,
            ..config(2400.0, 0.3, 900.0)
        });
        let left = |s: &DepartureSchedule| -> Vec<VehicleClass> {
            s.entries
                .iter()
                .filter(|e| e.origin == Lane::MainlineLeft)
                .map(|e| e.vehicle_class)
                .collect()
        };
        let (a, b) = (left(&base), left(&more_ramp));
        let n = a.len().min(b.len());
        assert!(n > 50);
        assert_eq!(a[..n], b[..n]);
    }
}
