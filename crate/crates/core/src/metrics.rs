//! Mobility and fuel metrics, and the result table of a sweep.
//!
//! Average speed is VMT/VHT over a group of completed trips. Fuel comes from
//! a resistance-power surrogate: tractive power
//! `P = m·a·v + ½·ρ·CdA·v³ + m·g·Cr·v` burns `α + β·max(P, 0)` grams per
//! second.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{TrajectoryRecord, TripRecord};
use crate::scenario::{FuelParams, Lane};

pub const METERS_PER_MILE: f64 = 1609.344;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Ramp,
    Mainline,
}

impl Group {
    pub const ALL: [Group; 2] = [Group::Ramp, Group::Mainline];

    pub fn of_origin(origin: Lane) -> Self {
        match origin {
            Lane::Ramp => Group::Ramp,
            Lane::MainlineRight | Lane::MainlineLeft => Group::Mainline,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Group::Ramp => "ramp",
            Group::Mainline => "mainline",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("trip of vehicle {0} has no arrival time")]
    IncompleteTrip(u64),
    #[error("trip covers zero distance")]
    ZeroDistance,
    #[error("no 0% penetration baseline for demand {demand_vph} vph (seed {seed})")]
    MissingBaseline { demand_vph: f64, seed: u64 },
}

fn completed<'a>(
    trips: &'a [TripRecord],
    group: Group,
) -> Result<Vec<(&'a TripRecord, f64)>, MetricsError> {
    trips
        .iter()
        .filter(|t| Group::of_origin(t.origin) == group)
        .map(|t| {
            t.arrival_time
                .map(|a| (t, a))
                .ok_or(MetricsError::IncompleteTrip(t.id))
        })
        .collect()
}

/// VMT/VHT of a group, m/s. `None` when the group has no trips.
pub fn average_speed(trips: &[TripRecord], group: Group) -> Result<Option<f64>, MetricsError> {
    let done = completed(trips, group)?;
    if done.is_empty() {
        return Ok(None);
    }
    let distance: f64 = done.iter().map(|(t, _)| t.distance_traveled).sum();
    let time: f64 = done.iter().map(|(t, a)| a - t.depart_time).sum();
    Ok(Some(distance / time))
}

/// Fuel burned per mile over a group's trips, g/mile. `None` for an empty group.
pub fn fuel_per_mile(trips: &[TripRecord], group: Group) -> Result<Option<f64>, MetricsError> {
    let done = completed(trips, group)?;
    if done.is_empty() {
        return Ok(None);
    }
    let grams: f64 = done.iter().map(|(t, _)| t.fuel_grams).sum();
    let distance: f64 = done.iter().map(|(t, _)| t.distance_traveled).sum();
    if distance <= 0.0 {
        return Err(MetricsError::ZeroDistance);
    }
    Ok(Some(grams / (distance / METERS_PER_MILE)))
}

pub fn tractive_power(v: f64, a: f64, p: &FuelParams) -> f64 {
    p.mass * a * v + 0.5 * p.air_density * p.cda * v.powi(3) + p.mass * p.gravity * p.rolling_coeff * v
}

/// Instantaneous fuel rate, g/s.
pub fn fuel_rate(v: f64, a: f64, p: &FuelParams) -> f64 {
    p.idle_rate + p.energy_slope * tractive_power(v, a, p).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripFuel {
    pub grams: f64,
    pub distance: f64,
    pub grams_per_mile: f64,
}

/// Integrates the fuel rate over one vehicle's undecimated trajectory.
pub fn trip_fuel(
    records: &[TrajectoryRecord],
    dt: f64,
    params: &FuelParams,
) -> Result<TripFuel, MetricsError> {
    let grams: f64 = records.iter().map(|r| fuel_rate(r.speed, r.accel, params) * dt).sum();
    let distance: f64 = records.iter().map(|r| r.speed * dt).sum();
    if distance <= 0.0 {
        return Err(MetricsError::ZeroDistance);
    }
    Ok(TripFuel {
        grams,
        distance,
        grams_per_mile: grams / (distance / METERS_PER_MILE),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupSummary {
    pub group: Group,
    pub vehicles: usize,
    pub avg_speed: Option<f64>,
    pub fuel_g_per_mile: Option<f64>,
}

pub fn summarize(trips: &[TripRecord]) -> Result<Vec<GroupSummary>, MetricsError> {
    Group::ALL
        .iter()
        .map(|&group| {
            Ok(GroupSummary {
                group,
                vehicles: trips.iter().filter(|t| Group::of_origin(t.origin) == group).count(),
                avg_speed: average_speed(trips, group)?,
                fuel_g_per_mile: fuel_per_mile(trips, group)?,
            })
        })
        .collect()
}

/// Metrics of one sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub demand_vph: f64,
    pub penetration: f64,
    pub seed: u64,
    pub groups: Vec<GroupSummary>,
}

/// Seed column of a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SeedLabel {
    Seed(u64),
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub group: Group,
    pub demand_vph: f64,
    pub penetration: f64,
    pub seed: SeedLabel,
    pub avg_speed: Option<f64>,
    pub improvement_pct: Option<f64>,
    pub fuel_g_per_mile: Option<f64>,
    pub reduction_pct: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn get(&self, group: Group, demand_vph: f64, penetration: f64, seed: SeedLabel) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.group == group && r.demand_vph == demand_vph && r.penetration == penetration && r.seed == seed
        })
    }
}

pub fn improvement_pct(value: f64, baseline: f64) -> f64 {
    100.0 * (value - baseline) / baseline
}

pub fn reduction_pct(value: f64, baseline: f64) -> f64 {
    100.0 * (baseline - value) / baseline
}

fn both(a: Option<f64>, b: Option<f64>, f: fn(f64, f64) -> f64) -> Option<f64> {
    Some(f(a?, b?))
}

type Key = (Group, u64, u64, SeedLabel);

fn key(group: Group, demand: f64, pen: f64, seed: SeedLabel) -> Key {
    (group, demand.to_bits(), pen.to_bits(), seed)
}

/// Builds the result table: one row per (group, demand, penetration, seed),
/// plus seed-averaged rows when more than one seed is present. Percentages
/// compare against the 0% penetration row of the same demand and seed.
pub fn aggregate(points: &[SweepPoint]) -> Result<ResultTable, MetricsError> {
    build_table(points, true)
}

/// Like [`aggregate`], but rows without a baseline get empty percentages.
pub fn tabulate(points: &[SweepPoint]) -> ResultTable {
    build_table(points, false).expect("lenient aggregation cannot fail")
}

fn build_table(points: &[SweepPoint], strict: bool) -> Result<ResultTable, MetricsError> {
    // (speed, fuel) per key.
    let mut values: BTreeMap<Key, (Option<f64>, Option<f64>)> = BTreeMap::new();
    let mut cells: Vec<(Group, f64, f64, SeedLabel)> = Vec::new();
    for p in points {
        for g in &p.groups {
            let seed = SeedLabel::Seed(p.seed);
            values.insert(key(g.group, p.demand_vph, p.penetration, seed), (g.avg_speed, g.fuel_g_per_mile));
            cells.push((g.group, p.demand_vph, p.penetration, seed));
        }
    }

    let mut seeds: Vec<u64> = points.iter().map(|p| p.seed).collect();
    seeds.sort_unstable();
    seeds.dedup();
    if seeds.len() > 1 {
        let mut sums: BTreeMap<(Group, u64, u64), (Vec<f64>, Vec<f64>, f64, f64)> = BTreeMap::new();
        for &(group, d, pen, seed) in &cells {
            let (s, f) = values[&key(group, d, pen, seed)];
            let e = sums.entry((group, d.to_bits(), pen.to_bits())).or_insert((Vec::new(), Vec::new(), d, pen));
            e.0.extend(s);
            e.1.extend(f);
        }
        for ((group, _, _), (s, f, d, pen)) in sums {
            let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
            values.insert(key(group, d, pen, SeedLabel::Mean), (mean(&s), mean(&f)));
            cells.push((group, d, pen, SeedLabel::Mean));
        }
    }

    let mut rows = Vec::with_capacity(cells.len());
    for (group, d, pen, seed) in cells {
        let (speed, fuel) = values[&key(group, d, pen, seed)];
        let (base_speed, base_fuel) = match values.get(&key(group, d, 0.0, seed)) {
            Some(&b) => b,
            None if !strict => (None, None),
            None => {
                return Err(MetricsError::MissingBaseline {
                    demand_vph: d,
                    seed: match seed {
                        SeedLabel::Seed(s) => s,
                        SeedLabel::Mean => 0,
                    },
                })
            }
        };
        rows.push(ResultRow {
            group,
            demand_vph: d,
            penetration: pen,
            seed,
            avg_speed: speed,
            improvement_pct: both(speed, base_speed, improvement_pct),
            fuel_g_per_mile: fuel,
            reduction_pct: both(fuel, base_fuel, reduction_pct),
        });
    }
    rows.sort_by(|a, b| {
        (a.group, a.seed)
            .cmp(&(b.group, b.seed))
            .then(a.demand_vph.total_cmp(&b.demand_vph))
            .then(a.penetration.total_cmp(&b.penetration))
    });
    Ok(ResultTable { rows })
}
