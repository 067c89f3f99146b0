use std::collections::{BTreeMap, VecDeque};

use rand_chacha::ChaCha8Rng;

use super::lanes::{execute_merge, legacy_avoidance_lane_change, GapAcceptance, LaneDecision};
use super::log::{GameTraceRecord, RunOptions, SimulationLog, TrajectoryOutput, TrajectoryRecord, TripRecord};
use super::EngineError;
use crate::conflict::{
    form_pairs, project_to_merge_frame, Candidate, ConflictPair, GameKind,
};
use crate::dynamics::{
    consensus_accel, free_flow_accel, integrate, krauss_speed, Command, Kinematics, KraussDriver, Role,
    VehicleId, VehicleState,
};
use crate::game::{candidate_accel, resolve, GameContext, Player, PlayerState, Side};
use crate::metrics::fuel_rate;
use crate::scenario::{
    build_network, generate_departures, stream, Departure, Lane, NetworkGeometry, ScenarioConfig, VehicleClass,
    NOISE_STREAM_BASE,
};

/// Braking level at which a ramp CAV starts to stop for the end of the lane.
pub const STOP_LINE_DECEL: f64 = 3.0;

/// Below this speed a ramp vehicle drawn level with a right-lane vehicle is
/// passed rather than yielded to.
const PASS_SPEED: f64 = 1.0;

/// Seconds of snapshots kept for collision diagnostics.
const DIAGNOSTIC_WINDOW: f64 = 1.0;

struct Aux {
    noise: ChaCha8Rng,
    fuel: f64,
}

#[derive(Debug, Clone, Copy)]
struct Assignment {
    role: Role,
    target: Option<VehicleId>,
    ego: Player,
    comp: Player,
}

#[derive(Debug, Clone, Copy)]
struct Commitment {
    ramp_role: Role,
    since: f64,
}

/// Per-lane ordering of a snapshot: `leader[i]` is the index of the vehicle
/// directly ahead of vehicle `i` in its own lane.
struct LaneIndex {
    leader: Vec<Option<usize>>,
}

impl LaneIndex {
    fn build(snap: &[VehicleState]) -> Self {
        let mut leader = vec![None; snap.len()];
        for lane in Lane::ALL {
            let mut order: Vec<usize> = (0..snap.len()).filter(|&i| snap[i].lane == lane).collect();
            order.sort_by(|&a, &b| {
                (snap[a].position, snap[a].id)
                    .partial_cmp(&(snap[b].position, snap[b].id))
                    .expect("finite positions")
            });
            for w in order.windows(2) {
                leader[w[0]] = Some(w[1]);
            }
        }
        Self { leader }
    }
}

fn find(list: &[VehicleState], id: VehicleId) -> Option<&VehicleState> {
    list.binary_search_by_key(&id, |v| v.id).ok().map(|i| &list[i])
}

/// Stop-line law: no constraint until the comfortable brake is needed.
fn stop_line_accel(distance: f64, speed: f64, dt: f64) -> f64 {
    if distance <= 0.0 {
        return -speed / dt;
    }
    let required = speed * speed / (2.0 * distance);
    if required >= STOP_LINE_DECEL {
        -required
    } else {
        f64::INFINITY
    }
}

/// The simulation state. Vehicles are kept sorted by id.
pub struct World {
    config: ScenarioConfig,
    geometry: NetworkGeometry,
    acceptance: GapAcceptance,
    options: RunOptions,
    step_index: u64,
    total_steps: u64,
    vehicles: Vec<VehicleState>,
    aux: BTreeMap<VehicleId, Aux>,
    schedule: Vec<Departure>,
    next_departure: usize,
    pending: [VecDeque<Departure>; 3],
    history: VecDeque<Vec<VehicleState>>,
    history_depth: usize,
    delay_steps: usize,
    commitments: BTreeMap<(VehicleId, VehicleId), Commitment>,
    next_id: VehicleId,
    log: SimulationLog,
}

impl World {
    pub fn new(config: ScenarioConfig, options: RunOptions) -> Result<Self, EngineError> {
        config.validate()?;
        let geometry = build_network(&config)?;
        let schedule = generate_departures(&config).entries;
        let dt = config.timestep;
        let delay_steps = (config.controller.comm_delay / dt).round() as usize;
        let history_depth = delay_steps.max((DIAGNOSTIC_WINDOW / dt).ceil() as usize) + 1;
        Ok(Self {
            acceptance: GapAcceptance::from_config(&config),
            total_steps: (config.duration / dt).round() as u64,
            geometry,
            options,
            step_index: 0,
            vehicles: Vec::new(),
            aux: BTreeMap::new(),
            schedule,
            next_departure: 0,
            pending: Default::default(),
            history: VecDeque::with_capacity(history_depth + 1),
            history_depth,
            delay_steps,
            commitments: BTreeMap::new(),
            next_id: 0,
            log: SimulationLog {
                min_gap: f64::INFINITY,
                ..Default::default()
            },
            config,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn geometry(&self) -> &NetworkGeometry {
        &self.geometry
    }

    /// Simulation time at the start of the next step.
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.config.timestep
    }

    pub fn steps(&self) -> u64 {
        self.step_index
    }

    pub fn vehicles(&self) -> &[VehicleState] {
        &self.vehicles
    }

    pub fn log(&self) -> &SimulationLog {
        &self.log
    }

    /// Places a vehicle directly, bypassing the demand schedule. The id is
    /// assigned by the world and returned.
    pub fn insert_vehicle(&mut self, mut state: VehicleState) -> VehicleId {
        let id = self.next_id;
        self.next_id += 1;
        state.id = id;
        state.depart_time = self.time();
        self.aux.insert(
            id,
            Aux {
                noise: stream(self.config.seed, NOISE_STREAM_BASE + id),
                fuel: 0.0,
            },
        );
        self.vehicles.push(state);
        id
    }

    /// Whether the scheduled horizon has passed and the network is empty.
    pub fn finished(&self) -> bool {
        self.step_index >= self.total_steps
            && self.vehicles.is_empty()
            && self.next_departure == self.schedule.len()
            && self.pending.iter().all(VecDeque::is_empty)
    }

    pub fn run_to_completion(&mut self) -> Result<(), EngineError> {
        let limit = 3 * self.total_steps.max(1);
        while !self.finished() {
            if self.step_index >= limit {
                return Err(EngineError::NonTermination {
                    time: self.time(),
                    remaining: self.vehicles.len()
                        + self.pending.iter().map(VecDeque::len).sum::<usize>()
                        + (self.schedule.len() - self.next_departure),
                });
            }
            self.step()?;
        }
        Ok(())
    }

    /// Finishes the log. Vehicles still in the network get incomplete trips.
    pub fn into_log(mut self) -> SimulationLog {
        let end = self.time();
        let open: Vec<VehicleState> = std::mem::take(&mut self.vehicles);
        for v in &open {
            self.push_trip(v, None);
        }
        self.log.trips.sort_by_key(|t| t.id);
        self.log.steps = self.step_index;
        self.log.end_time = end;
        self.log
    }

    fn push_trip(&mut self, v: &VehicleState, arrival: Option<f64>) {
        let fuel = self.aux.remove(&v.id).map_or(0.0, |a| a.fuel);
        self.log.trips.push(TripRecord {
            id: v.id,
            vehicle_class: v.vehicle_class,
            origin: v.origin,
            depart_time: v.depart_time,
            arrival_time: arrival,
            distance_traveled: v.distance_traveled,
            fuel_grams: fuel,
        });
    }

    pub fn step(&mut self) -> Result<(), EngineError> {
        let dt = self.config.timestep;
        let t0 = self.time();
        self.spawn(t0);

        let snap = self.vehicles.clone();
        self.history.push_back(snap.clone());
        while self.history.len() > self.history_depth {
            self.history.pop_front();
        }
        let delayed: Option<Vec<VehicleState>> = (self.delay_steps > 0).then(|| {
            let back = self.delay_steps.min(self.history.len() - 1);
            self.history[self.history.len() - 1 - back].clone()
        });
        let delayed_of = |v: &VehicleState| -> VehicleState {
            delayed
                .as_deref()
                .and_then(|d| find(d, v.id))
                .unwrap_or(v)
                .clone()
        };

        let lanes = LaneIndex::build(&snap);
        let pairs = self.conflict_pairs(&snap);
        let assignments = self.play_games(&snap, &delayed_of, &pairs, t0);

        let mut next = Vec::with_capacity(snap.len());
        for (i, v) in snap.iter().enumerate() {
            let leader = lanes.leader[i].map(|j| &snap[j]);
            let speed = if v.is_cav() {
                let competitor = assignments
                    .get(&v.id)
                    .filter(|a| a.role == Role::Leader)
                    .map(|a| a.comp.id);
                let virtual_leader = self.virtual_leader(v, &snap, competitor).map(&delayed_of);
                self.cav_speed(
                    v,
                    leader.map(&delayed_of).as_ref(),
                    leader,
                    virtual_leader.as_ref(),
                    assignments.get(&v.id),
                )
            } else {
                self.legacy_speed(v, leader)?
            };
            let mut nv = integrate(v, Command::Speed(speed), dt);
            match assignments.get(&v.id) {
                Some(a) => {
                    nv.role = a.role;
                    nv.target_id = a.target;
                }
                None => {
                    nv.role = Role::Unassigned;
                    nv.target_id = None;
                }
            }
            if nv.accel < self.config.accel_bounds.min - 1e-9 {
                self.log.emergency_brakes += 1;
            }
            if let Some(a) = self.aux.get_mut(&v.id) {
                a.fuel += fuel_rate(nv.speed, nv.accel, &self.config.fuel) * dt;
            }
            next.push(nv);
        }
        self.vehicles = next;
        self.apply_merges();
        self.apply_avoidance(&pairs);

        self.step_index += 1;
        let t1 = self.time();
        self.check_collisions(t1)?;
        self.record_trajectories(t1);
        self.remove_arrivals(t1);
        self.log.steps = self.step_index;
        Ok(())
    }

    fn spawn(&mut self, t0: f64) {
        let eps = 1e-9 * self.config.timestep;
        while let Some(d) = self.schedule.get(self.next_departure) {
            if d.departure_time > t0 + eps {
                break;
            }
            self.pending[d.origin.index()].push_back(d.clone());
            self.next_departure += 1;
        }
        for origin in Lane::ALL {
            let Some(d) = self.pending[origin.index()].front() else {
                continue;
            };
            let length = self.config.vehicle_length;
            let rearmost = self
                .vehicles
                .iter()
                .filter(|v| v.lane == origin)
                .min_by(|a, b| a.position.partial_cmp(&b.position).expect("finite"));
            if let Some(r) = rearmost {
                if r.position - r.length < self.config.min_gap + length {
                    continue;
                }
            }
            let is_cav = d.vehicle_class == VehicleClass::Cav;
            let desired = if is_cav {
                self.config.desired_speed
            } else {
                self.config.desired_speed * d.desired_speed_multiplier
            };
            let initial = match origin {
                Lane::Ramp => self.config.initial_speed_ramp,
                _ => self.config.initial_speed_mainline,
            };
            let mut state = VehicleState {
                id: 0,
                vehicle_class: d.vehicle_class,
                origin,
                lane: origin,
                position: 0.0,
                speed: initial.min(desired),
                accel: 0.0,
                length,
                driver_sigma: d.driver_sigma,
                desired_speed: desired,
                role: Role::Unassigned,
                target_id: None,
                depart_time: t0,
                distance_traveled: 0.0,
            };
            if let Some(r) = rearmost {
                let cap = self.acceptance.safe_speed_for(&state, r.position - r.length, r.speed);
                state.speed = state.speed.min(cap.max(0.0));
            }
            self.pending[origin.index()].pop_front();
            self.insert_vehicle(state);
        }
    }

    fn conflict_pairs(&self, snap: &[VehicleState]) -> Vec<ConflictPair> {
        let candidates = |lane: Lane| -> Vec<Candidate> {
            snap.iter()
                .filter(|v| v.lane == lane)
                .map(|v| Candidate {
                    projection: project_to_merge_frame(v, &self.geometry).expect("ramp or right lane"),
                    class: v.vehicle_class,
                })
                .collect()
        };
        form_pairs(
            &candidates(Lane::Ramp),
            &candidates(Lane::MainlineRight),
            &self.geometry,
            &self.config.conflict,
        )
    }

    /// Nearest vehicle in the merge frame (ramp and right lane) ahead of both
    /// `v` and `partner`, within the detection range. This is the vehicle a
    /// game leader ends up behind.
    fn merge_frame_predecessor(
        &self,
        v: &VehicleState,
        partner: &VehicleState,
        snap: &[VehicleState],
        delayed_of: &dyn Fn(&VehicleState) -> VehicleState,
    ) -> Option<Kinematics> {
        let x = self
            .geometry
            .to_merge_frame(v.lane, v.position)
            .max(self.geometry.to_merge_frame(partner.lane, partner.position));
        snap.iter()
            .filter(|o| o.id != v.id && o.id != partner.id)
            .filter(|o| matches!(o.lane, Lane::Ramp | Lane::MainlineRight))
            .map(|o| (self.geometry.to_merge_frame(o.lane, o.position), o))
            .filter(|(p, _)| *p > x && *p - x <= self.config.conflict.detection_range)
            .min_by(|a, b| (a.0, a.1.id).partial_cmp(&(b.0, b.1.id)).expect("finite"))
            .map(|(_, o)| {
                let d = delayed_of(o);
                Kinematics {
                    position: self.geometry.to_merge_frame(d.lane, d.position),
                    speed: d.speed,
                    length: d.length,
                }
            })
    }

    fn player(
        &self,
        v: &VehicleState,
        partner: &VehicleState,
        snap: &[VehicleState],
        delayed_of: &dyn Fn(&VehicleState) -> VehicleState,
        current: bool,
    ) -> Player {
        let s = if current { v.clone() } else { delayed_of(v) };
        Player {
            id: v.id,
            side: if v.lane == Lane::Ramp { Side::Ramp } else { Side::Mainline },
            state: PlayerState {
                position: self.geometry.to_merge_frame(s.lane, s.position),
                speed: s.speed,
                accel: s.accel,
                length: s.length,
            },
            desired_speed: v.desired_speed,
            predecessor: self.merge_frame_predecessor(v, partner, snap, delayed_of),
        }
    }

    fn play_games(
        &mut self,
        snap: &[VehicleState],
        delayed_of: &dyn Fn(&VehicleState) -> VehicleState,
        pairs: &[ConflictPair],
        t0: f64,
    ) -> BTreeMap<VehicleId, Assignment> {
        let ctx = GameContext {
            controller: &self.config.controller,
            bounds: self.config.accel_bounds,
            params: &self.config.game,
        };
        let window = self.config.game.commitment_window;
        let mut out = BTreeMap::new();
        let mut seen = BTreeMap::new();
        let mut traces = Vec::new();
        let mut switches = 0;
        for pair in pairs {
            if pair.game_kind == GameKind::NoGame {
                continue;
            }
            let key = (pair.ramp_vehicle_id, pair.mainline_vehicle_id);
            let ramp = find(snap, pair.ramp_vehicle_id).expect("paired vehicle exists");
            let main = find(snap, pair.mainline_vehicle_id).expect("paired vehicle exists");
            let ramp_view = (
                self.player(ramp, main, snap, delayed_of, true),
                self.player(main, ramp, snap, delayed_of, false),
            );
            let main_view = (
                self.player(main, ramp, snap, delayed_of, true),
                self.player(ramp, main, snap, delayed_of, false),
            );
            let previous = self.commitments.get(&key).copied();
            let committed = previous.filter(|c| window > 0.0 && t0 - c.since < window);
            let ramp_role = match committed {
                Some(c) => c.ramp_role,
                None => {
                    let (ego, comp) = if ramp.is_cav() { ramp_view } else { main_view };
                    let res = resolve(pair.game_kind, &ego, &comp, pair.d_end, &ctx)
                        .expect("game pairs resolve");
                    let o = res.outcome;
                    if self.options.game_trace {
                        let chosen = res.ego_costs.for_role(o.ego_role);
                        traces.push(GameTraceRecord {
                            time: t0,
                            ego_id: o.ego_id,
                            comp_id: o.competitor_id,
                            kind: pair.game_kind,
                            ego_role: o.ego_role,
                            ego_cost_lead: res.ego_costs.lead.total_cost,
                            ego_cost_follow: res.ego_costs.follow.total_cost,
                            comp_cost_lead: res.competitor_costs.map(|c| c.lead.total_cost),
                            comp_cost_follow: res.competitor_costs.map(|c| c.follow.total_cost),
                            risk1: chosen.risk1,
                            risk_d2e: chosen.risk_d2e,
                            mobility: chosen.mobility,
                        });
                    }
                    if ramp.is_cav() {
                        o.ego_role
                    } else {
                        o.competitor_role
                    }
                }
            };
            let since = match previous {
                Some(p) if p.ramp_role == ramp_role => p.since,
                Some(_) => {
                    switches += 1;
                    t0
                }
                None => t0,
            };
            seen.insert(key, Commitment { ramp_role, since });
            let main_role = match ramp_role {
                Role::Leader => Role::Follower,
                _ => Role::Leader,
            };
            for (v, role, (ego, comp)) in [(ramp, ramp_role, ramp_view), (main, main_role, main_view)] {
                if v.is_cav() {
                    out.insert(
                        v.id,
                        Assignment {
                            role,
                            target: (role == Role::Follower).then_some(comp.id),
                            ego,
                            comp,
                        },
                    );
                }
            }
        }
        self.commitments = seen;
        self.log.role_switches += switches;
        self.log.games.extend(traces);
        out
    }

    fn cav_speed(
        &self,
        v: &VehicleState,
        delayed_leader: Option<&VehicleState>,
        leader: Option<&VehicleState>,
        virtual_leader: Option<&VehicleState>,
        assignment: Option<&Assignment>,
    ) -> f64 {
        let cfg = &self.config;
        let bounds = cfg.accel_bounds;
        let mut a = free_flow_accel(v.speed, v.desired_speed, cfg.controller.free_flow_gain, bounds);
        // Pad consensus targets so the settled gap v * t_g never drops below
        // what gap acceptance asks of a merge, min_gap + v * gap_time_safe.
        let slack = (cfg.controller.desired_time_gap - cfg.conflict.gap_time_safe) * v.speed;
        let pad = (cfg.min_gap - slack).max(0.0);
        if let Some(l) = delayed_leader {
            let target = Kinematics {
                length: l.length + pad,
                ..l.kinematics()
            };
            let c = consensus_accel(v.kinematics(), Some(target), &cfg.controller, bounds).expect("target is present");
            a = a.min(c);
        }
        if let Some(r) = virtual_leader {
            // Across lanes the standstill spacing must also leave the lag gap
            // a merge needs.
            let target = Kinematics {
                position: self.geometry.to_merge_frame(r.lane, r.position),
                speed: r.speed,
                length: r.length + (2.0 * cfg.min_gap - slack).max(0.0),
            };
            let ego = Kinematics {
                position: self.geometry.to_merge_frame(v.lane, v.position),
                ..v.kinematics()
            };
            let c = consensus_accel(ego, Some(target), &cfg.controller, bounds).expect("target is present");
            a = a.min(c);
        }
        if let Some(asg) = assignment.filter(|asg| asg.role == Role::Follower && !self.alongside(v, asg)) {
            let ctx = GameContext {
                controller: &cfg.controller,
                bounds,
                params: &cfg.game,
            };
            let mut comp = asg.comp.clone();
            comp.state.length += pad;
            a = a.min(candidate_accel(&asg.ego, &comp, asg.role, &ctx));
        }
        let wall = (v.lane == Lane::Ramp).then(|| self.geometry.zone_end(Lane::Ramp));
        if let Some(w) = wall {
            a = a.min(stop_line_accel(w - v.position, v.speed, cfg.timestep));
        }
        let mut speed = (v.speed + bounds.clamp(a) * cfg.timestep).max(0.0);
        if let Some(l) = leader {
            let cap = self.acceptance.safe_speed_for(v, l.position - l.length - v.position, l.speed);
            speed = speed.min(cap.max(0.0));
        }
        if let Some(w) = wall {
            let cap = self
                .acceptance
                .safe_speed_for(v, w - v.position + cfg.min_gap, 0.0);
            speed = speed.min(cap.max(0.0));
        }
        speed
    }

    /// Whether a right-lane follower has drawn level with the ramp vehicle it
    /// was told to follow while that vehicle is held at a near standstill.
    /// Falling in behind is then impossible, so it passes.
    fn alongside(&self, v: &VehicleState, asg: &Assignment) -> bool {
        v.lane == Lane::MainlineRight
            && asg.comp.side == Side::Ramp
            && self.passable(asg.ego.state.position, asg.comp.state.position, asg.comp.state.length, asg.comp.state.speed)
    }

    /// Merge-frame test for a right-lane vehicle with its front at `x` against
    /// a ramp vehicle at `p`.
    fn passable(&self, x: f64, p: f64, length: f64, speed: f64) -> bool {
        p - length - x < self.config.min_gap && speed < PASS_SPEED
    }

    /// Nearest CAV ahead of a CAV in the merge frame on the other side of the
    /// merge (ramp for a right-lane vehicle and the reverse), within the
    /// detection range and before the end of the merge zone. The two form one
    /// virtual platoon across the lanes. Ramp vehicles a right-lane CAV may
    /// pass are skipped, and a game leader ignores its competitor.
    fn virtual_leader<'a>(
        &self,
        v: &VehicleState,
        snap: &'a [VehicleState],
        competitor: Option<VehicleId>,
    ) -> Option<&'a VehicleState> {
        let other = match v.lane {
            Lane::Ramp => Lane::MainlineRight,
            Lane::MainlineRight => Lane::Ramp,
            Lane::MainlineLeft => return None,
        };
        let x = self.geometry.to_merge_frame(v.lane, v.position);
        let zone = self.geometry.zone_end(Lane::Ramp) - self.geometry.merge_point(Lane::Ramp);
        let range = self.config.conflict.detection_range;
        if x >= zone {
            return None;
        }
        snap.iter()
            .filter(|o| o.lane == other && o.is_cav() && Some(o.id) != competitor)
            .map(|o| (self.geometry.to_merge_frame(o.lane, o.position), o))
            .filter(|(p, _)| *p > x && *p - x <= range)
            .filter(|(p, o)| other != Lane::Ramp || !self.passable(x, *p, o.length, o.speed))
            .min_by(|a, b| (a.0, a.1.id).partial_cmp(&(b.0, b.1.id)).expect("finite"))
            .map(|(_, o)| o)
    }

    fn legacy_speed(&mut self, v: &VehicleState, leader: Option<&VehicleState>) -> Result<f64, EngineError> {
        let cfg = &self.config;
        let obstacle = match leader {
            Some(l) => {
                let raw = l.position - l.length - v.position;
                if raw < 0.0 {
                    return Err(EngineError::Collision {
                        time: self.time(),
                        follower: v.id,
                        leader: l.id,
                        gap: raw,
                        trace: String::new(),
                    });
                }
                // The standstill gap is folded into the leader's length.
                Some(Kinematics {
                    position: l.position,
                    speed: l.speed,
                    length: (l.length + cfg.min_gap).min(l.position - v.position),
                })
            }
            None if v.lane == Lane::Ramp => Some(Kinematics::wall(self.geometry.zone_end(Lane::Ramp))),
            None => None,
        };
        let driver = KraussDriver {
            kinematics: v.kinematics(),
            desired_speed: v.desired_speed,
            sigma: v.driver_sigma,
        };
        let noise = &mut self.aux.get_mut(&v.id).expect("every vehicle has aux state").noise;
        Ok(krauss_speed(
            &driver,
            obstacle,
            &cfg.krauss,
            cfg.accel_bounds.max,
            cfg.timestep,
            noise,
        )?)
    }

    fn lane_refs(&self, lane: Lane) -> Vec<&VehicleState> {
        self.vehicles.iter().filter(|v| v.lane == lane).collect()
    }

    fn apply_merges(&mut self) {
        let merge_point = self.geometry.merge_point(Lane::Ramp);
        let mut order: Vec<usize> = (0..self.vehicles.len())
            .filter(|&i| self.vehicles[i].lane == Lane::Ramp && self.vehicles[i].position >= merge_point)
            .collect();
        order.sort_by(|&a, &b| {
            self.vehicles[b]
                .position
                .partial_cmp(&self.vehicles[a].position)
                .expect("finite")
        });
        for i in order {
            let v = &self.vehicles[i];
            let target = v
                .target_id
                .filter(|_| v.role == Role::Follower)
                .and_then(|t| find(&self.vehicles, t));
            let decision = execute_merge(
                v,
                &self.lane_refs(Lane::MainlineRight),
                target,
                &self.geometry,
                &self.acceptance,
            );
            if let LaneDecision::Change { lane, position } = decision {
                let v = &mut self.vehicles[i];
                v.lane = lane;
                v.position = position;
                self.log.merges += 1;
            }
        }
    }

    fn apply_avoidance(&mut self, pairs: &[ConflictPair]) {
        let mut movers: Vec<(usize, VehicleId)> = pairs
            .iter()
            .filter_map(|p| {
                let i = self.vehicles.binary_search_by_key(&p.mainline_vehicle_id, |v| v.id).ok()?;
                let v = &self.vehicles[i];
                (!v.is_cav() && v.lane == Lane::MainlineRight).then_some((i, p.ramp_vehicle_id))
            })
            .collect();
        movers.sort_by(|a, b| {
            self.vehicles[b.0]
                .position
                .partial_cmp(&self.vehicles[a.0].position)
                .expect("finite")
        });
        for (i, ramp_id) in movers {
            let Some(ramp) = find(&self.vehicles, ramp_id) else {
                continue;
            };
            let decision = legacy_avoidance_lane_change(
                &self.vehicles[i],
                ramp,
                &self.lane_refs(Lane::MainlineRight),
                &self.lane_refs(Lane::MainlineLeft),
                self.config.conflict.detection_range,
                &self.acceptance,
            );
            if let LaneDecision::Change { lane, position } = decision {
                let v = &mut self.vehicles[i];
                v.lane = lane;
                v.position = position;
                self.log.avoidance_lane_changes += 1;
            }
        }
    }

    fn check_collisions(&mut self, t1: f64) -> Result<(), EngineError> {
        let mut min_gap = self.log.min_gap;
        for lane in Lane::ALL {
            let mut order = self.lane_refs(lane);
            order.sort_by(|a, b| (a.position, a.id).partial_cmp(&(b.position, b.id)).expect("finite"));
            for w in order.windows(2) {
                let gap = w[1].position - w[1].length - w[0].position;
                min_gap = min_gap.min(gap);
                if gap <= 0.0 {
                    return Err(EngineError::Collision {
                        time: t1,
                        follower: w[0].id,
                        leader: w[1].id,
                        gap,
                        trace: self.diagnostics(&[w[0].id, w[1].id]),
                    });
                }
            }
        }
        self.log.min_gap = min_gap;
        Ok(())
    }

    fn diagnostics(&self, ids: &[VehicleId]) -> String {
        let dt = self.config.timestep;
        let first = self.step_index as f64 - self.history.len() as f64;
        let mut out = String::new();
        for (k, snap) in self.history.iter().enumerate() {
            for v in snap.iter().filter(|v| ids.contains(&v.id)) {
                out.push_str(&format!(
                    "t={:.2} id={} lane={} pos={:.3} v={:.3} a={:.3} role={}\n",
                    (first + k as f64) * dt,
                    v.id,
                    v.lane.as_str(),
                    v.position,
                    v.speed,
                    v.accel,
                    v.role.as_str()
                ));
            }
        }
        out
    }

    fn record_trajectories(&mut self, t1: f64) {
        let TrajectoryOutput::Every(n) = self.options.trajectories else {
            return;
        };
        if (self.step_index - 1) % n.max(1) != 0 {
            return;
        }
        self.log.trajectories.extend(self.vehicles.iter().map(|v| TrajectoryRecord {
            id: v.id,
            time: t1,
            lane: v.lane,
            position: v.position,
            speed: v.speed,
            accel: v.accel,
            role: v.role,
            target_id: v.target_id,
        }));
    }

    fn remove_arrivals(&mut self, t1: f64) {
        let exit = self.geometry.exit_position();
        let (gone, stay): (Vec<VehicleState>, Vec<VehicleState>) = std::mem::take(&mut self.vehicles)
            .into_iter()
            .partition(|v| v.lane.is_mainline() && v.position >= exit);
        self.vehicles = stay;
        for v in &gone {
            self.push_trip(v, Some(t1));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_line_is_inactive_far_away() {
        assert_eq!(stop_line_accel(89.0, 20.0, 0.02), f64::INFINITY);
        assert!((stop_line_accel(50.0, 20.0, 0.02) + 4.0).abs() < 1e-12);
        assert_eq!(stop_line_accel(0.0, 2.0, 0.02), -100.0);
    }
}
