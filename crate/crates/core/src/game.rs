//! Two-player merge game.
//!
//! Each player may act as Leader or Follower. For every action the player's
//! controller proposes an acceleration, and the action is scored by a
//! safety term (predicted TTC and time headway), a distance-to-end urgency
//! term for the ramp player, and a mobility term penalising deceleration.
//! A CAV facing a legacy vehicle picks its cheaper action on its own; two
//! CAVs pick the role assignment with the smaller summed cost.

use crate::dynamics::{consensus_accel, free_flow_accel, Kinematics, Role, VehicleId};
use crate::conflict::GameKind;
use crate::scenario::{AccelBounds, ControllerParams, GameParams};

/// Speed floor used in headway and mobility divisions, m/s.
pub const SPEED_FLOOR: f64 = 0.1;

/// Which road a player is on; selects the cost formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Mainline,
    Ramp,
}

/// Kinematic state of a player in the shared merge frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerState {
    pub position: f64,
    pub speed: f64,
    /// Current (legacy) or last commanded (CAV) acceleration.
    pub accel: f64,
    pub length: f64,
}

impl PlayerState {
    pub fn kinematics(&self) -> Kinematics {
        Kinematics {
            position: self.position,
            speed: self.speed,
            length: self.length,
        }
    }

    fn predicted_position(&self, dt: f64) -> f64 {
        self.position + self.speed * dt + 0.5 * self.accel * dt * dt
    }
}

/// A game participant as seen by whoever evaluates the game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Player {
    pub id: VehicleId,
    pub side: Side,
    pub state: PlayerState,
    pub desired_speed: f64,
    /// Nearest vehicle ahead of this player in the merge frame, if within
    /// detection range. A competitor taking the lead slots in behind it.
    pub predecessor: Option<Kinematics>,
}

/// Everything one (player, action) evaluation produces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionEvaluation {
    pub role: Role,
    pub candidate_accel: f64,
    pub predicted_gap: f64,
    pub predicted_ttc: Option<f64>,
    pub predicted_headway: f64,
    pub risk1: f64,
    /// Distance-to-end risk; zero for mainline players.
    pub risk_d2e: f64,
    pub mobility: f64,
    pub total_cost: f64,
}

/// Both actions of one player.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayerCosts {
    pub lead: ActionEvaluation,
    pub follow: ActionEvaluation,
}

impl PlayerCosts {
    pub fn for_role(&self, role: Role) -> &ActionEvaluation {
        match role {
            Role::Leader => &self.lead,
            _ => &self.follow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameOutcome {
    pub ego_id: VehicleId,
    pub competitor_id: VehicleId,
    pub ego_role: Role,
    pub competitor_role: Role,
    pub ego_target_id: Option<VehicleId>,
    pub competitor_target_id: Option<VehicleId>,
    pub solved_as: GameKind,
}

/// Outcome plus the evaluations behind it, for command selection and tracing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameResolution {
    pub outcome: GameOutcome,
    pub ego_costs: PlayerCosts,
    /// Only evaluated in the cooperative game.
    pub competitor_costs: Option<PlayerCosts>,
}

/// Controller settings needed to propose accelerations.
#[derive(Debug, Clone, Copy)]
pub struct GameContext<'a> {
    pub controller: &'a ControllerParams,
    pub bounds: AccelBounds,
    pub params: &'a GameParams,
}

/// Acceleration the ego's controller would apply in the given role.
///
/// A follower tracks the competitor with the consensus law. A leader tracks
/// the competitor's predecessor when there is one, otherwise its own desired
/// speed.
pub fn candidate_accel(ego: &Player, competitor: &Player, role: Role, ctx: &GameContext) -> f64 {
    let ego_k = ego.state.kinematics();
    let free = || {
        free_flow_accel(
            ego.state.speed,
            ego.desired_speed,
            ctx.controller.free_flow_gain,
            ctx.bounds,
        )
    };
    let target = match role {
        Role::Follower => Some(competitor.state.kinematics()),
        _ => competitor.predecessor,
    };
    match target {
        Some(t) => consensus_accel(ego_k, Some(t), ctx.controller, ctx.bounds)
            .expect("target is present"),
        None => free(),
    }
}

/// Predicted TTC of a follower/preceding pair after one prediction step.
///
/// `gap` is the current bumper gap. Speeds are extrapolated with the given
/// accelerations and floored at zero. Returns `None` unless the follower is
/// predicted to be strictly faster.
pub fn predicted_ttc(
    gap: f64,
    v_f: f64,
    v_p: f64,
    a_f: f64,
    a_p: f64,
    dt_g: f64,
    literal_sign: bool,
) -> Option<f64> {
    let gap_pred = gap + predicted_gap_change(v_f, v_p, a_f, a_p, dt_g);
    let closing = if literal_sign {
        (v_f + a_f * dt_g) - (v_p - a_p * dt_g)
    } else {
        (v_f + a_f * dt_g).max(0.0) - (v_p + a_p * dt_g).max(0.0)
    };
    (closing > 0.0).then(|| (gap_pred / closing).max(0.0))
}

/// Change of the follower→preceding gap over `dt_g` under constant accelerations.
pub fn predicted_gap_change(v_f: f64, v_p: f64, a_f: f64, a_p: f64, dt_g: f64) -> f64 {
    (v_p - v_f) * dt_g + 0.5 * (a_p - a_f) * dt_g * dt_g
}

/// `1 - tanh(x)`, written as `2 / (1 + e^{2x})` so it keeps full relative
/// precision when `tanh(x)` is close to 1.
fn tanh_complement(x: f64) -> f64 {
    2.0 / (1.0 + (2.0 * x).exp())
}

/// risk₁ from a predicted TTC (if closing) and predicted headway.
pub fn risk_from_predictions(ttc: Option<f64>, headway: f64, t_h: f64) -> f64 {
    let h_term = tanh_complement(headway / t_h);
    match ttc {
        Some(ttc) => (tanh_complement(ttc / t_h) + h_term) / 2.0,
        None => h_term / 2.0,
    }
}

/// Predicted safety quantities for one action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyTerms {
    pub predicted_gap: f64,
    pub predicted_ttc: Option<f64>,
    pub predicted_headway: f64,
    pub risk1: f64,
}

/// Safety risk of the ego applying `ego.accel` against the competitor.
///
/// If the ego is predicted ahead, TTC and headway are those of the
/// competitor closing on the ego; otherwise those of the ego closing on the
/// competitor.
pub fn safety_risk(
    ego: &PlayerState,
    competitor: &PlayerState,
    dt_g: f64,
    t_h: f64,
    literal_sign: bool,
) -> SafetyTerms {
    let ego_ahead = ego.predicted_position(dt_g) > competitor.predicted_position(dt_g);
    let (rear, front) = if ego_ahead { (competitor, ego) } else { (ego, competitor) };
    let gap = front.position - front.length - rear.position;
    let dgap = predicted_gap_change(rear.speed, front.speed, rear.accel, front.accel, dt_g);
    let predicted_gap = (gap + dgap).max(0.0);
    let ttc = predicted_ttc(
        gap,
        rear.speed,
        front.speed,
        rear.accel,
        front.accel,
        dt_g,
        literal_sign,
    );
    let rear_speed = (rear.speed + rear.accel * dt_g).max(SPEED_FLOOR);
    let headway = predicted_gap / rear_speed;
    SafetyTerms {
        predicted_gap,
        predicted_ttc: ttc,
        predicted_headway: headway,
        risk1: risk_from_predictions(ttc, headway, t_h),
    }
}

/// Urgency of the ramp player as the merge zone runs out.
pub fn distance_risk(d_end: f64, v_ramp: f64, t_h: f64) -> f64 {
    let h_ending = d_end.max(0.0) / v_ramp.max(SPEED_FLOOR);
    tanh_complement(h_ending / t_h) / 2.0
}

/// Mobility cost of a speed change `dv` at current speed `v`.
pub fn mobility_cost(dv: f64, v: f64) -> f64 {
    tanh_complement(dv / v.max(SPEED_FLOOR)) / 2.0
}

/// Scores one (player, role) action.
///
/// `d_end` is the ramp vehicle's remaining distance to the end of the merge
/// zone and only enters the ramp player's cost.
pub fn action_cost(
    ego: &Player,
    competitor: &Player,
    role: Role,
    d_end: f64,
    ctx: &GameContext,
) -> ActionEvaluation {
    let p = ctx.params;
    let a = candidate_accel(ego, competitor, role, ctx);
    let acting = PlayerState { accel: a, ..ego.state };
    let safety = safety_risk(
        &acting,
        &competitor.state,
        p.prediction_step,
        p.safe_time_headway,
        p.literal_ttc_sign,
    );
    let mobility = mobility_cost(a * p.prediction_step, ego.state.speed);
    let (risk_d2e, total_cost) = match ego.side {
        Side::Mainline => (0.0, safety.risk1 + mobility),
        Side::Ramp => {
            let r = distance_risk(d_end, ego.state.speed, p.safe_time_headway);
            (r, (safety.risk1 + r) / 2.0 + mobility)
        }
    };
    ActionEvaluation {
        role,
        candidate_accel: a,
        predicted_gap: safety.predicted_gap,
        predicted_ttc: safety.predicted_ttc,
        predicted_headway: safety.predicted_headway,
        risk1: safety.risk1,
        risk_d2e,
        mobility,
        total_cost,
    }
}

pub fn evaluate_player(ego: &Player, competitor: &Player, d_end: f64, ctx: &GameContext) -> PlayerCosts {
    PlayerCosts {
        lead: action_cost(ego, competitor, Role::Leader, d_end, ctx),
        follow: action_cost(ego, competitor, Role::Follower, d_end, ctx),
    }
}

/// CAV against a legacy vehicle: the cheaper of the ego's own two actions.
/// An exact tie resolves to Follower.
pub fn solve_noncooperative(cost_lead: f64, cost_follow: f64) -> Role {
    if cost_lead < cost_follow {
        Role::Leader
    } else {
        Role::Follower
    }
}

fn complement(role: Role) -> Role {
    match role {
        Role::Leader => Role::Follower,
        Role::Follower => Role::Leader,
        Role::Unassigned => Role::Unassigned,
    }
}

/// Two CAVs: the feasible cell of the joint cost table with the smaller sum.
///
/// Returns `(ego_role, competitor_role)`. An exact tie makes the ramp player
/// the follower, so both CAVs reach the same answer whichever one evaluates.
pub fn solve_cooperative(
    ego_lead: f64,
    ego_follow: f64,
    comp_lead: f64,
    comp_follow: f64,
    ego_side: Side,
) -> (Role, Role) {
    let ego_leads = ego_lead + comp_follow;
    let ego_follows = ego_follow + comp_lead;
    let ego_role = if ego_leads < ego_follows {
        Role::Leader
    } else if ego_follows < ego_leads {
        Role::Follower
    } else if ego_side == Side::Ramp {
        Role::Follower
    } else {
        Role::Leader
    };
    (ego_role, complement(ego_role))
}

/// Full joint cost table with the forbidden diagonal, indexed
/// `[ego_role][competitor_role]` with 0 = Leader, 1 = Follower.
pub fn cooperative_table(ego: &PlayerCosts, comp: &PlayerCosts, infinity: f64) -> [[f64; 2]; 2] {
    [
        [infinity, ego.lead.total_cost + comp.follow.total_cost],
        [ego.follow.total_cost + comp.lead.total_cost, infinity],
    ]
}

fn outcome(ego: &Player, comp: &Player, ego_role: Role, kind: GameKind) -> GameOutcome {
    let comp_role = complement(ego_role);
    let target = |role: Role, other: VehicleId| (role == Role::Follower).then_some(other);
    GameOutcome {
        ego_id: ego.id,
        competitor_id: comp.id,
        ego_role,
        competitor_role: comp_role,
        ego_target_id: target(ego_role, comp.id),
        competitor_target_id: target(comp_role, ego.id),
        solved_as: kind,
    }
}

/// Plays one game. In the non-cooperative game `ego` must be the CAV; in the
/// cooperative game either player may be `ego` and the result is the same
/// role assignment.
pub fn resolve(
    kind: GameKind,
    ego: &Player,
    competitor: &Player,
    d_end: f64,
    ctx: &GameContext,
) -> Option<GameResolution> {
    match kind {
        GameKind::NoGame => None,
        GameKind::NonCooperative => {
            let costs = evaluate_player(ego, competitor, d_end, ctx);
            let role = solve_noncooperative(costs.lead.total_cost, costs.follow.total_cost);
            Some(GameResolution {
                outcome: outcome(ego, competitor, role, kind),
                ego_costs: costs,
                competitor_costs: None,
            })
        }
        GameKind::Cooperative => {
            let mine = evaluate_player(ego, competitor, d_end, ctx);
            let theirs = evaluate_player(competitor, ego, d_end, ctx);
            let (role, _) = solve_cooperative(
                mine.lead.total_cost,
                mine.follow.total_cost,
                theirs.lead.total_cost,
                theirs.follow.total_cost,
                ego.side,
            );
            Some(GameResolution {
                outcome: outcome(ego, competitor, role, kind),
                ego_costs: mine,
                competitor_costs: Some(theirs),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const T_H: f64 = 3.0;

    fn params() -> (ControllerParams, GameParams) {
        (ControllerParams::default(), GameParams::default())
    }

    fn player(id: VehicleId, side: Side, position: f64, speed: f64) -> Player {
        Player {
            id,
            side,
            state: PlayerState {
                position,
                speed,
                accel: 0.0,
                length: 5.0,
            },
            desired_speed: 20.0,
            predecessor: None,
        }
    }

    #[test]
    fn ttc_examples() {
        // gap' = 52.5 + (15 - 20) * 0.5 = 50; closing 5 m/s.
        assert_eq!(predicted_ttc(52.5, 20.0, 15.0, 0.0, 0.0, 0.5, false), Some(10.0));
        assert_eq!(predicted_ttc(10.0, 15.0, 15.0, 0.0, 0.0, 0.5, false), None);
        assert_eq!(predicted_ttc(10.0, 14.0, 15.0, 0.0, 0.0, 0.5, false), None);
        // Contact: gap' = 0.
        assert_eq!(predicted_ttc(2.5, 20.0, 15.0, 0.0, 0.0, 0.5, false), Some(0.0));
        // Accelerations change both the gap and the closing speed.
        let ttc = predicted_ttc(40.0, 18.0, 16.0, 2.0, -1.0, 0.5, false).unwrap();
        let gap = 40.0 + (16.0 - 18.0) * 0.5 + 0.5 * (-1.0 - 2.0) * 0.25;
        assert!((ttc - gap / (19.0 - 15.5)).abs() < 1e-12);
    }

    #[test]
    fn literal_sign_changes_denominator() {
        // (v_f + a_f dt) - (v_p - a_p dt) = 18 - (16 - 1) = 3 vs 18 - 17 = 1
        let gap = 20.0;
        let sym = predicted_ttc(gap, 18.0, 15.0, 0.0, 4.0, 0.5, false).unwrap();
        let lit = predicted_ttc(gap, 18.0, 15.0, 0.0, 4.0, 0.5, true).unwrap();
        let gp = gap + (15.0 - 18.0) * 0.5 + 0.5 * 4.0 * 0.25;
        assert!((sym - gp / 1.0).abs() < 1e-12);
        assert!((lit - gp / 5.0).abs() < 1e-12);
    }

    #[test]
    fn risk_anchors() {
        let r = risk_from_predictions(Some(10.0), 2.5, T_H);
        assert!((r - 0.160_230).abs() < 1e-4, "{r}");
        let r = risk_from_predictions(None, 3.0, T_H);
        assert!((r - 0.119_203).abs() < 1e-4, "{r}");
        assert!(risk_from_predictions(Some(1e6), 1e6, T_H) < 1e-12);
        assert!(risk_from_predictions(None, 1e6, T_H) < 1e-12);
    }

    #[test]
    fn distance_risk_examples() {
        let r = distance_risk(89.0, 15.0, T_H);
        assert!((r - 0.018_80).abs() < 1e-4, "{r}");
        assert_eq!(distance_risk(0.0, 15.0, T_H), 0.5);
        assert!(distance_risk(1e9, 15.0, T_H) < 1e-12);
    }

    #[test]
    fn mobility_examples() {
        assert_eq!(mobility_cost(0.0, 10.0), 0.5);
        assert!((mobility_cost(-2.0, 10.0) - 0.598_688).abs() < 1e-5);
        assert!((mobility_cost(2.0, 10.0) - 0.401_312).abs() < 1e-5);
    }

    #[test]
    fn total_cost_composition() {
        // Mainline: risk1 + mobility; ramp: (risk1 + d2e) / 2 + mobility.
        assert!((0.16023 + 0.5 - 0.66023_f64).abs() < 1e-12);
        assert!(((0.11920 + 0.01880) / 2.0 + 0.40131 - 0.47031_f64).abs() < 1e-12);
        // Far apart, steady at desired speed: no risk, a = 0, mobility 0.5.
        let (c, g) = params();
        let ctx = GameContext { controller: &c, bounds: AccelBounds::default(), params: &g };
        let ego = player(1, Side::Mainline, 0.0, 20.0);
        let comp = player(2, Side::Ramp, -1e7, 20.0);
        let e = action_cost(&ego, &comp, Role::Leader, 1e9, &ctx);
        assert!(e.risk1 < 1e-12);
        assert!((e.total_cost - 0.5).abs() < 1e-12);
    }

    #[test]
    fn candidate_accel_examples() {
        let (c, g) = params();
        let ctx = GameContext { controller: &c, bounds: AccelBounds::default(), params: &g };
        let ego = player(1, Side::Ramp, 0.0, 20.0);
        // Leader on an empty road at desired speed.
        let comp = player(2, Side::Mainline, -40.0, 20.0);
        assert_eq!(candidate_accel(&ego, &comp, Role::Leader, &ctx), 0.0);
        // Follower at consensus equilibrium behind the competitor.
        let comp = player(2, Side::Mainline, 25.0, 20.0);
        assert!(candidate_accel(&ego, &comp, Role::Follower, &ctx).abs() < 1e-12);
        // Spacing error -5 m and speed error +2 m/s.
        let comp = player(2, Side::Mainline, 30.0, 18.0);
        assert!((candidate_accel(&ego, &comp, Role::Follower, &ctx) - 0.6).abs() < 1e-12);
        // Leader with a predecessor ahead of the competitor tracks that vehicle.
        let mut comp = player(2, Side::Mainline, -10.0, 20.0);
        comp.predecessor = Some(Kinematics { position: 30.0, speed: 18.0, length: 5.0 });
        assert!((candidate_accel(&ego, &comp, Role::Leader, &ctx) - 0.6).abs() < 1e-12);
    }

    #[test]
    fn noncooperative_examples() {
        assert_eq!(solve_noncooperative(0.3, 0.6), Role::Leader);
        assert_eq!(solve_noncooperative(0.6, 0.3), Role::Follower);
        assert_eq!(solve_noncooperative(0.5, 0.5), Role::Follower);
        let lead = 0.16023 + 0.5;
        let follow = (0.11920 + 0.01880) / 2.0 + 0.40131;
        let brute = if lead < follow { Role::Leader } else { Role::Follower };
        assert_eq!(solve_noncooperative(lead, follow), brute);
    }

    #[test]
    fn cooperative_examples() {
        assert_eq!(
            solve_cooperative(0.3, 0.4, 0.4, 0.2, Side::Mainline),
            (Role::Leader, Role::Follower)
        );
        assert_eq!(
            solve_cooperative(0.7, 0.7, 0.7, 0.7, Side::Ramp),
            (Role::Follower, Role::Leader)
        );
        assert_eq!(
            solve_cooperative(0.7, 0.7, 0.7, 0.7, Side::Mainline),
            (Role::Leader, Role::Follower)
        );
    }

    #[test]
    fn cooperative_is_symmetric_between_evaluators() {
        let (c, g) = params();
        let ctx = GameContext { controller: &c, bounds: AccelBounds::default(), params: &g };
        let ramp = player(1, Side::Ramp, -60.0, 15.0);
        let main = player(2, Side::Mainline, -75.0, 20.0);
        let a = resolve(GameKind::Cooperative, &ramp, &main, 149.0, &ctx).unwrap().outcome;
        let b = resolve(GameKind::Cooperative, &main, &ramp, 149.0, &ctx).unwrap().outcome;
        assert_eq!(a.ego_role, b.competitor_role);
        assert_eq!(a.competitor_role, b.ego_role);
        assert_eq!(a.ego_target_id, b.competitor_target_id);
    }

    #[test]
    fn safety_orientation() {
        // Ego ahead: risk is measured on the competitor closing on the ego.
        let ego = PlayerState { position: 30.0, speed: 15.0, accel: 0.0, length: 5.0 };
        let comp = PlayerState { position: 0.0, speed: 20.0, accel: 0.0, length: 5.0 };
        let s = safety_risk(&ego, &comp, 0.5, T_H, false);
        let gap = 30.0 - 5.0 - 0.0 + (15.0 - 20.0) * 0.5;
        assert!((s.predicted_gap - gap).abs() < 1e-12);
        assert!((s.predicted_ttc.unwrap() - gap / 5.0).abs() < 1e-12);
        assert!((s.predicted_headway - gap / 20.0).abs() < 1e-12);
        // Swapping the players swaps only who is ahead, not the geometry.
        let t = safety_risk(&comp, &ego, 0.5, T_H, false);
        assert_eq!(s.predicted_gap, t.predicted_gap);
        assert_eq!(s.predicted_ttc, t.predicted_ttc);
    }

    proptest! {
        #[test]
        fn terms_are_bounded(
            pe in -200.0f64..50.0, pc in -200.0f64..50.0,
            ve in 0.0f64..30.0, vc in 0.0f64..30.0,
            ac in -5.0f64..3.0,
            d_end in 0.0f64..400.0,
            ramp_ego in any::<bool>(),
        ) {
            let (c, g) = params();
            let ctx = GameContext { controller: &c, bounds: AccelBounds::default(), params: &g };
            let (es, cs) = if ramp_ego { (Side::Ramp, Side::Mainline) } else { (Side::Mainline, Side::Ramp) };
            let ego = player(1, es, pe, ve);
            let mut comp = player(2, cs, pc, vc);
            comp.state.accel = ac;
            for role in [Role::Leader, Role::Follower] {
                let e = action_cost(&ego, &comp, role, d_end, &ctx);
                prop_assert!((0.0..=1.0).contains(&e.risk1));
                prop_assert!((0.0..=1.0).contains(&e.risk_d2e));
                prop_assert!((0.0..=1.0).contains(&e.mobility));
                prop_assert!((0.0..=2.0).contains(&e.total_cost));
            }
        }

        #[test]
        fn distance_risk_decreases_with_distance(d in 0.0f64..500.0, extra in 0.01f64..100.0, v in 0.5f64..30.0) {
            prop_assert!(distance_risk(d + extra, v, T_H) < distance_risk(d, v, T_H) || distance_risk(d, v, T_H) < 1e-15);
        }

        #[test]
        fn mobility_decreases_with_dv(dv in -10.0f64..10.0, extra in 0.01f64..5.0, v in 1.0f64..30.0) {
            prop_assert!(mobility_cost(dv + extra, v) < mobility_cost(dv, v));
        }

        #[test]
        fn ttc_guard(gap in 0.0f64..100.0, vf in 0.0f64..30.0, vp in 0.0f64..30.0,
                     af in -5.0f64..3.0, ap in -5.0f64..3.0) {
            let closing = (vf + af * 0.5).max(0.0) > (vp + ap * 0.5).max(0.0);
            prop_assert_eq!(predicted_ttc(gap, vf, vp, af, ap, 0.5, false).is_some(), closing);
        }

        #[test]
        fn argmin_invariant_under_shift(a in 0.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..2.0,
                                        d in 0.0f64..2.0, k in -1.0f64..1.0) {
            // Shifts by exactly representable amounts keep comparisons exact.
            let k = (k * 64.0).round() / 64.0;
            let q = |x: f64| (x * 1024.0).round() / 1024.0;
            let (a, b, c, d) = (q(a), q(b), q(c), q(d));
            prop_assert_eq!(solve_noncooperative(a, b), solve_noncooperative(a + k, b + k));
            prop_assert_eq!(
                solve_cooperative(a, b, c, d, Side::Ramp),
                solve_cooperative(a + k, b + k, c, d, Side::Ramp)
            );
        }

        #[test]
        fn solvers_pick_a_feasible_cell(a in 0.0f64..2.0, b in 0.0f64..2.0, c in 0.0f64..2.0, d in 0.0f64..2.0) {
            let (e, o) = solve_cooperative(a, b, c, d, Side::Mainline);
            prop_assert!(e != o);
            prop_assert!(e != Role::Unassigned && o != Role::Unassigned);
        }
    }
}
