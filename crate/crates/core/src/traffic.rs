//! Rule-based behaviour of the surrounding passenger cars: Krauss safe-speed
//! car following and an incentive/safety lane-change rule.
//!
//! Everything here is a pure function of the snapshot it is given.

use serde::{Deserialize, Serialize};

use crate::control::{idm_accel, IdmParams, Side};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KraussParams {
    /// Maximum acceleration, m/s².
    pub accel: f64,
    /// Comfortable deceleration, m/s².
    pub decel: f64,
    /// Driver reaction time, s.
    pub tau: f64,
    /// Driver imperfection in `[0, 1]`.
    pub sigma: f64,
}

impl Default for KraussParams {
    fn default() -> Self {
        Self {
            accel: 2.6,
            decel: 4.5,
            tau: 1.0,
            sigma: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaneChangeParams {
    /// Weight on the acceleration gains of the two affected followers.
    pub politeness: f64,
    /// Minimum net acceleration gain, m/s².
    pub advantage_threshold: f64,
    /// Largest deceleration a change may impose on the new follower, m/s².
    pub safe_decel_limit: f64,
    /// Standstill spacing of the car-following law used to score lane changes.
    pub assess_s0: f64,
    /// Free-road speed assumed for followers whose desired speed is unknown.
    pub assess_follower_v0: f64,
}

impl Default for LaneChangeParams {
    fn default() -> Self {
        Self {
            politeness: 0.0,
            advantage_threshold: 0.2,
            safe_decel_limit: 4.0,
            assess_s0: 2.0,
            assess_follower_v0: 35.0,
        }
    }
}

/// The `traffic` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub krauss: KraussParams,
    pub lane_change: LaneChangeParams,
    /// How often each car reconsiders its lane, in substeps.
    pub decision_period: u32,
    /// Indicator time before a car's lane change executes, in substeps.
    pub signal_substeps: u32,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            krauss: KraussParams::default(),
            lane_change: LaneChangeParams::default(),
            decision_period: 10,
            signal_substeps: 10,
        }
    }
}

impl TrafficConfig {
    pub fn validate(&self) -> Result<()> {
        let k = &self.krauss;
        if !(k.accel > 0.0 && k.decel > 0.0 && k.tau >= 0.0) {
            return Err(Error::config("traffic.krauss", "accel, decel must be > 0 and tau >= 0"));
        }
        if !(0.0..=1.0).contains(&k.sigma) {
            return Err(Error::config("traffic.krauss.sigma", "must lie in [0, 1]"));
        }
        let l = &self.lane_change;
        if [l.politeness, l.advantage_threshold, l.safe_decel_limit, l.assess_s0]
            .iter()
            .any(|&x| !(x >= 0.0))
        {
            return Err(Error::config("traffic.lane_change", "parameters must be non-negative"));
        }
        if self.decision_period == 0 {
            return Err(Error::config("traffic.decision_period", "must be at least 1"));
        }
        Ok(())
    }
}

/// Krauss safe speed behind a leader at `v_leader` with net gap `gap`.
pub fn krauss_safe_speed(v: f64, v_leader: f64, gap: f64, p: &KraussParams) -> f64 {
    if gap.is_infinite() {
        return f64::INFINITY;
    }
    let gap = gap.max(0.0);
    v_leader + (gap - v_leader * p.tau) / ((v + v_leader) / (2.0 * p.decel) + p.tau)
}

/// Next-substep speed under the Krauss model. `noise` is a uniform draw in
/// `[0, 1)`; pass `f64::INFINITY` as `gap` when there is no leader.
pub fn krauss_next_speed(
    v: f64,
    v_leader: f64,
    gap: f64,
    v_desired: f64,
    p: &KraussParams,
    dt: f64,
    noise: f64,
) -> f64 {
    let v_safe = krauss_safe_speed(v, v_leader, gap, p);
    let v_max = (v + p.accel * dt).min(v_safe).min(v_desired);
    (v_max - p.sigma * p.accel * dt * noise).max(0.0)
}

/// Highest speed from which a Krauss driver can still stop within `gap`.
pub fn krauss_insertion_speed(gap: f64, p: &KraussParams) -> f64 {
    let gap = gap.max(0.0);
    // solves gap = v * tau + v^2 / (2 b)
    p.decel * (-p.tau + (p.tau * p.tau + 2.0 * gap / p.decel).sqrt())
}

/// A neighbour as seen from the deciding vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Net gap between the two vehicles, m.
    pub gap: f64,
    pub v: f64,
}

/// Leader and follower in one lane, relative to the deciding vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaneView {
    pub leader: Option<Neighbor>,
    pub follower: Option<Neighbor>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaneChangeContext {
    pub v: f64,
    pub v_desired: f64,
    pub length: f64,
    pub current: LaneView,
    /// `None` when there is no lane on that side.
    pub left: Option<LaneView>,
    pub right: Option<LaneView>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaneDecision {
    Stay,
    Change(Side),
}

fn assess_params(v0: f64, krauss: &KraussParams, lc: &LaneChangeParams) -> IdmParams {
    IdmParams {
        v0,
        s0: lc.assess_s0,
        time_gap: krauss.tau.max(0.1),
        a: krauss.accel,
        b: krauss.decel,
        delta: 4.0,
    }
}

fn accel_behind(v: f64, leader: Option<Neighbor>, p: &IdmParams) -> f64 {
    let out = match leader {
        Some(l) => idm_accel(v, v - l.v, l.gap, p, f64::INFINITY),
        None => idm_accel(v, 0.0, f64::INFINITY, p, f64::INFINITY),
    };
    // inputs come from a finite snapshot
    out.unwrap_or(f64::NEG_INFINITY)
}

/// Net incentive of moving into `target`, or `None` if the move is unsafe.
fn change_incentive(
    ctx: &LaneChangeContext,
    target: &LaneView,
    krauss: &KraussParams,
    lc: &LaneChangeParams,
) -> Option<f64> {
    let own = assess_params(ctx.v_desired, krauss, lc);
    let other = assess_params(lc.assess_follower_v0, krauss, lc);

    if target.leader.is_some_and(|l| l.gap <= 0.0) || target.follower.is_some_and(|f| f.gap <= 0.0) {
        return None;
    }

    // new follower, before and after
    let (new_follower_gain, new_follower_after) = match target.follower {
        Some(f) => {
            let before_leader = target.leader.map(|l| Neighbor {
                gap: f.gap + ctx.length + l.gap,
                v: l.v,
            });
            let before = accel_behind(f.v, before_leader, &other);
            let after = accel_behind(f.v, Some(Neighbor { gap: f.gap, v: ctx.v }), &other);
            (after - before, after)
        }
        None => (0.0, 0.0),
    };
    if new_follower_after < -lc.safe_decel_limit {
        return None;
    }

    // old follower, before and after
    let old_follower_gain = match ctx.current.follower {
        Some(f) => {
            let before = accel_behind(f.v, Some(Neighbor { gap: f.gap, v: ctx.v }), &other);
            let after_leader = ctx.current.leader.map(|l| Neighbor {
                gap: f.gap + ctx.length + l.gap,
                v: l.v,
            });
            accel_behind(f.v, after_leader, &other) - before
        }
        None => 0.0,
    };

    let own_gain = accel_behind(ctx.v, target.leader, &own) - accel_behind(ctx.v, ctx.current.leader, &own);
    Some(own_gain + lc.politeness * (new_follower_gain + old_follower_gain))
}

/// Whether the vehicle described by `ctx` should change lanes.
///
/// A side qualifies when the new follower would not need to brake harder than
/// `safe_decel_limit` and the politeness-weighted acceleration gain exceeds
/// `advantage_threshold`. Equal incentives prefer the left side; anything not
/// strictly above the threshold stays.
pub fn lane_change_decision(ctx: &LaneChangeContext, krauss: &KraussParams, lc: &LaneChangeParams) -> LaneDecision {
    let score = |view: &Option<LaneView>| {
        view.as_ref()
            .and_then(|v| change_incentive(ctx, v, krauss, lc))
            .filter(|&gain| gain > lc.advantage_threshold)
    };
    match (score(&ctx.left), score(&ctx.right)) {
        (Some(l), Some(r)) if r > l => LaneDecision::Change(Side::Right),
        (Some(_), _) => LaneDecision::Change(Side::Left),
        (None, Some(_)) => LaneDecision::Change(Side::Right),
        (None, None) => LaneDecision::Stay,
    }
}

/// Whether a change into `target` keeps the new follower within the safe
/// deceleration limit (used to re-check a signalled change before executing).
pub fn lane_change_is_safe(ctx: &LaneChangeContext, target: &LaneView, krauss: &KraussParams, lc: &LaneChangeParams) -> bool {
    change_incentive(ctx, target, krauss, lc).is_some()
}
