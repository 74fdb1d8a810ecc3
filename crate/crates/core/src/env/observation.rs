use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::sim::{SensedVehicle, SimState};

/// Vehicle slots in the observation; one per surrounding car.
pub const N_SLOTS: usize = 15;
pub const EGO_FEATURES: usize = 6;
pub const VEHICLE_FEATURES: usize = 7;
pub const OBSERVATION_LEN: usize = EGO_FEATURES + VEHICLE_FEATURES * N_SLOTS;

const SPEED_SCALE: f64 = 25.0;
const REL_SPEED_SCALE: f64 = 35.0;
const RANGE_SCALE: f64 = 200.0;

/// Fixed-length, normalised encoding of the ego and the sensed cars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation(pub Vec<f64>);

impl Deref for Observation {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Encodes the current state.
///
/// Ego block: speed, lateral-motion sign, lane, indicators, and the gap to
/// the same-lane leader (the range when there is none; zero when
/// `include_d_lead` is off). Vehicle blocks follow nearest-first; unused
/// slots read as a car at the edge of range with all other fields zero.
pub fn build_observation(state: &SimState, include_d_lead: bool) -> Observation {
    let cfg = &state.config;
    let ego = state.ego();
    let lane_norm = if cfg.n_lanes > 1 {
        (cfg.n_lanes - 1) as f64
    } else {
        1.0
    };
    let width = cfg.n_lanes as f64 * cfg.lane_width;

    let mut out = Vec::with_capacity(OBSERVATION_LEN);
    let d_lead = state
        .ego_leader()
        .map_or(RANGE_SCALE, |(gap, _)| gap.clamp(0.0, RANGE_SCALE));
    out.extend_from_slice(&[
        unit(ego.v / SPEED_SCALE),
        sign(ego.lateral_rate),
        ego.lane as f64 / lane_norm,
        flag(ego.indicator_left),
        flag(ego.indicator_right),
        if include_d_lead { d_lead / RANGE_SCALE } else { 0.0 },
    ]);

    let sensed = state.sensor_snapshot();
    let mut slot = |c: Option<&SensedVehicle>| match c {
        Some(c) => out.extend_from_slice(&[
            unit(c.dx / RANGE_SCALE),
            unit(c.dy / width),
            unit(c.dv / REL_SPEED_SCALE),
            c.lateral_sign,
            c.lane as f64 / lane_norm,
            flag(c.indicator_left),
            flag(c.indicator_right),
        ]),
        None => out.extend_from_slice(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
    };
    for i in 0..N_SLOTS {
        slot(sensed.get(i));
    }
    debug_assert_eq!(out.len(), OBSERVATION_LEN);
    Observation(out)
}
