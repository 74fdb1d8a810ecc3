#![allow(dead_code)]

use truck_tactics::env::StepSummary;
use truck_tactics::sim::EventFlags;

// Default prices and vehicle constants, written out independently of the crate.
pub const MASS: f64 = 40000.0;
pub const CD: f64 = 0.36;
pub const AF: f64 = 10.0;
pub const RHO: f64 = 1.225;
pub const G: f64 = 9.81;
pub const CR: f64 = 0.005;
pub const C_EL: f64 = 0.5;
pub const C_DR: f64 = 50.0;
pub const R_TAR: f64 = 2.78;

pub fn summary(v_start: f64, v_t: f64, dt: f64, distance: f64, events: EventFlags, total_time: Option<f64>) -> StepSummary {
    StepSummary {
        v_start,
        v_t,
        mean_v: distance / dt,
        mean_a: (v_t - v_start) / dt,
        dt,
        distance,
        events,
        total_time,
    }
}

pub fn flags(c: bool, nc: bool, o: bool, tar: bool, lc: bool) -> EventFlags {
    EventFlags {
        collision: c,
        near_collision: nc,
        off_road: o,
        target_reached: tar,
        lane_change_started: lc,
    }
}

/// Twenty step summaries covering idle, cruising, acceleration, braking,
/// lane changes, hazards and target completion.
pub fn reward_fixture() -> Vec<(&'static str, StepSummary)> {
    let none = flags(false, false, false, false, false);
    vec![
        ("idle at rest", summary(0.0, 0.0, 1.0, 0.0, none, None)),
        ("cruise 22", summary(22.0, 22.0, 1.0, 22.0, none, None)),
        ("cruise 25", summary(25.0, 25.0, 1.0, 25.0, none, None)),
        ("accelerate from rest", summary(0.0, 1.0, 1.0, 0.5, none, None)),
        ("accelerate 20 to 21", summary(20.0, 21.0, 1.0, 20.5, none, None)),
        ("brake hard", summary(20.0, 16.0, 1.0, 18.0, none, None)),
        ("gentle brake", summary(22.0, 21.8, 1.0, 21.9, none, None)),
        ("crawl", summary(2.0, 2.0, 1.0, 2.0, none, None)),
        ("lane change 4 s", summary(20.0, 21.0, 4.0, 82.0, flags(false, false, false, false, true), None)),
        ("lane change at rest", summary(0.0, 0.0, 4.0, 0.0, flags(false, false, false, false, true), None)),
        ("collision", summary(18.0, 17.0, 0.3, 5.3, flags(true, false, false, false, false), None)),
        ("near collision", summary(24.0, 23.0, 1.0, 23.5, flags(false, true, false, false, false), None)),
        ("collision and near collision", summary(24.0, 24.0, 0.5, 12.0, flags(true, true, false, false, false), None)),
        ("off road during lane change", summary(21.0, 21.0, 2.2, 46.2, flags(false, false, true, false, true), None)),
        ("target", summary(23.0, 23.0, 0.6, 13.8, flags(false, false, false, true, false), Some(101.6))),
        ("target after long trip", summary(10.0, 10.5, 1.0, 10.25, flags(false, false, false, true, false), Some(250.0))),
        ("target during lane change", summary(22.0, 22.5, 2.0, 44.5, flags(false, false, false, true, true), Some(120.0))),
        ("near collision at target", summary(25.0, 24.0, 0.4, 9.8, flags(false, true, false, true, false), Some(98.4))),
        ("partial substep", summary(15.0, 15.0, 0.1, 1.5, none, None)),
        ("coasting decel", summary(25.0, 24.9, 1.0, 24.95, none, None)),
    ]
}

pub fn oracle_energy_kwh(s: &StepSummary) -> f64 {
    let v = s.mean_v;
    let f = MASS * s.mean_a + 0.5 * CD * AF * RHO * v * v + MASS * G * CR;
    (f * v * s.dt).max(0.0) / 3.6e6
}

pub fn oracle_driver(s: &StepSummary) -> f64 {
    C_DR * s.dt / 3600.0
}

fn b(x: bool) -> f64 {
    if x {
        1.0
    } else {
        0.0
    }
}

pub fn oracle_basic(s: &StepSummary) -> f64 {
    let e = &s.events;
    let target = if e.target_reached { 100.0 / s.total_time.unwrap() } else { 0.0 };
    s.v_t / 25.0 - b(e.lane_change_started) - 10.0 * (b(e.collision) + b(e.near_collision) + b(e.off_road)) + target
}

pub fn oracle_tcop(s: &StepSummary, w_tar: f64) -> f64 {
    let e = &s.events;
    -C_EL * oracle_energy_kwh(s) - oracle_driver(s) - 0.1 * b(e.lane_change_started)
        - 1000.0 * (b(e.collision) + b(e.near_collision) + b(e.off_road))
        + w_tar * R_TAR * b(e.target_reached)
}

pub fn oracle_tcop_plain(s: &StepSummary) -> f64 {
    let e = &s.events;
    -C_EL * oracle_energy_kwh(s) - oracle_driver(s) - 1000.0 * (b(e.collision) + b(e.near_collision) + b(e.off_road))
        + R_TAR * b(e.target_reached)
}

pub fn oracle_curriculum(stage: u8, normalized: bool, s: &StepSummary) -> f64 {
    let e = &s.events;
    let per = if normalized { s.distance.max(0.1) } else { 1.0 };
    let mut r = -1000.0 * (b(e.collision) + b(e.near_collision) + b(e.off_road)) - oracle_driver(s) / per;
    if stage >= 2 {
        r -= C_EL * oracle_energy_kwh(s) / per;
    }
    if stage >= 3 {
        r += R_TAR * b(e.target_reached);
    }
    r
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, var.sqrt())
}
