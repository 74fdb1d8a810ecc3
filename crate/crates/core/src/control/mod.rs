//! Low-level controllers: IDM-based adaptive cruise control, the lateral
//! lane-change executor, and direct speed actuation for the baseline
//! architecture.

mod idm;
mod lateral;

pub use idm::{desired_gap, idm_accel, IdmParams};
pub use lateral::{execute_lane_change, LaneChangePlan, Side};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The `controller` section of a run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerConfig {
    pub s0: f64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    /// Actuation limit for braking, m/s² (positive number).
    pub max_decel: f64,
    /// Output for overlapping vehicles, m/s² (positive number).
    pub emergency_decel: f64,
    pub initial_desired_speed: f64,
    pub initial_time_gap: f64,
    pub lateral_rate: f64,
    pub lane_change_substeps: u32,
    /// Refuse lane changes that the traffic safety rule would refuse; a
    /// refused request becomes an ordinary one-second ACC step.
    pub check_lane_change_safety: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            s0: 2.0,
            a: 1.0,
            b: 2.0,
            delta: 4.0,
            max_decel: 4.0,
            emergency_decel: 4.0,
            initial_desired_speed: 25.0,
            initial_time_gap: 2.0,
            lateral_rate: 0.8,
            lane_change_substeps: 40,
            check_lane_change_safety: true,
        }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        for (key, value) in [
            ("controller.a", self.a),
            ("controller.b", self.b),
            ("controller.delta", self.delta),
            ("controller.max_decel", self.max_decel),
            ("controller.emergency_decel", self.emergency_decel),
            ("controller.lateral_rate", self.lateral_rate),
        ] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {value}")));
            }
        }
        if !(self.s0 >= 0.0) {
            return Err(Error::config("controller.s0", "must be non-negative"));
        }
        if self.lane_change_substeps == 0 {
            return Err(Error::config("controller.lane_change_substeps", "must be at least 1"));
        }
        if !TIME_GAPS.contains(&self.initial_time_gap) {
            return Err(Error::config("controller.initial_time_gap", "must be one of 1, 2, 3"));
        }
        Ok(())
    }

    pub fn idm(&self, acc: &AccState) -> IdmParams {
        IdmParams {
            v0: acc.desired_speed,
            s0: self.s0,
            time_gap: acc.time_gap,
            a: self.a,
            b: self.b,
            delta: self.delta,
        }
    }

    pub fn initial_acc_state(&self) -> AccState {
        AccState {
            desired_speed: self.initial_desired_speed,
            time_gap: self.initial_time_gap,
        }
    }

    pub fn plan(&self, direction: Side) -> LaneChangePlan {
        LaneChangePlan::new(direction, self.lane_change_substeps, self.lateral_rate)
    }
}

/// Time gaps selectable by the agent, in seconds.
pub const TIME_GAPS: [f64; 3] = [1.0, 2.0, 3.0];

/// Set-points of the cruise controller, written by the high-level agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccState {
    pub desired_speed: f64,
    pub time_gap: f64,
}

impl AccState {
    pub fn set_time_gap(&mut self, gap: f64) {
        self.time_gap = gap;
    }

    /// Shifts the desired speed, keeping it in `[0, max_speed]`.
    pub fn adjust_speed(&mut self, delta: f64, max_speed: f64) {
        self.desired_speed = (self.desired_speed + delta).clamp(0.0, max_speed);
    }
}

/// Nearest leader as seen by the cruise controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadInfo {
    /// Net bumper-to-bumper gap, m.
    pub gap: f64,
    pub v: f64,
}

/// Cruise-control acceleration for one substep, clamped to the actuator range
/// `[-max_decel, a]`.
pub fn acc_track(v: f64, acc: &AccState, lead: Option<LeadInfo>, cfg: &ControllerConfig) -> Result<f64> {
    let params = cfg.idm(acc);
    let raw = match lead {
        Some(l) => idm_accel(v, v - l.v, l.gap, &params, cfg.emergency_decel)?,
        None => idm_accel(v, 0.0, f64::INFINITY, &params, cfg.emergency_decel)?,
    };
    Ok(raw.clamp(-cfg.max_decel, cfg.a))
}

/// Per-substep accelerations realising a baseline speed change of
/// `speed_delta` over one second, with the speed kept in `[0, max_speed]`.
pub fn baseline_actuate(speed_delta: f64, v: f64, dt: f64, substeps: u32, max_speed: f64) -> Vec<f64> {
    let window = dt * substeps as f64;
    let nominal = speed_delta / window;
    let mut v = v;
    (0..substeps)
        .map(|_| {
            let a = nominal.clamp(-v / dt, (max_speed - v) / dt);
            v = (v + a * dt).clamp(0.0, max_speed);
            a
        })
        .collect()
}
