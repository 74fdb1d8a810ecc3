use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry, population and timing of the highway world.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_lanes: usize,
    pub lane_width: f64,
    /// Cars are spawned uniformly in `[0, road_length]`.
    pub road_length: f64,
    pub ego_start_x: f64,
    pub target_x: f64,
    pub substep_dt: f64,
    pub sensor_range: f64,
    pub max_rl_steps: u32,
    pub n_cars: usize,
    pub car_speed_min: f64,
    pub car_speed_max: f64,
    pub ego_max_speed: f64,
    /// Bound on the commanded ego lateral speed, m/s.
    pub ego_max_lateral_rate: f64,
    pub ego_length: f64,
    pub car_length: f64,
    pub ego_width: f64,
    pub car_width: f64,
    /// Bumper-to-bumper clearance enforced when spawning.
    pub min_initial_gap: f64,
    pub near_collision_gap: f64,
    pub near_collision_ttc: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_lanes: 3,
            lane_width: 3.2,
            road_length: 4000.0,
            ego_start_x: 800.0,
            target_x: 3000.0,
            substep_dt: 0.1,
            sensor_range: 200.0,
            max_rl_steps: 500,
            n_cars: 15,
            car_speed_min: 15.0,
            car_speed_max: 35.0,
            ego_max_speed: 25.0,
            ego_max_lateral_rate: 0.8,
            ego_length: 16.0,
            car_length: 5.0,
            ego_width: 2.55,
            car_width: 1.8,
            min_initial_gap: 10.0,
            near_collision_gap: 2.0,
            near_collision_ttc: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("env.sim.lane_width", self.lane_width),
            ("env.sim.road_length", self.road_length),
            ("env.sim.substep_dt", self.substep_dt),
            ("env.sim.sensor_range", self.sensor_range),
            ("env.sim.ego_max_speed", self.ego_max_speed),
            ("env.sim.ego_length", self.ego_length),
            ("env.sim.car_length", self.car_length),
            ("env.sim.ego_width", self.ego_width),
            ("env.sim.car_width", self.car_width),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be positive, got {value}")));
            }
        }
        if self.n_lanes == 0 {
            return Err(Error::config("env.sim.n_lanes", "at least one lane required"));
        }
        if self.target_x <= self.ego_start_x {
            return Err(Error::config("env.sim.target_x", "target must lie ahead of the start"));
        }
        if !(self.car_speed_min >= 0.0 && self.car_speed_min <= self.car_speed_max) {
            return Err(Error::config("env.sim.car_speed_min", "need 0 <= min <= max"));
        }
        if self.max_rl_steps == 0 {
            return Err(Error::config("env.sim.max_rl_steps", "must be at least 1"));
        }
        if self.near_collision_gap < 0.0 || self.near_collision_ttc < 0.0 || self.min_initial_gap < 0.0 {
            return Err(Error::config("env.sim", "gap and ttc thresholds must be non-negative"));
        }
        Ok(())
    }

    pub fn lane_center(&self, lane: usize) -> f64 {
        lane as f64 * self.lane_width
    }

    /// Lateral band in which the ego center must stay.
    pub fn road_bounds(&self) -> (f64, f64) {
        let half = self.lane_width / 2.0;
        (-half, self.n_lanes as f64 * self.lane_width - half)
    }

    /// Lane whose band contains `y`, clamped to the road.
    pub fn lane_of(&self, y: f64) -> usize {
        let idx = (y / self.lane_width).round();
        idx.clamp(0.0, (self.n_lanes - 1) as f64) as usize
    }
}
