use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Sign of the lateral axis: left is toward higher lane indices.
    pub fn sign(self) -> f64 {
        match self {
            Side::Left => 1.0,
            Side::Right => -1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// An in-progress lateral manoeuvre at constant lateral speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneChangePlan {
    pub direction: Side,
    pub substeps_total: u32,
    pub substeps_done: u32,
    /// Magnitude of the lateral speed, m/s.
    pub lateral_rate: f64,
}

impl LaneChangePlan {
    pub fn new(direction: Side, substeps_total: u32, lateral_rate: f64) -> Self {
        Self {
            direction,
            substeps_total,
            substeps_done: 0,
            lateral_rate,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.substeps_done >= self.substeps_total
    }

    /// Signed lateral rate for the next substep, or `None` once complete.
    pub fn advance(&mut self) -> Option<f64> {
        if self.is_complete() {
            return None;
        }
        self.substeps_done += 1;
        Some(self.direction.sign() * self.lateral_rate)
    }

    /// Plan that undoes the displacement accumulated so far.
    pub fn reversed(&self) -> Self {
        Self {
            direction: self.direction.opposite(),
            substeps_total: self.substeps_done,
            substeps_done: 0,
            lateral_rate: self.lateral_rate,
        }
    }

    pub fn displacement(&self, dt: f64) -> f64 {
        self.direction.sign() * self.lateral_rate * dt * self.substeps_total as f64
    }
}

/// The full lateral-rate sequence of a fresh plan.
pub fn execute_lane_change(plan: LaneChangePlan) -> Vec<f64> {
    let mut plan = plan;
    std::iter::from_fn(|| plan.advance()).collect()
}
