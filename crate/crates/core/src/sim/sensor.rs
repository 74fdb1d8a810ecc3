use serde::{Deserialize, Serialize};

use super::SimState;

/// A surrounding car as reported by the ego's range sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensedVehicle {
    pub id: usize,
    /// Longitudinal offset from the ego, front to front, m.
    pub dx: f64,
    /// Lateral offset from the ego, m.
    pub dy: f64,
    /// Speed relative to the ego, m/s.
    pub dv: f64,
    pub lateral_sign: f64,
    pub lane: usize,
    pub indicator_left: bool,
    pub indicator_right: bool,
}

impl SimState {
    /// Cars within sensor range, nearest (by |dx|) first.
    pub fn sensor_snapshot(&self) -> Vec<SensedVehicle> {
        let ego = self.ego();
        let range = self.config.sensor_range;
        let mut out: Vec<SensedVehicle> = self.vehicles[1..]
            .iter()
            .filter(|c| (c.x - ego.x).abs() <= range)
            .map(|c| SensedVehicle {
                id: c.id,
                dx: c.x - ego.x,
                dy: c.y - ego.y,
                dv: c.v - ego.v,
                lateral_sign: sign(c.lateral_rate),
                lane: c.lane,
                indicator_left: c.indicator_left,
                indicator_right: c.indicator_right,
            })
            .collect();
        out.sort_by(|a, b| a.dx.abs().total_cmp(&b.dx.abs()).then(a.id.cmp(&b.id)));
        out
    }
}

pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
